#ifndef ASYNCNET_COMPLEX_EMBED_HPP
#define ASYNCNET_COMPLEX_EMBED_HPP

#include <Eigen/Dense>
#include <functional>

namespace asyncnet {

using ComplexVec = Eigen::VectorXcd;

// Real embedding of w in C^M: the 2M real vector [Re(w); Im(w)].
Eigen::VectorXd embed_real(const ComplexVec& w);

// Inverse of embed_real; exact (component-wise copy, no arithmetic).
ComplexVec unembed_real(const Eigen::VectorXd& wbar);

// Conjugate embedding of w: the 2M complex vector [w; conj(w)].
Eigen::VectorXcd embed_conjugate(const ComplexVec& w);

// First half of a conjugate embedding.
ComplexVec unembed_conjugate(const Eigen::VectorXcd& wext);

// The 2M x 2M block matrix [[I, jI], [I, -jI]] linking the two embeddings:
// embed_conjugate(w) = d_matrix(M) * embed_real(w), and D*D = D D* = 2I,
// so the inverse map is D*/2.
Eigen::MatrixXcd d_matrix(Eigen::Index m);

// Maps a real 2M x 2M Hessian to the extended complex Hessian, (1/4) D H D*.
// Rejects input that is not symmetric to 1e-12.
Eigen::MatrixXcd hessian_real_to_extended(const Eigen::MatrixXd& hbar);

// Inverse map, D* H D; the imaginary residual of a valid extended Hessian
// vanishes and is dropped.
Eigen::MatrixXd hessian_extended_to_real(const Eigen::MatrixXcd& hext);

// Converts a real gradient (column, length 2M) into the conjugate extended
// gradient (1/2) D grad. Its first M entries are the complex conjugate
// gradient with respect to w*.
Eigen::VectorXcd conjugate_gradient_from_real(const Eigen::VectorXd& grad);

// Central finite differences per coordinate; O(step^2) truncation error for
// smooth functions. Throws std::domain_error when f returns a non-finite
// value at a probe point.
Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& at, double step = 1e-5);

}  // namespace asyncnet

#endif  // ASYNCNET_COMPLEX_EMBED_HPP
