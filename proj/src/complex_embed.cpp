#include "asyncnet/complex_embed.hpp"

#include <cmath>
#include <stdexcept>

namespace asyncnet {

Eigen::VectorXd embed_real(const ComplexVec& w) {
  const Eigen::Index m = w.size();
  Eigen::VectorXd out(2 * m);
  out.head(m) = w.real();
  out.tail(m) = w.imag();
  return out;
}

ComplexVec unembed_real(const Eigen::VectorXd& wbar) {
  if (wbar.size() % 2 != 0)
    throw std::invalid_argument("real embedding must have even length");
  const Eigen::Index m = wbar.size() / 2;
  ComplexVec out(m);
  for (Eigen::Index i = 0; i < m; ++i)
    out(i) = std::complex<double>(wbar(i), wbar(m + i));
  return out;
}

Eigen::VectorXcd embed_conjugate(const ComplexVec& w) {
  const Eigen::Index m = w.size();
  Eigen::VectorXcd out(2 * m);
  out.head(m) = w;
  out.tail(m) = w.conjugate();
  return out;
}

ComplexVec unembed_conjugate(const Eigen::VectorXcd& wext) {
  if (wext.size() % 2 != 0)
    throw std::invalid_argument("conjugate embedding must have even length");
  return wext.head(wext.size() / 2);
}

Eigen::MatrixXcd d_matrix(Eigen::Index m) {
  if (m < 1) throw std::invalid_argument("d_matrix requires M >= 1");
  const std::complex<double> j(0.0, 1.0);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    d(i, i) = 1.0;
    d(i, m + i) = j;
    d(m + i, i) = 1.0;
    d(m + i, m + i) = -j;
  }
  return d;
}

Eigen::MatrixXcd hessian_real_to_extended(const Eigen::MatrixXd& hbar) {
  if (hbar.rows() != hbar.cols() || hbar.rows() % 2 != 0)
    throw std::invalid_argument("real Hessian must be square with even size");
  if ((hbar - hbar.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("real Hessian must be symmetric to 1e-12");
  const Eigen::MatrixXcd d = d_matrix(hbar.rows() / 2);
  return 0.25 * d * hbar * d.adjoint();
}

Eigen::MatrixXd hessian_extended_to_real(const Eigen::MatrixXcd& hext) {
  if (hext.rows() != hext.cols() || hext.rows() % 2 != 0)
    throw std::invalid_argument("extended Hessian must be square with even size");
  const Eigen::MatrixXcd d = d_matrix(hext.rows() / 2);
  return (d.adjoint() * hext * d).real();
}

Eigen::VectorXcd conjugate_gradient_from_real(const Eigen::VectorXd& grad) {
  if (grad.size() % 2 != 0)
    throw std::invalid_argument("real gradient must have even length");
  const Eigen::Index m = grad.size() / 2;
  const std::complex<double> j(0.0, 1.0);
  Eigen::VectorXcd out(2 * m);
  // (1/2) D grad without materializing D.
  for (Eigen::Index i = 0; i < m; ++i) {
    out(i) = 0.5 * (grad(i) + j * grad(m + i));
    out(m + i) = 0.5 * (grad(i) - j * grad(m + i));
  }
  return out;
}

Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& at, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be > 0");
  Eigen::VectorXd grad(at.size());
  Eigen::VectorXd probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    probe(i) = at(i) + step;
    const double fp = f(probe);
    probe(i) = at(i) - step;
    const double fm = f(probe);
    probe(i) = at(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::domain_error("non-finite function value in finite difference");
    grad(i) = (fp - fm) / (2.0 * step);
  }
  return grad;
}

}  // namespace asyncnet
