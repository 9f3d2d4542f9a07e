#ifndef ASYNCNET_COSTS_HPP
#define ASYNCNET_COSTS_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <utility>

#include "asyncnet/complex_embed.hpp"
#include "asyncnet/rng.hpp"

namespace asyncnet {

// One streaming observation: a row regressor u and the scalar d = u w* + n.
struct DataSample {
  Eigen::RowVectorXcd u;
  std::complex<double> d;
};

// Affine-variance gradient-noise constants: the conditional second moment of
// the gradient noise is bounded by alpha ||w~||^2 + sigma_v_sq, and the
// fourth moment by alpha4^2 ||w~||^4 + sigma_v4_sq^2. The second- and
// fourth-order constants are fitted independently and both recorded.
struct NoiseParams {
  double alpha = 0.0;
  double sigma_v_sq = 0.0;
  double alpha4 = 0.0;
  double sigma_v4_sq = 0.0;
};

// Strongly convex agent cost. Gradients are conjugate gradients with respect
// to w*, and hessian_bounds() refers to the extended (2M x 2M) Hessian.
class Cost {
 public:
  virtual ~Cost() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double evaluate(const ComplexVec& w) const = 0;
  virtual ComplexVec gradient(const ComplexVec& w) const = 0;
  virtual std::pair<double, double> hessian_bounds() const = 0;
  virtual double lipschitz_constant() const = 0;
  virtual const ComplexVec& minimizer() const = 0;
  virtual DataSample sample_data(RandomStream& rng) const = 0;
  virtual ComplexVec stochastic_gradient(const ComplexVec& w,
                                         const DataSample& s) const = 0;
};

// Quadratic MSE cost J(w) = sigma_n_sq + (w - w_opt)* R_u (w - w_opt) with
// circular complex Gaussian regressors of covariance R_u and measurement
// noise of variance sigma_n_sq.
class QuadraticCost final : public Cost {
 public:
  QuadraticCost(Eigen::MatrixXcd r_u, ComplexVec w_opt, double sigma_n_sq);

  Eigen::Index dim() const override { return w_opt_.size(); }
  double evaluate(const ComplexVec& w) const override;
  ComplexVec gradient(const ComplexVec& w) const override;
  std::pair<double, double> hessian_bounds() const override {
    return {lambda_min_, lambda_max_};
  }
  // Constant Hessian, so the global Lipschitz constant is zero.
  double lipschitz_constant() const override { return 0.0; }
  const ComplexVec& minimizer() const override { return w_opt_; }

  // Draws u = (R^{1/2} g)^* with g standard circular Gaussian, then
  // d = u w_opt + n. Consumes M + 1 complex Gaussians per call regardless of
  // sigma_n_sq so that draw accounting does not depend on parameters.
  DataSample sample_data(RandomStream& rng) const override;

  // -u^* (d - u w); its deviation from gradient(w) is the gradient noise.
  ComplexVec stochastic_gradient(const ComplexVec& w,
                                 const DataSample& s) const override;

  const Eigen::MatrixXcd& regressor_covariance() const { return r_u_; }
  double noise_variance() const { return sigma_n_sq_; }
  const Eigen::MatrixXcd& regressor_sqrt() const { return r_sqrt_; }

 private:
  Eigen::MatrixXcd r_u_;
  ComplexVec w_opt_;
  double sigma_n_sq_;
  Eigen::MatrixXcd r_sqrt_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

// Lemma-style global Lipschitz constant max{tau, (lambda_max - lambda_min) /
// (sqrt(2) delta)} for cost families with non-constant Hessians.
double global_lipschitz_constant(double tau, double lambda_min,
                                 double lambda_max, double delta);

// Fits NoiseParams empirically. sigma_v_sq is Tr(R_u) sigma_n_sq (exact at
// the minimizer); alpha is the largest empirical excess-variance slope over a
// grid of points with ||w - w_opt|| <= radius, inflated by 1.2 since the
// model needs an upper bound, not a tight constant. Fourth-order constants
// are derived the same way from fourth-moment estimates. Requires
// n_samples >= 1e4.
NoiseParams fit_noise_params(const QuadraticCost& cost, std::size_t n_samples,
                             double radius, RandomStream& rng);

}  // namespace asyncnet

#endif  // ASYNCNET_COSTS_HPP
