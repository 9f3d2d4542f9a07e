#include "asyncnet/costs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace asyncnet {

QuadraticCost::QuadraticCost(Eigen::MatrixXcd r_u, ComplexVec w_opt,
                             double sigma_n_sq)
    : r_u_(std::move(r_u)), w_opt_(std::move(w_opt)), sigma_n_sq_(sigma_n_sq) {
  if (w_opt_.size() < 1) throw std::invalid_argument("minimizer must be non-empty");
  if (r_u_.rows() != r_u_.cols() || r_u_.rows() != w_opt_.size())
    throw std::invalid_argument("regressor covariance dimension mismatch");
  if ((r_u_ - r_u_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("regressor covariance must be Hermitian to 1e-12");
  if (!(sigma_n_sq_ >= 0.0) || !std::isfinite(sigma_n_sq_))
    throw std::invalid_argument("noise variance must be finite and >= 0");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r_u_);
  if (es.info() != Eigen::Success)
    throw std::invalid_argument("eigendecomposition of regressor covariance failed");
  lambda_min_ = es.eigenvalues().minCoeff();
  lambda_max_ = es.eigenvalues().maxCoeff();
  if (!(lambda_min_ > 0.0))
    throw std::invalid_argument("regressor covariance must be positive definite");
  r_sqrt_ = es.operatorSqrt();
}

double QuadraticCost::evaluate(const ComplexVec& w) const {
  if (w.size() != w_opt_.size())
    throw std::invalid_argument("cost argument dimension mismatch");
  const ComplexVec e = w - w_opt_;
  return sigma_n_sq_ + (e.adjoint() * r_u_ * e).real()(0);
}

ComplexVec QuadraticCost::gradient(const ComplexVec& w) const {
  if (w.size() != w_opt_.size())
    throw std::invalid_argument("gradient argument dimension mismatch");
  return r_u_ * (w - w_opt_);
}

DataSample QuadraticCost::sample_data(RandomStream& rng) const {
  const Eigen::Index m = dim();
  ComplexVec g(m);
  for (Eigen::Index i = 0; i < m; ++i) g(i) = rng.complex_gaussian();
  const ComplexVec h = r_sqrt_ * g;  // E[h h*] = R_u
  const std::complex<double> n = std::sqrt(sigma_n_sq_) * rng.complex_gaussian();
  DataSample s;
  s.u = h.adjoint();
  s.d = (s.u * w_opt_)(0) + n;
  return s;
}

ComplexVec QuadraticCost::stochastic_gradient(const ComplexVec& w,
                                              const DataSample& s) const {
  if (w.size() != w_opt_.size() || s.u.size() != w_opt_.size())
    throw std::invalid_argument("stochastic gradient dimension mismatch");
  const std::complex<double> residual = s.d - (s.u * w)(0);
  return -(s.u.adjoint() * residual);
}

double global_lipschitz_constant(double tau, double lambda_min,
                                 double lambda_max, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  return std::max(tau, (lambda_max - lambda_min) / (std::numbers::sqrt2 * delta));
}

namespace {

struct MomentEstimate {
  double m2 = 0.0;
  double m4 = 0.0;
};

// Mean ||v||^2 and ||v||^4 of the gradient noise at a fixed point w.
MomentEstimate noise_moments_at(const QuadraticCost& cost, const ComplexVec& w,
                                std::size_t n_samples, RandomStream& rng) {
  const ComplexVec true_grad = cost.gradient(w);
  double sum2 = 0.0, sum4 = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const DataSample sample = cost.sample_data(rng);
    const double nsq = (cost.stochastic_gradient(w, sample) - true_grad).squaredNorm();
    sum2 += nsq;
    sum4 += nsq * nsq;
  }
  const double n = static_cast<double>(n_samples);
  return {sum2 / n, sum4 / n};
}

}  // namespace

NoiseParams fit_noise_params(const QuadraticCost& cost, std::size_t n_samples,
                             double radius, RandomStream& rng) {
  if (n_samples < 10000)
    throw std::invalid_argument("noise fit requires n_samples >= 1e4");
  if (!(radius >= 0.0)) throw std::invalid_argument("radius must be >= 0");

  NoiseParams params;
  const double trace = cost.regressor_covariance().real().trace();
  params.sigma_v_sq = trace * cost.noise_variance();
  // E||u||^4 = (Tr R)^2 + Tr(R^2) and E|n|^4 = 2 sigma_n^4 for circular
  // Gaussian draws, so the fourth moment at the minimizer is exact.
  const double trace_sq = (cost.regressor_covariance() *
                           cost.regressor_covariance()).real().trace();
  params.sigma_v4_sq = cost.noise_variance() * std::sqrt(2.0 * (trace * trace + trace_sq));

  const Eigen::Index m = cost.dim();
  std::vector<ComplexVec> grid;
  if (radius > 0.0) {
    constexpr int kDirections = 8;
    const double fractions[] = {0.25, 0.5, 0.75, 1.0};
    for (int d = 0; d < kDirections; ++d) {
      ComplexVec dir(m);
      for (Eigen::Index i = 0; i < m; ++i) dir(i) = rng.complex_gaussian();
      dir /= dir.norm();
      for (double f : fractions) grid.push_back(cost.minimizer() + f * radius * dir);
    }
  }

  double slope2 = 0.0, slope4 = 0.0;
  const double sv4_4 = params.sigma_v4_sq * params.sigma_v4_sq;
  for (const ComplexVec& w : grid) {
    const double err_sq = (w - cost.minimizer()).squaredNorm();
    if (err_sq < 1e-20) continue;
    const MomentEstimate est = noise_moments_at(cost, w, n_samples, rng);
    slope2 = std::max(slope2, (est.m2 - params.sigma_v_sq) / err_sq);
    slope4 = std::max(slope4, (est.m4 - sv4_4) / (err_sq * err_sq));
  }
  params.alpha = 1.2 * std::max(slope2, 0.0);
  params.alpha4 = 1.2 * std::sqrt(std::max(slope4, 0.0));
  return params;
}

}  // namespace asyncnet
