#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "asyncnet/complex_embed.hpp"
#include "asyncnet/costs.hpp"
#include "asyncnet/rng.hpp"

using namespace asyncnet;

namespace {

const std::complex<double> kJ(0.0, 1.0);

ComplexVec random_complex(Eigen::Index m, RandomStream& rng) {
  ComplexVec w(m);
  for (Eigen::Index i = 0; i < m; ++i) w(i) = rng.complex_gaussian();
  return w;
}

Eigen::MatrixXcd random_hpd(Eigen::Index m, RandomStream& rng) {
  Eigen::MatrixXcd g(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) g(r, c) = rng.complex_gaussian();
  return g * g.adjoint() + 0.5 * Eigen::MatrixXcd::Identity(m, m);
}

QuadraticCost identity_cost(Eigen::Index m, double sigma_n_sq,
                            RandomStream& rng) {
  return QuadraticCost(Eigen::MatrixXcd::Identity(m, m), random_complex(m, rng),
                       sigma_n_sq);
}

}  // namespace

TEST_CASE("construction validates the covariance") {
  const ComplexVec w0 = ComplexVec::Zero(2);
  Eigen::MatrixXcd not_hermitian = Eigen::MatrixXcd::Identity(2, 2);
  not_hermitian(0, 1) = kJ;
  CHECK_THROWS_AS(QuadraticCost(not_hermitian, w0, 0.01), std::invalid_argument);

  Eigen::MatrixXcd indefinite = Eigen::MatrixXcd::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(QuadraticCost(indefinite, w0, 0.01), std::invalid_argument);

  CHECK_THROWS_AS(QuadraticCost(Eigen::MatrixXcd::Identity(3, 3), w0, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(QuadraticCost(Eigen::MatrixXcd::Identity(2, 2), w0, -1.0),
                  std::invalid_argument);
}

TEST_CASE("gradient vanishes only at the minimizer") {
  RandomStream rng(21);
  const QuadraticCost cost = identity_cost(2, 0.01, rng);
  CHECK(cost.gradient(cost.minimizer()).norm() == 0.0);

  ComplexVec offset(2);
  offset << std::complex<double>(1.0, 0.0), kJ;
  const ComplexVec grad = cost.gradient(cost.minimizer() + offset);
  CHECK((grad - offset).cwiseAbs().maxCoeff() < 1e-15);

  ComplexVec wrong_size(3);
  wrong_size.setZero();
  CHECK_THROWS_AS(cost.gradient(wrong_size), std::invalid_argument);
}

TEST_CASE("gradient matches the finite-difference oracle") {
  RandomStream rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    const QuadraticCost cost(random_hpd(m, rng), random_complex(m, rng), 0.01);
    const ComplexVec w = random_complex(m, rng);
    const auto f = [&](const Eigen::VectorXd& xbar) {
      return cost.evaluate(unembed_real(xbar));
    };
    const Eigen::VectorXcd ext =
        conjugate_gradient_from_real(finite_diff_gradient(f, embed_real(w)));
    CHECK((ext.head(m) - cost.gradient(w)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("noise-free data lies exactly on the model") {
  RandomStream rng(23);
  const QuadraticCost cost = identity_cost(3, 0.0, rng);
  for (int i = 0; i < 50; ++i) {
    const DataSample s = cost.sample_data(rng);
    CHECK(std::abs(s.d - (s.u * cost.minimizer())(0)) == 0.0);
  }
}

TEST_CASE("sample moments match the covariance and noise variance") {
  RandomStream rng(24);
  Eigen::MatrixXcd r_u(2, 2);
  r_u << 1.0, std::complex<double>(0.3, 0.2), std::complex<double>(0.3, -0.2), 0.7;
  const double sigma_n_sq = 0.05;
  const QuadraticCost cost(r_u, random_complex(2, rng), sigma_n_sq);

  const std::size_t n = 100000;
  Eigen::MatrixXcd uu_sum = Eigen::MatrixXcd::Zero(2, 2);
  double noise_sum = 0.0, noise_sumsq = 0.0;
  Eigen::MatrixXd uu_sumsq_re = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd uu_sumsq_im = Eigen::MatrixXd::Zero(2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const DataSample s = cost.sample_data(rng);
    const Eigen::MatrixXcd outer = s.u.adjoint() * s.u;  // u* u
    uu_sum += outer;
    uu_sumsq_re += outer.real().cwiseProduct(outer.real());
    uu_sumsq_im += outer.imag().cwiseProduct(outer.imag());
    const double resid = std::norm(s.d - (s.u * cost.minimizer())(0));
    noise_sum += resid;
    noise_sumsq += resid * resid;
  }
  const double count = static_cast<double>(n);
  const Eigen::MatrixXcd uu_mean = uu_sum / count;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double se_re = std::sqrt(
          std::max(0.0, uu_sumsq_re(r, c) / count -
                            uu_mean(r, c).real() * uu_mean(r, c).real()) /
          count);
      const double se_im = std::sqrt(
          std::max(0.0, uu_sumsq_im(r, c) / count -
                            uu_mean(r, c).imag() * uu_mean(r, c).imag()) /
          count);
      CHECK(std::abs(uu_mean(r, c).real() - r_u(r, c).real()) <=
            3.0 * se_re + 1e-12);
      CHECK(std::abs(uu_mean(r, c).imag() - r_u(r, c).imag()) <=
            3.0 * se_im + 1e-12);
    }
  const double noise_mean = noise_sum / count;
  const double noise_se = std::sqrt(
      std::max(0.0, noise_sumsq / count - noise_mean * noise_mean) / count);
  CHECK(std::abs(noise_mean - sigma_n_sq) <= 3.0 * noise_se);
}

TEST_CASE("stochastic gradient is exact at the minimizer with exact data") {
  RandomStream rng(25);
  const QuadraticCost cost = identity_cost(2, 0.0, rng);
  for (int i = 0; i < 20; ++i) {
    const DataSample s = cost.sample_data(rng);
    CHECK(cost.stochastic_gradient(cost.minimizer(), s).norm() == 0.0);
  }
}

TEST_CASE("gradient noise has zero mean and the exact variance at w_opt") {
  RandomStream rng(26);
  const Eigen::Index m = 2;
  const double sigma_n_sq = 0.01;
  const QuadraticCost cost = identity_cost(m, sigma_n_sq, rng);
  const ComplexVec w = cost.minimizer() + 0.5 * random_complex(m, rng);
  const ComplexVec true_grad = cost.gradient(w);

  const std::size_t n = 100000;
  ComplexVec mean_sum = ComplexVec::Zero(m);
  Eigen::VectorXd comp_sumsq = Eigen::VectorXd::Zero(2 * m);
  double at_opt_sum = 0.0, at_opt_sumsq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const DataSample s = cost.sample_data(rng);
    const ComplexVec v = cost.stochastic_gradient(w, s) - true_grad;
    mean_sum += v;
    for (Eigen::Index c = 0; c < m; ++c) {
      comp_sumsq(2 * c) += v(c).real() * v(c).real();
      comp_sumsq(2 * c + 1) += v(c).imag() * v(c).imag();
    }
    const double nv = cost.stochastic_gradient(cost.minimizer(), s).squaredNorm();
    at_opt_sum += nv;
    at_opt_sumsq += nv * nv;
  }
  const double count = static_cast<double>(n);
  for (Eigen::Index c = 0; c < m; ++c) {
    const double se_re = std::sqrt(comp_sumsq(2 * c) / count / count);
    const double se_im = std::sqrt(comp_sumsq(2 * c + 1) / count / count);
    CHECK(std::abs(mean_sum(c).real() / count) <= 3.0 * se_re);
    CHECK(std::abs(mean_sum(c).imag() / count) <= 3.0 * se_im);
  }
  // at w_opt the noise is -u* n, so E||v||^2 = Tr(R_u) sigma_n_sq
  const double expected = m * sigma_n_sq;
  const double at_opt_mean = at_opt_sum / count;
  const double at_opt_se = std::sqrt(
      std::max(0.0, at_opt_sumsq / count - at_opt_mean * at_opt_mean) / count);
  CHECK(std::abs(at_opt_mean - expected) <= 3.0 * at_opt_se);
}

TEST_CASE("hessian bounds are the covariance eigenvalue range") {
  RandomStream rng(27);
  {
    const QuadraticCost cost(Eigen::MatrixXcd::Identity(2, 2),
                             ComplexVec::Zero(2), 0.01);
    const auto [lmin, lmax] = cost.hessian_bounds();
    CHECK(lmin == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lmax == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    Eigen::MatrixXcd r_u = Eigen::MatrixXcd::Zero(2, 2);
    r_u(0, 0) = 0.5;
    r_u(1, 1) = 2.0;
    const QuadraticCost cost(r_u, ComplexVec::Zero(2), 0.01);
    const auto [lmin, lmax] = cost.hessian_bounds();
    CHECK(lmin == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lmax == doctest::Approx(2.0).epsilon(1e-12));
  }
  // random covariance: the extended Hessian blkdiag(R, R^T) pushed through
  // the real<->extended conversion keeps the same eigenvalue range
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index m = 2 + trial % 2;
    const Eigen::MatrixXcd r_u = random_hpd(m, rng);
    const QuadraticCost cost(r_u, ComplexVec::Zero(m), 0.01);
    Eigen::MatrixXcd ext = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
    ext.topLeftCorner(m, m) = r_u;
    ext.bottomRightCorner(m, m) = r_u.transpose();
    const Eigen::MatrixXcd round_trip =
        hessian_real_to_extended(hessian_extended_to_real(ext));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(round_trip);
    const auto [lmin, lmax] = cost.hessian_bounds();
    CHECK(std::abs(es.eigenvalues().minCoeff() - lmin) < 1e-10);
    CHECK(std::abs(es.eigenvalues().maxCoeff() - lmax) < 1e-10);
  }
}

TEST_CASE("global Lipschitz constant formula") {
  CHECK(QuadraticCost(Eigen::MatrixXcd::Identity(2, 2), ComplexVec::Zero(2), 0.01)
            .lipschitz_constant() == 0.0);
  CHECK(global_lipschitz_constant(0.1, 1.0, 2.0, 1.0) ==
        doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-12));
  CHECK(global_lipschitz_constant(2.0, 1.0, 2.0, 1.0) == 2.0);
  CHECK_THROWS_AS(global_lipschitz_constant(0.1, 1.0, 2.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("noise fit recovers the exact variance floor and a sound alpha") {
  RandomStream rng(28);
  const Eigen::Index m = 2;
  const double sigma_n_sq = 0.01;
  const QuadraticCost cost(Eigen::MatrixXcd::Identity(m, m),
                           random_complex(m, rng), sigma_n_sq);
  const NoiseParams fit = fit_noise_params(cost, 20000, 1.0, rng);
  CHECK(fit.sigma_v_sq == doctest::Approx(m * sigma_n_sq).epsilon(1e-12));
  // Wick/Isserlis: E[(u*u - R) A (u*u - R)] = R Tr(AR), so the true slope for
  // R = I is exactly M; the envelope fit must land in [0.8 M, 1.3 M].
  CHECK(fit.alpha >= 0.8 * m);
  CHECK(fit.alpha <= 1.3 * m);
  // fourth-order floor: E||u||^4 E|n|^4 = ((Tr R)^2 + Tr(R^2)) 2 sigma_n^4
  const double expected_v4 = sigma_n_sq * std::sqrt(2.0 * (m * m + m));
  CHECK(fit.sigma_v4_sq == doctest::Approx(expected_v4).epsilon(1e-12));
  CHECK(fit.alpha4 >= 0.0);

  CHECK_THROWS_AS(fit_noise_params(cost, 100, 1.0, rng), std::invalid_argument);
}

TEST_CASE("degenerate fit radius returns a nonnegative alpha") {
  RandomStream rng(29);
  const QuadraticCost cost = identity_cost(2, 0.0, rng);
  const NoiseParams fit = fit_noise_params(cost, 10000, 0.0, rng);
  CHECK(fit.alpha == 0.0);
  CHECK(fit.sigma_v_sq == 0.0);
}

TEST_CASE("strong convexity holds along random chords") {
  RandomStream rng(30);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    const Eigen::MatrixXcd r_u = random_hpd(m, rng);
    const QuadraticCost cost(r_u, random_complex(m, rng), 0.01);
    const double lmin = cost.hessian_bounds().first;
    const ComplexVec w1 = 3.0 * random_complex(m, rng);
    const ComplexVec w2 = 3.0 * random_complex(m, rng);
    if ((w1 - w2).norm() < 1e-9) continue;
    const double t = rng.uniform();
    const double lhs = cost.evaluate(t * w1 + (1.0 - t) * w2);
    const double rhs = t * cost.evaluate(w1) + (1.0 - t) * cost.evaluate(w2) -
                       0.5 * lmin * t * (1.0 - t) * (w1 - w2).squaredNorm();
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("fitted constants bound the noise moments on a fresh grid") {
  RandomStream rng(31);
  const Eigen::Index m = 2;
  const QuadraticCost cost(Eigen::MatrixXcd::Identity(m, m),
                           random_complex(m, rng), 0.01);
  const NoiseParams fit = fit_noise_params(cost, 20000, 1.0, rng);

  const double sv4_4 = fit.sigma_v4_sq * fit.sigma_v4_sq;
  for (int point = 0; point < 6; ++point) {
    ComplexVec dir = random_complex(m, rng);
    dir /= dir.norm();
    const ComplexVec w = cost.minimizer() + (0.2 + 0.13 * point) * dir;
    const double err_sq = (w - cost.minimizer()).squaredNorm();
    const ComplexVec true_grad = cost.gradient(w);

    const std::size_t n = 100000;
    double sum2 = 0, sumsq2 = 0, sum4 = 0, sumsq4 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const DataSample s = cost.sample_data(rng);
      const double nsq =
          (cost.stochastic_gradient(w, s) - true_grad).squaredNorm();
      const double n4 = nsq * nsq;
      sum2 += nsq;
      sumsq2 += n4;
      sum4 += n4;
      sumsq4 += n4 * n4;
    }
    const double count = static_cast<double>(n);
    const double mean2 = sum2 / count;
    const double se2 =
        std::sqrt(std::max(0.0, sumsq2 / count - mean2 * mean2) / count);
    CHECK(mean2 <= fit.alpha * err_sq + fit.sigma_v_sq + 3.0 * se2);

    const double mean4 = sum4 / count;
    const double se4 =
        std::sqrt(std::max(0.0, sumsq4 / count - mean4 * mean4) / count);
    CHECK(mean4 <=
          fit.alpha4 * fit.alpha4 * err_sq * err_sq + sv4_4 + 3.0 * se4);
  }
}
