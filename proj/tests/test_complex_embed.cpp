#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

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

Eigen::MatrixXd random_symmetric(Eigen::Index size, RandomStream& rng) {
  Eigen::MatrixXd a(size, size);
  for (Eigen::Index r = 0; r < size; ++r)
    for (Eigen::Index c = 0; c < size; ++c) a(r, c) = rng.gaussian();
  return 0.5 * (a + a.transpose()).eval();
}

}  // namespace

TEST_CASE("real embedding stacks real over imaginary parts") {
  ComplexVec w(1);
  w << std::complex<double>(1.0, 2.0);
  const Eigen::VectorXd wbar = embed_real(w);
  REQUIRE(wbar.size() == 2);
  CHECK(wbar(0) == 1.0);
  CHECK(wbar(1) == 2.0);

  const Eigen::VectorXd zeros = embed_real(ComplexVec::Zero(2));
  CHECK(zeros.isZero(0.0));
  CHECK(zeros.size() == 4);

  ComplexVec w2(2);
  w2 << std::complex<double>(3.0, -1.0), kJ;
  const Eigen::VectorXd w2bar = embed_real(w2);
  CHECK(w2bar(0) == 3.0);
  CHECK(w2bar(1) == 0.0);
  CHECK(w2bar(2) == -1.0);
  CHECK(w2bar(3) == 1.0);
}

TEST_CASE("real embedding round trip is bit identical") {
  RandomStream rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexVec w = random_complex(1 + trial % 7, rng);
    const ComplexVec back = unembed_real(embed_real(w));
    REQUIRE(back.size() == w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      CHECK(back(i).real() == w(i).real());
      CHECK(back(i).imag() == w(i).imag());
    }
  }
}

TEST_CASE("conjugate embedding stacks w over its conjugate") {
  ComplexVec w(1);
  w << std::complex<double>(1.0, 2.0);
  const Eigen::VectorXcd u = embed_conjugate(w);
  CHECK(u(0) == std::complex<double>(1.0, 2.0));
  CHECK(u(1) == std::complex<double>(1.0, -2.0));

  ComplexVec wj(1);
  wj << kJ;
  const Eigen::VectorXcd uj = embed_conjugate(wj);
  CHECK(uj(0) == kJ);
  CHECK(uj(1) == -kJ);
}

TEST_CASE("conjugate embedding equals D times the real embedding") {
  RandomStream rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + trial % 5;
    const ComplexVec w = random_complex(m, rng);
    const Eigen::VectorXcd via_d = d_matrix(m) * embed_real(w);
    const Eigen::VectorXcd direct = embed_conjugate(w);
    CHECK((via_d - direct).cwiseAbs().maxCoeff() < 1e-14);
    // second half is exactly the conjugate of the first
    for (Eigen::Index i = 0; i < m; ++i)
      CHECK(direct(m + i) == std::conj(direct(i)));
  }
}

TEST_CASE("d_matrix block form and unitary-like identities") {
  const Eigen::MatrixXcd d1 = d_matrix(1);
  CHECK(d1(0, 0) == std::complex<double>(1.0, 0.0));
  CHECK(d1(0, 1) == kJ);
  CHECK(d1(1, 0) == std::complex<double>(1.0, 0.0));
  CHECK(d1(1, 1) == -kJ);

  for (Eigen::Index m = 1; m <= 8; ++m) {
    const Eigen::MatrixXcd d = d_matrix(m);
    const Eigen::MatrixXcd two_i =
        2.0 * Eigen::MatrixXcd::Identity(2 * m, 2 * m);
    CHECK((d * d.adjoint() - two_i).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((d.adjoint() * d - two_i).cwiseAbs().maxCoeff() < 1e-14);
  }

  // inverse = D*/2 recovers the real embedding from the conjugate one
  RandomStream rng(13);
  const ComplexVec w = random_complex(3, rng);
  const Eigen::MatrixXcd d = d_matrix(3);
  const Eigen::VectorXcd recovered = 0.5 * d.adjoint() * embed_conjugate(w);
  CHECK((recovered - embed_real(w).cast<std::complex<double>>())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK_THROWS_AS(d_matrix(0), std::invalid_argument);
}

TEST_CASE("Hessian conversion of scaled identity and zero") {
  const Eigen::Index m = 3;
  const Eigen::MatrixXd two_i = 2.0 * Eigen::MatrixXd::Identity(2 * m, 2 * m);
  const Eigen::MatrixXcd ext = hessian_real_to_extended(two_i);
  CHECK((ext - Eigen::MatrixXcd::Identity(2 * m, 2 * m)).cwiseAbs().maxCoeff() <
        1e-14);
  const Eigen::MatrixXcd zero =
      hessian_real_to_extended(Eigen::MatrixXd::Zero(2 * m, 2 * m));
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Hessian conversion pair are mutual inverses") {
  RandomStream rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + trial % 4;
    const Eigen::MatrixXd hbar = random_symmetric(2 * m, rng);
    const Eigen::MatrixXcd ext = hessian_real_to_extended(hbar);
    // extended Hessians are Hermitian
    CHECK((ext - ext.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd back = hessian_extended_to_real(ext);
    CHECK((back - hbar).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Hessian conversion rejects bad input") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(hessian_real_to_extended(bad), std::invalid_argument);
  CHECK_THROWS_AS(hessian_real_to_extended(Eigen::MatrixXd::Zero(3, 3)),
                  std::invalid_argument);
}

TEST_CASE("finite differences on quadratics and constants") {
  const auto norm_sq = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  Eigen::VectorXd at(2);
  at << 1.0, 0.0;
  const Eigen::VectorXd grad = finite_diff_gradient(norm_sq, at, 1e-5);
  CHECK(std::abs(grad(0) - 2.0) < 1e-8);
  CHECK(std::abs(grad(1)) < 1e-8);

  const auto constant = [](const Eigen::VectorXd&) { return 4.0; };
  CHECK(finite_diff_gradient(constant, at).isZero(0.0));

  const auto bad = [](const Eigen::VectorXd& x) {
    return x(0) > 1.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  };
  CHECK_THROWS_AS(finite_diff_gradient(bad, at), std::domain_error);
  CHECK_THROWS_AS(finite_diff_gradient(norm_sq, at, 0.0), std::invalid_argument);
}

TEST_CASE("finite-difference real gradient maps to the analytic complex one") {
  RandomStream rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    Eigen::MatrixXcd g(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) g(r, c) = rng.complex_gaussian();
    const Eigen::MatrixXcd r_u =
        g * g.adjoint() + 0.5 * Eigen::MatrixXcd::Identity(m, m);
    const QuadraticCost cost(r_u, random_complex(m, rng), 0.01);

    const ComplexVec w = random_complex(m, rng);
    const auto f = [&](const Eigen::VectorXd& xbar) {
      return cost.evaluate(unembed_real(xbar));
    };
    const Eigen::VectorXd real_grad = finite_diff_gradient(f, embed_real(w));
    const Eigen::VectorXcd ext_grad = conjugate_gradient_from_real(real_grad);
    const ComplexVec analytic = cost.gradient(w);
    CHECK((ext_grad.head(m) - analytic).cwiseAbs().maxCoeff() < 1e-6);
    // tail of the conjugate gradient is the conjugate of the head
    CHECK((ext_grad.tail(m) - ext_grad.head(m).conjugate()).cwiseAbs().maxCoeff() <
          1e-14);
  }
}
