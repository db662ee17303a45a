#include <catch_amalgamated.hpp>

#include "nvspin/numerics.hpp"
#include "nvspin/liouville.hpp"

using namespace nvspin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// amplitude damping at rate g plus a drive
cmat damped_qubit(double g, double omega) {
  cmat H = cmat::Zero(2, 2);
  H(0, 1) = H(1, 0) = 0.5 * omega;
  cmat sm = cmat::Zero(2, 2);
  sm(0, 1) = 1.0;
  return liouvillian(H, {{sm, g}});
}

std::vector<double> grid(double t_max, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_max * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("kron and vec round trip", "[numerics]") {
  cmat A(2, 2), B(2, 2);
  A << 1, 2, 3, 4;
  B << 0, 1, 1, 0;
  const cmat K = kron(A, B);
  CHECK(K.rows() == 4);
  CHECK(K(0, 1) == cplx(1.0));
  CHECK(K(3, 2) == cplx(4.0));
  CHECK((unvec(vec(A), 2) - A).norm() == 0.0);
  // vec(A X B) = (B^T kron A) vec(X)
  cmat X = cmat::Random(2, 2);
  CHECK((vec(A * X * B) - kron(B.transpose(), A) * vec(X)).norm() < 1e-12);
}

TEST_CASE("decaying qubit relaxes to the ground state", "[numerics]") {
  const cvec v = nullspace_steady(damped_qubit(2.0, 0.0));
  const cmat P = unvec(v, 2);
  CHECK_THAT(P(0, 0).real(), WithinAbs(1.0, 1e-12));
  CHECK_THAT(std::abs(P(1, 1)), WithinAbs(0.0, 1e-12));
}

TEST_CASE("driven damped qubit steady state matches the closed form", "[numerics]") {
  const double g = 1.0, om = 0.7;
  const cmat P = unvec(nullspace_steady(damped_qubit(g, om)), 2);
  // excited population of a resonantly driven, purely radiatively damped two-level system
  const double pe = 0.25 * om * om / (0.25 * g * g + 0.5 * om * om);
  CHECK_THAT(P(1, 1).real(), WithinRel(pe, 1e-10));
}

TEST_CASE("nullspace errors", "[numerics]") {
  cmat L = damped_qubit(1.0, 0.0);
  L(0, 0) += 0.5;
  CHECK_THROWS_AS(nullspace_steady(L), NotTracePreserving);
  // two decoupled stationary states
  CHECK_THROWS_AS(nullspace_steady(cmat::Zero(4, 4)), DegenerateNullspace);
}

TEST_CASE("resolvent solves (L - i w) x = b", "[numerics]") {
  const cmat L = damped_qubit(1.0, 0.4);
  const cvec ss = nullspace_steady(L);
  cmat b = cmat::Zero(2, 2);
  b(0, 1) = 1.0;
  const cvec x = resolvent_solve(L, 0.3, vec(b));
  CHECK(((L - 0.3 * I_unit * cmat::Identity(4, 4)) * x - vec(b)).norm() < 1e-12);
  // zero frequency with a traceless source
  cmat c = cmat::Zero(2, 2);
  c(0, 0) = 1.0;
  c(1, 1) = -1.0;
  const cvec y = resolvent_solve(L, 0.0, vec(c), ss);
  CHECK((L * y - vec(c)).norm() < 1e-12);
}

TEST_CASE("resolvent reports a singular frequency", "[numerics]") {
  // undamped precession has a pole at w = 2
  cmat H = cmat::Zero(2, 2);
  H(0, 0) = 1.0;
  H(1, 1) = -1.0;
  const cmat L = liouvillian(H, {});
  cvec b = cvec::Zero(4);
  b(1) = 1.0;
  CHECK_THROWS_AS(resolvent_solve(L, 2.0, b), SingularAtFrequency);
  b(1) = 0.0;
  b(2) = 1.0;
  CHECK_THROWS_AS(resolvent_solve(L, 2.0, b), SingularAtFrequency);
  CHECK_NOTHROW(resolvent_solve(L, 1.0, b));
}

TEST_CASE("propagator of a pure decay", "[numerics]") {
  const cmat U = propagator(damped_qubit(2.0, 0.0), 0.5);
  // population of |1> after time 0.5 at rate 2
  cmat rho = cmat::Zero(2, 2);
  rho(1, 1) = 1.0;
  const cmat out = unvec(U * vec(rho), 2);
  CHECK_THAT(out(1, 1).real(), WithinRel(std::exp(-1.0), 1e-12));
}

TEST_CASE("fit_decay recovers rate and frequency", "[numerics]") {
  const auto t = grid(20.0, 801);
  std::vector<double> v(t.size()), u(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    v[i] = 0.8 * std::exp(-0.35 * t[i]) * std::cos(4.0 * t[i]);
    u[i] = 0.5 * std::exp(-0.2 * t[i]);
  }
  const DecayFit f = fit_decay(t, v, true);
  CHECK_THAT(f.rate, WithinRel(0.35, 0.01));
  CHECK_THAT(f.frequency, WithinRel(4.0, 0.01));
  const DecayFit g = fit_decay(t, u, false);
  CHECK_THAT(g.rate, WithinRel(0.2, 1e-10));
  CHECK_THAT(g.amplitude, WithinRel(0.5, 1e-10));
}

TEST_CASE("fit_complex_decay recovers rate and carrier", "[numerics]") {
  const auto t = grid(10.0, 400);
  std::vector<cplx> z(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) z[i] = 0.5 * std::exp(cplx(-0.6, -2.5) * t[i]);
  const DecayFit f = fit_complex_decay(t, z);
  CHECK_THAT(f.rate, WithinRel(0.6, 1e-10));
  CHECK_THAT(std::abs(f.frequency), WithinRel(2.5, 1e-10));
}

TEST_CASE("fit_decay rejects a signal that does not decay", "[numerics]") {
  const auto t = grid(1.0, 100);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = std::exp(-0.1 * t[i]);
  CHECK_THROWS_AS(fit_decay(t, v, false), InsufficientDecay);
  CHECK_THROWS_AS(fit_decay(grid(1.0, 5), {1, 0.5, 0.2, 0.1, 0.01}, false), Error);
}
