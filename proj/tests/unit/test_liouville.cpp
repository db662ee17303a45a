#include <catch_amalgamated.hpp>

#include "nvspin/liouville.hpp"

using namespace nvspin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PumpingParams at_gamma1() {
  PumpingParams p;
  p.R = p.gamma1;
  return p;
}

// Values from an independent classical rate-matrix computation (numpy) for R = gamma1.
const double pops_ref[7] = {0.47779479, 0.02756508, 0.02756508, 0.22970904, 0.00918836, 0.00918836, 0.21898928};

cmat diag7(std::array<double, 7> d) {
  cmat m = cmat::Zero(7, 7);
  for (int i = 0; i < 7; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

}  // namespace

TEST_CASE("seven-level steady state", "[liouville]") {
  const ElectronModel m = build_electron_model(ModelKind::seven_level_rate, at_gamma1());
  const SteadyState ss = steady_state(m);
  for (int i = 0; i < 7; ++i) CHECK_THAT(ss.populations[static_cast<std::size_t>(i)], WithinAbs(pops_ref[i], 1e-8));
  CHECK_THAT(ss.P.trace().real(), WithinAbs(1.0, 1e-14));
}

TEST_CASE("coherent seven-level model", "[liouville]") {
  // broad optical line: close to the rate model
  const SteadyState ss = steady_state(build_electron_model(ModelKind::seven_level_lindblad, at_gamma1()));
  for (int i = 0; i < 7; ++i) CHECK_THAT(ss.populations[static_cast<std::size_t>(i)], WithinAbs(pops_ref[i], 1e-3));
  Eigen::SelfAdjointEigenSolver<cmat> es(ss.P);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
  // narrow line: the m=+-1 transitions sit 2 pi (D_es - D_gs) off resonance and shelve population
  PumpingParams p = at_gamma1();
  p.gamma_phi = 1e3;
  const SteadyState narrow = steady_state(build_electron_model(ModelKind::seven_level_lindblad, p));
  CHECK(narrow.populations[lvl::gp] > 0.4);
}

TEST_CASE("correlators against the rate-matrix oracle", "[liouville]") {
  const ElectronModel m = build_electron_model(ModelKind::seven_level_rate, at_gamma1());
  const Superoperator s = build_superoperator(m);
  const SteadyState ss = steady_state(s);
  const cmat xe = diag7({0, 0, 0, 0, 1, -1, 0}), xg = diag7({0, 1, -1, 0, 0, 0, 0});
  const cplx ee = correlation(s, ss, xe, xe, 1.0);
  CHECK_THAT(ee.real(), WithinRel(0.0002201720672911107, 1e-7));
  CHECK_THAT(ee.imag(), WithinRel(-7.923152078114514e-06, 1e-7));
  CHECK_THAT(correlation(s, ss, xg, xe, 1.0).real(), WithinRel(0.00044009060588509917, 1e-7));

  const cmat se = ketbra(7, lvl::e0, lvl::e0), sg = ketbra(7, lvl::g0, lvl::g0);
  CHECK_THAT(correlation(s, ss, se, se, 0.0).real(), WithinRel(0.002869336059405346, 1e-7));
  CHECK_THAT(correlation(s, ss, sg, sg, 0.0).real(), WithinRel(0.010991486525725118, 1e-7));
  CHECK_THAT(correlation(s, ss, se, sg, 0.0).real(), WithinRel(0.004651173631631476, 1e-7));
  CHECK_THAT(correlation(s, ss, sg, se, 0.0).real(), WithinRel(0.0038449054712502446, 1e-7));
  // constant operators have no fluctuations
  CHECK(correlation(s, ss, cmat::Identity(7, 7), se, 0.0) == cplx(0.0));
}

TEST_CASE("Markov rates from the resolvent", "[liouville]") {
  FieldSetup f;
  f.B = {0, 0, 5};
  const auto h = HyperfineTensors::preset("13Cb").scaled(100);
  const ElectronModel m = build_electron_model(ModelKind::seven_level_rate, at_gamma1(), f);
  const Coupling F = hyperfine_operator(h, f, m, false);
  const SteadyState ss = steady_state(m);
  Vec3 w = f.nuclear_zeeman();
  for (int a = 0; a < 3; ++a) w(a) += (F[a] * ss.P).trace().real();
  const RateSet r = markov_rates_numeric(m, F, frame_from(w));
  CHECK_THAT(r.gamma_phi, WithinRel(0.0006597037866286581, 1e-7));
  CHECK_THAT(r.gamma_plus, WithinRel(5.120821846020472e-06, 1e-7));
  CHECK_THAT(r.gamma_minus, WithinRel(r.gamma_plus, 1e-9));
  CHECK_THAT(1.0 / r.T1, WithinRel(1.0241643692040944e-05, 1e-7));
  CHECK_THAT(1.0 / r.T2, WithinRel(0.0006648246084746786, 1e-7));
  CHECK_THAT(r.omega_bar, WithinRel(0.33630749356678735, 1e-9));
}
