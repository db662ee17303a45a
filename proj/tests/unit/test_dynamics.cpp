#include <catch_amalgamated.hpp>

#include "nvspin/dynamics.hpp"

using namespace nvspin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("initial states and odd part", "[dynamics]") {
  PumpingParams p;
  p.R = p.gamma1;
  const SteadyState ss = steady_state(build_electron_model(ModelKind::two_level, p));
  const CoupledState x = scenario_initial_states(ss, 'x');
  CHECK_THAT(x.rho.trace().real(), WithinAbs(1.0, 1e-14));
  const Vec3 n = nuclear_expectation(x.rho, 2);
  CHECK_THAT(n(0), WithinAbs(0.5, 1e-14));
  CHECK_THAT(n(2), WithinAbs(0.0, 1e-14));
  CHECK_THROWS_AS(scenario_initial_states(ss, 'w'), Error);

  Trajectory a, b;
  a.times = b.times = {0.0};
  a.lab = a.tilted = {Vec3(1, 2, 3)};
  b.lab = b.tilted = {Vec3(-1, 2, 1)};
  CHECK((odd_part(a, b).lab[0] - Vec3(1, 0, 1)).norm() == 0.0);
}

TEST_CASE("free precession without coupling", "[dynamics]") {
  PumpingParams p;
  p.R = p.gamma1;
  FieldSetup f;
  f.B = {0, 0, 10};
  const ElectronModel m = build_electron_model(ModelKind::two_level, p, f);
  const SteadyState ss = steady_state(m);
  const Coupling F = two_level_coupling(Vec3::Zero(), Vec3::Zero());
  const Frame fr = exact_frame(F, ss, f);
  const Trajectory tr = evolve(m, F, f, scenario_initial_states(ss, 'x'), 0.5, 20, fr);
  const double w = two_pi * 10.705e-3 * 10;
  CHECK_THAT(fr.omega(), WithinRel(w, 1e-12));
  CHECK_THAT(std::hypot(tr.lab.back()(0), tr.lab.back()(1)), WithinRel(0.5, 1e-9));
  CHECK_THAT(tr.lab.back()(0), WithinRel(0.5 * std::cos(w * 10.0), 1e-8));
}

TEST_CASE("exact dynamics reproduce Markov rates for weak coupling", "[dynamics]") {
  PumpingParams p;
  p.R = p.gamma1;
  FieldSetup f;
  f.B = {0, 0, 5};
  const auto h = HyperfineTensors::preset("13Cb").scaled(100);
  const ElectronModel m = build_electron_model(ModelKind::seven_level_rate, p, f);
  const auto an = seven_level_rates(p, f, h);
  const DynamicsResult d = dynamics_rates(m, hyperfine_operator(h, f, m, false), f, an.rates);
  // resolvent values from the rate-matrix oracle
  CHECK_THAT(1.0 / d.times.T1, WithinRel(1.0241643692040944e-05, 0.01));
  CHECK_THAT(1.0 / d.times.T2, WithinRel(0.0006648246084746786, 0.01));
  CHECK_THAT(d.times.omega, WithinRel(0.33630749356678735, 0.01));
  CHECK(d.rates.flags.empty());
}

TEST_CASE("coherent two-level dynamics against the telegraph integral", "[dynamics]") {
  PumpingParams p;
  p.R = p.gamma1;
  FieldSetup f;
  const Vec3 wg(0, 6, 0), we(4, 0, 10);
  const ElectronModel m = build_electron_model(ModelKind::two_level, p, f);
  const Frame fr = mean_frame_two_level(f, wg, we, 2.0 / 3, 1.0 / 3);
  const RateSet guess = two_level_rates(p, wg, we, fr);
  DynamicsOptions o;
  o.check_positivity = false;
  const DynamicsResult d = dynamics_rates(m, two_level_coupling(wg, we), f, guess, o);
  // integral of the classical telegraph correlation, R = gamma1
  const double c = 4.0 / (27.0 * p.gamma1);
  const Vec3 dw = we - wg;
  const double z = dw.dot(fr.eZ);
  CHECK_THAT(d.rates.gamma_phi, WithinRel(0.5 * c * z * z, 0.02));
  CHECK_THAT(d.rates.gamma_plus, WithinRel(0.25 * c * fr.perp(dw).squaredNorm(), 0.02));
}
