#include <catch_amalgamated.hpp>

#include "nvspin/oracle.hpp"

using namespace nvspin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double g1 = 1.0 / 0.012;
}

TEST_CASE("telegraph stationary distribution", "[oracle]") {
  const TelegraphModel tm = telegraph_two_level(g1, g1, Vec3::Zero(), Vec3::UnitZ());
  const auto p = tm.stationary();
  CHECK_THAT(p[0], WithinRel(2.0 / 3, 1e-12));
  CHECK_THAT(p[1], WithinRel(1.0 / 3, 1e-12));

  PumpingParams pp;
  pp.R = g1;
  const ElectronModel m = build_electron_model(ModelKind::seven_level_rate, pp);
  const TelegraphModel t7 = telegraph_from_model(m, hyperfine_operator(HyperfineTensors::preset("13Cb"), {}, m, false), {});
  const auto s = t7.stationary();
  const auto ref = seven_level_populations(pp).as_array();
  for (std::size_t i = 0; i < 7; ++i) CHECK_THAT(s[i], WithinAbs(ref[i], 1e-12));
}

TEST_CASE("paths are reproducible per seed and index", "[oracle]") {
  const TelegraphModel tm = telegraph_two_level(g1, g1, Vec3::Zero(), Vec3::UnitZ());
  const HoppingPath a = sample_path(tm, 1.0, 42, 3), b = sample_path(tm, 1.0, 42, 3), c = sample_path(tm, 1.0, 42, 4);
  CHECK(a.jump_times == b.jump_times);
  CHECK(a.levels == b.levels);
  CHECK(a.jump_times != c.jump_times);
  CHECK(a.levels.size() == a.jump_times.size() + 1);
}

TEST_CASE("dwell statistics", "[oracle]") {
  const double R = 2 * g1;
  const TelegraphModel tm = telegraph_two_level(R, g1, Vec3::Zero(), Vec3::UnitZ());
  const auto paths = sample_paths(tm, 20.0, 500, 5);
  const DwellEstimate d = dwell_statistics(paths, 0);
  CHECK(d.cycles > 100000);
  CHECK_THAT(d.T, WithinAbs(1 / R + 1 / (g1 + R), 4 * d.T_se));
  CHECK_THAT(d.tau, WithinAbs(std::sqrt(2.0) / (2 * R + g1), 4 * d.tau_se));
  CHECK_THROWS_AS(dwell_statistics(sample_paths(tm, 1e-5, 3, 5), 0), StatisticsTooPoor);
}

TEST_CASE("oracle dephasing against the telegraph integral", "[oracle]") {
  const TelegraphModel tm = telegraph_two_level(g1, g1, Vec3::Zero(), Vec3(0, 0, 10));
  const Frame fr = frame_from({0, 0, 10.0 / 3});
  const double ref = 200.0 / (27.0 * g1);
  OracleOptions o;
  o.threads = 1;
  const OracleEstimate e = dephasing_estimate(tm, fr, 10.0 / ref, 2000, 9, o, false);
  CHECK_THAT(e.gamma_phi, WithinAbs(ref, 3 * e.gamma_phi_se));
  CHECK(e.gamma_phi_se < 0.1 * ref);
  CHECK_THAT(e.coherence.front(), WithinRel(1.0, 1e-12));
  // same paths, same numbers
  const OracleEstimate again = dephasing_estimate(tm, fr, 10.0 / ref, 2000, 9, o, false);
  CHECK(again.gamma_phi == e.gamma_phi);
}
