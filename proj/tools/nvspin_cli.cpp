#include <CLI11.hpp>

#include <iostream>

#include "nvspin/sweep.hpp"

using namespace nvspin;

namespace {

int cmd_rates(const SweepConfig& c) {
  json out = json::array();
  bool failed = false;
  for (Engine e : c.engines) {
    const ResultRow r = run_point(c, c.grid.front(), e, c.seed);
    failed |= r.failed;
    out.push_back(row_json(r));
  }
  std::cout << out.dump(2) << "\n";
  return failed ? 2 : 0;
}

int cmd_sweep(SweepConfig c, const std::string& output) {
  if (!output.empty()) c.output = output;
  const auto rows = run_sweep(c);
  write_csv(c.output, rows);
  std::size_t bad = 0;
  for (const auto& r : rows) bad += r.failed;
  std::cerr << rows.size() << " rows written to " << c.output;
  if (bad) std::cerr << ", " << bad << " failed";
  std::cerr << "\n";
  return bad ? 2 : 0;
}

int cmd_populations(const SweepConfig& c) {
  const Point p = point_at(c, c.grid.front());
  const ElectronModel m = build_electron_model(c.kind, p.pumping, p.field);
  const SteadyState ss = steady_state(m);
  std::vector<double> closed;
  if (c.kind == ModelKind::two_level) {
    const double R = p.pumping.rate(), Pe = R / (2 * R + p.pumping.gamma1);
    closed = {1 - Pe, Pe};
  } else {
    const auto a = seven_level_populations(p.pumping).as_array();
    closed.assign(a.begin(), a.end());
  }
  json levels = json::array();
  for (std::size_t i = 0; i < closed.size(); ++i)
    levels.push_back({{"level", m.labels[i]}, {"steady_state", ss.populations[i]}, {"closed_form", closed[i]}});
  json out{{"model", kind_name(c.kind)}, {"R", p.pumping.rate()}, {"levels", levels}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_validate(const SweepConfig& c) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " " << value << "\n";
    failures += !ok;
  };
  for (double x : c.grid) {
    const Point p = point_at(c, x);
    std::cout << "# " << c.sweep_axis << " = " << x << "\n";
    const ElectronModel m = build_electron_model(c.kind, p.pumping, p.field);
    const Superoperator s = build_superoperator(m);
    const double tp = (trace_row(m.dim) * s.L).norm();
    report("trace_preserving", tp < 1e-10, tp);
    const SteadyState ss = steady_state(s);
    const double herm = (ss.P - ss.P.adjoint()).norm();
    const double minev = Eigen::SelfAdjointEigenSolver<cmat>(ss.P, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    report("steady_state_hermitian", herm < 1e-10, herm);
    report("steady_state_positive", minev > -1e-10, minev);
    if (c.kind == ModelKind::two_level) {
      const auto [wg, we] = two_level_frequencies(c, p);
      const double R = p.pumping.rate(), Pe = R / (2 * R + p.pumping.gamma1);
      const Frame fr = mean_frame_two_level(p.field, wg, we, 1 - Pe, Pe);
      const RateSet an = two_level_rates(p.pumping, wg, we, fr, c.room_temperature);
      const double sr = sum_rule_check(an, p.pumping, wg, we, c.room_temperature);
      report("sum_rule", sr < 1e-12, sr);
      continue;
    }
    const auto a = seven_level_populations(p.pumping).as_array();
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - ss.populations[i]));
    if (c.kind == ModelKind::seven_level_rate) report("populations_closed_form", dev < 1e-10, dev);
    const SevenLevelAnalytic an = seven_level_rates(p.pumping, p.field, p.hyperfine);
    const ElectronModel mr = build_electron_model(ModelKind::seven_level_rate, p.pumping, p.field);
    const RateSet nu = markov_rates_numeric(mr, hyperfine_operator(p.hyperfine, p.field, mr, false), an.frame);
    const double d1 = std::abs(nu.T1 / an.rates.T1 - 1), d2 = std::abs(nu.T2 / an.rates.T2 - 1);
    report("analytic_vs_numeric_T1", d1 < 1e-6, d1);
    report("analytic_vs_numeric_T2", d2 < 1e-6, d2);
  }
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nuclear spin relaxation and dephasing near an optically pumped NV center"};
  app.require_subcommand(1);
  std::string config, output;
  std::optional<std::uint64_t> seed;

  auto* rates = app.add_subcommand("rates", "rates at the first grid point, as JSON");
  auto* sweep = app.add_subcommand("sweep", "run the sweep and write CSV");
  auto* pops = app.add_subcommand("populations", "electronic steady-state populations");
  auto* validate = app.add_subcommand("validate", "check model invariants on the grid");
  for (auto* s : {rates, sweep, pops, validate}) {
    s->add_option("--config", config, "YAML or JSON configuration")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", seed, "random seed override");
  }
  sweep->add_option("--output", output, "CSV path, overrides the config");

  CLI11_PARSE(app, argc, argv);
  try {
    SweepConfig c = load_config(config);
    if (seed) c.seed = *seed;
    if (*rates) return cmd_rates(c);
    if (*sweep) return cmd_sweep(c, output);
    if (*pops) return cmd_populations(c);
    return cmd_validate(c);
  } catch (const std::exception& e) {
    std::cerr << config << ": " << e.what() << "\n";
    return 1;
  }
}
