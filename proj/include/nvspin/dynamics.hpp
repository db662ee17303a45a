#pragma once

#include <functional>

#include "rates_analytic.hpp"

namespace nvspin {

struct NuclearSpin {
  cmat x, y, z;
  NuclearSpin() : x(cmat::Zero(2, 2)), y(cmat::Zero(2, 2)), z(cmat::Zero(2, 2)) {
    x(0, 1) = x(1, 0) = 0.5;
    y(0, 1) = -0.5 * I_unit;
    y(1, 0) = 0.5 * I_unit;
    z(0, 0) = 0.5;
    z(1, 1) = -0.5;
  }
  const cmat& operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
};

struct CoupledState {
  cmat rho;
  double t = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> lab;    // <I_x>, <I_y>, <I_z>
  std::vector<Vec3> tilted; // <I_X>, <I_Y>, <I_Z>
};

// Nuclear Bloch vector n/2 (|n| <= 1) times the electron steady state.
inline CoupledState scenario_initial_state(const SteadyState& ss, const Vec3& n) {
  NuclearSpin I;
  cmat rn = 0.5 * cmat::Identity(2, 2);
  for (int a = 0; a < 3; ++a) rn += n(a) * I[a];
  return {kron(ss.P, rn), 0.0};
}

inline CoupledState scenario_initial_states(const SteadyState& ss, char which) {
  switch (which) {
    case 'x': return scenario_initial_state(ss, Vec3::UnitX());
    case 'y': return scenario_initial_state(ss, Vec3::UnitY());
    case 'z': return scenario_initial_state(ss, Vec3::UnitZ());
  }
  throw Error("initial state must be x, y or z");
}

inline cmat joint_liouvillian(const ElectronModel& m, const Coupling& F, const FieldSetup& f) {
  NuclearSpin I;
  const cmat I2 = cmat::Identity(2, 2);
  const cmat Ie = cmat::Identity(m.dim, m.dim);
  const Vec3 wz = f.nuclear_zeeman();
  cmat H = kron(m.H, I2);
  for (int a = 0; a < 3; ++a) H += kron(F[a] + wz(a) * Ie, I[a]);
  std::vector<Jump> jumps;
  for (const auto& j : m.jumps) jumps.push_back({kron(j.op, I2), j.rate});
  return liouvillian(H, jumps);
}

inline Vec3 nuclear_expectation(const cmat& rho, int edim) {
  NuclearSpin I;
  Vec3 out;
  for (int a = 0; a < 3; ++a) out(a) = (rho * kron(cmat::Identity(edim, edim), I[a])).trace().real();
  return out;
}

// Exact propagation on a uniform grid of n_steps steps of dt. Returns one trajectory per column of
// initial states.
inline std::vector<Trajectory> evolve_many(const cmat& Ljoint, int edim, const std::vector<cmat>& rho0,
                                           double dt, int n_steps, const Frame& fr,
                                           bool check_positivity = true) {
  const cmat U = propagator(Ljoint, dt);
  const auto D = Ljoint.rows();
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(D))));
  cmat V(D, static_cast<Eigen::Index>(rho0.size()));
  for (std::size_t c = 0; c < rho0.size(); ++c) V.col(static_cast<Eigen::Index>(c)) = vec(rho0[c]);
  std::vector<Trajectory> out(rho0.size());
  for (int k = 0; k <= n_steps; ++k) {
    if (k > 0) V = (U * V).eval();
    for (std::size_t c = 0; c < rho0.size(); ++c) {
      const cmat rho = unvec(V.col(static_cast<Eigen::Index>(c)), d);
      if (check_positivity) {
        Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-6) throw StepTooCoarse("state lost positivity");
      }
      const Vec3 v = nuclear_expectation(rho, edim);
      out[c].times.push_back(k * dt);
      out[c].lab.push_back(v);
      out[c].tilted.push_back(fr.to_frame(v));
    }
  }
  return out;
}

inline Trajectory evolve(const ElectronModel& m, const Coupling& F, const FieldSetup& f,
                         const CoupledState& rho0, double dt, int n_steps, const Frame& fr) {
  return evolve_many(joint_liouvillian(m, F, f), m.dim, {rho0.rho}, dt, n_steps, fr).front();
}

// Half the difference of the trajectories from +n and -n, which cancels the steady nuclear
// polarization.
inline Trajectory odd_part(const Trajectory& a, const Trajectory& b) {
  Trajectory t = a;
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    t.lab[i] = 0.5 * (a.lab[i] - b.lab[i]);
    t.tilted[i] = 0.5 * (a.tilted[i] - b.tilted[i]);
  }
  return t;
}

struct ExtractedTimes {
  double T1 = nan, T2 = nan, omega = nan;
  DecayFit fit_Z, fit_perp;
};

inline DecayFit fit_longitudinal(const Trajectory& tr) {
  std::vector<double> z(tr.times.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = tr.tilted[i](2);
  return fit_decay(tr.times, z, false);
}

inline DecayFit fit_transverse(const Trajectory& tr) {
  std::vector<cplx> z(tr.times.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = {tr.tilted[i](0), tr.tilted[i](1)};
  return fit_complex_decay(tr.times, z);
}

inline ExtractedTimes extract_times(const Trajectory& tr, const Frame&) {
  ExtractedTimes e;
  e.fit_Z = fit_longitudinal(tr);
  e.fit_perp = fit_transverse(tr);
  e.T1 = 1.0 / e.fit_Z.rate;
  e.T2 = 1.0 / e.fit_perp.rate;
  e.omega = std::abs(e.fit_perp.frequency);
  return e;
}

// Mean nuclear precession vector of the exact steady state.
inline Frame exact_frame(const Coupling& F, const SteadyState& ss, const FieldSetup& f) {
  Vec3 w = f.nuclear_zeeman();
  for (int a = 0; a < 3; ++a) w(a) += (F[a] * ss.P).trace().real();
  return frame_from(w);
}

struct DynamicsOptions {
  int samples_per_decay = 60;   // target samples inside the fit window
  int points_per_period = 10;
  int max_attempts = 10;
  double span_in_decays = 4.0;
  bool check_positivity = true;
};

struct DynamicsResult {
  RateSet rates;
  Frame frame;
  ExtractedTimes times;
  Trajectory longitudinal, transverse;
};

namespace detail {

// Runs the +-n pair on grids chosen from a rate guess until the fit window is well sampled.
template <class Fit>
inline std::pair<Trajectory, DecayFit> adaptive_run(const cmat& Lj, int edim, const SteadyState& ss,
                                                    const Frame& fr, const Vec3& n, double rate_guess,
                                                    double omega, const DynamicsOptions& o, Fit fit) {
  double span = o.span_in_decays / rate_guess;
  for (int attempt = 0; attempt < o.max_attempts; ++attempt) {
    double dt = span / (o.samples_per_decay * o.span_in_decays);
    if (omega > 0) dt = std::min(dt, two_pi / omega / o.points_per_period);
    const int steps = std::max(40, static_cast<int>(std::ceil(span / dt)));
    const auto tr = evolve_many(Lj, edim, {scenario_initial_state(ss, n).rho, scenario_initial_state(ss, -n).rho},
                                dt, steps, fr, o.check_positivity);
    const Trajectory odd = odd_part(tr[0], tr[1]);
    DecayFit f;
    try {
      f = fit(odd);
    } catch (const InsufficientDecay&) {
      span *= 4.0;
      continue;
    }
    const double window_samples = 3.0 / (std::max(f.rate, 1e-300) * dt);
    if (window_samples < 0.5 * o.samples_per_decay && attempt + 1 < o.max_attempts) {
      span = o.span_in_decays / f.rate;
      continue;
    }
    return {odd, f};
  }
  throw InsufficientDecay("no decay found within the extended grid");
}

}  // namespace detail

// T1 from a start along e_Z, T2 and |w| from a start along e_X; rates seeded by a guess.
inline DynamicsResult dynamics_rates(const ElectronModel& m, const Coupling& F, const FieldSetup& f,
                                     const RateSet& guess, const DynamicsOptions& o = {}) {
  DynamicsResult r;
  const Superoperator s = build_superoperator(m);
  const SteadyState ss = steady_state(s);
  r.frame = exact_frame(F, ss, f);
  const cmat Lj = joint_liouvillian(m, F, f);
  const double w = r.frame.omega();

  const double g1 = std::max(1.0 / guess.T1, 1e-12);
  const double g2 = std::max(1.0 / guess.T2, 1e-12);
  auto [trZ, fZ] = detail::adaptive_run(Lj, m.dim, ss, r.frame, r.frame.eZ, g1, 0.0, o, fit_longitudinal);
  auto [trX, fX] = detail::adaptive_run(Lj, m.dim, ss, r.frame, r.frame.eX, g2, w, o, fit_transverse);
  r.longitudinal = std::move(trZ);
  r.transverse = std::move(trX);
  r.times.fit_Z = fZ;
  r.times.fit_perp = fX;
  r.times.T1 = 1.0 / fZ.rate;
  r.times.T2 = 1.0 / fX.rate;
  r.times.omega = std::abs(fX.frequency);

  r.rates.gamma_plus = r.rates.gamma_minus = 0.5 * fZ.rate;
  r.rates.gamma_phi = fX.rate - 0.5 * fZ.rate;
  r.rates.omega_bar = r.times.omega;
  r.rates.T1 = r.times.T1;
  r.rates.T2 = r.times.T2;
  const double lo = std::min(fZ.rate, fX.rate), hi = std::max(fZ.rate, fX.rate);
  if (hi < 1.5 * lo) r.rates.flags.push_back("crossover");
  if (r.frame.degenerate) r.rates.flags.push_back("degenerate_frame");
  return r;
}

}  // namespace nvspin
