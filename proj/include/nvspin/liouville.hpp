#pragma once

#include <limits>
#include <string>
#include <vector>

#include "model.hpp"

namespace nvspin {

inline cmat liouvillian(const cmat& H, const std::vector<Jump>& jumps) {
  const auto d = H.rows();
  const cmat Id = cmat::Identity(d, d);
  cmat L = -I_unit * (kron(Id, H) - kron(H.transpose(), Id));
  for (const auto& j : jumps) {
    if (j.rate == 0.0) continue;
    const cmat LdL = j.op.adjoint() * j.op;
    L += j.rate * (kron(j.op.conjugate(), j.op) - 0.5 * kron(Id, LdL) - 0.5 * kron(LdL.transpose(), Id));
  }
  return L;
}

struct Superoperator {
  cmat L;
  int dim = 0;
};

inline Superoperator build_superoperator(const ElectronModel& m) {
  return {liouvillian(m.H, m.jumps), m.dim};
}

struct SteadyState {
  cmat P;
  cvec v;
  std::vector<double> populations;
};

inline SteadyState steady_state(const Superoperator& s) {
  SteadyState ss;
  ss.v = nullspace_steady(s.L);
  ss.P = unvec(ss.v, s.dim);
  for (int i = 0; i < s.dim; ++i) ss.populations.push_back(ss.P(i, i).real());
  return ss;
}

inline SteadyState steady_state(const ElectronModel& m) { return steady_state(build_superoperator(m)); }

// <a;b>_w = -Tr[a~ (L - i w)^-1 (b~ P)]
inline cplx correlation(const Superoperator& s, const SteadyState& ss, const cmat& a, const cmat& b,
                        double omega) {
  const cmat Id = cmat::Identity(s.dim, s.dim);
  const cmat at = a - (a * ss.P).trace() * Id;
  const cmat bt = b - (b * ss.P).trace() * Id;
  if (at.norm() <= 1e-14 * a.norm() || bt.norm() <= 1e-14 * b.norm()) return 0.0;
  const cvec x = resolvent_solve(s.L, omega, vec(bt * ss.P), ss.v);
  return -(at * unvec(x, s.dim)).trace();
}

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct RateSet {
  double gamma_phi = 0.0, gamma_plus = 0.0, gamma_minus = 0.0;
  double phi0 = nan, phi1 = nan, plus0 = nan, plus1 = nan, minus0 = nan, minus1 = nan;
  double T1 = nan, T2 = nan;
  double omega_bar = 0.0;
  std::vector<std::string> flags;

  void finish() {
    const double rel = gamma_plus + gamma_minus;
    T1 = rel > 0 ? 1.0 / rel : std::numeric_limits<double>::infinity();
    const double dep = gamma_phi + 0.5 * rel;
    T2 = dep > 0 ? 1.0 / dep : std::numeric_limits<double>::infinity();
  }
  bool has_components() const { return !std::isnan(phi0); }
};

// Nuclear Markov rates from correlators of F in the tilted frame.
inline RateSet markov_rates_numeric(const ElectronModel& m, const Coupling& F, const Frame& fr) {
  const Superoperator s = build_superoperator(m);
  const SteadyState ss = steady_state(s);
  const cmat FZ = component(F, fr.eZ);
  const cmat FX = component(F, fr.eX), FY = component(F, fr.eY);
  const cmat Fp = FX + I_unit * FY, Fm = FX - I_unit * FY;
  const double w = fr.omega();
  RateSet r;
  r.gamma_phi = correlation(s, ss, FZ, FZ, 0.0).real();
  r.gamma_plus = 0.5 * correlation(s, ss, Fp, Fm, w).real();
  r.gamma_minus = 0.5 * correlation(s, ss, Fm, Fp, -w).real();
  r.omega_bar = w;
  if (fr.degenerate) r.flags.push_back("degenerate_frame");
  r.finish();
  return r;
}

}  // namespace nvspin
