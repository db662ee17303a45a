#pragma once

#include "liouville.hpp"

namespace nvspin {

struct DwellStats {
  double tau_e = 0.0, T = 0.0;                         // two-level
  double tau0 = 0.0, tau1 = 0.0, T_cycle = 0.0;        // seven-level
};

inline DwellStats two_level_dwell(const PumpingParams& p, bool room_temperature = false) {
  const double R = p.rate(), g1 = p.gamma1;
  DwellStats d;
  d.T = 1.0 / R + 1.0 / (g1 + R);
  const double base = std::sqrt(2.0) / (2.0 * R + g1);
  if (room_temperature) {
    d.tau_e = base;
    return d;
  }
  const double gph = p.gamma_phi;
  const double g = p.optical_linewidth();
  const double lorentz = g > 0 ? (g / pi) / (p.delta * p.delta + g * g) : 0.0;
  const double deph = (g1 + gph) > 0 ? g1 * gph / (g1 + gph) : 0.0;
  d.tau_e = std::sqrt((R + deph + pi * g1 * g1 * lorentz) / (R + g1)) * base;
  return d;
}

inline DwellStats seven_level_dwell(const PumpingParams& p) {
  const double s1 = p.gamma_s1, s2 = p.gamma_s2, s = p.gamma_s;
  DwellStats d;
  d.T_cycle = 2.0 / s1 + 1.0 / s2 + 1.0 / s;
  d.tau1 = 2.0 / s1;
  d.tau0 = 2.0 / (s2 * d.T_cycle) * std::sqrt(2.0 / (s1 * s1) + 1.0 / (s1 * s) + 0.5 / (s * s));
  return d;
}

inline RateSet two_level_rates(const PumpingParams& p, const Vec3& w_g, const Vec3& w_e,
                               const Frame& fr, bool room_temperature = false) {
  const DwellStats d = two_level_dwell(p, room_temperature);
  const double c = d.tau_e * d.tau_e / d.T;
  const Vec3 dw = w_e - w_g;
  const double z = dw.dot(fr.eZ);
  RateSet r;
  r.gamma_phi = 0.5 * c * z * z;
  r.gamma_plus = r.gamma_minus = 0.25 * c * fr.perp(dw).squaredNorm();
  r.omega_bar = fr.omega();
  if (r.omega_bar > 0.1 * std::min(p.gamma1, p.gamma1 + p.gamma_phi)) r.flags.push_back("non_markovian");
  if (fr.degenerate) r.flags.push_back("degenerate_frame");
  r.finish();
  return r;
}

// Relative residual of G_phi + G_+ + G_- against (tau_e^2/2T)|w_e - w_g|^2.
inline double sum_rule_check(const RateSet& rs, const PumpingParams& p, const Vec3& w_g, const Vec3& w_e,
                             bool room_temperature = false) {
  const DwellStats d = two_level_dwell(p, room_temperature);
  const double total = 0.5 * d.tau_e * d.tau_e / d.T * (w_e - w_g).squaredNorm();
  const double lhs = rs.gamma_phi + rs.gamma_plus + rs.gamma_minus;
  if (total == 0.0) return std::abs(lhs);
  return std::abs(lhs - total) / std::abs(total);
}

struct SevenLevelPopulations {
  double P0g = 1.0, P0e = 0.0, Pp1g = 0.0, Pm1g = 0.0, Pp1e = 0.0, Pm1e = 0.0, PS = 0.0;
  double defect = 0.0;

  std::array<double, 7> as_array() const { return {P0g, Pp1g, Pm1g, P0e, Pp1e, Pm1e, PS}; }
};

inline SevenLevelPopulations seven_level_populations(const PumpingParams& p) {
  const double R = p.rate(), g1 = p.gamma1, s1 = p.gamma_s1, s2 = p.gamma_s2, s = p.gamma_s;
  SevenLevelPopulations P;
  if (R == 0.0) return P;
  P.P0g = (R + g1 + 2 * s2) / (2 * R + g1 + 2 * s2 * ((2 * R + g1 + 2 * s1) / s1 + R / s));
  P.P0e = R / (R + g1 + 2 * s2) * P.P0g;
  P.Pm1e = P.Pp1e = s2 / s1 * P.P0e;
  P.Pm1g = P.Pp1g = (R + g1 + s1) / R * P.Pm1e;
  P.PS = 2 * s1 / s * P.Pm1e;
  const double sum = P.P0g + P.P0e + P.Pp1g + P.Pm1g + P.Pp1e + P.Pm1e + P.PS;
  P.defect = sum - 1.0;
  for (double* x : {&P.P0g, &P.P0e, &P.Pp1g, &P.Pm1g, &P.Pp1e, &P.Pm1e, &P.PS}) *x /= sum;
  return P;
}

// Correlator quadruple: ee = <x_e;x_e>, gg = <x_g;x_g>, eg = <x_e;x_g>, ge = <x_g;x_e>.
struct CorrelatorSet {
  cplx ee, gg, eg, ge;
};

inline CorrelatorSet sz_correlators(const PumpingParams& p, const SevenLevelPopulations& P, double w) {
  const double R = p.rate(), g1 = p.gamma1, s1 = p.gamma_s1;
  const cplx D = R * s1 + I_unit * (2 * R + g1 + s1) * w - w * w;
  CorrelatorSet c;
  c.ee = 2.0 * (R + I_unit * w) / D * P.Pm1e;
  c.gg = 2.0 * (R + g1 + s1 + I_unit * w) / D * P.Pm1g;
  c.eg = 2.0 * R / D * P.Pm1g;
  c.ge = 2.0 * (R + g1) / D * P.Pm1e;
  return c;
}

inline CorrelatorSet sigma_correlators_zero(const PumpingParams& p, const SevenLevelPopulations& P) {
  const double R = p.rate(), g1 = p.gamma1, s1 = p.gamma_s1, s2 = p.gamma_s2, s = p.gamma_s;
  const double eta = 2 * s2 / s1 + 2 * (R + 2 * s) * s2 / (s * (2 * R + g1));
  const double rest = 1.0 - P.P0e - P.P0g;
  const double pm1g = P.Pm1g + P.Pp1g;
  const double n = 1.0 + eta, w = 2 * R + g1, q = R + g1 + 2 * s2;
  CorrelatorSet c;
  c.ee = P.P0e * P.P0g / n / w + P.P0e * rest / n * ((R + s) / w / s + 1 / s1) + P.P0e * pm1g / n / w -
         P.P0e * P.PS / n / s1;
  c.gg = P.P0g * P.P0e / n * ((1 - 2 * s2 / R) / w + eta / R) +
         P.P0g * rest / n * (1 / R + s1 / (s * w)) * q / s1 + P.P0g * pm1g / n / R * q / w -
         P.P0g * P.PS / n / R * q / s1;
  c.eg = -P.P0g * P.P0e / n / w + P.P0g * rest / n * (1 / s1 + R / w / s) + P.P0g * pm1g / (n * w) -
         P.P0g * P.PS / n / s1;
  c.ge = -P.P0e * (1 - P.P0e) / n * (1 + 2 * s2 / R) / w - 2 * P.P0e * P.P0g / n * (s2 / (R * s1) + s2 / (w * s)) +
         P.P0e * pm1g / n * (1 / R - (1 - 2 * s2 / R) / w) +
         P.P0e * rest / n * ((R + g1) / (R * s1) + (R + g1) / (w * s)) - P.P0e * P.PS / n * q / (R * s1);
  return c;
}

struct SubspaceRates {
  double phi = 0.0, plus = 0.0, minus = 0.0;
};

inline SubspaceRates pm1_subspace_rates(const PumpingParams& p, const SevenLevelPopulations& P,
                                        const Vec3& b_g, const Vec3& b_e, const Frame& fr, double w) {
  SubspaceRates out;
  const double R = p.rate(), g1 = p.gamma1, s1 = p.gamma_s1;
  if (R == 0.0 || P.Pm1e == 0.0) return out;
  const double K = R + g1 + s1, k = K / R;
  const double bgZ = b_g.dot(fr.eZ), beZ = b_e.dot(fr.eZ);
  out.phi = 2 * P.Pm1e / s1 * ((beZ + k * bgZ) * (beZ + k * bgZ) - bgZ * beZ * s1 / R);

  const Vec3 bgp = fr.perp(b_g), bep = fr.perp(b_e);
  const double D2 = std::norm(R * s1 + I_unit * (2 * R + g1 + s1) * w - w * w);
  const double f = R * R * s1 * s1 / D2;
  const double u = w * w / (R * s1);
  const double cross = b_g.cross(b_e).dot(fr.eZ);
  const double bracket = bep.squaredNorm() * (1 + k * u) + bgp.squaredNorm() * k * (k + u) +
                         bgp.dot(bep) * (2 * R + 2 * g1 + s1) / R * (1 - u) +
                         cross * (w / R) * (2 * R + g1 + s1) / R;
  out.plus = out.minus = P.Pm1e / s1 * f * bracket;
  return out;
}

inline double quadratic_form(const CorrelatorSet& c, double ag, double ae) {
  return (ag * ag * c.gg + ae * ae * c.ee + ag * ae * (c.eg + c.ge)).real();
}

// Dephasing from the closed-form zero-frequency correlators; relaxation from the numerical
// resolvent at +-w (closed forms when w = 0).
inline SubspaceRates zero_subspace_rates(const PumpingParams& p, const SevenLevelPopulations& P,
                                         const Vec3& a_g, const Vec3& a_e, const Frame& fr, double w) {
  SubspaceRates out;
  if (p.rate() == 0.0) return out;
  const CorrelatorSet c0 = sigma_correlators_zero(p, P);
  out.phi = quadratic_form(c0, a_g.dot(fr.eZ), a_e.dot(fr.eZ));
  if (w == 0.0) {
    const double perp = quadratic_form(c0, a_g.dot(fr.eX), a_e.dot(fr.eX)) +
                        quadratic_form(c0, a_g.dot(fr.eY), a_e.dot(fr.eY));
    out.plus = out.minus = 0.5 * perp;
    return out;
  }
  const ElectronModel m = build_electron_model(ModelKind::seven_level_rate, p);
  const Superoperator s = build_superoperator(m);
  const SteadyState ss = steady_state(s);
  const cplx agp(a_g.dot(fr.eX), a_g.dot(fr.eY)), aep(a_e.dot(fr.eX), a_e.dot(fr.eY));
  const cmat sg = ketbra(7, lvl::g0, lvl::g0), se = ketbra(7, lvl::e0, lvl::e0);
  const cmat Fp = agp * sg + aep * se;
  const cmat Fm = std::conj(agp) * sg + std::conj(aep) * se;
  out.plus = 0.5 * correlation(s, ss, Fp, Fm, w).real();
  out.minus = 0.5 * correlation(s, ss, Fm, Fp, -w).real();
  return out;
}

struct SevenLevelAnalytic {
  RateSet rates;
  Frame frame;
  PrecessionVectors pv;
  SevenLevelPopulations pops;
};

inline SevenLevelAnalytic seven_level_rates(const PumpingParams& p, const FieldSetup& f,
                                            const HyperfineTensors& h) {
  SevenLevelAnalytic out;
  out.pv = precession_vectors(f, h);
  out.pops = seven_level_populations(p);
  out.frame = mean_frame(f, out.pv, out.pops.P0g, out.pops.P0e);
  const double w = out.frame.omega();
  const SubspaceRates r0 = zero_subspace_rates(p, out.pops, out.pv.a_g, out.pv.a_e, out.frame, w);
  const SubspaceRates r1 = pm1_subspace_rates(p, out.pops, out.pv.b_g, out.pv.b_e, out.frame, w);
  RateSet& r = out.rates;
  r.phi0 = r0.phi;
  r.plus0 = r0.plus;
  r.minus0 = r0.minus;
  r.phi1 = r1.phi;
  r.plus1 = r1.plus;
  r.minus1 = r1.minus;
  r.gamma_phi = r0.phi + r1.phi;
  r.gamma_plus = r0.plus + r1.plus;
  r.gamma_minus = r0.minus + r1.minus;
  r.omega_bar = w;
  r.finish();
  const double slow = p.gamma_s2 > 0 ? std::min(p.gamma_s2, p.rate()) : p.rate();
  const double tau_nv = 1.0 / slow;
  if (1.0 / r.T2 * tau_nv > 0.1 || 1.0 / r.T1 * tau_nv > 0.1) r.flags.push_back("non_markovian");
  if (out.frame.degenerate) r.flags.push_back("degenerate_frame");
  if (out.pv.weak_mixing_warning) r.flags.push_back("strong_transverse_field");
  return out;
}

struct Plateau {
  double phi0 = 0.0, pm0 = 0.0, phi1 = 0.0, pm1 = 0.0;
};

// Saturated-pumping limits of the m=0 and m=+-1 contributions.
inline Plateau saturation_plateau(const PumpingParams& p, const PrecessionVectors& pv, const Frame& fr) {
  const DwellStats d = seven_level_dwell(p);
  const Vec3 a = 0.5 * (pv.a_g + pv.a_e), b = 0.5 * (pv.b_g + pv.b_e);
  Plateau pl;
  pl.phi1 = 2.0 * d.tau1 * d.tau1 / (2.0 * d.T_cycle) * std::pow(b.dot(fr.eZ), 2);
  pl.pm1 = 2.0 * d.tau1 * d.tau1 / (4.0 * d.T_cycle) * fr.perp(b).squaredNorm();
  pl.phi0 = d.tau0 * d.tau0 / (2.0 * d.T_cycle) * std::pow(a.dot(fr.eZ), 2);
  pl.pm0 = d.tau0 * d.tau0 / (4.0 * d.T_cycle) * fr.perp(a).squaredNorm();
  return pl;
}

// mT
inline double lorentzian_width(const PumpingParams& p, double gamma_N_MHz_per_mT) {
  const double R = p.rate(), g1 = p.gamma1, s1 = p.gamma_s1;
  const double gN = two_pi * std::abs(gamma_N_MHz_per_mT);
  const double den = (2 * R + g1) * (2 * R + g1) + 2 * (R + g1) * s1 + s1 * s1;
  return std::sqrt(R * R / den) * s1 / gN;
}

// <I_x(t)> for the initial state (|up> + |down>)/sqrt 2.
inline double bloch_signal(const Frame& fr, double T1, double T2, double w, double t) {
  const double s2 = std::pow(std::sin(fr.theta), 2), c2 = std::pow(std::cos(fr.phi), 2);
  return 0.5 * std::exp(-t / T1) * s2 * c2 + 0.5 * std::exp(-t / T2) * (1.0 - c2 * s2) * std::cos(w * t);
}

}  // namespace nvspin
