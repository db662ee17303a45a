#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace nvspin {

enum class ModelKind { two_level, seven_level_lindblad, seven_level_rate };

inline ModelKind parse_kind(const std::string& s) {
  if (s == "two-level") return ModelKind::two_level;
  if (s == "seven-level-lindblad") return ModelKind::seven_level_lindblad;
  if (s == "seven-level-rate" || s == "seven-level") return ModelKind::seven_level_rate;
  throw UnknownKind("unknown model kind '" + s + "'");
}

inline std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::two_level: return "two-level";
    case ModelKind::seven_level_lindblad: return "seven-level-lindblad";
    case ModelKind::seven_level_rate: return "seven-level-rate";
  }
  return "?";
}

// Level indices.
namespace lvl {
inline constexpr int g = 0, e = 1;
inline constexpr int g0 = 0, gp = 1, gm = 2, e0 = 3, ep = 4, em = 5, S = 6;
}  // namespace lvl

// Rates in 1/us (no 2 pi). Omega_R and Delta in rad/us.
struct PumpingParams {
  double omega_R = 0.0;
  double delta = 0.0;
  double gamma1 = 1.0 / 0.012;
  double gamma_phi = 1e7;
  double gamma_s1 = 1.0 / 0.012;
  double gamma_s2 = (1.0 / 0.012) / 25.0;
  double gamma_s = 1.0 / 0.143;
  std::optional<double> R;

  double optical_linewidth() const { return 0.5 * (gamma1 + gamma_phi); }
  double rate() const;
  double rabi() const;
};

inline double pumping_rate(const PumpingParams& p) {
  const double g = p.optical_linewidth();
  const double lorentz = (g / pi) / (p.delta * p.delta + g * g);
  return two_pi * 0.25 * p.omega_R * p.omega_R * lorentz;
}

inline double PumpingParams::rate() const { return R ? *R : pumping_rate(*this); }

// Rabi frequency reproducing rate(); inverts the Lorentzian when R is given directly.
inline double PumpingParams::rabi() const {
  if (!R) return omega_R;
  const double g = optical_linewidth();
  return std::sqrt(2.0 * (*R) * (delta * delta + g * g) / g);
}

// Hyperfine tensors, MHz.
struct HyperfineTensors {
  Mat3 A_g = Mat3::Zero();
  Mat3 A_e = Mat3::Zero();

  static HyperfineTensors preset(const std::string& name) {
    if (name != "13Cb") throw UnknownKind("unknown hyperfine preset '" + name + "'");
    HyperfineTensors h;
    h.A_g << -8.0, 0.0, -0.7,
             0.0, -8.99, 0.0,
             -0.7, 0.0, -8.00;
    h.A_e << -3.78, 0.19, -1.47,
             0.19, -5.83, 0.22,
             -1.47, 0.22, -4.12;
    return h;
  }

  HyperfineTensors scaled(double eta) const { return {A_g / eta, A_e / eta}; }
};

// B in mT; gamma_e, gamma_N in MHz/mT; D_gs, D_es in MHz.
struct FieldSetup {
  Vec3 B = Vec3::Zero();
  double gamma_e = 28.025;
  double gamma_N = -10.705e-3;
  double D_gs = 2870.0;
  double D_es = 1410.0;

  Vec3 nuclear_zeeman() const { return two_pi * gamma_N * B; }
  Vec3 transverse() const { return {B.x(), B.y(), 0.0}; }
};

// Spin-1 operators in the order (0, +1, -1).
struct Spin1 {
  cmat x, y, z;
  Spin1() : x(cmat::Zero(3, 3)), y(cmat::Zero(3, 3)), z(cmat::Zero(3, 3)) {
    cmat sp = cmat::Zero(3, 3);
    sp(1, 0) = std::sqrt(2.0);
    sp(0, 2) = std::sqrt(2.0);
    x = 0.5 * (sp + sp.adjoint());
    y = -0.5 * I_unit * (sp - sp.adjoint());
    z(1, 1) = 1.0;
    z(2, 2) = -1.0;
  }
  const cmat& operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
};

inline cmat spin_hamiltonian(double D, double gamma_e, const Vec3& B) {
  Spin1 s;
  return two_pi * (D * s.z * s.z + gamma_e * (B.x() * s.x + B.y() * s.y + B.z() * s.z));
}

struct MixedBasis {
  Vec3 energies = Vec3::Zero();  // rad/us
  cmat V = cmat::Identity(3, 3);  // columns |0~>, |+1~>, |-1~> in the bare basis
};

// Exact m=0-like eigenvector; the +-1 pair is the Lowdin-orthonormalized projection of |+-1>
// onto its complement, so degenerate +-1 levels are never rotated into each other.
inline MixedBasis mixed_basis(double D, double gamma_e, const Vec3& B) {
  const cmat H = spin_hamiltonian(D, gamma_e, B);
  Eigen::SelfAdjointEigenSolver<cmat> es(H);
  Eigen::Index k;
  es.eigenvectors().row(0).cwiseAbs2().maxCoeff(&k);
  cvec v0 = es.eigenvectors().col(k);
  v0 *= std::polar(1.0, -std::arg(v0(0)));

  cmat Q = cmat::Identity(3, 3) - v0 * v0.adjoint();
  cmat U = Q.rightCols(2);
  Eigen::SelfAdjointEigenSolver<cmat> ov(U.adjoint() * U);
  const Eigen::VectorXd isq = ov.eigenvalues().cwiseSqrt().cwiseInverse();
  U = U * ov.eigenvectors() * isq.asDiagonal() * ov.eigenvectors().adjoint();

  MixedBasis mb;
  mb.V.col(0) = v0;
  mb.V.rightCols(2) = U;
  const cmat Hm = mb.V.adjoint() * H * mb.V;
  for (int i = 0; i < 3; ++i) mb.energies(i) = Hm(i, i).real();
  return mb;
}

struct Jump {
  cmat op;
  double rate;
};

struct ElectronModel {
  ModelKind kind = ModelKind::two_level;
  std::vector<std::string> labels;
  int dim = 0;
  cmat H;
  std::vector<Jump> jumps;
  double R = 0.0;
  cmat Vg = cmat::Identity(3, 3);  // ground/excited basis vectors (seven-level only)
  cmat Ve = cmat::Identity(3, 3);
};

inline cmat ketbra(int d, int i, int j) {
  cmat m = cmat::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

inline ElectronModel build_electron_model(ModelKind kind, const PumpingParams& p,
                                          const FieldSetup& f = {}) {
  for (double r : {p.gamma1, p.gamma_phi, p.gamma_s1, p.gamma_s2, p.gamma_s})
    if (r < 0) throw Error("negative rate");
  ElectronModel m;
  m.kind = kind;
  m.R = p.rate();
  if (m.R < 0) throw Error("negative pumping rate");

  if (kind == ModelKind::two_level) {
    m.dim = 2;
    m.labels = {"g", "e"};
    const double om = p.rabi();
    m.H = p.delta * ketbra(2, 1, 1) + 0.5 * om * (ketbra(2, 1, 0) + ketbra(2, 0, 1));
    m.jumps = {{ketbra(2, 0, 1), p.gamma1}, {ketbra(2, 1, 1), p.gamma_phi}};
    return m;
  }

  m.dim = 7;
  m.labels = {"0_g", "+1_g", "-1_g", "0_e", "+1_e", "-1_e", "S"};
  m.H = cmat::Zero(7, 7);
  using namespace lvl;

  if (kind == ModelKind::seven_level_rate) {
    const MixedBasis mg = mixed_basis(f.D_gs, f.gamma_e, f.B);
    const MixedBasis me = mixed_basis(f.D_es, f.gamma_e, f.B);
    m.Vg = mg.V;
    m.Ve = me.V;
    for (int i = 0; i < 3; ++i) {
      m.H(i, i) = mg.energies(i);
      m.H(3 + i, 3 + i) = me.energies(i) + p.delta;
    }
    for (int i = 0; i < 3; ++i) {
      m.jumps.push_back({ketbra(7, 3 + i, i), m.R});
      m.jumps.push_back({ketbra(7, i, 3 + i), m.R});
    }
  } else if (kind == ModelKind::seven_level_lindblad) {
    m.H.block(0, 0, 3, 3) = spin_hamiltonian(f.D_gs, f.gamma_e, f.B);
    m.H.block(3, 3, 3, 3) = spin_hamiltonian(f.D_es, f.gamma_e, f.B);
    const double om = p.rabi();
    cmat proj_e = cmat::Zero(7, 7);
    for (int i = 0; i < 3; ++i) {
      m.H(3 + i, 3 + i) += p.delta;
      m.H(3 + i, i) += 0.5 * om;
      m.H(i, 3 + i) += 0.5 * om;
      proj_e(3 + i, 3 + i) = 1.0;
    }
    m.jumps.push_back({proj_e, p.gamma_phi});
  } else {
    throw UnknownKind("unknown model kind");
  }

  for (int i = 0; i < 3; ++i) m.jumps.push_back({ketbra(7, i, 3 + i), p.gamma1});
  m.jumps.push_back({ketbra(7, S, ep), p.gamma_s1});
  m.jumps.push_back({ketbra(7, S, em), p.gamma_s1});
  m.jumps.push_back({ketbra(7, g0, S), p.gamma_s});
  m.jumps.push_back({ketbra(7, gp, e0), p.gamma_s2});
  m.jumps.push_back({ketbra(7, gm, e0), p.gamma_s2});
  return m;
}

// a, b in rad/us.
struct PrecessionVectors {
  Vec3 a_g = Vec3::Zero(), a_e = Vec3::Zero(), b_g = Vec3::Zero(), b_e = Vec3::Zero();
  bool weak_mixing_warning = false;
};

inline PrecessionVectors precession_vectors(const FieldSetup& f, const HyperfineTensors& h) {
  const Vec3 BT = f.transverse();
  const double ratio = f.gamma_e * BT.norm() / f.D_es;
  if (ratio > 0.3) throw PerturbationInvalid("transverse field too strong for first-order mixing");
  PrecessionVectors pv;
  pv.weak_mixing_warning = f.gamma_e * BT.norm() / f.D_gs > 0.1 || ratio > 0.1;
  pv.a_g = -two_pi * (2.0 * f.gamma_e / f.D_gs) * (h.A_g.transpose() * BT);
  pv.a_e = -two_pi * (2.0 * f.gamma_e / f.D_es) * (h.A_e.transpose() * BT);
  pv.b_g = two_pi * h.A_g.row(2).transpose();
  pv.b_e = two_pi * h.A_e.row(2).transpose();
  return pv;
}

struct Frame {
  Vec3 eX = Vec3::UnitX(), eY = Vec3::UnitY(), eZ = Vec3::UnitZ();
  double theta = 0.0, phi = 0.0;
  Vec3 wbar = Vec3::Zero();
  bool degenerate = false;

  double omega() const { return wbar.norm(); }
  Vec3 to_frame(const Vec3& v) const { return {v.dot(eX), v.dot(eY), v.dot(eZ)}; }
  Vec3 perp(const Vec3& v) const { return v - v.dot(eZ) * eZ; }
};

inline Frame frame_from(const Vec3& wbar) {
  Frame fr;
  fr.wbar = wbar;
  const double n = wbar.norm();
  if (n < 1e-12) {
    fr.degenerate = true;
    return fr;
  }
  const Vec3 u = wbar / n;
  fr.theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
  fr.phi = std::hypot(u.x(), u.y()) > 1e-14 ? std::atan2(u.y(), u.x()) : pi / 2;
  const double st = std::sin(fr.theta), ct = std::cos(fr.theta);
  const double sp = std::sin(fr.phi), cp = std::cos(fr.phi);
  fr.eZ = {st * cp, st * sp, ct};
  fr.eX = {sp, -cp, 0.0};
  fr.eY = {cp * ct, sp * ct, -st};
  return fr;
}

inline Frame mean_frame(const FieldSetup& f, const PrecessionVectors& pv, double P0g, double P0e) {
  return frame_from(f.nuclear_zeeman() + P0g * pv.a_g + P0e * pv.a_e);
}

inline Frame mean_frame_two_level(const FieldSetup& f, const Vec3& w_g, const Vec3& w_e,
                                  double Pg, double Pe) {
  return frame_from(f.nuclear_zeeman() + Pg * w_g + Pe * w_e);
}

using Coupling = std::array<cmat, 3>;

enum class HyperfineForm { full, diagonal, first_order };

// F_a = sum_b S_{g,b} A_g[b][a] + S_{e,b} A_e[b][a], rad/us, in the model's basis.
inline Coupling hyperfine_operator(const HyperfineTensors& h, const FieldSetup& f,
                                   const ElectronModel& m, HyperfineForm form) {
  if (m.dim != 7) throw Error("hyperfine_operator needs a seven-level model");
  Coupling F;
  if (form == HyperfineForm::first_order) {
    const PrecessionVectors pv = precession_vectors(f, h);
    for (int a = 0; a < 3; ++a) {
      F[a] = cmat::Zero(7, 7);
      F[a](lvl::gp, lvl::gp) = pv.b_g(a);
      F[a](lvl::gm, lvl::gm) = -pv.b_g(a);
      F[a](lvl::ep, lvl::ep) = pv.b_e(a);
      F[a](lvl::em, lvl::em) = -pv.b_e(a);
      F[a](lvl::g0, lvl::g0) = pv.a_g(a);
      F[a](lvl::e0, lvl::e0) = pv.a_e(a);
    }
    return F;
  }
  Spin1 s;
  for (int a = 0; a < 3; ++a) {
    cmat Fg = cmat::Zero(3, 3), Fe = cmat::Zero(3, 3);
    for (int b = 0; b < 3; ++b) {
      Fg += s[b] * h.A_g(b, a);
      Fe += s[b] * h.A_e(b, a);
    }
    F[a] = cmat::Zero(7, 7);
    F[a].block(0, 0, 3, 3) = two_pi * (m.Vg.adjoint() * Fg * m.Vg);
    F[a].block(3, 3, 3, 3) = two_pi * (m.Ve.adjoint() * Fe * m.Ve);
    if (form == HyperfineForm::diagonal) F[a] = cmat(F[a].diagonal().asDiagonal());
  }
  return F;
}

// Full operator with spin flips, or the level-diagonal form (diagonal in the mixed basis for the
// rate model, first-order formula in the bare basis otherwise).
inline Coupling hyperfine_operator(const HyperfineTensors& h, const FieldSetup& f,
                                   const ElectronModel& m, bool include_spin_flip) {
  if (include_spin_flip) return hyperfine_operator(h, f, m, HyperfineForm::full);
  return hyperfine_operator(h, f, m,
                            m.kind == ModelKind::seven_level_rate ? HyperfineForm::diagonal
                                                                  : HyperfineForm::first_order);
}

inline Coupling two_level_coupling(const Vec3& w_g, const Vec3& w_e) {
  Coupling F;
  for (int a = 0; a < 3; ++a) {
    F[a] = cmat::Zero(2, 2);
    F[a](0, 0) = w_g(a);
    F[a](1, 1) = w_e(a);
  }
  return F;
}

inline cmat component(const Coupling& F, const Vec3& n) { return n(0) * F[0] + n(1) * F[1] + n(2) * F[2]; }

}  // namespace nvspin
