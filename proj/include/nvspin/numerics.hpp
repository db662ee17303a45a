#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "errors.hpp"

namespace nvspin {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I_unit{0.0, 1.0};

inline cmat kron(const cmat& A, const cmat& B) { return Eigen::kroneckerProduct(A, B).eval(); }

// column stacking
inline cvec vec(const cmat& M) { return Eigen::Map<const cvec>(M.data(), M.size()); }

inline cmat unvec(const cvec& v, Eigen::Index d) { return Eigen::Map<const cmat>(v.data(), d, d); }

inline Eigen::Index dim_of_superoperator(const cmat& L) {
  auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(L.rows()))));
  if (d * d != L.rows() || L.rows() != L.cols()) throw Error("superoperator is not square in d^2");
  return d;
}

// Left trace functional <vec(I)| as a row.
inline Eigen::RowVectorXcd trace_row(Eigen::Index d) {
  return vec(cmat::Identity(d, d)).transpose();
}

inline cvec nullspace_steady(const cmat& L) {
  const auto d = dim_of_superoperator(L);
  const double normL = L.norm();
  if ((trace_row(d) * L).norm() > 1e-10 * std::max(normL, 1.0))
    throw NotTracePreserving("identity is not a left null vector");

  Eigen::BDCSVD<cmat> svd(L, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const auto n = s.size();
  if (n >= 2 && s(n - 2) <= 1e-8 * s(0))
    throw DegenerateNullspace("second-smallest singular value below threshold");

  cvec v = svd.matrixV().col(n - 1);
  cmat P = unvec(v, d);
  P /= P.trace();
  P = 0.5 * (P + P.adjoint()).eval();
  v = vec(P);
  if ((L * v).norm() > 1e-10 * std::max(normL, 1.0) * v.norm())
    throw DegenerateNullspace("nullspace residual too large");
  return v;
}

// Solves (L - i w) x = rhs; at w = 0 the steady direction is deflated.
inline cvec resolvent_solve(const cmat& L, double omega, const cvec& rhs,
                            const std::optional<cvec>& steady = std::nullopt) {
  const auto d = dim_of_superoperator(L);
  cmat M = L;
  M.diagonal().array() -= I_unit * omega;
  if (omega == 0.0) {
    cvec p = steady ? *steady : nullspace_steady(L);
    M += p * trace_row(d);
  }
  Eigen::PartialPivLU<cmat> lu(M);
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  if (!(lu.rcond() > 1e-15) || !(piv.minCoeff() > 1e-14 * piv.maxCoeff()))
    throw SingularAtFrequency("resolvent is singular");
  cvec x = lu.solve(rhs);
  const double scale = std::max(rhs.norm(), 1e-300);
  if (!((M * x - rhs).norm() <= 1e-10 * scale * std::max(1.0, M.norm() * x.norm() / scale)))
    throw SingularAtFrequency("resolvent residual too large");
  return x;
}

inline cmat propagator(const cmat& L, double dt) { return (L * dt).exp(); }

struct DecayFit {
  double rate = 0.0;
  double frequency = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;
};

namespace detail {

inline std::size_t decay_window_end(const std::vector<double>& env) {
  const double m = *std::max_element(env.begin(), env.end());
  const double floor = m * std::exp(-3.0);
  std::size_t k = 0;
  while (k + 1 < env.size() && env[k + 1] > floor) ++k;
  return k;
}

inline void require_decay(const std::vector<double>& env) {
  const double m = *std::max_element(env.begin(), env.end());
  const double lo = *std::min_element(env.begin(), env.end());
  if (!(lo < m / std::numbers::e)) throw InsufficientDecay("signal decays by less than a factor e");
}

// least squares of ln env against t over [first, last]
inline DecayFit log_linear(const std::vector<double>& t, const std::vector<double>& env,
                           std::size_t first, std::size_t last) {
  const auto n = static_cast<double>(last - first + 1);
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = first; i <= last; ++i) {
    const double y = std::log(env[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double den = n * stt - st * st;
  const double slope = (n * sty - st * sy) / den;
  const double icpt = (sy - slope * st) / n;
  DecayFit f;
  f.rate = std::max(0.0, -slope);
  f.amplitude = std::exp(icpt);
  double ss = 0;
  for (std::size_t i = first; i <= last; ++i) {
    const double e = (env[i] - f.amplitude * std::exp(slope * t[i])) / f.amplitude;
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

inline void check_input(const std::vector<double>& t, std::size_t n_values) {
  if (t.size() != n_values) throw Error("times and values differ in length");
  if (t.size() < 20) throw Error("fit needs at least 20 samples");
}

}  // namespace detail

// |analytic signal|, with an even reflection about t=0 and zero padding at the far end.
inline std::vector<double> analytic_envelope(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> ext;
  ext.reserve(4 * n);
  for (std::size_t i = n - 1; i >= 1; --i) ext.push_back(v[i]);
  ext.insert(ext.end(), v.begin(), v.end());
  ext.resize(4 * n, 0.0);
  const std::size_t N = ext.size();

  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, ext);
  for (std::size_t k = 1; k < N; ++k) {
    if (k < (N + 1) / 2)
      spec[k] *= 2.0;
    else if (!(N % 2 == 0 && k == N / 2))
      spec[k] = 0.0;
  }
  std::vector<cplx> z;
  fft.inv(z, spec);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(z[i + n - 1]);
  return env;
}

inline double zero_crossing_frequency(const std::vector<double>& t, const std::vector<double>& v,
                                      std::size_t last) {
  std::vector<double> cross;
  for (std::size_t i = 0; i < last; ++i) {
    if ((v[i] > 0) != (v[i + 1] > 0)) {
      const double s = v[i] / (v[i] - v[i + 1]);
      cross.push_back(t[i] + s * (t[i + 1] - t[i]));
    }
  }
  if (cross.size() < 2) return 0.0;
  return pi * static_cast<double>(cross.size() - 1) / (cross.back() - cross.front());
}

inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& values,
                          bool oscillatory) {
  detail::check_input(t, values.size());
  if (std::abs(values.front()) < 1e-6 && !oscillatory)
    throw Error("signal starts below the noise floor");

  std::vector<double> env(values.size());
  if (oscillatory)
    env = analytic_envelope(values);
  else
    std::transform(values.begin(), values.end(), env.begin(), [](double x) { return std::abs(x); });
  detail::require_decay(env);
  const std::size_t last = detail::decay_window_end(env);
  if (last < 2) throw InsufficientDecay("decay window too short");
  DecayFit f = detail::log_linear(t, env, 0, last);
  if (oscillatory) f.frequency = zero_crossing_frequency(t, values, last);
  return f;
}

// Envelope |z| and carrier slope of the unwrapped phase of a complex signal.
inline DecayFit fit_complex_decay(const std::vector<double>& t, const std::vector<cplx>& z) {
  detail::check_input(t, z.size());
  std::vector<double> env(z.size());
  std::transform(z.begin(), z.end(), env.begin(), [](cplx c) { return std::abs(c); });
  if (env.front() < 1e-6) throw Error("signal starts below the noise floor");
  detail::require_decay(env);
  const std::size_t last = detail::decay_window_end(env);
  if (last < 2) throw InsufficientDecay("decay window too short");
  DecayFit f = detail::log_linear(t, env, 0, last);

  std::vector<double> ph(last + 1);
  ph[0] = std::arg(z[0]);
  for (std::size_t i = 1; i <= last; ++i) {
    double dp = std::arg(z[i]) - std::arg(z[i - 1]);
    dp -= two_pi * std::round(dp / two_pi);
    ph[i] = ph[i - 1] + dp;
  }
  double st = 0, sp = 0, stt = 0, stp = 0;
  const auto n = static_cast<double>(last + 1);
  for (std::size_t i = 0; i <= last; ++i) {
    st += t[i];
    sp += ph[i];
    stt += t[i] * t[i];
    stp += t[i] * ph[i];
  }
  f.frequency = (n * stp - st * sp) / (n * stt - st * st);
  return f;
}

}  // namespace nvspin
