#pragma once

#include <cstdint>
#include <future>
#include <random>
#include <thread>

#include "model.hpp"

namespace nvspin {

// K(i, j) is the rate j -> i; freq[i] is the nuclear precession vector in level i (rad/us).
struct TelegraphModel {
  Eigen::MatrixXd K;
  std::vector<Vec3> freq;

  int levels() const { return static_cast<int>(K.rows()); }

  void validate() const {
    for (int j = 0; j < levels(); ++j) {
      if (std::abs(K.col(j).sum()) > 1e-9 * std::max(1.0, K.cwiseAbs().maxCoeff()))
        throw Error("rate matrix columns must sum to zero");
      for (int i = 0; i < levels(); ++i)
        if (i != j && K(i, j) < 0) throw Error("negative transition rate");
    }
  }

  std::vector<double> stationary() const {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    Eigen::MatrixXd ker = lu.kernel();
    Eigen::VectorXd p = ker.col(0).cwiseAbs();
    p /= p.sum();
    return {p.data(), p.data() + p.size()};
  }
};

inline TelegraphModel telegraph_two_level(double R, double gamma1, const Vec3& w_g, const Vec3& w_e,
                                          const Vec3& zeeman = Vec3::Zero()) {
  TelegraphModel tm;
  tm.K = Eigen::MatrixXd::Zero(2, 2);
  tm.K(1, 0) = R;
  tm.K(0, 1) = gamma1 + R;
  tm.K(0, 0) = -R;
  tm.K(1, 1) = -(gamma1 + R);
  tm.freq = {zeeman + w_g, zeeman + w_e};
  return tm;
}

// Incoherent level graph of a rate model with level-diagonal coupling.
inline TelegraphModel telegraph_from_model(const ElectronModel& m, const Coupling& F, const FieldSetup& f) {
  TelegraphModel tm;
  tm.K = Eigen::MatrixXd::Zero(m.dim, m.dim);
  for (const auto& j : m.jumps) {
    for (int a = 0; a < m.dim; ++a)
      for (int b = 0; b < m.dim; ++b) {
        const double w = std::norm(j.op(a, b)) * j.rate;
        if (a != b && w > 0) {
          tm.K(a, b) += w;
          tm.K(b, b) -= w;
        }
      }
  }
  const Vec3 wz = f.nuclear_zeeman();
  for (int i = 0; i < m.dim; ++i) tm.freq.push_back(wz + Vec3(F[0](i, i).real(), F[1](i, i).real(), F[2](i, i).real()));
  return tm;
}

struct HoppingPath {
  std::vector<double> jump_times;
  std::vector<int> levels;  // levels[0] initial, levels[k+1] after jump_times[k]
};

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(sq);
}

namespace detail {

struct PathSampler {
  const TelegraphModel& tm;
  std::vector<double> start;
  std::vector<double> exit_rate;

  explicit PathSampler(const TelegraphModel& t) : tm(t), start(t.stationary()) {
    for (int i = 0; i < tm.levels(); ++i) exit_rate.push_back(-tm.K(i, i));
  }

  int initial(std::mt19937_64& rng) const {
    std::discrete_distribution<int> d(start.begin(), start.end());
    return d(rng);
  }

  // returns dwell time (inf if absorbing) and writes the next level
  double step(int level, std::mt19937_64& rng, int& next) const {
    const double q = exit_rate[static_cast<std::size_t>(level)];
    if (q <= 0) {
      next = level;
      return std::numeric_limits<double>::infinity();
    }
    std::exponential_distribution<double> ex(q);
    const double dt = ex(rng);
    std::uniform_real_distribution<double> u(0.0, q);
    double x = u(rng);
    next = level;
    for (int i = 0; i < tm.levels(); ++i) {
      if (i == level) continue;
      x -= tm.K(i, level);
      next = i;
      if (x < 0) break;
    }
    return dt;
  }
};

}  // namespace detail

inline HoppingPath sample_path(const TelegraphModel& tm, double t_max, std::uint64_t seed, std::uint64_t index) {
  detail::PathSampler ps(tm);
  auto rng = substream(seed, index);
  HoppingPath p;
  int level = ps.initial(rng);
  p.levels.push_back(level);
  double t = 0.0;
  for (;;) {
    int next;
    t += ps.step(level, rng, next);
    if (!(t < t_max)) break;
    p.jump_times.push_back(t);
    p.levels.push_back(next);
    level = next;
  }
  return p;
}

inline std::vector<HoppingPath> sample_paths(const TelegraphModel& tm, double t_max, std::size_t n,
                                             std::uint64_t seed) {
  tm.validate();
  std::vector<HoppingPath> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(sample_path(tm, t_max, seed, k));
  return out;
}

struct DwellEstimate {
  double T = 0.0, T_se = 0.0;
  double tau = 0.0, tau_se = 0.0;
  std::size_t cycles = 0;
};

// Complete cycles start on entry into `ground`. tau is the rms of (excited dwell - P_e * cycle length).
inline DwellEstimate dwell_statistics(const std::vector<HoppingPath>& paths, int ground) {
  std::vector<double> Tk, Ek;
  for (const auto& p : paths) {
    const std::size_t nj = p.jump_times.size();
    std::size_t k = 1;
    while (k <= nj && p.levels[k] != ground) ++k;
    if (k > nj) continue;
    double t0 = p.jump_times[k - 1], exc = 0.0;
    for (++k; k <= nj; ++k) {
      if (p.levels[k] == ground) {
        const double t1 = p.jump_times[k - 1];
        Tk.push_back(t1 - t0);
        Ek.push_back(exc);
        t0 = t1;
        exc = 0.0;
      } else if (k < nj) {
        exc += p.jump_times[k] - p.jump_times[k - 1];
      }
    }
  }
  DwellEstimate d;
  d.cycles = Tk.size();
  if (d.cycles < 2) throw StatisticsTooPoor("fewer than two complete cycles");
  const double n = static_cast<double>(d.cycles);
  double sT = 0, sE = 0;
  for (std::size_t i = 0; i < Tk.size(); ++i) {
    sT += Tk[i];
    sE += Ek[i];
  }
  d.T = sT / n;
  const double Pe = sE / sT;
  double vT = 0, s2 = 0, s4 = 0;
  for (std::size_t i = 0; i < Tk.size(); ++i) {
    vT += (Tk[i] - d.T) * (Tk[i] - d.T);
    const double x = Ek[i] - Pe * Tk[i];
    s2 += x * x;
    s4 += x * x * x * x;
  }
  d.T_se = std::sqrt(vT / (n - 1) / n);
  const double m2 = s2 / n;
  d.tau = std::sqrt(m2);
  const double var_m2 = std::max(0.0, s4 / n - m2 * m2) / n;
  d.tau_se = 0.5 * std::sqrt(var_m2) / d.tau;
  return d;
}

struct OracleEstimate {
  double gamma_phi = 0.0, gamma_phi_se = 0.0;
  double relaxation = 0.0, relaxation_se = 0.0;  // 1/T1
  std::vector<double> times;
  std::vector<double> coherence;     // |<exp(-i phi_Z)>|
  std::vector<double> longitudinal;  // <s . e_Z>
};

namespace detail {

inline Vec3 rotate(const Vec3& s, const Vec3& w, double dt) {
  const double n = w.norm();
  if (n == 0.0) return s;
  const Vec3 k = w / n;
  const double a = n * dt, c = std::cos(a), sn = std::sin(a);
  return s * c + k.cross(s) * sn + k * k.dot(s) * (1 - c);
}

struct Accumulator {
  std::vector<cplx> phasor;
  std::vector<double> lon;
  explicit Accumulator(std::size_t n) : phasor(n, 0.0), lon(n, 0.0) {}
  void add(const Accumulator& o) {
    for (std::size_t i = 0; i < phasor.size(); ++i) {
      phasor[i] += o.phasor[i];
      lon[i] += o.lon[i];
    }
  }
};

// Integrates the phase along e_Z and rotates a classical spin started along e_Z.
template <class Source>
inline void integrate_path(const TelegraphModel& tm, const Vec3& eZ, const std::vector<double>& times,
                           Source&& next_segment, Accumulator& acc) {
  double t = 0.0, phase = 0.0;
  Vec3 s = eZ;
  std::size_t i = 0;
  int level;
  double t_end;
  while (i < times.size()) {
    next_segment(level, t_end);
    const Vec3& w = tm.freq[static_cast<std::size_t>(level)];
    const double wz = w.dot(eZ);
    while (i < times.size() && times[i] <= t_end) {
      const double dt = times[i] - t;
      const double ph = phase + wz * dt;
      acc.phasor[i] += std::polar(1.0, -ph);
      acc.lon[i] += rotate(s, w, dt).dot(eZ);
      ++i;
    }
    if (i >= times.size()) break;
    phase += wz * (t_end - t);
    s = rotate(s, w, t_end - t);
    t = t_end;
  }
}

inline std::pair<double, double> log_slope(const std::vector<double>& t, const std::vector<double>& y,
                                           const std::vector<std::size_t>& idx) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (auto i : idx) {
    const double ly = std::log(std::max(y[i], 1e-300));
    n += 1;
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return {-slope, (sy - slope * st) / n};
}

inline std::vector<std::size_t> fit_window(const std::vector<double>& y) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] < std::exp(-2.5)) break;
    if (y[i] < std::exp(-0.1)) idx.push_back(i);
  }
  return idx;
}

}  // namespace detail

struct OracleOptions {
  std::size_t samples = 200;
  std::size_t batches = 20;
  unsigned threads = 0;  // 0: hardware concurrency
};

inline OracleEstimate summarize(const std::vector<detail::Accumulator>& batch, std::size_t per_batch,
                                const std::vector<double>& times) {
  detail::Accumulator total(times.size());
  for (const auto& b : batch) total.add(b);
  const double n = static_cast<double>(per_batch * batch.size());
  OracleEstimate e;
  e.times = times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    e.coherence.push_back(std::abs(total.phasor[i]) / n);
    e.longitudinal.push_back(total.lon[i] / n);
  }
  const auto wc = detail::fit_window(e.coherence);
  const auto wl = detail::fit_window(e.longitudinal);
  auto estimate = [&](const std::vector<std::size_t>& w, bool coh, double& val, double& se) {
    if (w.size() < 3) {
      val = 0.0;
      se = std::numeric_limits<double>::infinity();
      return;
    }
    val = detail::log_slope(times, coh ? e.coherence : e.longitudinal, w).first;
    std::vector<double> g;
    for (const auto& b : batch) {
      std::vector<double> y(times.size());
      for (std::size_t i = 0; i < times.size(); ++i)
        y[i] = coh ? std::abs(b.phasor[i]) / static_cast<double>(per_batch) : b.lon[i] / static_cast<double>(per_batch);
      g.push_back(detail::log_slope(times, y, w).first);
    }
    double m = 0, v = 0;
    for (double x : g) m += x;
    m /= static_cast<double>(g.size());
    for (double x : g) v += (x - m) * (x - m);
    se = std::sqrt(v / static_cast<double>(g.size() - 1) / static_cast<double>(g.size()));
  };
  estimate(wc, true, e.gamma_phi, e.gamma_phi_se);
  estimate(wl, false, e.relaxation, e.relaxation_se);
  return e;
}

inline void check_statistics(const OracleEstimate& e) {
  if (!(e.gamma_phi_se <= 0.2 * e.gamma_phi) || !(e.relaxation_se <= 0.2 * e.relaxation))
    throw StatisticsTooPoor("relative standard error above 20%");
}

// Streams n paths on a uniform sampling grid over [0, t_max].
inline OracleEstimate dephasing_estimate(const TelegraphModel& tm, const Frame& fr, double t_max, std::size_t n,
                                         std::uint64_t seed, const OracleOptions& o = {},
                                         bool require_precision = true) {
  tm.validate();
  std::vector<double> times(o.samples);
  for (std::size_t i = 0; i < o.samples; ++i) times[i] = t_max * static_cast<double>(i) / static_cast<double>(o.samples - 1);
  const std::size_t nb = o.batches, per = n / nb;
  if (per == 0) throw Error("fewer paths than batches");
  detail::PathSampler ps(tm);

  auto run_batch = [&](std::size_t b) {
    detail::Accumulator acc(times.size());
    for (std::size_t k = b * per; k < (b + 1) * per; ++k) {
      auto rng = substream(seed, k);
      int level = ps.initial(rng);
      double t = 0.0;
      auto next = [&](int& lv, double& t_end) {
        int nxt;
        const double dt = ps.step(level, rng, nxt);
        lv = level;
        t += dt;
        t_end = t;
        level = nxt;
      };
      detail::integrate_path(tm, fr.eZ, times, next, acc);
    }
    return acc;
  };

  std::vector<detail::Accumulator> batch;
  unsigned th = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
  if (th <= 1) {
    for (std::size_t b = 0; b < nb; ++b) batch.push_back(run_batch(b));
  } else {
    std::vector<std::future<detail::Accumulator>> fut;
    for (std::size_t b = 0; b < nb; ++b) fut.push_back(std::async(std::launch::async, run_batch, b));
    for (auto& f : fut) batch.push_back(f.get());
  }
  OracleEstimate e = summarize(batch, per, times);
  if (require_precision) check_statistics(e);
  return e;
}

// Same estimate from materialized paths.
inline OracleEstimate dephasing_estimate(const std::vector<HoppingPath>& paths, const TelegraphModel& tm,
                                         const Frame& fr, double t_max, const OracleOptions& o = {},
                                         bool require_precision = true) {
  std::vector<double> times(o.samples);
  for (std::size_t i = 0; i < o.samples; ++i) times[i] = t_max * static_cast<double>(i) / static_cast<double>(o.samples - 1);
  const std::size_t nb = o.batches, per = paths.size() / nb;
  if (per == 0) throw Error("fewer paths than batches");
  std::vector<detail::Accumulator> batch;
  for (std::size_t b = 0; b < nb; ++b) {
    detail::Accumulator acc(times.size());
    for (std::size_t k = b * per; k < (b + 1) * per; ++k) {
      const auto& p = paths[k];
      std::size_t seg = 0;
      auto next = [&](int& lv, double& t_end) {
        lv = p.levels[seg];
        t_end = seg < p.jump_times.size() ? p.jump_times[seg] : std::numeric_limits<double>::infinity();
        ++seg;
      };
      detail::integrate_path(tm, fr.eZ, times, next, acc);
    }
    batch.push_back(std::move(acc));
  }
  OracleEstimate e = summarize(batch, per, times);
  if (require_precision) check_statistics(e);
  return e;
}

}  // namespace nvspin
