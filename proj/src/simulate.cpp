#include "momvar/simulate.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "momvar/stats_util.hpp"

namespace momvar {

void SimConfig::validate() const {
  params.validate();
  if (!std::isfinite(horizon) || horizon <= 0.0)
    throw std::invalid_argument("SimConfig: horizon must be > 0");
  if (steps_per_day < 1)
    throw std::invalid_argument("SimConfig: steps_per_day must be >= 1");
  if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
}

std::int64_t steps_for_horizon(double horizon, int steps_per_day) {
  const std::int64_t n =
      std::llround(horizon * kTradingDaysPerYear * steps_per_day);
  return n < 1 ? 1 : n;
}

namespace detail {

namespace {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(path_index + 0x51ed2701ULL));
}

}  // namespace detail

namespace {

// Euler state shared by every driver. The raw variance state x may go
// negative under full truncation; v = max(x, 0) is what enters drift,
// diffusion and the integral accumulators.
struct PathState {
  double x, r, qv, tv, fv;
  std::int64_t truncated;
};

struct StepParams {
  double kappa, theta, gamma, mu, dt, sqrt_dt, mix1, mix2;
  bool reflect;
};

inline StepParams make_step_params(const HestonParams& p, Scheme scheme,
                                   double dt) {
  StepParams sp;
  sp.kappa = p.kappa;
  sp.theta = p.theta;
  sp.gamma = p.gamma;
  sp.mu = p.mu;
  sp.dt = dt;
  sp.sqrt_dt = std::sqrt(dt);
  sp.mix1 = p.rho;
  sp.mix2 = std::sqrt(1.0 - p.rho * p.rho);
  sp.reflect = (scheme == Scheme::reflection_euler);
  return sp;
}

inline void advance(const StepParams& sp, PathState& st, double z1, double z2) {
  const double v = st.x > 0.0 ? st.x : 0.0;
  const double sv = std::sqrt(v);
  // left-point Riemann accumulation over [t, t+dt)
  st.qv += v * sp.dt;
  st.tv += 2.0 * st.r * v * sp.dt;
  st.fv += 4.0 * st.r * st.r * v * sp.dt;

  const double zv = sp.mix1 * z1 + sp.mix2 * z2;
  st.r += sp.mu * sp.dt + sv * sp.sqrt_dt * z1;
  double xn = st.x + sp.kappa * (sp.theta - v) * sp.dt + sp.gamma * sv * sp.sqrt_dt * zv;
  if (xn < 0.0) {
    ++st.truncated;
    if (sp.reflect) xn = -xn;
  }
  st.x = xn;
}

TerminalStats run_terminal_path(const StepParams& sp, double v0,
                                std::int64_t n_steps, std::int64_t bar_stride,
                                std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> gauss;
  PathState st{v0, 0.0, 0.0, 0.0, 0.0, 0};
  TerminalStats out;

  if (bar_stride <= 0) {
    for (std::int64_t i = 0; i < n_steps; ++i)
      advance(sp, st, gauss(eng), gauss(eng));
  } else {
    const std::int64_t n_bars = n_steps / bar_stride;
    double prev_r = 0.0;
    for (std::int64_t b = 0; b < n_bars; ++b) {
      for (std::int64_t s = 0; s < bar_stride; ++s)
        advance(sp, st, gauss(eng), gauss(eng));
      const double dr = st.r - prev_r;
      const double d2 = st.r * st.r - prev_r * prev_r;
      out.rrv += dr * dr;
      out.rtv += dr * d2;
      out.rfv += d2 * d2;
      prev_r = st.r;
    }
  }

  out.r = st.r;
  out.v = st.x > 0.0 ? st.x : 0.0;
  out.qv = st.qv;
  out.tv = st.tv;
  out.fv = st.fv;
  out.truncated_steps = st.truncated;
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace

std::vector<TerminalStats> simulate_terminals(const SimConfig& cfg,
                                              std::int64_t bar_stride) {
  cfg.validate();
  const std::int64_t n_steps = steps_for_horizon(cfg.horizon, cfg.steps_per_day);
  if (bar_stride > 0 && n_steps % bar_stride != 0)
    throw std::invalid_argument(
        "simulate_terminals: bar_stride must divide the step count");

  const StepParams sp = make_step_params(cfg.params, cfg.scheme, 1.0 / (kTradingDaysPerYear * cfg.steps_per_day));
  std::vector<TerminalStats> out(static_cast<std::size_t>(cfg.n_paths));

  const int n_threads = resolve_threads(cfg.threads);
  if (n_threads == 1 || cfg.n_paths < 2) {
    for (std::int64_t i = 0; i < cfg.n_paths; ++i)
      out[static_cast<std::size_t>(i)] = run_terminal_path(
          sp, cfg.params.v0, n_steps, bar_stride, detail::path_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    return out;
  }

  // Each path's output slot and seed depend only on its index, so any
  // scheduling of the chunks yields identical results.
  constexpr std::int64_t kChunk = 256;
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t begin = next.fetch_add(kChunk);
      if (begin >= cfg.n_paths) return;
      const std::int64_t end = std::min(begin + kChunk, cfg.n_paths);
      for (std::int64_t i = begin; i < end; ++i)
        out[static_cast<std::size_t>(i)] = run_terminal_path(
            sp, cfg.params.v0, n_steps, bar_stride, detail::path_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

std::vector<PathRecord> simulate_paths(const SimConfig& cfg) {
  cfg.validate();
  const std::int64_t n_steps = steps_for_horizon(cfg.horizon, cfg.steps_per_day);
  const double dt = 1.0 / (kTradingDaysPerYear * cfg.steps_per_day);
  const StepParams sp = make_step_params(cfg.params, cfg.scheme, dt);

  std::vector<PathRecord> paths(static_cast<std::size_t>(cfg.n_paths));
  for (std::int64_t p = 0; p < cfg.n_paths; ++p) {
    std::mt19937_64 eng(detail::path_seed(cfg.seed, static_cast<std::uint64_t>(p)));
    std::normal_distribution<double> gauss;
    PathRecord& rec = paths[static_cast<std::size_t>(p)];
    const std::size_t n = static_cast<std::size_t>(n_steps) + 1;
    rec.times.resize(n);
    rec.r.resize(n);
    rec.v.resize(n);
    rec.qv.resize(n);
    rec.tv.resize(n);
    rec.fv.resize(n);

    PathState st{cfg.params.v0, 0.0, 0.0, 0.0, 0.0, 0};
    rec.times[0] = 0.0;
    rec.r[0] = 0.0;
    rec.v[0] = cfg.params.v0;
    rec.qv[0] = rec.tv[0] = rec.fv[0] = 0.0;
    for (std::int64_t i = 1; i <= n_steps; ++i) {
      advance(sp, st, gauss(eng), gauss(eng));
      const std::size_t j = static_cast<std::size_t>(i);
      rec.times[j] = static_cast<double>(i) * dt;
      rec.r[j] = st.r;
      rec.v[j] = st.x > 0.0 ? st.x : 0.0;
      rec.qv[j] = st.qv;
      rec.tv[j] = st.tv;
      rec.fv[j] = st.fv;
    }
  }
  return paths;
}

namespace {

double functional_value(const TerminalStats& t, McFunctional f) {
  switch (f) {
    case McFunctional::R3:
      return t.r * t.r * t.r;
    case McFunctional::R4:
      return t.r * t.r * t.r * t.r;
    case McFunctional::QV:
      return t.qv;
    case McFunctional::QV2:
      return t.qv * t.qv;
    case McFunctional::TV:
      return t.tv;
    case McFunctional::TV15:
      return 1.5 * t.tv;
    case McFunctional::FV:
      return t.fv;
    case McFunctional::FV15:
      return 1.5 * t.fv;
    case McFunctional::RV_at_t:
      return t.r * t.v;
    case McFunctional::R2V_at_t:
      return t.r * t.r * t.v;
    case McFunctional::V_at_t:
      return t.v;
    case McFunctional::V2_at_t:
      return t.v * t.v;
    case McFunctional::V_times_QV:
      return t.v * t.qv;
    case McFunctional::BIAS3:
      return t.r * t.r * t.r - 1.5 * t.tv;
    case McFunctional::BIAS4:
      return t.r * t.r * t.r * t.r - 1.5 * t.fv;
  }
  return 0.0;
}

}  // namespace

McSummary mc_summary(const SimConfig& cfg) {
  const std::vector<TerminalStats> terms = simulate_terminals(cfg);
  const std::int64_t n_steps = steps_for_horizon(cfg.horizon, cfg.steps_per_day);

  McSummary s;
  s.n_paths = cfg.n_paths;
  const double n = static_cast<double>(cfg.n_paths);
  std::array<double, kNumMcFunctionals> sum{}, sumsq{};
  std::int64_t truncated = 0;
  for (const TerminalStats& t : terms) {
    truncated += t.truncated_steps;
    for (int f = 0; f < kNumMcFunctionals; ++f) {
      const double v = functional_value(t, static_cast<McFunctional>(f));
      sum[static_cast<std::size_t>(f)] += v;
      sumsq[static_cast<std::size_t>(f)] += v * v;
    }
  }
  for (int f = 0; f < kNumMcFunctionals; ++f) {
    const double m = sum[static_cast<std::size_t>(f)] / n;
    double var = 0.0;
    if (cfg.n_paths > 1)
      var = (sumsq[static_cast<std::size_t>(f)] - n * m * m) / (n - 1.0);
    if (var < 0.0) var = 0.0;
    s.estimates[static_cast<std::size_t>(f)] = {m, std::sqrt(var / n)};
  }
  s.truncated_fraction =
      static_cast<double>(truncated) / (n * static_cast<double>(n_steps));
  return s;
}

McEstimate mc_moment(const SimConfig& cfg, McFunctional f) {
  return mc_summary(cfg)[f];
}

McEstimate mc_variance_third_variation(const SimConfig& cfg) {
  if (cfg.params.mu != 0.0)
    throw std::invalid_argument("mc_variance_third_variation: requires mu == 0");
  if (cfg.n_paths < 3)
    throw std::invalid_argument("mc_variance_third_variation: need n_paths >= 3");
  const std::vector<TerminalStats> terms = simulate_terminals(cfg);
  const std::size_t n = terms.size();
  std::vector<double> tv(n);
  for (std::size_t i = 0; i < n; ++i) tv[i] = terms[i].tv;

  double s1 = 0.0, s2 = 0.0;
  for (double v : tv) {
    s1 += v;
    s2 += v * v;
  }
  const double nn = static_cast<double>(n);
  const double var = (s2 - s1 * s1 / nn) / (nn - 1.0);

  // Leave-one-out jackknife over the sample-variance statistic.
  double loo_sum = 0.0;
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s1i = s1 - tv[i];
    const double s2i = s2 - tv[i] * tv[i];
    loo[i] = (s2i - s1i * s1i / (nn - 1.0)) / (nn - 2.0);
    loo_sum += loo[i];
  }
  const double loo_mean = loo_sum / nn;
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  const double se = std::sqrt((nn - 1.0) / nn * ss);
  return {var, se};
}

SynthPanelResult synth_panel(const SimConfig& cfg, std::int64_t days,
                             int bars_per_day) {
  cfg.validate();
  if (days < 1) throw std::invalid_argument("synth_panel: days must be >= 1");
  if (bars_per_day < 1)
    throw std::invalid_argument("synth_panel: bars_per_day must be >= 1");

  const int substeps = std::max(1, cfg.steps_per_day / bars_per_day);
  const int eff_steps_per_day = substeps * bars_per_day;
  const double dt = 1.0 / (kTradingDaysPerYear * eff_steps_per_day);
  const StepParams sp = make_step_params(cfg.params, cfg.scheme, dt);

  std::mt19937_64 eng(detail::path_seed(cfg.seed, 0));
  std::normal_distribution<double> gauss;
  PathState st{cfg.params.v0, 0.0, 0.0, 0.0, 0.0, 0};

  SynthPanelResult out;
  out.grids.reserve(static_cast<std::size_t>(days));
  out.true_v.reserve(static_cast<std::size_t>(days));
  for (std::int64_t day = 0; day < days; ++day) {
    IntradayGrid grid;
    grid.day_id = day + 1;
    grid.log_prices.reserve(static_cast<std::size_t>(bars_per_day) + 1);
    grid.log_prices.push_back(st.r);
    for (int b = 0; b < bars_per_day; ++b) {
      for (int s = 0; s < substeps; ++s) advance(sp, st, gauss(eng), gauss(eng));
      grid.log_prices.push_back(st.r);
    }
    out.true_v.push_back(st.x > 0.0 ? st.x : 0.0);
    out.grids.push_back(std::move(grid));
  }
  out.panel = build_panel(out.grids);
  out.truncated_fraction =
      static_cast<double>(st.truncated) /
      static_cast<double>(days * static_cast<std::int64_t>(eff_steps_per_day));
  return out;
}

std::vector<ConvergeRow> converge_table(const SimConfig& cfg, int bars_per_day,
                                        const std::vector<std::int64_t>& checkpoints) {
  cfg.validate();
  if (bars_per_day < 1)
    throw std::invalid_argument("converge_table: bars_per_day must be >= 1");
  const std::int64_t n_steps = steps_for_horizon(cfg.horizon, cfg.steps_per_day);
  const std::int64_t n_bars =
      std::llround(cfg.horizon * kTradingDaysPerYear * bars_per_day);
  std::int64_t stride = n_bars > 0 ? n_steps / n_bars : 0;
  if (stride < 1 || n_steps % n_bars != 0)
    throw std::invalid_argument(
        "converge_table: bars_per_day must subdivide steps_per_day");

  const std::vector<TerminalStats> terms = simulate_terminals(cfg, stride);

  std::vector<ConvergeRow> rows;
  rows.reserve(checkpoints.size());
  double s1_tv = 0.0, s2_tv = 0.0, s1_r3 = 0.0, s2_r3 = 0.0;
  std::size_t done = 0;
  for (std::int64_t cp : checkpoints) {
    if (cp < 1 || cp > cfg.n_paths)
      throw std::invalid_argument("converge_table: checkpoint out of range");
    for (; done < static_cast<std::size_t>(cp); ++done) {
      const double tv15 = 1.5 * terms[done].rtv;
      const double r3 = terms[done].r * terms[done].r * terms[done].r;
      s1_tv += tv15;
      s2_tv += tv15 * tv15;
      s1_r3 += r3;
      s2_r3 += r3 * r3;
    }
    const double n = static_cast<double>(cp);
    ConvergeRow row;
    row.n = cp;
    row.mean_tv15 = s1_tv / n;
    row.mean_r3 = s1_r3 / n;
    if (cp > 1) {
      row.se_tv15 = std::sqrt(std::max(0.0, (s2_tv - n * row.mean_tv15 * row.mean_tv15) / (n - 1.0)) / n);
      row.se_r3 = std::sqrt(std::max(0.0, (s2_r3 - n * row.mean_r3 * row.mean_r3) / (n - 1.0)) / n);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace momvar
