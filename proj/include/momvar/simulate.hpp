#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "momvar/heston.hpp"
#include "momvar/realized.hpp"

namespace momvar {

enum class Scheme { full_truncation_euler, reflection_euler };

struct SimConfig {
  HestonParams params;
  double horizon = 1.0;  // years
  int steps_per_day = 390;
  std::int64_t n_paths = 1;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::full_truncation_euler;
  int threads = 0;  // 0 = use hardware concurrency

  void validate() const;
};

// dt is exactly 1/(252 * steps_per_day); the horizon is rounded to the
// nearest whole number of steps.
std::int64_t steps_for_horizon(double horizon, int steps_per_day);

// Full per-step record of one path. qv/tv/fv are the running left-point
// Riemann sums of int V ds, 2 int R V ds and 4 int R^2 V ds.
struct PathRecord {
  std::vector<double> times;
  std::vector<double> r;
  std::vector<double> v;
  std::vector<double> qv;
  std::vector<double> tv;
  std::vector<double> fv;
};

std::vector<PathRecord> simulate_paths(const SimConfig& cfg);

// Terminal values of one path, plus (when a bar stride is used) the realized
// finite sums sampled on the bar grid.
struct TerminalStats {
  double r = 0.0;
  double v = 0.0;
  double qv = 0.0;
  double tv = 0.0;
  double fv = 0.0;
  double rrv = 0.0;  // realized variance on the bar grid
  double rtv = 0.0;  // realized third variation on the bar grid
  double rfv = 0.0;  // realized fourth variation on the bar grid
  std::int64_t truncated_steps = 0;
};

// All paths' terminal stats, in path-index order (deterministic for a fixed
// seed regardless of thread count). bar_stride > 0 additionally accumulates
// realized sums every bar_stride steps; it must divide the step count.
std::vector<TerminalStats> simulate_terminals(const SimConfig& cfg,
                                              std::int64_t bar_stride = 0);

enum class McFunctional {
  R3,
  R4,
  QV,
  QV2,
  TV,
  TV15,
  FV,
  FV15,
  RV_at_t,
  R2V_at_t,
  V_at_t,
  V2_at_t,
  V_times_QV,
  BIAS3,  // R^3 - 1.5 tv
  BIAS4,  // R^4 - 1.5 fv
};
inline constexpr int kNumMcFunctionals = 15;

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

struct McSummary {
  std::array<McEstimate, kNumMcFunctionals> estimates{};
  std::int64_t n_paths = 0;
  double truncated_fraction = 0.0;

  const McEstimate& operator[](McFunctional f) const {
    return estimates[static_cast<int>(f)];
  }
};

// One simulation pass, every functional estimated from the same paths.
McSummary mc_summary(const SimConfig& cfg);

// Sample mean and standard error of a single terminal functional.
McEstimate mc_moment(const SimConfig& cfg, McFunctional f);

// Sample variance of the terminal third variation across paths, with a
// leave-one-out jackknife standard error. Requires mu == 0.
McEstimate mc_variance_third_variation(const SimConfig& cfg);

// Synthetic daily panel: variance continuous across days, return reset at
// each day start, realized sums computed on bars_per_day bars from
// floor(steps_per_day/bars_per_day) substeps per bar.
struct SynthPanelResult {
  DailyMomentPanel panel;
  std::vector<IntradayGrid> grids;
  std::vector<double> true_v;  // model variance at each day close
  double truncated_fraction = 0.0;
};

SynthPanelResult synth_panel(const SimConfig& cfg, std::int64_t days,
                             int bars_per_day);

// Running across-path means of the 1.5-scaled realized third variation and
// of R^3 at the given path-count checkpoints (ascending).
struct ConvergeRow {
  std::int64_t n = 0;
  double mean_tv15 = 0.0;
  double se_tv15 = 0.0;
  double mean_r3 = 0.0;
  double se_r3 = 0.0;
};

std::vector<ConvergeRow> converge_table(const SimConfig& cfg, int bars_per_day,
                                        const std::vector<std::int64_t>& checkpoints);

namespace detail {
// Substream seed for one path: depends only on (seed, path index).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index);
}  // namespace detail

}  // namespace momvar
