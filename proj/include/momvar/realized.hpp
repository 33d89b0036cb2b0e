#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace momvar {

// One day's equally spaced log-price observations (N+1 points for N bars).
struct IntradayGrid {
  std::int64_t day_id = 0;
  std::vector<double> log_prices;
};

// Per-day realized moment series. tv and fv are the raw finite sums; the
// estimator scaling by 1.5 is exposed through tv15()/fv15().
struct DailyMomentPanel {
  std::vector<std::int64_t> day_id;
  std::vector<double> rv;       // sum (dR)^2
  std::vector<double> tv;       // sum dR * d(R^2)
  std::vector<double> fv;       // sum (d(R^2))^2
  std::vector<double> r_close;  // day's total log return

  std::size_t size() const { return rv.size(); }

  std::vector<double> tv15() const;  // 1.5 * tv
  std::vector<double> fv15() const;  // 1.5 * fv
  std::vector<double> r3() const;    // r_close^3
  std::vector<double> r4() const;    // r_close^4
};

// Finite-sum realized moments of one day. Within-day returns are taken
// against the day's first observation, so overnight gaps never enter.
// Throw std::invalid_argument on fewer than 2 points or non-finite prices.
double realized_variance(const IntradayGrid& g);
double realized_third(const IntradayGrid& g);
double realized_fourth(const IntradayGrid& g);

// Assembles the per-day panel; errors name the offending day_id.
DailyMomentPanel build_panel(std::span<const IntradayGrid> days);

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;  // n-1 denominator
};

struct PanelStats {
  ColumnStats rv, tv, fv, tv15, fv15, r_close, r3, r4;
};

// Requires at least 2 days.
PanelStats summary_stats(const DailyMomentPanel& panel);

}  // namespace momvar
