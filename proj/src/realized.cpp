#include "momvar/realized.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "momvar/stats_util.hpp"

namespace momvar {

namespace {

void check_grid(const IntradayGrid& g) {
  if (g.log_prices.size() < 2)
    throw std::invalid_argument("IntradayGrid: need at least 2 observations (day " +
                                std::to_string(g.day_id) + ")");
  for (double p : g.log_prices)
    if (!std::isfinite(p))
      throw std::invalid_argument("IntradayGrid: non-finite log price (day " +
                                  std::to_string(g.day_id) + ")");
}

}  // namespace

std::vector<double> DailyMomentPanel::tv15() const {
  std::vector<double> out(tv.size());
  for (std::size_t i = 0; i < tv.size(); ++i) out[i] = 1.5 * tv[i];
  return out;
}

std::vector<double> DailyMomentPanel::fv15() const {
  std::vector<double> out(fv.size());
  for (std::size_t i = 0; i < fv.size(); ++i) out[i] = 1.5 * fv[i];
  return out;
}

std::vector<double> DailyMomentPanel::r3() const {
  std::vector<double> out(r_close.size());
  for (std::size_t i = 0; i < r_close.size(); ++i)
    out[i] = r_close[i] * r_close[i] * r_close[i];
  return out;
}

std::vector<double> DailyMomentPanel::r4() const {
  std::vector<double> out(r_close.size());
  for (std::size_t i = 0; i < r_close.size(); ++i) {
    const double r2 = r_close[i] * r_close[i];
    out[i] = r2 * r2;
  }
  return out;
}

double realized_variance(const IntradayGrid& g) {
  check_grid(g);
  const double open = g.log_prices.front();
  double sum = 0.0;
  double prev = 0.0;  // R_0 = 0 at day start
  for (std::size_t i = 1; i < g.log_prices.size(); ++i) {
    const double r = g.log_prices[i] - open;
    const double dr = r - prev;
    sum += dr * dr;
    prev = r;
  }
  return sum;
}

double realized_third(const IntradayGrid& g) {
  check_grid(g);
  const double open = g.log_prices.front();
  double sum = 0.0;
  double prev = 0.0;
  for (std::size_t i = 1; i < g.log_prices.size(); ++i) {
    const double r = g.log_prices[i] - open;
    sum += (r - prev) * (r * r - prev * prev);
    prev = r;
  }
  return sum;
}

double realized_fourth(const IntradayGrid& g) {
  check_grid(g);
  const double open = g.log_prices.front();
  double sum = 0.0;
  double prev = 0.0;
  for (std::size_t i = 1; i < g.log_prices.size(); ++i) {
    const double r = g.log_prices[i] - open;
    const double d2 = r * r - prev * prev;
    sum += d2 * d2;
    prev = r;
  }
  return sum;
}

DailyMomentPanel build_panel(std::span<const IntradayGrid> days) {
  DailyMomentPanel panel;
  panel.day_id.reserve(days.size());
  panel.rv.reserve(days.size());
  panel.tv.reserve(days.size());
  panel.fv.reserve(days.size());
  panel.r_close.reserve(days.size());
  for (const IntradayGrid& g : days) {
    check_grid(g);
    panel.day_id.push_back(g.day_id);
    panel.rv.push_back(realized_variance(g));
    panel.tv.push_back(realized_third(g));
    panel.fv.push_back(realized_fourth(g));
    panel.r_close.push_back(g.log_prices.back() - g.log_prices.front());
  }
  return panel;
}

PanelStats summary_stats(const DailyMomentPanel& panel) {
  if (panel.size() < 2)
    throw std::invalid_argument("summary_stats: need at least 2 days");
  const auto col = [](const std::vector<double>& v) {
    return ColumnStats{mean(v), sample_sd(v)};
  };
  PanelStats s;
  s.rv = col(panel.rv);
  s.tv = col(panel.tv);
  s.fv = col(panel.fv);
  s.tv15 = col(panel.tv15());
  s.fv15 = col(panel.fv15());
  s.r_close = col(panel.r_close);
  s.r3 = col(panel.r3());
  s.r4 = col(panel.r4());
  return s;
}

}  // namespace momvar
