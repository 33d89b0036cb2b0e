#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "momvar/estimation.hpp"
#include "momvar/inference.hpp"
#include "momvar/realized.hpp"

namespace momvar {

// 17-significant-digit decimal form; shared by all CSV writers so outputs
// are byte-stable golden files.
std::string format_g17(double v);

// Panel CSV: header day_id,rv,tv,fv,tv15,fv15,r_close,r3,r4
void write_panel_csv(const std::string& path, const DailyMomentPanel& panel);
DailyMomentPanel read_panel_csv(const std::string& path);

struct Tick {
  std::int64_t day_id = 0;        // YYYYMMDD (UTC for epoch input)
  double seconds_of_day = 0.0;
  double price = 0.0;
};

// Input CSV: header timestamp,price; ISO-8601 (date[T ]hh:mm:ss[.frac][Z])
// or epoch-seconds timestamps. Throws std::invalid_argument naming the
// offending line on parse errors, non-positive prices or time going
// backwards.
std::vector<Tick> read_tick_csv(const std::string& path);

struct Session {
  int open_minutes = 9 * 60 + 30;  // 09:30
  int close_minutes = 16 * 60;     // 16:00
  int bar_minutes = 5;

  int bars() const { return (close_minutes - open_minutes) / bar_minutes; }
  void validate() const;  // bar width must divide the session length
};

// "HH:MM" -> minutes since midnight.
int parse_clock_minutes(const std::string& hhmm);

struct IngestResult {
  std::vector<IntradayGrid> grids;
  std::vector<std::string> warnings;
};

// Last-price-at-or-before-boundary sampling onto the session bar grid.
// Days missing more than 10% of their bars are dropped with a warning;
// leading gaps are filled with the day's first available price.
IngestResult ingest_and_resample(const std::vector<Tick>& ticks,
                                 const Session& session);

std::string report_to_json(const EstimationReport& rep);
std::string report_to_text(const EstimationReport& rep);
std::string test_result_to_json(const TestResult& res);

}  // namespace momvar
