#include "momvar/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace momvar {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_panel_csv(const std::string& path, const DailyMomentPanel& panel) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_panel_csv: cannot open " + path);
  out << "day_id,rv,tv,fv,tv15,fv15,r_close,r3,r4\n";
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const double r = panel.r_close[i];
    out << panel.day_id[i] << ',' << format_g17(panel.rv[i]) << ','
        << format_g17(panel.tv[i]) << ',' << format_g17(panel.fv[i]) << ','
        << format_g17(1.5 * panel.tv[i]) << ',' << format_g17(1.5 * panel.fv[i])
        << ',' << format_g17(r) << ',' << format_g17(r * r * r) << ','
        << format_g17(r * r * r * r) << '\n';
  }
  if (!out) throw std::invalid_argument("write_panel_csv: write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("line ") + std::to_string(line_no) +
                                ": cannot parse " + what + " '" + s + "'");
  }
}

// Proleptic Gregorian day count (days since 1970-01-01); standard
// civil-calendar conversion.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int* y, int* m, int* d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  *m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  *y = static_cast<int>(yy + (*m <= 2));
}

bool parse_timestamp(const std::string& s, std::int64_t* day_id, double* seconds) {
  // ISO-8601 with '-' separators, otherwise numeric epoch seconds.
  if (s.find('-', 1) != std::string::npos) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    char sep = 0;
    const int got = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d,
                                &sep, &h, &mi, &sec);
    if (got < 3) return false;
    if (got >= 4 && sep != 'T' && sep != ' ') return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0)
      return false;
    *day_id = static_cast<std::int64_t>(y) * 10000 + mo * 100 + d;
    *seconds = h * 3600.0 + mi * 60.0 + sec;
    return true;
  }
  try {
    std::size_t pos = 0;
    const double epoch = std::stod(s, &pos);
    if (pos != s.size()) return false;
    const std::int64_t day = static_cast<std::int64_t>(std::floor(epoch / 86400.0));
    int y, mo, d;
    civil_from_days(day, &y, &mo, &d);
    *day_id = static_cast<std::int64_t>(y) * 10000 + mo * 100 + d;
    *seconds = epoch - static_cast<double>(day) * 86400.0;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

DailyMomentPanel read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_panel_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("read_panel_csv: empty file " + path);
  if (line.rfind("day_id,rv,tv,fv", 0) != 0)
    throw std::invalid_argument("read_panel_csv: unexpected header '" + line + "'");

  DailyMomentPanel panel;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 9)
      throw std::invalid_argument("read_panel_csv: line " + std::to_string(line_no) +
                                  ": expected 9 columns");
    panel.day_id.push_back(
        static_cast<std::int64_t>(parse_double(f[0], line_no, "day_id")));
    panel.rv.push_back(parse_double(f[1], line_no, "rv"));
    panel.tv.push_back(parse_double(f[2], line_no, "tv"));
    panel.fv.push_back(parse_double(f[3], line_no, "fv"));
    panel.r_close.push_back(parse_double(f[6], line_no, "r_close"));
  }
  return panel;
}

std::vector<Tick> read_tick_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_tick_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("read_tick_csv: empty file " + path);
  if (line.rfind("timestamp,price", 0) != 0)
    throw std::invalid_argument("read_tick_csv: expected header 'timestamp,price', got '" +
                                line + "'");

  std::vector<Tick> ticks;
  int line_no = 1;
  std::int64_t prev_day = -1;
  double prev_sec = -1.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2)
      throw std::invalid_argument("read_tick_csv: line " + std::to_string(line_no) +
                                  ": expected 2 columns");
    Tick t;
    if (!parse_timestamp(f[0], &t.day_id, &t.seconds_of_day))
      throw std::invalid_argument("read_tick_csv: line " + std::to_string(line_no) +
                                  ": cannot parse timestamp '" + f[0] + "'");
    t.price = parse_double(f[1], line_no, "price");
    if (!(t.price > 0.0))
      throw std::invalid_argument("read_tick_csv: line " + std::to_string(line_no) +
                                  ": price must be > 0");
    if (t.day_id < prev_day ||
        (t.day_id == prev_day && t.seconds_of_day < prev_sec))
      throw std::invalid_argument("read_tick_csv: line " + std::to_string(line_no) +
                                  ": timestamps must be non-decreasing");
    prev_day = t.day_id;
    prev_sec = t.seconds_of_day;
    ticks.push_back(t);
  }
  if (ticks.empty())
    throw std::invalid_argument("read_tick_csv: no data rows in " + path);
  return ticks;
}

void Session::validate() const {
  if (open_minutes < 0 || close_minutes <= open_minutes)
    throw std::invalid_argument("Session: close must be after open");
  if (bar_minutes < 1)
    throw std::invalid_argument("Session: bar width must be >= 1 minute");
  if ((close_minutes - open_minutes) % bar_minutes != 0)
    throw std::invalid_argument("Session: bar width must divide session length");
}

int parse_clock_minutes(const std::string& hhmm) {
  int h = 0, m = 0;
  if (std::sscanf(hhmm.c_str(), "%d:%d", &h, &m) != 2 || h < 0 || h > 23 ||
      m < 0 || m > 59)
    throw std::invalid_argument("parse_clock_minutes: expected HH:MM, got '" +
                                hhmm + "'");
  return h * 60 + m;
}

IngestResult ingest_and_resample(const std::vector<Tick>& ticks,
                                 const Session& session) {
  session.validate();
  IngestResult out;
  const int n_bars = session.bars();
  const double open_sec = session.open_minutes * 60.0;
  const double bar_sec = session.bar_minutes * 60.0;

  std::size_t i = 0;
  while (i < ticks.size()) {
    const std::int64_t day = ticks[i].day_id;
    std::size_t j = i;
    while (j < ticks.size() && ticks[j].day_id == day) ++j;

    double last = std::nan("");
    std::size_t k = i;
    std::vector<double> prices(static_cast<std::size_t>(n_bars) + 1, std::nan(""));
    int missing = 0;
    for (int b = 0; b <= n_bars; ++b) {
      const double boundary = open_sec + b * bar_sec;
      while (k < j && ticks[k].seconds_of_day <= boundary) {
        last = ticks[k].price;
        ++k;
      }
      if (std::isnan(last))
        ++missing;
      else
        prices[static_cast<std::size_t>(b)] = last;
    }

    if (missing > 0.1 * (n_bars + 1)) {
      out.warnings.push_back("day " + std::to_string(day) + " dropped: " +
                             std::to_string(missing) + "/" +
                             std::to_string(n_bars + 1) + " bars missing");
    } else {
      if (missing > 0) {
        // Only leading bars can be missing under last-price sampling.
        double first = std::nan("");
        for (double p : prices)
          if (!std::isnan(p)) {
            first = p;
            break;
          }
        for (double& p : prices)
          if (std::isnan(p))
            p = first;
          else
            break;
        out.warnings.push_back("day " + std::to_string(day) + ": " +
                               std::to_string(missing) +
                               " leading bars filled with first price");
      }
      IntradayGrid grid;
      grid.day_id = day;
      grid.log_prices.resize(prices.size());
      for (std::size_t b = 0; b < prices.size(); ++b)
        grid.log_prices[b] = std::log(prices[b]);
      out.grids.push_back(std::move(grid));
    }
    i = j;
  }
  if (out.grids.empty())
    throw std::invalid_argument("ingest_and_resample: no usable days");
  return out;
}

namespace {

nlohmann::json estimates_json(const EstimationReport& rep) {
  return {{"kappa", rep.kappa},
          {"theta", rep.theta},
          {"gamma", rep.gamma},
          {"rho", rep.rho},
          {"mu", 0.0},
          {"v0", rep.theta}};
}

}  // namespace

std::string report_to_json(const EstimationReport& rep) {
  nlohmann::json j;
  j["method"] = rep.method;
  j["estimates"] = estimates_json(rep);
  if (rep.method == "gmm") {
    j["std_errors"] = {{"kappa", rep.se_kappa},
                       {"theta", rep.se_theta},
                       {"gamma_squared", rep.se_gamma_squared},
                       {"rho", rep.se_rho}};
    j["start"] = {{"kappa", rep.start_kappa},
                  {"theta", rep.start_theta},
                  {"gamma", rep.start_gamma},
                  {"rho", rep.start_rho}};
  }
  nlohmann::json diag;
  diag["feller_ok"] = rep.feller_ok;
  diag["m_days"] = rep.m_days;
  diag["delta_years"] = rep.delta;
  diag["iterations"] = rep.iterations;
  diag["converged"] = rep.converged;
  if (std::isfinite(rep.arma_ma)) diag["arma_ma_coefficient"] = rep.arma_ma;
  if (std::isfinite(rep.gmm_objective)) diag["gmm_objective"] = rep.gmm_objective;
  diag["warnings"] = rep.warnings;
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

std::string report_to_text(const EstimationReport& rep) {
  std::ostringstream out;
  out << "method: " << rep.method << "\n"
      << "days: " << rep.m_days << "  delta: " << format_g17(rep.delta) << "\n"
      << "theta: " << format_g17(rep.theta);
  if (std::isfinite(rep.se_theta)) out << "  (se " << format_g17(rep.se_theta) << ")";
  out << "\nkappa: " << format_g17(rep.kappa);
  if (std::isfinite(rep.se_kappa)) out << "  (se " << format_g17(rep.se_kappa) << ")";
  out << "\ngamma: " << format_g17(rep.gamma);
  if (std::isfinite(rep.se_gamma_squared))
    out << "  (se of gamma^2 " << format_g17(rep.se_gamma_squared) << ")";
  out << "\nrho: " << format_g17(rep.rho);
  if (std::isfinite(rep.se_rho)) out << "  (se " << format_g17(rep.se_rho) << ")";
  out << "\nfeller_ok: " << (rep.feller_ok ? "true" : "false") << "\n";
  if (std::isfinite(rep.arma_ma))
    out << "arma_ma_coefficient: " << format_g17(rep.arma_ma) << "\n";
  if (std::isfinite(rep.gmm_objective))
    out << "gmm_objective: " << format_g17(rep.gmm_objective)
        << "  iterations: " << rep.iterations
        << "  converged: " << (rep.converged ? "true" : "false") << "\n";
  for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string test_result_to_json(const TestResult& res) {
  nlohmann::json j;
  j["method"] = method_name(res.method);
  j["statistic"] = res.statistic;
  j["p_value"] = res.p_value;
  j["n"] = res.n;
  j["exact"] = res.exact;
  j["notes"] = res.notes;
  return j.dump(2) + "\n";
}

}  // namespace momvar
