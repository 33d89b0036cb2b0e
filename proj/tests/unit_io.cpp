#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "momvar/estimation.hpp"
#include "momvar/io.hpp"
#include "momvar/simulate.hpp"
#include "test_params.hpp"

using namespace momvar;
using namespace momvar::testing;

namespace {

const std::string kDataDir = MOMVAR_TEST_DATA_DIR;

std::string temp_path(const std::string& name) {
  return std::string("/tmp/momvar_test_") + name;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("format_g17 round-trips doubles") {
  for (double v : {0.1, -4.1626e-7, 1.0 / 3.0, 6.0221407e23, 0.0}) {
    const double back = std::stod(format_g17(v));
    CHECK(back == v);
  }
}

TEST_CASE("panel CSV write/read round trip is exact") {
  SimConfig cfg;
  cfg.params = model2_params();
  cfg.steps_per_day = 130;
  cfg.seed = 42;
  const auto sp = synth_panel(cfg, 30, 26);

  const std::string path = temp_path("panel_roundtrip.csv");
  write_panel_csv(path, sp.panel);
  const DailyMomentPanel back = read_panel_csv(path);
  REQUIRE(back.size() == sp.panel.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.day_id[i] == sp.panel.day_id[i]);
    CHECK(back.rv[i] == sp.panel.rv[i]);
    CHECK(back.tv[i] == sp.panel.tv[i]);
    CHECK(back.fv[i] == sp.panel.fv[i]);
    CHECK(back.r_close[i] == sp.panel.r_close[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("panel CSV rejects malformed input") {
  const std::string path = temp_path("panel_bad.csv");
  write_text(path, "nonsense header\n");
  CHECK_THROWS_AS(read_panel_csv(path), std::invalid_argument);
  write_text(path, "day_id,rv,tv,fv,tv15,fv15,r_close,r3,r4\n1,0.1,0.2\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path), doctest::Contains("line 2"),
                       std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("tick CSV parsing: formats and error lines") {
  const std::string path = temp_path("ticks.csv");
  write_text(path,
             "timestamp,price\n"
             "2024-01-02T09:30:00,100.0\n"
             "2024-01-02 09:30:05.5,100.5\n"
             "1704188100,101.0\n");  // 2024-01-02T09:35:00Z
  const auto ticks = read_tick_csv(path);
  REQUIRE(ticks.size() == 3);
  CHECK(ticks[0].day_id == 20240102);
  CHECK(ticks[0].seconds_of_day == doctest::Approx(9 * 3600 + 30 * 60));
  CHECK(ticks[1].seconds_of_day == doctest::Approx(9 * 3600 + 30 * 60 + 5.5));
  CHECK(ticks[2].day_id == 20240102);
  CHECK(ticks[2].seconds_of_day == doctest::Approx(9 * 3600 + 35 * 60));

  write_text(path, "timestamp,price\n2024-01-02T09:30:00,100.0\nnot a time,1\n");
  CHECK_THROWS_WITH_AS(read_tick_csv(path), doctest::Contains("line 3"),
                       std::invalid_argument);
  write_text(path, "timestamp,price\n2024-01-02T09:30:00,-4\n");
  CHECK_THROWS_WITH_AS(read_tick_csv(path), doctest::Contains("price"),
                       std::invalid_argument);
  write_text(path,
             "timestamp,price\n2024-01-02T09:30:00,100\n2024-01-02T09:29:00,100\n");
  CHECK_THROWS_WITH_AS(read_tick_csv(path), doctest::Contains("non-decreasing"),
                       std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("session validation and clock parsing") {
  CHECK(parse_clock_minutes("09:30") == 570);
  CHECK_THROWS_AS(parse_clock_minutes("25:00"), std::invalid_argument);
  Session s;
  s.bar_minutes = 7;  // does not divide 390 minutes
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("golden 2-day fixture resamples to the hand-computed panel") {
  const auto ticks = read_tick_csv(kDataDir + "/ticks_2day.csv");
  Session session;
  session.open_minutes = parse_clock_minutes("09:30");
  session.close_minutes = parse_clock_minutes("09:55");
  session.bar_minutes = 5;
  const IngestResult ingest = ingest_and_resample(ticks, session);
  REQUIRE(ingest.grids.size() == 2);
  CHECK(ingest.warnings.empty());
  const DailyMomentPanel panel = build_panel(ingest.grids);

  // frozen values computed by hand from the definitions
  CHECK(panel.day_id[0] == 20240102);
  CHECK(panel.rv[0] == doctest::Approx(0.0005824871376776986).epsilon(1e-14));
  CHECK(panel.tv[0] == doctest::Approx(1.7197630990636885e-05).epsilon(1e-14));
  CHECK(panel.fv[0] == doctest::Approx(6.04417666624057e-07).epsilon(1e-14));
  CHECK(panel.r_close[0] == doctest::Approx(0.029558802241544058).epsilon(1e-14));
  CHECK(panel.day_id[1] == 20240103);
  CHECK(panel.rv[1] == doctest::Approx(0.00018046078981396127).epsilon(1e-14));
  CHECK(panel.tv[1] == doctest::Approx(6.345620377838469e-07).epsilon(1e-14));
  CHECK(panel.fv[1] == doctest::Approx(9.485884855974443e-09).epsilon(1e-14));
  CHECK(panel.r_close[1] == doctest::Approx(0.009615458699442136).epsilon(1e-14));

  // byte-stable golden output
  const std::string out_path = temp_path("golden_panel.csv");
  write_panel_csv(out_path, panel);
  std::ifstream actual_in(out_path);
  std::stringstream actual;
  actual << actual_in.rdbuf();
  std::ifstream golden_in(kDataDir + "/golden_panel.csv");
  REQUIRE(golden_in.good());
  std::stringstream golden;
  golden << golden_in.rdbuf();
  CHECK(actual.str() == golden.str());
  std::remove(out_path.c_str());
}

TEST_CASE("resampling drops gappy days and fills leading gaps") {
  // session 09:30-16:00, 5-minute bars: 78 bars, 79 boundaries
  Session session;

  std::vector<Tick> ticks;
  // day 1: first tick at 09:47 -> boundaries 09:30..09:45 missing (4/79 ~ 5%)
  ticks.push_back({20240104, 9 * 3600.0 + 47 * 60, 100.0});
  ticks.push_back({20240104, 15 * 3600.0, 101.0});
  // day 2: first tick at 13:00 -> 42/79 bars missing -> dropped
  ticks.push_back({20240105, 13 * 3600.0, 50.0});
  ticks.push_back({20240105, 15 * 3600.0, 51.0});

  const IngestResult res = ingest_and_resample(ticks, session);
  REQUIRE(res.grids.size() == 1);
  CHECK(res.grids[0].day_id == 20240104);
  REQUIRE(res.grids[0].log_prices.size() == 79);
  // leading bars carry the first price
  CHECK(res.grids[0].log_prices[0] == doctest::Approx(std::log(100.0)));
  CHECK(res.grids[0].log_prices[3] == doctest::Approx(std::log(100.0)));
  REQUIRE(res.warnings.size() == 2);
  CHECK(res.warnings[0].find("filled") != std::string::npos);
  CHECK(res.warnings[1].find("dropped") != std::string::npos);

  // ticks exactly on every boundary resample to themselves
  std::vector<Tick> exact;
  Session small;
  small.open_minutes = 570;
  small.close_minutes = 580;
  small.bar_minutes = 5;
  exact.push_back({20240108, 570 * 60.0, 10.0});
  exact.push_back({20240108, 575 * 60.0, 11.0});
  exact.push_back({20240108, 580 * 60.0, 12.0});
  const IngestResult id = ingest_and_resample(exact, small);
  REQUIRE(id.grids.size() == 1);
  REQUIRE(id.grids[0].log_prices.size() == 3);
  CHECK(id.grids[0].log_prices[1] == doctest::Approx(std::log(11.0)).epsilon(1e-15));
}

TEST_CASE("report and test-result JSON serialization") {
  EstimationReport rep;
  rep.method = "gmm";
  rep.kappa = 13.4;
  rep.theta = 0.0202;
  rep.gamma = 0.5075;
  rep.rho = 0.5551;
  rep.se_theta = 0.0022;
  rep.se_kappa = 2.6344;
  rep.se_gamma_squared = 0.0422;
  rep.se_rho = 1.5832;
  rep.converged = true;
  rep.feller_ok = true;
  rep.m_days = 2000;
  rep.delta = kDayDelta;
  rep.gmm_objective = 1e-6;
  rep.start_kappa = 14.32;
  rep.start_theta = 0.0204;
  rep.start_gamma = 0.6571;
  rep.start_rho = 0.3957;

  const auto j = nlohmann::json::parse(report_to_json(rep));
  CHECK(j["method"] == "gmm");
  CHECK(j["estimates"]["kappa"].get<double>() == doctest::Approx(13.4));
  CHECK(j["estimates"]["mu"].get<double>() == 0.0);
  CHECK(j["std_errors"]["gamma_squared"].get<double>() == doctest::Approx(0.0422));
  CHECK(j["start"]["rho"].get<double>() == doctest::Approx(0.3957));
  CHECK(j["diagnostics"]["feller_ok"] == true);
  CHECK(j["diagnostics"]["m_days"] == 2000);

  const std::string text = report_to_text(rep);
  CHECK(text.find("method: gmm") != std::string::npos);
  CHECK(text.find("rho") != std::string::npos);

  TestResult tr;
  tr.method = TestMethod::wilcoxon_two_sided;
  tr.statistic = 10.5;
  tr.p_value = 0.0026;
  tr.n = 1750;
  tr.exact = false;
  const auto tj = nlohmann::json::parse(test_result_to_json(tr));
  CHECK(tj["method"] == "wilcoxon_two_sided");
  CHECK(tj["p_value"].get<double>() == doctest::Approx(0.0026));
}

TEST_CASE("CSV round trip reproduces in-process estimation exactly") {
  SimConfig cfg;
  cfg.params = model2_params();
  cfg.steps_per_day = 390;
  cfg.seed = 77;
  const auto sp = synth_panel(cfg, 300, 78);
  const EstimationReport direct = simple_estimate(sp.panel, kDayDelta);

  const std::string path = temp_path("roundtrip_estimate.csv");
  write_panel_csv(path, sp.panel);
  const DailyMomentPanel back = read_panel_csv(path);
  const EstimationReport via_csv = simple_estimate(back, kDayDelta);
  CHECK(via_csv.theta == direct.theta);
  CHECK(via_csv.kappa == direct.kappa);
  CHECK(via_csv.gamma == direct.gamma);
  CHECK(via_csv.rho == direct.rho);
  std::remove(path.c_str());
}

TEST_SUITE_END();
