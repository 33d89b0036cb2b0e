// momvar: realized moment variations of high-frequency returns and
// square-root stochastic volatility estimation.
//
// Subcommands: panel, simulate, estimate, test, converge. See --help.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "momvar/estimation.hpp"
#include "momvar/errors.hpp"
#include "momvar/heston.hpp"
#include "momvar/inference.hpp"
#include "momvar/io.hpp"
#include "momvar/realized.hpp"
#include "momvar/simulate.hpp"
#include "momvar/stats_util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct ModelFlags {
  double kappa = 5.0;
  double theta = 0.05;
  double gamma = 0.8;
  double rho = -0.5;
  double mu = 0.0;
  double v0 = -1.0;  // <0 means "use theta"

  momvar::HestonParams params() const {
    momvar::HestonParams p;
    p.kappa = kappa;
    p.theta = theta;
    p.gamma = gamma;
    p.rho = rho;
    p.mu = mu;
    p.v0 = v0 < 0.0 ? theta : v0;
    p.validate();
    return p;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags* m) {
  cmd->add_option("--kappa", m->kappa, "Mean-reversion rate (1/years)");
  cmd->add_option("--theta", m->theta, "Long-run variance level");
  cmd->add_option("--gamma", m->gamma, "Volatility of variance");
  cmd->add_option("--rho", m->rho, "Return/variance correlation");
  cmd->add_option("--mu", m->mu, "Return drift (1/years)");
  cmd->add_option("--v0", m->v0, "Initial variance (default: theta)");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file " + path);
  out << content;
  if (!out) throw std::invalid_argument("write failed: " + path);
}

std::vector<std::int64_t> log_checkpoints(std::int64_t n) {
  std::vector<std::int64_t> cps;
  std::int64_t c = 100;
  double x = 100.0;
  while (c < n) {
    cps.push_back(c);
    x *= 1.2589254117941673;  // 10 per decade
    const std::int64_t next = static_cast<std::int64_t>(x);
    c = next > c ? next : c + 1;
  }
  if (cps.empty() || cps.back() != n) cps.push_back(n);
  return cps;
}

int run(int argc, char** argv) {
  CLI::App app{"Variation-based realized moments and square-root SV estimation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file (flags win)");

  // ---- panel ----
  auto* panel_cmd = app.add_subcommand("panel", "Ticks CSV -> daily moment panel CSV");
  std::string ticks_path, panel_out = "panel.csv";
  std::string open_clock = "09:30", close_clock = "16:00";
  int bar_minutes = 5;
  panel_cmd->add_option("--ticks", ticks_path, "Input CSV (timestamp,price)")->required();
  panel_cmd->add_option("--out", panel_out, "Output panel CSV");
  panel_cmd->add_option("--open", open_clock, "Session open (HH:MM)");
  panel_cmd->add_option("--close", close_clock, "Session close (HH:MM)");
  panel_cmd->add_option("--bar-minutes", bar_minutes, "Bar width in minutes");

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "Synthetic daily panel from the SV model");
  ModelFlags sim_model;
  add_model_flags(sim_cmd, &sim_model);
  std::int64_t sim_days = 2000;
  int sim_bars = 78, sim_steps = 390, sim_threads = 0;
  std::uint64_t sim_seed = 12345;
  std::string sim_scheme = "full_truncation";
  std::string sim_panel_out = "sim_panel.csv", sim_summary_out;
  sim_cmd->add_option("--days", sim_days, "Number of days");
  sim_cmd->add_option("--bars", sim_bars, "Bars per day for the realized sums");
  sim_cmd->add_option("--steps-per-day", sim_steps, "Euler steps per day");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--scheme", sim_scheme,
                      "Variance scheme: full_truncation|reflection");
  sim_cmd->add_option("--threads", sim_threads, "Worker threads (0=auto)");
  sim_cmd->add_option("--out", sim_panel_out, "Output panel CSV");
  sim_cmd->add_option("--summary-out", sim_summary_out, "Optional summary JSON");

  // ---- estimate ----
  auto* est_cmd = app.add_subcommand("estimate", "Estimate SV parameters from a panel CSV");
  std::string est_panel, est_method = "simple", est_json_out, est_text_out;
  double est_delta_days = 1.0;
  bool est_extra_instruments = false;
  est_cmd->add_option("--panel", est_panel, "Input panel CSV")->required();
  est_cmd->add_option("--method", est_method, "simple|gmm");
  est_cmd->add_option("--delta-days", est_delta_days, "Observation interval in days");
  est_cmd->add_option("--json-out", est_json_out, "Write report JSON to file");
  est_cmd->add_option("--text-out", est_text_out, "Write report text to file");
  est_cmd->add_flag("--extra-instruments", est_extra_instruments,
                    "GMM: add two extra lagged instruments");

  // ---- test ----
  auto* test_cmd = app.add_subcommand(
      "test", "Skewness tests (t and Wilcoxon) on the tv15 and r3 columns");
  std::string test_panel, test_json_out;
  test_cmd->add_option("--panel", test_panel, "Input panel CSV")->required();
  test_cmd->add_option("--json-out", test_json_out, "Write results JSON to file");

  // ---- converge ----
  auto* conv_cmd = app.add_subcommand(
      "converge", "Across-path convergence of mean 1.5*[R,R^2] vs mean R^3");
  ModelFlags conv_model;
  conv_model.kappa = 3.0;
  conv_model.theta = 0.04;
  conv_model.gamma = 2.0;
  conv_model.rho = -0.5;
  conv_model.v0 = 0.05;
  add_model_flags(conv_cmd, &conv_model);
  std::int64_t conv_paths = 100000;
  double conv_horizon = 1.0;
  int conv_steps = 390, conv_bars = 78, conv_threads = 0;
  std::uint64_t conv_seed = 20240901;
  std::string conv_out = "converge.csv";
  conv_cmd->add_option("--paths", conv_paths, "Number of simulated paths");
  conv_cmd->add_option("--horizon-years", conv_horizon, "Horizon in years");
  conv_cmd->add_option("--steps-per-day", conv_steps, "Euler steps per day");
  conv_cmd->add_option("--bars-per-day", conv_bars, "Bars per day for realized sums");
  conv_cmd->add_option("--seed", conv_seed, "RNG seed");
  conv_cmd->add_option("--threads", conv_threads, "Worker threads (0=auto)");
  conv_cmd->add_option("--out", conv_out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitInput;
  }

  if (panel_cmd->parsed()) {
    momvar::Session session;
    session.open_minutes = momvar::parse_clock_minutes(open_clock);
    session.close_minutes = momvar::parse_clock_minutes(close_clock);
    session.bar_minutes = bar_minutes;
    const auto ticks = momvar::read_tick_csv(ticks_path);
    const auto ingest = momvar::ingest_and_resample(ticks, session);
    for (const auto& w : ingest.warnings) std::cerr << "warning: " << w << "\n";
    const auto panel = momvar::build_panel(ingest.grids);
    momvar::write_panel_csv(panel_out, panel);
    std::cout << "wrote " << panel.size() << " days to " << panel_out << "\n";
    return kExitOk;
  }

  if (sim_cmd->parsed()) {
    momvar::SimConfig cfg;
    cfg.params = sim_model.params();
    cfg.horizon = static_cast<double>(sim_days) / momvar::kTradingDaysPerYear;
    cfg.steps_per_day = sim_steps;
    cfg.n_paths = 1;
    cfg.seed = sim_seed;
    cfg.threads = sim_threads;
    if (sim_scheme == "full_truncation")
      cfg.scheme = momvar::Scheme::full_truncation_euler;
    else if (sim_scheme == "reflection")
      cfg.scheme = momvar::Scheme::reflection_euler;
    else
      throw std::invalid_argument("unknown scheme '" + sim_scheme + "'");

    const auto result = momvar::synth_panel(cfg, sim_days, sim_bars);
    momvar::write_panel_csv(sim_panel_out, result.panel);
    std::cout << "wrote " << result.panel.size() << " days to " << sim_panel_out
              << "\n";
    if (!sim_summary_out.empty()) {
      nlohmann::json j;
      j["days"] = sim_days;
      j["bars_per_day"] = sim_bars;
      j["steps_per_day"] = sim_steps;
      j["seed"] = sim_seed;
      j["scheme"] = sim_scheme;
      j["truncated_fraction"] = result.truncated_fraction;
      j["terminal_variance_mean"] =
          momvar::mean(std::span<const double>(result.true_v));
      j["feller_ok"] = cfg.params.feller_ok();
      write_file(sim_summary_out, j.dump(2) + "\n");
    }
    return kExitOk;
  }

  if (est_cmd->parsed()) {
    const auto panel = momvar::read_panel_csv(est_panel);
    const double delta = est_delta_days / momvar::kTradingDaysPerYear;
    momvar::EstimationReport rep;
    if (est_method == "simple") {
      rep = momvar::simple_estimate(panel, delta);
    } else if (est_method == "gmm") {
      const auto simple = momvar::simple_estimate(panel, delta);
      momvar::GmmOptions opts;
      opts.use_extra_lag_instruments = est_extra_instruments;
      rep = momvar::gmm_estimate(panel, delta, simple.params(), opts);
    } else {
      throw std::invalid_argument("unknown method '" + est_method + "'");
    }
    const std::string text = momvar::report_to_text(rep);
    std::cout << text;
    if (!est_text_out.empty()) write_file(est_text_out, text);
    if (!est_json_out.empty()) write_file(est_json_out, momvar::report_to_json(rep));
    return kExitOk;
  }

  if (test_cmd->parsed()) {
    const auto panel = momvar::read_panel_csv(test_panel);
    nlohmann::json j;
    const auto run_tests = [&](const std::string& name,
                               const std::vector<double>& col) {
      nlohmann::json block;
      try {
        const auto t = momvar::t_test_mean_less(col);
        block["t_test"] = nlohmann::json::parse(momvar::test_result_to_json(t));
      } catch (const std::exception& e) {
        block["t_test"] = {{"error", e.what()}};
      }
      try {
        const auto w =
            momvar::wilcoxon_signed_rank(col, momvar::Alternative::two_sided);
        block["wilcoxon"] = nlohmann::json::parse(momvar::test_result_to_json(w));
      } catch (const std::exception& e) {
        block["wilcoxon"] = {{"error", e.what()}};
      }
      j[name] = block;
    };
    run_tests("tv15", panel.tv15());
    run_tests("r3", panel.r3());
    const std::string out = j.dump(2) + "\n";
    std::cout << out;
    if (!test_json_out.empty()) write_file(test_json_out, out);
    return kExitOk;
  }

  if (conv_cmd->parsed()) {
    momvar::SimConfig cfg;
    cfg.params = conv_model.params();
    cfg.horizon = conv_horizon;
    cfg.steps_per_day = conv_steps;
    cfg.n_paths = conv_paths;
    cfg.seed = conv_seed;
    cfg.threads = conv_threads;
    const auto rows =
        momvar::converge_table(cfg, conv_bars, log_checkpoints(conv_paths));
    const double theory = momvar::expected_third_moment(cfg.params, conv_horizon);
    std::ofstream out(conv_out);
    if (!out) throw std::invalid_argument("cannot open output file " + conv_out);
    out << "sample_size,mean_tv15,se_tv15,mean_r3,se_r3,theoretical_third_moment\n";
    for (const auto& r : rows)
      out << r.n << ',' << momvar::format_g17(r.mean_tv15) << ','
          << momvar::format_g17(r.se_tv15) << ',' << momvar::format_g17(r.mean_r3)
          << ',' << momvar::format_g17(r.se_r3) << ','
          << momvar::format_g17(theory) << '\n';
    std::cout << "wrote " << rows.size() << " checkpoints to " << conv_out << "\n";
    return kExitOk;
  }

  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const momvar::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
