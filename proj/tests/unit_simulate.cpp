#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "momvar/heston.hpp"
#include "momvar/simulate.hpp"
#include "test_params.hpp"

using namespace momvar;
using namespace momvar::testing;

TEST_SUITE_BEGIN("simulate");

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.params = model1_params();
  cfg.horizon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.horizon = 1.0;
  cfg.n_paths = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_paths = 1;
  cfg.steps_per_day = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("seed reproducibility and thread-count invariance") {
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.horizon = 2.0 / kTradingDaysPerYear;
  cfg.steps_per_day = 78;
  cfg.n_paths = 64;
  cfg.seed = 321;

  cfg.threads = 1;
  const auto a = simulate_terminals(cfg);
  const auto a2 = simulate_terminals(cfg);
  cfg.threads = 2;
  const auto b = simulate_terminals(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].r == a2[i].r);
    CHECK(a[i].r == b[i].r);
    CHECK(a[i].qv == b[i].qv);
    CHECK(a[i].tv == b[i].tv);
    CHECK(a[i].fv == b[i].fv);
  }

  cfg.seed = 322;
  const auto c = simulate_terminals(cfg);
  CHECK(c[0].r != a[0].r);
}

TEST_CASE("degenerate diffusion: gamma = 0, v0 = theta") {
  SimConfig cfg;
  cfg.params = model1_params();
  cfg.params.gamma = 0.0;
  cfg.params.v0 = cfg.params.theta;
  cfg.horizon = 5.0 / kTradingDaysPerYear;
  cfg.steps_per_day = 26;
  cfg.n_paths = 3;
  cfg.seed = 5;

  const auto paths = simulate_paths(cfg);
  for (const auto& rec : paths) {
    for (double v : rec.v) CHECK(v == doctest::Approx(cfg.params.theta).epsilon(1e-14));
    CHECK(rec.qv.back() ==
          doctest::Approx(cfg.params.theta * cfg.horizon).epsilon(1e-12));
    // monotone qv, zeroed initial row
    CHECK(rec.r[0] == 0.0);
    CHECK(rec.qv[0] == 0.0);
    for (std::size_t i = 1; i < rec.qv.size(); ++i) CHECK(rec.qv[i] >= rec.qv[i - 1]);
  }
}

TEST_CASE("path record invariants under full truncation") {
  SimConfig cfg;
  cfg.params = fig1_params();  // Feller strongly violated
  cfg.horizon = 10.0 / kTradingDaysPerYear;
  cfg.steps_per_day = 78;
  cfg.n_paths = 4;
  cfg.seed = 9;
  const auto paths = simulate_paths(cfg);
  for (const auto& rec : paths)
    for (double v : rec.v) CHECK(v >= 0.0);

  const auto terms = simulate_terminals(cfg);
  std::int64_t truncated = 0;
  for (const auto& t : terms) truncated += t.truncated_steps;
  CHECK(truncated > 0);

  // Feller-satisfying parameters rarely hit the boundary on this grid
  SimConfig calm = cfg;
  calm.params = model2_params();
  const auto calm_terms = simulate_terminals(calm);
  std::int64_t calm_truncated = 0;
  for (const auto& t : calm_terms) calm_truncated += t.truncated_steps;
  CHECK(calm_truncated <= truncated);
}

TEST_CASE("reflection scheme keeps variance nonnegative") {
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.scheme = Scheme::reflection_euler;
  cfg.horizon = 5.0 / kTradingDaysPerYear;
  cfg.steps_per_day = 78;
  cfg.n_paths = 4;
  cfg.seed = 10;
  const auto paths = simulate_paths(cfg);
  for (const auto& rec : paths)
    for (double v : rec.v) CHECK(v >= 0.0);
}

TEST_CASE("zero leverage: terminal third variation has zero mean") {
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.params.rho = 0.0;
  cfg.horizon = 1.0 / 12.0;
  cfg.steps_per_day = 78;
  cfg.n_paths = 8000;
  cfg.seed = 11;
  cfg.threads = 2;
  const McEstimate tv = mc_moment(cfg, McFunctional::TV);
  CHECK(std::fabs(tv.value) < 3.0 * tv.se);
}

TEST_CASE("mc_moment sanity: QV mean and martingale identities") {
  SimConfig cfg;
  cfg.params = model1_params();
  cfg.params.v0 = cfg.params.theta;
  cfg.horizon = 1.0 / 12.0;
  cfg.steps_per_day = 78;
  cfg.n_paths = 6000;
  cfg.seed = 12;
  cfg.threads = 2;
  const McSummary s = mc_summary(cfg);

  const McEstimate qv = s[McFunctional::QV];
  CHECK(std::fabs(qv.value - cfg.params.theta * cfg.horizon) < 3.0 * qv.se);

  // E[R^3] = E[1.5 tv] and E[R^4] = E[1.5 fv] under mu = 0: the paired
  // differences are mean-zero.
  const McEstimate b3 = s[McFunctional::BIAS3];
  CHECK(std::fabs(b3.value) < 3.0 * b3.se);
  const McEstimate b4 = s[McFunctional::BIAS4];
  CHECK(std::fabs(b4.value) < 3.0 * b4.se);

  // same check on the nastier Feller-violating set
  SimConfig f = cfg;
  f.params = fig1_params();
  f.seed = 13;
  const McSummary sf = mc_summary(f);
  CHECK(std::fabs(sf[McFunctional::BIAS3].value) < 3.0 * sf[McFunctional::BIAS3].se);
  CHECK(std::fabs(sf[McFunctional::BIAS4].value) < 3.0 * sf[McFunctional::BIAS4].se);
}

namespace {

// R^3(T) - 3 sum R^2 dR - 1.5 [R,R^2]-hat with every term summed on the
// stride-coarsened grid; equals -0.5 sum (dR)^3 algebraically, an O(dt)
// quantity. Coarsening one fine path keeps the randomness common across
// step sizes, which is what makes the Richardson ratio tight.
double identity3_residual(const std::vector<double>& r, std::size_t stride) {
  double ito = 0.0, tv_hat = 0.0;
  for (std::size_t i = stride; i < r.size(); i += stride) {
    const double a = r[i - stride], b = r[i];
    ito += a * a * (b - a);
    tv_hat += (b - a) * (b * b - a * a);
  }
  const double rt = r.back();
  return rt * rt * rt - 3.0 * ito - 1.5 * tv_hat;
}

double identity4_residual(const std::vector<double>& r, std::size_t stride) {
  double ito = 0.0, fv_hat = 0.0;
  for (std::size_t i = stride; i < r.size(); i += stride) {
    const double a = r[i - stride], b = r[i];
    ito += a * a * a * (b - a);
    fv_hat += (b * b - a * a) * (b * b - a * a);
  }
  const double rt = r.back();
  return rt * rt * rt * rt - 4.0 * ito - 1.5 * fv_hat;
}

}  // namespace

TEST_CASE("pathwise identities: residuals shrink under step halving") {
  // One fine path at a time (memory stays O(path)); residuals evaluated on
  // the same path coarsened 4x/2x/1x, RMS over many paths.
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.horizon = 1.0 / 12.0;
  cfg.n_paths = 1;
  cfg.steps_per_day = 520;

  const int n_paths = 2000;
  double s3[3] = {0, 0, 0}, s4[3] = {0, 0, 0};
  for (int p = 0; p < n_paths; ++p) {
    cfg.seed = 140000 + static_cast<unsigned>(p);
    const auto paths = simulate_paths(cfg);
    int k = 0;
    for (std::size_t stride : {4, 2, 1}) {  // 130, 260, 520 steps/day
      const double r3 = identity3_residual(paths[0].r, stride);
      const double r4 = identity4_residual(paths[0].r, stride);
      s3[k] += r3 * r3;
      s4[k] += r4 * r4;
      ++k;
    }
  }
  const auto ratio = [&](const double* s, int i) { return std::sqrt(s[i] / s[i + 1]); };
  CHECK(ratio(s3, 0) >= 1.8);
  CHECK(ratio(s3, 1) >= 1.8);
  CHECK(ratio(s4, 0) >= 1.8);
  CHECK(ratio(s4, 1) >= 1.8);
}

TEST_CASE("realized sums on coarser bar grids converge to the pathwise integrals") {
  SimConfig cfg;
  cfg.params = model1_params();
  cfg.horizon = 1.0 / kTradingDaysPerYear;
  cfg.steps_per_day = 390;
  cfg.n_paths = 100;
  cfg.seed = 15;
  cfg.threads = 2;

  std::vector<double> mean_err;
  for (int bars : {13, 39, 130, 390}) {
    const auto terms = simulate_terminals(cfg, 390 / bars);
    double err = 0.0;
    for (const auto& t : terms) err += std::fabs(t.rrv - t.qv) / t.qv;
    mean_err.push_back(err / static_cast<double>(terms.size()));
  }
  for (std::size_t i = 1; i < mean_err.size(); ++i)
    CHECK(mean_err[i] < mean_err[i - 1]);
}

TEST_CASE("fine-grid realized sums track the pathwise integrals") {
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.horizon = 1.0;
  cfg.steps_per_day = 390;
  cfg.n_paths = 1;
  cfg.seed = 16;
  const auto terms = simulate_terminals(cfg, 1);
  const TerminalStats& t = terms[0];
  CHECK(std::fabs(t.rrv - t.qv) / t.qv < 0.01);
  CHECK(std::fabs(t.rtv - t.tv) <= 0.05 * std::max(std::fabs(t.tv), 1e-4));
  CHECK(std::fabs(t.rfv - t.fv) <= 0.05 * std::max(std::fabs(t.fv), 1e-5));
}

TEST_CASE("synth_panel: structure, continuity and degenerate variance") {
  SimConfig cfg;
  cfg.params = model1_params();
  cfg.params.gamma = 0.0;
  cfg.params.v0 = cfg.params.theta;
  cfg.steps_per_day = 390;
  cfg.seed = 17;
  cfg.horizon = 500.0 / kTradingDaysPerYear;

  const auto sp = synth_panel(cfg, 500, 78);
  REQUIRE(sp.panel.size() == 500);
  REQUIRE(sp.grids.size() == 500);
  for (const auto& g : sp.grids) REQUIRE(g.log_prices.size() == 79);

  // variance path continuous across day boundaries: adjacent grids share the
  // log-price level
  for (std::size_t d = 1; d < sp.grids.size(); ++d)
    CHECK(sp.grids[d].log_prices.front() == sp.grids[d - 1].log_prices.back());

  // gamma = 0: mean realized variance matches theta*delta closely at N=78
  double mean_rv = 0.0;
  for (double v : sp.panel.rv) mean_rv += v;
  mean_rv /= static_cast<double>(sp.panel.size());
  CHECK(std::fabs(mean_rv - cfg.params.theta * kDayDelta) <
        0.02 * cfg.params.theta * kDayDelta);
  for (double v : sp.true_v)
    CHECK(v == doctest::Approx(cfg.params.theta).epsilon(1e-12));
  CHECK(sp.truncated_fraction == 0.0);
}

TEST_CASE("synth_panel daily rv noise shrinks as bars increase") {
  SimConfig cfg;
  cfg.params = model1_params();
  cfg.params.gamma = 0.0;
  cfg.params.v0 = cfg.params.theta;
  cfg.steps_per_day = 390;
  cfg.seed = 18;
  const double target = cfg.params.theta * kDayDelta;

  double prev = 1e9;
  for (int bars : {26, 78, 390}) {
    const auto sp = synth_panel(cfg, 300, bars);
    double err = 0.0;
    for (double v : sp.panel.rv) err += std::fabs(v - target) / target;
    err /= static_cast<double>(sp.panel.size());
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("synth_panel zero leverage: panel third variation is mean-zero") {
  SimConfig cfg;
  cfg.params = model2_params();
  cfg.params.rho = 0.0;
  cfg.steps_per_day = 390;
  cfg.seed = 19;
  const auto sp = synth_panel(cfg, 2000, 78);
  double s1 = 0.0, s2 = 0.0;
  for (double v : sp.panel.tv) {
    s1 += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(sp.panel.size());
  const double m = s1 / n;
  const double se = std::sqrt((s2 - n * m * m) / (n - 1.0) / n);
  CHECK(std::fabs(m) < 3.0 * se);
}

TEST_CASE("closed forms match the oracle at a one-year horizon") {
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.horizon = 1.0;
  cfg.steps_per_day = 78;
  cfg.n_paths = 20000;
  cfg.seed = 23;
  cfg.threads = 2;
  const McSummary s = mc_summary(cfg);

  const auto within3 = [&](double closed, McFunctional f) {
    const McEstimate e = s[f];
    CHECK(std::fabs(e.value - closed) < 3.0 * e.se);
  };
  within3(expected_variance(cfg.params, 1.0), McFunctional::V_at_t);
  within3(expected_qv(cfg.params, 1.0), McFunctional::QV);
  within3(expected_variance_squared(cfg.params, 1.0), McFunctional::V2_at_t);
  // the convergence claim: mean 1.5 tv and mean R^3 both estimate E[R^3]
  within3(expected_third_moment(cfg.params, 1.0), McFunctional::TV15);
  within3(expected_third_moment(cfg.params, 1.0), McFunctional::R3);
}

TEST_CASE("mc_variance_third_variation: leverage sign symmetry and stability") {
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.horizon = 1.0;
  cfg.steps_per_day = 78;
  cfg.n_paths = 2000;
  cfg.seed = 20;
  cfg.threads = 2;

  const McEstimate plus = mc_variance_third_variation(cfg);
  SimConfig neg = cfg;
  neg.params.rho = -cfg.params.rho;
  const McEstimate minus = mc_variance_third_variation(neg);
  const double comb = std::sqrt(plus.se * plus.se + minus.se * minus.se);
  CHECK(std::fabs(plus.value - minus.value) < 2.0 * comb);

  SimConfig other = cfg;
  other.seed = 21;
  const McEstimate again = mc_variance_third_variation(other);
  const double comb2 = std::sqrt(plus.se * plus.se + again.se * again.se);
  CHECK(std::fabs(plus.value - again.value) < 3.0 * comb2);

  SimConfig drift = cfg;
  drift.params.mu = 0.05;
  CHECK_THROWS_AS(mc_variance_third_variation(drift), std::invalid_argument);
}

TEST_CASE("converge_table running means and checkpoints") {
  SimConfig cfg;
  cfg.params = fig1_params();
  cfg.horizon = 1.0 / 12.0;
  cfg.steps_per_day = 78;
  cfg.n_paths = 3000;
  cfg.seed = 22;
  cfg.threads = 2;
  const auto rows = converge_table(cfg, 78, {100, 1000, 3000});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].n == 100);
  CHECK(rows[2].n == 3000);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.mean_tv15));
    CHECK(r.se_tv15 > 0.0);
    CHECK(r.se_r3 > 0.0);
  }
  // the theoretical value sits within a few SE at the final checkpoint
  const double theory = expected_third_moment(cfg.params, cfg.horizon);
  CHECK(std::fabs(rows[2].mean_tv15 - theory) < 4.0 * rows[2].se_tv15);
  CHECK_THROWS_AS(converge_table(cfg, 78, {0}), std::invalid_argument);
  CHECK_THROWS_AS(converge_table(cfg, 78, {5000}), std::invalid_argument);
}

TEST_SUITE_END();
