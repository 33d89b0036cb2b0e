#include "momvar/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "momvar/stats_util.hpp"

namespace momvar {

std::string method_name(TestMethod m) {
  switch (m) {
    case TestMethod::t_one_sided_less:
      return "t_one_sided_less";
    case TestMethod::wilcoxon_two_sided:
      return "wilcoxon_two_sided";
    case TestMethod::wilcoxon_one_sided:
      return "wilcoxon_one_sided";
  }
  return "unknown";
}

namespace detail {

double student_t_cdf(double t, double dof) {
  const boost::math::students_t dist(dof);
  return boost::math::cdf(dist, t);
}

void wilcoxon_exact_tails(const std::vector<double>& ranks, double w_plus,
                          double* p_le, double* p_ge) {
  // Scale average ranks (multiples of 0.5) to integers and convolve the
  // +/- sign assignment distribution.
  std::vector<std::int64_t> w(ranks.size());
  std::int64_t total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    w[i] = std::llround(2.0 * ranks[i]);
    total += w[i];
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  std::int64_t reach = 0;
  for (std::int64_t wi : w) {
    for (std::int64_t s = reach; s >= 0; --s) {
      if (count[static_cast<std::size_t>(s)] != 0.0)
        count[static_cast<std::size_t>(s + wi)] += count[static_cast<std::size_t>(s)];
    }
    reach += wi;
  }
  const double denom = std::ldexp(1.0, static_cast<int>(ranks.size()));
  const std::int64_t target = std::llround(2.0 * w_plus);
  double le = 0.0, ge = 0.0;
  for (std::int64_t s = 0; s <= total; ++s) {
    const double c = count[static_cast<std::size_t>(s)];
    if (s <= target) le += c;
    if (s >= target) ge += c;
  }
  *p_le = le / denom;
  *p_ge = ge / denom;
}

}  // namespace detail

TestResult t_test_mean_less(std::span<const double> sample, double null_mean) {
  if (sample.size() < 2)
    throw std::invalid_argument("t_test_mean_less: need n >= 2");
  TestResult res;
  res.method = TestMethod::t_one_sided_less;
  res.n = static_cast<std::int64_t>(sample.size());

  const double m = mean(sample);
  const double s = sample_sd(sample);
  if (!(s > 0.0)) {
    if (m == null_mean) {
      res.statistic = 0.0;
      res.p_value = 0.5;
      res.notes.push_back("degenerate_constant_sample");
      return res;
    }
    throw std::invalid_argument("t_test_mean_less: degenerate sample (zero variance)");
  }
  const double n = static_cast<double>(sample.size());
  res.statistic = (m - null_mean) / (s / std::sqrt(n));
  res.p_value = detail::student_t_cdf(res.statistic, n - 1.0);
  return res;
}

TestResult wilcoxon_signed_rank(std::span<const double> sample,
                                Alternative alternative,
                                const WilcoxonOptions& opts) {
  std::vector<double> x;
  x.reserve(sample.size());
  std::int64_t zeros = 0;
  for (double v : sample) {
    if (!std::isfinite(v))
      throw std::invalid_argument("wilcoxon_signed_rank: non-finite value");
    if (v == 0.0)
      ++zeros;
    else
      x.push_back(v);
  }
  if (x.empty())
    throw std::invalid_argument("wilcoxon_signed_rank: all values are zero");
  if (static_cast<std::int64_t>(x.size()) < opts.min_n)
    throw std::invalid_argument("wilcoxon_signed_rank: too few nonzero values");

  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(x[a]) < std::fabs(x[b]);
  });

  std::vector<double> rank(n, 0.0);
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n &&
           std::fabs(x[order[j + 1]]) == std::fabs(x[order[i]]))
      ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
    if (j > i) ties = true;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  double w_plus = 0.0;
  std::vector<double> ranks_sorted(n);
  for (std::size_t i = 0; i < n; ++i) {
    ranks_sorted[i] = rank[i];
    if (x[i] > 0.0) w_plus += rank[i];
  }

  TestResult res;
  res.method = alternative == Alternative::two_sided
                   ? TestMethod::wilcoxon_two_sided
                   : TestMethod::wilcoxon_one_sided;
  res.n = static_cast<std::int64_t>(n);
  res.statistic = w_plus;
  if (zeros > 0) res.notes.push_back("zeros_dropped=" + std::to_string(zeros));
  if (ties) res.notes.push_back("ties_average_ranks");
  if (alternative == Alternative::less) res.notes.push_back("alternative=less");
  if (alternative == Alternative::greater)
    res.notes.push_back("alternative=greater");

  double p_le, p_ge;
  if (static_cast<std::int64_t>(n) <= opts.exact_threshold) {
    res.exact = true;
    detail::wilcoxon_exact_tails(ranks_sorted, w_plus, &p_le, &p_ge);
  } else {
    // Normal approximation with tie-corrected variance (sum r_i^2 / 4) and
    // continuity correction.
    double rank_total = 0.0, rank_sq = 0.0;
    for (double r : rank) {
      rank_total += r;
      rank_sq += r * r;
    }
    const double mu = 0.5 * rank_total;
    const double sd = std::sqrt(0.25 * rank_sq);
    const auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    p_le = phi((w_plus + 0.5 - mu) / sd);
    p_ge = 1.0 - phi((w_plus - 0.5 - mu) / sd);
  }

  switch (alternative) {
    case Alternative::less:
      res.p_value = p_le;
      break;
    case Alternative::greater:
      res.p_value = p_ge;
      break;
    case Alternative::two_sided:
      res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge));
      break;
  }
  return res;
}

}  // namespace momvar
