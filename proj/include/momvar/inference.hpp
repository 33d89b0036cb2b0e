#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace momvar {

enum class TestMethod {
  t_one_sided_less,
  wilcoxon_two_sided,
  wilcoxon_one_sided,
};

enum class Alternative { less, greater, two_sided };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::int64_t n = 0;  // effective sample size used by the test
  TestMethod method = TestMethod::t_one_sided_less;
  // tie/zero handling flags and degeneracy notes
  std::vector<std::string> notes;
  bool exact = false;  // Wilcoxon: exact tail vs normal approximation
};

std::string method_name(TestMethod m);

// One-sample t test of H0: mean == null_mean against mean < null_mean.
// A constant sample equal to null_mean reports t=0, p=0.5 with a note;
// a constant sample elsewhere is a degenerate-sample error.
TestResult t_test_mean_less(std::span<const double> sample,
                            double null_mean = 0.0);

struct WilcoxonOptions {
  std::int64_t min_n = 5;          // after zero removal
  std::int64_t exact_threshold = 25;  // exact tail for n <= threshold
};

// Wilcoxon signed rank test of symmetry about zero. Zeros are dropped,
// |x| ties receive average ranks; exact enumeration distribution for small
// n, tie-corrected normal approximation with continuity correction above.
TestResult wilcoxon_signed_rank(std::span<const double> sample,
                                Alternative alternative,
                                const WilcoxonOptions& opts = {});

namespace detail {
// P(W+ <= w) and P(W+ >= w) under the exact signed-rank null for the given
// rank vector (average ranks allowed in steps of 0.5).
void wilcoxon_exact_tails(const std::vector<double>& ranks, double w_plus,
                          double* p_le, double* p_ge);
// Student-t CDF used by the t test.
double student_t_cdf(double t, double dof);
}  // namespace detail

}  // namespace momvar
