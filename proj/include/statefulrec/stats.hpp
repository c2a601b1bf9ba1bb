#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace statefulrec {

// Two matched samples of equal length n >= 2 with finite values.
class PairedSample {
 public:
  // Throws Error(kInvalidInput) when the invariants do not hold.
  PairedSample(std::vector<double> a, std::vector<double> b);

  std::span<const double> a() const { return a_; }
  std::span<const double> b() const { return b_; }
  std::size_t size() const { return a_.size(); }
  // d_i = a_i - b_i
  std::vector<double> differences() const;

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

enum class TestMethod { kPairedT, kWilcoxonExact, kWilcoxonNormal };

// "paired_t", "wilcoxon_exact", "wilcoxon_normal".
std::string_view to_string(TestMethod method);
TestMethod parse_test_method(std::string_view name);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::kPairedT;
  std::size_t n_effective = 0;
};

struct EffectSize {
  double cohens_dz = 0.0;
};

// Largest n_effective for which the Wilcoxon p-value is computed exactly.
inline constexpr std::size_t kWilcoxonExactLimit = 25;

// Relative floor below which a sample's standard deviation counts as zero:
// sd <= kZeroSpreadTolerance * max|v|. Absorbs rounding noise in values that
// are equal in exact arithmetic.
inline constexpr double kZeroSpreadTolerance = 1e-12;
bool has_zero_spread(std::span<const double> values);

// I_x(p, q) by continued fraction (modified Lentz). Throws Error(kInvalidInput)
// outside x in [0, 1], p > 0, q > 0.
double regularized_incomplete_beta(double x, double p, double q);

// Two-sided P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Two-sided paired t-test. Zero-variance differences give t = 0, p = 1 when
// the mean is zero and Error(kDegenerateSample) otherwise.
TestResult paired_t_test(const PairedSample& sample);

// Two-sided Wilcoxon signed-rank test. Zero differences are dropped; |d| is
// ranked with average ranks for ties; the statistic is min(W+, W-). Exact
// null distribution when n_effective <= 25 and there are no ties, otherwise
// the normal approximation with tie-corrected variance and continuity
// correction. Throws Error(kDegenerateSample) when every difference is zero.
TestResult wilcoxon_signed_rank(const PairedSample& sample);

// mean(d) / sd(d). Throws Error(kDegenerateSample) when sd(d) = 0.
EffectSize cohens_dz(const PairedSample& sample);

// Average ranks (1-based) of `values`, ascending.
std::vector<double> average_ranks(std::span<const double> values);

// Number of sign patterns of ranks 1..n whose positive-rank sum equals s, for
// s = 0..n(n+1)/2. Requires n <= 62.
std::vector<std::uint64_t> signed_rank_counts(std::size_t n);

}  // namespace statefulrec
