#include "statefulrec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "statefulrec/error.hpp"

namespace statefulrec {

namespace {

constexpr double kContinuedFractionEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10'000;

// Continued fraction for I_x(p, q), evaluated with the modified Lentz method.
double beta_continued_fraction(double x, double p, double q) {
  const double qab = p + q;
  const double qap = p + 1.0;
  const double qam = p - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (q - m) * x / ((qam + m2) * (p + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kContinuedFractionEps) return h;
  }
  return h;  // converged to working precision for all parameters used here
}

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values, double mean) {
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

bool has_zero_spread(std::span<const double> values) {
  if (values.size() < 2) return true;
  double largest = 0.0;
  for (const double v : values) largest = std::max(largest, std::fabs(v));
  return sample_sd(values, mean_of(values)) <= kZeroSpreadTolerance * largest;
}

PairedSample::PairedSample(std::vector<double> a, std::vector<double> b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.size() != b_.size()) {
    fail(ErrorKind::kInvalidInput, "paired samples differ in length");
  }
  if (a_.size() < 2) fail(ErrorKind::kInvalidInput, "paired sample needs n >= 2");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(a_.begin(), a_.end(), finite) || !std::all_of(b_.begin(), b_.end(), finite)) {
    fail(ErrorKind::kInvalidInput, "paired sample contains non-finite values");
  }
}

std::vector<double> PairedSample::differences() const {
  std::vector<double> d(a_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a_[i] - b_[i];
  return d;
}

std::string_view to_string(TestMethod method) {
  switch (method) {
    case TestMethod::kPairedT: return "paired_t";
    case TestMethod::kWilcoxonExact: return "wilcoxon_exact";
    case TestMethod::kWilcoxonNormal: return "wilcoxon_normal";
  }
  return "paired_t";
}

TestMethod parse_test_method(std::string_view name) {
  if (name == "paired_t") return TestMethod::kPairedT;
  if (name == "wilcoxon_exact") return TestMethod::kWilcoxonExact;
  if (name == "wilcoxon_normal") return TestMethod::kWilcoxonNormal;
  fail(ErrorKind::kInvalidInput, "unknown test method '" + std::string(name) + "'");
}

double regularized_incomplete_beta(double x, double p, double q) {
  if (!(x >= 0.0 && x <= 1.0) || !(p > 0.0) || !(q > 0.0) || !std::isfinite(p) ||
      !std::isfinite(q)) {
    fail(ErrorKind::kInvalidInput, "incomplete beta arguments out of domain");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q) +
                           p * std::log(x) + q * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fastest for x < (p + 1) / (p + q + 2);
  // use the symmetry I_x(p, q) = 1 - I_{1-x}(q, p) on the other side.
  double result;
  if (x < (p + 1.0) / (p + q + 2.0)) {
    result = front * beta_continued_fraction(x, p, q) / p;
  } else {
    result = 1.0 - front * beta_continued_fraction(1.0 - x, q, p) / q;
  }
  return std::clamp(result, 0.0, 1.0);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) fail(ErrorKind::kInvalidInput, "degrees of freedom must be positive");
  if (std::isnan(t)) fail(ErrorKind::kInvalidInput, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
}

TestResult paired_t_test(const PairedSample& sample) {
  const auto d = sample.differences();
  const auto n = d.size();
  TestResult result;
  result.method = TestMethod::kPairedT;
  result.n_effective = n;

  const double mean = mean_of(d);
  if (has_zero_spread(d)) {
    if (mean != 0.0) {
      fail(ErrorKind::kDegenerateSample,
           "paired t-test: differences have zero variance and nonzero mean");
    }
    result.statistic = 0.0;
    result.p_value = 1.0;
    return result;
  }
  const double sd = sample_sd(d, mean);
  result.statistic = mean * std::sqrt(static_cast<double>(n)) / sd;
  result.p_value = student_t_two_sided_p(result.statistic, static_cast<double>(n - 1));
  return result;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&values](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::vector<std::uint64_t> signed_rank_counts(std::size_t n) {
  if (n > 62) fail(ErrorKind::kInvalidInput, "signed-rank enumeration limited to n <= 62");
  const std::size_t total = n * (n + 1) / 2;
  std::vector<std::uint64_t> counts(total + 1, 0);
  counts[0] = 1;
  // Each rank r is either positive (adds r to W+) or negative.
  for (std::size_t r = 1; r <= n; ++r) {
    for (std::size_t s = total; s >= r; --s) counts[s] += counts[s - r];
  }
  return counts;
}

TestResult wilcoxon_signed_rank(const PairedSample& sample) {
  std::vector<double> nonzero;
  for (const double d : sample.differences()) {
    if (d != 0.0) nonzero.push_back(d);
  }
  const std::size_t n = nonzero.size();
  if (n < 1) {
    fail(ErrorKind::kDegenerateSample, "Wilcoxon test: every paired difference is zero");
  }

  std::vector<double> magnitudes(n);
  std::transform(nonzero.begin(), nonzero.end(), magnitudes.begin(),
                 [](double d) { return std::fabs(d); });
  const auto ranks = average_ranks(magnitudes);

  double w_plus = 0.0;
  double w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) (nonzero[i] > 0.0 ? w_plus : w_minus) += ranks[i];
  const double w = std::min(w_plus, w_minus);

  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  bool has_ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1.0) {
      has_ties = true;
      tie_term += t * t * t - t;
    }
    i = j + 1;
  }

  TestResult result;
  result.statistic = w;
  result.n_effective = n;

  if (n <= kWilcoxonExactLimit && !has_ties) {
    // Without ties the ranks are exactly 1..n and W is an integer.
    const auto counts = signed_rank_counts(n);
    const auto total = static_cast<std::int64_t>(n * (n + 1) / 2);
    const auto observed = static_cast<std::int64_t>(std::llround(w));
    std::uint64_t extreme = 0;
    for (std::int64_t s = 0; s <= total; ++s) {
      if (std::min(s, total - s) <= observed) extreme += counts[static_cast<std::size_t>(s)];
    }
    result.method = TestMethod::kWilcoxonExact;
    result.p_value = static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
    return result;
  }

  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  const double z = std::max(0.0, std::fabs(w - mean) - 0.5) / std::sqrt(variance);
  result.method = TestMethod::kWilcoxonNormal;
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return result;
}

EffectSize cohens_dz(const PairedSample& sample) {
  const auto d = sample.differences();
  if (has_zero_spread(d)) {
    fail(ErrorKind::kDegenerateSample, "Cohen's dz: differences have zero variance");
  }
  const double mean = mean_of(d);
  return EffectSize{mean / sample_sd(d, mean)};
}

}  // namespace statefulrec
