#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stolz/error.hpp"
#include "stolz/estimator.hpp"
#include "stolz/sequence.hpp"

namespace stolz {

// Difference inequality g_{n+1} <= (1 - a_n) g_n + b_n with 0 < a_n < 1,
// b_n >= 0. Its equality case h is the envelope dominating every solution:
//
//   h_{n+1} = b_n + J_n + g_1 prod_{j=1}^n (1 - a_j),
//   J_n     = sum_{k=1}^{n-1} b_k prod_{j=k+1}^n (1 - a_j).

struct RecursionSchedule {
  Sequence a;       // step sizes, each in (0, 1)
  Sequence b;       // perturbations, each >= 0
  double g1 = 0.0;  // initial value, >= 0
};

/// (1 - a) h + b.
inline double envelope_step(double h, double a, double b) {
  if (!(a > 0.0 && a < 1.0)) {
    throw ScheduleViolation("a_n = " + std::to_string(a) + " is outside (0, 1)", 0);
  }
  if (!(b >= 0.0)) {
    throw ScheduleViolation("b_n = " + std::to_string(b) + " is negative", 0);
  }
  if (!(h >= 0.0)) {
    throw InvalidArgument("envelope value must be non-negative");
  }
  return (1.0 - a) * h + b;
}

struct EnvelopeTrace {
  Index n = 0;
  double h = 0.0;          // h_n, with h_1 = g_1
  double h_next = 0.0;     // h_{n+1}
  double j_term = 0.0;     // J_n
  double tail_term = 0.0;  // g_1 prod_{j=1}^n (1 - a_j)
  double log_prod = 0.0;   // ln prod_{j=1}^n (1 - a_j)
  std::optional<double> r; // b_{n-1} (1 - a_n) / a_n, defined from n = 2
};

namespace detail {

struct SampledSchedule {
  std::vector<double> a;  // 1-based; slot 0 unused
  std::vector<double> b;
};

inline SampledSchedule sample_schedule(const RecursionSchedule& s, Index n) {
  if (!(s.g1 >= 0.0)) throw InvalidArgument("g1 must be non-negative");
  SampledSchedule out;
  out.a.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.b.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (Index k = 1; k <= n; ++k) {
    const double a = s.a.term(k);
    if (!(a > 0.0 && a < 1.0)) {
      throw ScheduleViolation("a_" + std::to_string(k) + " = " + std::to_string(a) +
                                  " is outside (0, 1)",
                              k);
    }
    const double b = s.b.term(k);
    if (!(b >= 0.0)) {
      throw ScheduleViolation("b_" + std::to_string(k) + " = " + std::to_string(b) +
                                  " is negative",
                              k);
    }
    out.a[static_cast<std::size_t>(k)] = a;
    out.b[static_cast<std::size_t>(k)] = b;
  }
  return out;
}

/// S_k = sum_{j=1}^k ln(1 - a_j) for k = 0..n.
inline std::vector<double> prefix_log_products(const std::vector<double>& a) {
  std::vector<double> logs(a.size(), 0.0);
  CompensatedSum acc;
  for (std::size_t k = 1; k < a.size(); ++k) {
    acc.add(std::log1p(-a[k]));
    logs[k] = acc.value();
  }
  return logs;
}

}  // namespace detail

inline std::vector<EnvelopeTrace> envelope_trace(const RecursionSchedule& schedule,
                                                 Index n_max) {
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  const auto s = detail::sample_schedule(schedule, n_max);

  std::vector<EnvelopeTrace> trace;
  trace.reserve(static_cast<std::size_t>(n_max));
  LogProductAccumulator product;
  double h = schedule.g1;
  double j_term = 0.0;
  for (Index n = 1; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const double a = s.a[k];
    const double b = s.b[k];
    product = product.push_one_minus(a);

    EnvelopeTrace row;
    row.n = n;
    row.h = h;
    if (n >= 2) {
      j_term = (1.0 - a) * (j_term + s.b[k - 1]);
      row.r = s.b[k - 1] * (1.0 - a) / a;
    }
    row.j_term = j_term;
    row.log_prod = product.log_value();
    row.tail_term = schedule.g1 == 0.0 ? 0.0 : schedule.g1 * std::exp(row.log_prod);
    row.h_next = envelope_step(h, a, b);
    h = row.h_next;
    trace.push_back(row);
  }
  return trace;
}

/// Right side of the induction bound, evaluated directly with a
/// suffix array of log products.
inline double closed_form_bound(const RecursionSchedule& schedule, Index n) {
  if (n < 1) throw InvalidArgument("closed_form_bound requires n >= 1");
  const auto s = detail::sample_schedule(schedule, n);

  // suffix[k] = sum_{j=k+1}^n ln(1 - a_j)
  std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
  CompensatedSum acc;
  for (Index k = n - 1; k >= 0; --k) {
    acc.add(std::log1p(-s.a[static_cast<std::size_t>(k + 1)]));
    suffix[static_cast<std::size_t>(k)] = acc.value();
  }

  CompensatedSum total;
  total.add(s.b[static_cast<std::size_t>(n)]);
  for (Index k = 1; k <= n - 1; ++k) {
    const double bk = s.b[static_cast<std::size_t>(k)];
    if (bk > 0.0) total.add(bk * std::exp(suffix[static_cast<std::size_t>(k)]));
  }
  if (schedule.g1 > 0.0) total.add(schedule.g1 * std::exp(suffix[0]));
  return total.value();
}

/// J_n as a ratio of a numerator sum and a denominator product, both in
/// log space: sum_{k<n} b_k prod_{j<=k} (1-a_j)^{-1} / prod_{j<=n} (1-a_j)^{-1}.
inline double j_term_ratio_form(const RecursionSchedule& schedule, Index n) {
  if (n < 2) throw InvalidArgument("j_term_ratio_form requires n >= 2");
  const auto s = detail::sample_schedule(schedule, n);
  const auto logs = detail::prefix_log_products(s.a);

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n));
  for (Index k = 1; k <= n - 1; ++k) {
    const double bk = s.b[static_cast<std::size_t>(k)];
    if (bk > 0.0) terms.push_back(std::log(bk) - logs[static_cast<std::size_t>(k)]);
  }
  if (terms.empty()) return 0.0;

  const double peak = *std::max_element(terms.begin(), terms.end());
  CompensatedSum scaled;
  for (double t : terms) scaled.add(std::exp(t - peak));
  const double log_numerator = peak + std::log(scaled.value());
  const double log_denominator = -logs[static_cast<std::size_t>(n)];
  return std::exp(log_numerator - log_denominator);
}

// ---------------------------------------------------------------------------
// Schedule hypotheses: 0 < a_n < 1, b_{n-1}/a_n -> 0, sum a_n = inf (and the
// consequence b_n -> 0).
// ---------------------------------------------------------------------------

struct ScheduleHypothesisReport {
  Index n_max = 0;
  std::optional<Index> a_range_violation;
  std::optional<Index> b_sign_violation;
  bool evaluated = false;      // tail maxima computed; false after a range or sign failure
  Index window_start = 0;
  double ratio_to_zero = 0.0;  // max b_{n-1} / a_n over the tail window
  double b_to_zero = 0.0;      // max b_n over the tail window
  DivergenceCheck a_sum_divergence;

  bool passed() const noexcept {
    return !a_range_violation && !b_sign_violation && a_sum_divergence.passed();
  }
};

inline constexpr double kDefaultASumThreshold = 5.0;

inline ScheduleHypothesisReport check_schedule(const RecursionSchedule& schedule,
                                               Index n_max,
                                               double a_sum_threshold = kDefaultASumThreshold,
                                               double tail_window = 0.1) {
  detail::require_prefix(n_max);
  if (!(a_sum_threshold > 0.0)) throw InvalidArgument("a_sum threshold must be positive");
  if (!(tail_window > 0.0 && tail_window <= 1.0)) {
    throw InvalidArgument("tail window must lie in (0, 1]");
  }

  ScheduleHypothesisReport report;
  report.n_max = n_max;
  std::vector<double> a(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<double> b(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (Index k = 1; k <= n_max; ++k) {
    const auto i = static_cast<std::size_t>(k);
    a[i] = schedule.a.term(k);
    b[i] = schedule.b.term(k);
    if (!report.a_range_violation && !(a[i] > 0.0 && a[i] < 1.0)) {
      report.a_range_violation = k;
    }
    if (!report.b_sign_violation && !(b[i] >= 0.0)) report.b_sign_violation = k;
  }
  if (!report.a_range_violation && !report.b_sign_violation) {
    report.evaluated = true;
    report.window_start = tail_window_start(n_max, tail_window);
    for (Index k = report.window_start; k <= n_max; ++k) {
      const auto i = static_cast<std::size_t>(k);
      report.b_to_zero = std::max(report.b_to_zero, b[i]);
      if (k >= 2) report.ratio_to_zero = std::max(report.ratio_to_zero, b[i - 1] / a[i]);
    }
  }

  // The sum of a is checked even when the range check fails, so a schedule
  // such as a_n = 1/n^2 (with a_1 = 1) still reports its bounded sum.
  auto& div = report.a_sum_divergence;
  div.threshold = a_sum_threshold;
  div.status = DivergenceCheck::Status::Insufficient;
  CompensatedSum sum;
  for (Index k = 1; k <= n_max; ++k) {
    sum.add(a[static_cast<std::size_t>(k)]);
    div.max_value_reached = sum.value();
    if (sum.value() > a_sum_threshold) {
      div.status = DivergenceCheck::Status::Evidence;
      div.n_hit = k;
      break;
    }
  }
  return report;
}

/// Max of r_n = b_{n-1} (1 - a_n) / a_n over the last 10% of 2..n_max.
inline double final_limit_check(const RecursionSchedule& schedule, Index n_max) {
  if (n_max < 2) throw InvalidArgument("final_limit_check requires n_max >= 2");
  const auto s = detail::sample_schedule(schedule, n_max);
  double peak = 0.0;
  for (Index n = std::max<Index>(2, tail_window_start(n_max, 0.1)); n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    peak = std::max(peak, s.b[k - 1] * (1.0 - s.a[k]) / s.a[k]);
  }
  return peak;
}

// ---------------------------------------------------------------------------
// Reduction of J_n -> 0 to the ratio-of-partial-sums rule with L = 0.
// ---------------------------------------------------------------------------

struct ReductionOptions {
  double epsilon = 0.01;
  /// Numerator partial sums count as bounded when the second half of the
  /// prefix adds at most this relative amount.
  double plateau_tolerance = 1e-8;
  CertifyOptions certify;
};

struct StolzReduction {
  /// f_k = b_k prod_{j<=k} (1 - a_j)^{-1}
  Sequence numerator_increments;
  /// g_n = prod_{j<=n} (1 - a_j)^{-1} - prod_{j<n} (1 - a_j)^{-1}
  Sequence denominator_increments;
  bool bounded_numerator = false;
  /// ln of the numerator partial sum at n_max (-inf when every b_k is zero).
  double log_numerator_sum = -INFINITY;
  /// Prefix actually handed to the certifier (shorter than n_max when the
  /// products leave double range).
  Index examined_n_max = 0;
  std::optional<RatioLimitCertificate> certificate;
};

inline StolzReduction stolz_reduction(const RecursionSchedule& schedule, Index n_max,
                                      const ReductionOptions& options = {}) {
  detail::require_prefix(n_max);
  const auto s = detail::sample_schedule(schedule, n_max);
  const auto logs = detail::prefix_log_products(s.a);

  // Log-space numerator increments and their running log-sum-exp.
  std::vector<double> log_f(static_cast<std::size_t>(n_max) + 1, -INFINITY);
  double log_sum = -INFINITY;
  double log_sum_half = -INFINITY;
  const Index half = n_max / 2;
  for (Index k = 1; k <= n_max; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (s.b[i] > 0.0) {
      log_f[i] = std::log(s.b[i]) - logs[i];
      const double hi = std::max(log_sum, log_f[i]);
      log_sum = hi + std::log(std::exp(log_sum - hi) + std::exp(log_f[i] - hi));
    }
    if (k == half) log_sum_half = log_sum;
  }

  // Largest prefix on which every increment and partial sum stays finite.
  const double ceiling = std::log(DBL_MAX) - std::log(static_cast<double>(n_max)) - 1.0;
  Index usable = 0;
  for (Index k = 1; k <= n_max; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (-logs[i] + std::log(s.a[i]) > ceiling || log_f[i] > ceiling) break;
    usable = k;
  }

  std::vector<double> f_values;
  std::vector<double> g_values;
  for (Index k = 1; k <= usable; ++k) {
    const auto i = static_cast<std::size_t>(k);
    f_values.push_back(std::exp(log_f[i]));
    // prod^{-1}_n - prod^{-1}_{n-1} = a_n prod^{-1}_n
    g_values.push_back(s.a[i] * std::exp(-logs[i]));
  }

  StolzReduction result{
      Sequence::from_values(std::move(f_values), "b_k prod_{j<=k} (1-a_j)^-1"),
      Sequence::from_values(std::move(g_values),
                            "prod_{j<=n} (1-a_j)^-1 - prod_{j<n} (1-a_j)^-1"),
      false,
      log_sum,
      usable,
      std::nullopt,
  };

  const bool all_zero = std::isinf(log_sum) && log_sum < 0.0;
  result.bounded_numerator =
      all_zero || (!std::isinf(log_sum_half) &&
                   log_sum - log_sum_half <= std::log1p(options.plateau_tolerance));
  if (result.bounded_numerator) return result;

  for (Index k = 1; k <= usable; ++k) {
    if (!(s.b[static_cast<std::size_t>(k)] > 0.0)) {
      throw PositivityError("b_" + std::to_string(k) +
                                " is zero; the ratio rule needs positive increments",
                            k);
    }
  }
  result.certificate = certify(result.numerator_increments,
                               result.denominator_increments, 0.0, options.epsilon,
                               usable, options.certify);
  return result;
}

}  // namespace stolz
