#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stolz/error.hpp"
#include "stolz/sequence.hpp"

namespace stolz {

// ---------------------------------------------------------------------------
// Hypothesis checks for the discrete L'Hospital (Stolz-Cesaro) rule:
//   f_j > 0, g_j > 0, F_n -> inf, G_n -> inf, f_n / g_n -> L.
// Every check is evidence over the finite prefix 1..n_max only.
// ---------------------------------------------------------------------------

struct PositivityCheck {
  std::optional<Index> first_violation;
  bool passed() const noexcept { return !first_violation.has_value(); }
};

/// Threshold-crossing evidence that a partial-sum sequence diverges.
struct DivergenceCheck {
  enum class Status { NotEvaluated, Evidence, Insufficient };
  Status status = Status::NotEvaluated;
  double threshold = 0.0;
  Index n_hit = 0;                  // first n with partial sum > threshold
  double max_value_reached = 0.0;   // largest partial sum observed
  bool passed() const noexcept { return status == Status::Evidence; }
};

struct RatioLimitCheck {
  enum class Status { NotEvaluated, Estimated, NoLimitDetected };
  Status status = Status::NotEvaluated;
  double estimate = 0.0;      // f_{n_max} / g_{n_max}
  double oscillation = 0.0;   // max - min of f_j / g_j over the tail window
  Index window_start = 0;
  bool passed() const noexcept { return status == Status::Estimated; }
};

struct HypothesisReport {
  Index n_max = 0;
  PositivityCheck positivity_f;
  PositivityCheck positivity_g;
  DivergenceCheck divergence_f;
  DivergenceCheck divergence_g;
  RatioLimitCheck ratio_limit;

  bool passed() const noexcept {
    return positivity_f.passed() && positivity_g.passed() &&
           divergence_f.passed() && divergence_g.passed() &&
           ratio_limit.passed();
  }
};

struct HypothesisOptions {
  /// Applied to both series. Unset means 10 * max(first partial sum, 1),
  /// computed per series.
  std::optional<double> divergence_threshold;
  double tail_window = 0.1;
};

inline constexpr Index kMinPrefix = 10;
inline constexpr double kDefaultThresholdScale = 10.0;

/// First index of the last ceil(fraction * n_max) indices.
inline Index tail_window_start(Index n_max, double fraction) {
  const auto width = static_cast<Index>(std::ceil(fraction * static_cast<double>(n_max)));
  return std::max<Index>(1, n_max - std::max<Index>(width, 1) + 1);
}

namespace detail {

inline PositivityCheck scan_positivity(const Sequence& seq, Index n_max) {
  for (Index j = 1; j <= n_max; ++j) {
    if (!(seq.term(j) > 0.0)) return {j};
  }
  return {};
}

inline DivergenceCheck scan_divergence(PartialSumSeries& series, Index n_max,
                                       std::optional<double> threshold) {
  DivergenceCheck check;
  check.threshold = threshold.value_or(kDefaultThresholdScale *
                                       std::max(series.value(1), 1.0));
  for (Index n = 1; n <= n_max; ++n) {
    const double value = series.value(n);
    check.max_value_reached = std::max(check.max_value_reached, value);
    if (value > check.threshold) {
      check.status = DivergenceCheck::Status::Evidence;
      check.n_hit = n;
      return check;
    }
  }
  check.status = DivergenceCheck::Status::Insufficient;
  return check;
}

inline void require_prefix(Index n_max) {
  if (n_max < kMinPrefix) {
    throw InvalidArgument("prefix length n_max=" + std::to_string(n_max) +
                          " is below the minimum of " + std::to_string(kMinPrefix));
  }
}

}  // namespace detail

inline HypothesisReport check_hypotheses(PartialSumSeries& f, PartialSumSeries& g,
                                         Index n_max,
                                         const HypothesisOptions& options = {}) {
  detail::require_prefix(n_max);
  if (options.divergence_threshold && !(*options.divergence_threshold > 0.0)) {
    throw InvalidArgument("divergence threshold must be positive");
  }
  if (!(options.tail_window > 0.0 && options.tail_window <= 1.0)) {
    throw InvalidArgument("tail window must lie in (0, 1]");
  }

  HypothesisReport report;
  report.n_max = n_max;
  report.positivity_f = detail::scan_positivity(f.base(), n_max);
  report.positivity_g = detail::scan_positivity(g.base(), n_max);
  if (!report.positivity_f.passed() || !report.positivity_g.passed()) {
    return report;
  }

  report.divergence_f = detail::scan_divergence(f, n_max, options.divergence_threshold);
  report.divergence_g = detail::scan_divergence(g, n_max, options.divergence_threshold);

  auto& ratio = report.ratio_limit;
  ratio.estimate = f.base().term(n_max) / g.base().term(n_max);
  ratio.window_start = tail_window_start(n_max, options.tail_window);
  double lo = ratio.estimate;
  double hi = ratio.estimate;
  for (Index j = ratio.window_start; j <= n_max; ++j) {
    const double r = f.base().term(j) / g.base().term(j);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  ratio.oscillation = hi - lo;
  ratio.status = ratio.oscillation > 0.5 * (1.0 + std::fabs(ratio.estimate))
                     ? RatioLimitCheck::Status::NoLimitDetected
                     : RatioLimitCheck::Status::Estimated;
  return report;
}

inline HypothesisReport check_hypotheses(const Sequence& f, const Sequence& g,
                                         Index n_max,
                                         const HypothesisOptions& options = {}) {
  PartialSumSeries fs(f);
  PartialSumSeries gs(g);
  return check_hypotheses(fs, gs, n_max, options);
}

/// L-hat = f_{n_max} / g_{n_max}.
inline double estimate_ratio_limit(const Sequence& f, const Sequence& g, Index n_max) {
  const double denominator = g.term(n_max);
  if (denominator == 0.0) {
    throw EvaluationError(EvaluationError::Kind::DivisionByZero,
                          "g_" + std::to_string(n_max) + " is zero");
  }
  return f.term(n_max) / denominator;
}

// ---------------------------------------------------------------------------
// Certificate
// ---------------------------------------------------------------------------

struct RatioBracket {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool operator==(const RatioBracket&) const = default;
};

/// (L - eps)(1 - eps)/(1 + eps) and (L + eps)(1 + eps)/(1 - eps).
inline RatioBracket certificate_bracket(double l_hat, double epsilon) {
  return {(l_hat - epsilon) * (1.0 - epsilon) / (1.0 + epsilon),
          (l_hat + epsilon) * (1.0 + epsilon) / (1.0 - epsilon)};
}

/// Empirical epsilon-M-N witness that F_n / G_n stays near L-hat.
///
/// M bounds where f_j / g_j enters the band (L-hat - eps, L-hat + eps);
/// N bounds where the head sums F_M, G_M become an eps-fraction of the tails.
/// Both quantifiers only range over the observed prefix n <= n_max.
struct RatioLimitCertificate {
  enum class Status { Certified, Failed };
  enum class Reason { None, NoM, NoN, Containment, RatioDiverges };

  double epsilon = 0.0;
  double l_hat = 0.0;
  std::optional<Index> m;
  std::optional<Index> n;
  RatioBracket bracket;
  Index n_max = 0;
  Status status = Status::Failed;
  Reason reason = Reason::None;
  std::optional<Index> violation_index;  // first offending index, if any

  bool certified() const noexcept { return status == Status::Certified; }
  bool operator==(const RatioLimitCertificate&) const = default;
};

inline std::string to_string(RatioLimitCertificate::Reason reason) {
  using R = RatioLimitCertificate::Reason;
  switch (reason) {
    case R::None: return "none";
    case R::NoM: return "no_M";
    case R::NoN: return "no_N";
    case R::Containment: return "containment";
    case R::RatioDiverges: return "ratio_diverges";
  }
  return "unknown";
}

inline std::string status_string(const RatioLimitCertificate& cert) {
  return cert.certified() ? "certified" : "failed(" + to_string(cert.reason) + ")";
}

struct CertifyOptions {
  /// |f_j / g_j| above this ceiling is treated as an infinite limit.
  double ratio_ceiling = 1e12;
  /// The band f_j / g_j in (L - eps, L + eps) must be observed on at least
  /// this fraction of the prefix for M to count as found.
  double min_band_fraction = 0.1;
};

inline RatioLimitCertificate certify(PartialSumSeries& f, PartialSumSeries& g,
                                     double l_hat, double epsilon, Index n_max,
                                     const CertifyOptions& options = {}) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  }
  detail::require_prefix(n_max);

  RatioLimitCertificate cert;
  cert.epsilon = epsilon;
  cert.l_hat = l_hat;
  cert.n_max = n_max;
  cert.bracket = certificate_bracket(l_hat, epsilon);

  auto fail = [&cert](RatioLimitCertificate::Reason reason,
                      std::optional<Index> at = std::nullopt) {
    cert.status = RatioLimitCertificate::Status::Failed;
    cert.reason = reason;
    cert.violation_index = at;
    return cert;
  };

  std::vector<double> ratio(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (Index j = 1; j <= n_max; ++j) {
    const double fj = f.base().term(j);
    const double gj = g.base().term(j);
    if (!(fj > 0.0)) throw PositivityError("f_j is not positive", j);
    if (!(gj > 0.0)) throw PositivityError("g_j is not positive", j);
    const double r = fj / gj;
    if (!std::isfinite(r) || std::fabs(r) > options.ratio_ceiling) {
      return fail(RatioLimitCertificate::Reason::RatioDiverges, j);
    }
    ratio[static_cast<std::size_t>(j)] = r;
  }

  // M: after the last index whose ratio falls outside the open band.
  Index m = 1;
  for (Index j = n_max; j >= 1; --j) {
    const double r = ratio[static_cast<std::size_t>(j)];
    if (!(l_hat - epsilon < r && r < l_hat + epsilon)) {
      m = std::max<Index>(j, 1);
      break;
    }
  }
  const Index band_length = n_max - m;
  const auto required = static_cast<Index>(
      std::ceil(options.min_band_fraction * static_cast<double>(n_max)));
  if (band_length < std::max<Index>(required, 1)) {
    return fail(RatioLimitCertificate::Reason::NoM, m);
  }
  cert.m = m;

  // N: after the last n whose head/tail ratios are not both below epsilon.
  const double head_f = f.value(m);
  const double head_g = g.value(m);
  Index n = m;
  for (Index k = n_max; k > m; --k) {
    const double tail_f = f.tail_sum(m, k);
    const double tail_g = g.tail_sum(m, k);
    if (!(head_f < epsilon * tail_f && head_g < epsilon * tail_g)) {
      n = k;
      break;
    }
  }
  if (n >= n_max) return fail(RatioLimitCertificate::Reason::NoN, n);
  cert.n = n;

  for (Index k = std::max(m, n) + 1; k <= n_max; ++k) {
    if (!cert.bracket.contains(f.value(k) / g.value(k))) {
      return fail(RatioLimitCertificate::Reason::Containment, k);
    }
  }
  cert.status = RatioLimitCertificate::Status::Certified;
  return cert;
}

inline RatioLimitCertificate certify(const Sequence& f, const Sequence& g,
                                     double l_hat, double epsilon, Index n_max,
                                     const CertifyOptions& options = {}) {
  PartialSumSeries fs(f);
  PartialSumSeries gs(g);
  return certify(fs, gs, l_hat, epsilon, n_max, options);
}

/// Min and max of f_j / g_j over m < j <= n. By the mediant inequality the
/// tail-sum ratio sum f / sum g over the same range lies between them.
inline RatioBracket sandwich_bounds(const Sequence& f, const Sequence& g, Index m,
                                    Index n) {
  if (m < 1 || m >= n) {
    throw RangeError("sandwich_bounds requires 1 <= m < n, got m=" +
                     std::to_string(m) + ", n=" + std::to_string(n));
  }
  RatioBracket bounds{INFINITY, -INFINITY};
  for (Index j = m + 1; j <= n; ++j) {
    const double fj = f.term(j);
    const double gj = g.term(j);
    if (!(fj > 0.0)) throw PositivityError("f_j is not positive", j);
    if (!(gj > 0.0)) throw PositivityError("g_j is not positive", j);
    const double r = fj / gj;
    bounds.lo = std::min(bounds.lo, r);
    bounds.hi = std::max(bounds.hi, r);
  }
  return bounds;
}

}  // namespace stolz
