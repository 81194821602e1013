#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stolz/error.hpp"

namespace stolz {

/// A pure, 1-indexed source of real terms.
///
/// The term function must be deterministic: evaluating the same index twice
/// yields bit-identical values. Copies share the underlying function, so a
/// Sequence is cheap to pass by value and safe to evaluate concurrently.
class Sequence {
 public:
  using TermFn = std::function<double(Index)>;

  Sequence(TermFn fn, std::string description)
      : fn_(std::make_shared<const TermFn>(std::move(fn))),
        description_(std::move(description)) {}

  double term(Index j) const {
    if (j < 1) {
      throw IndexError("sequence index " + std::to_string(j) +
                           " is outside the domain j >= 1",
                       j);
    }
    return (*fn_)(j);
  }

  double operator()(Index j) const { return term(j); }

  const std::string& description() const noexcept { return description_; }

  static Sequence constant(double c) {
    return {[c](Index) { return c; }, "constant " + std::to_string(c)};
  }

  static Sequence identity() {
    return {[](Index j) { return static_cast<double>(j); }, "j"};
  }

  /// Data-backed sequence over indices 1..values.size().
  static Sequence from_values(std::vector<double> values,
                              std::string description) {
    auto data = std::make_shared<const std::vector<double>>(std::move(values));
    return {[data](Index j) {
              const auto size = static_cast<Index>(data->size());
              if (j > size) {
                throw IndexError("index " + std::to_string(j) +
                                     " is beyond the last data index " +
                                     std::to_string(size),
                                 j);
              }
              return (*data)[static_cast<std::size_t>(j - 1)];
            },
            std::move(description)};
  }

 private:
  std::shared_ptr<const TermFn> fn_;
  std::string description_;
};

/// Termwise combination of two sequences.
template <typename BinaryOp>
Sequence zip_with(const Sequence& lhs, const Sequence& rhs, BinaryOp op,
                  std::string description) {
  return {[lhs, rhs, op](Index j) { return op(lhs.term(j), rhs.term(j)); },
          std::move(description)};
}

inline Sequence operator+(const Sequence& lhs, const Sequence& rhs) {
  return zip_with(lhs, rhs, std::plus<>{},
                  "(" + lhs.description() + ") + (" + rhs.description() + ")");
}

inline Sequence operator-(const Sequence& lhs, const Sequence& rhs) {
  return zip_with(lhs, rhs, std::minus<>{},
                  "(" + lhs.description() + ") - (" + rhs.description() + ")");
}

inline Sequence operator*(const Sequence& lhs, const Sequence& rhs) {
  return zip_with(lhs, rhs, std::multiplies<>{},
                  "(" + lhs.description() + ") * (" + rhs.description() + ")");
}

inline Sequence operator/(const Sequence& lhs, const Sequence& rhs) {
  return zip_with(
      lhs, rhs,
      [](double x, double y) {
        if (y == 0.0) {
          throw EvaluationError(EvaluationError::Kind::DivisionByZero,
                                "division by zero in sequence quotient");
        }
        return x / y;
      },
      "(" + lhs.description() + ") / (" + rhs.description() + ")");
}

inline Sequence operator*(double scale, const Sequence& seq) {
  return {[scale, seq](Index j) { return scale * seq.term(j); },
          std::to_string(scale) + " * (" + seq.description() + ")"};
}

/// Neumaier's variant of compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + compensation_; }
  double sum() const noexcept { return sum_; }
  double compensation() const noexcept { return compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Cached, compensated prefix sums F_n = sum_{j=1}^n base(j).
///
/// The cache grows on demand. Reads of an already cached prefix may run
/// concurrently; growth must be serialized by the caller (call extend_to
/// up front when sharing a series across threads).
class PartialSumSeries {
 public:
  explicit PartialSumSeries(Sequence base) : base_(std::move(base)) {}

  const Sequence& base() const noexcept { return base_; }

  /// Number of cached prefix sums (excluding value(0)).
  Index cached_length() const noexcept {
    return static_cast<Index>(prefix_.size()) - 1;
  }

  void extend_to(Index n) {
    if (n <= cached_length()) return;
    const auto wanted = static_cast<std::size_t>(n) + 1;
    if (wanted > prefix_.capacity()) {
      const auto capacity = std::max(wanted, 2 * prefix_.capacity());
      prefix_.reserve(capacity);
      running_.reserve(capacity);
      correction_.reserve(capacity);
    }
    for (Index j = cached_length() + 1; j <= n; ++j) {
      accumulator_.add(base_.term(j));
      prefix_.push_back(accumulator_.value());
      running_.push_back(accumulator_.sum());
      correction_.push_back(accumulator_.compensation());
    }
  }

  /// F_n with F_0 = 0.
  double value(Index n) {
    if (n < 0) {
      throw IndexError("partial sum index " + std::to_string(n) +
                           " is negative",
                       n);
    }
    extend_to(n);
    return prefix_[static_cast<std::size_t>(n)];
  }

  double partial_sum(Index n) {
    if (n < 1) {
      throw IndexError("partial_sum requires n >= 1, got " + std::to_string(n),
                       n);
    }
    return value(n);
  }

  /// F_n - F_{n-1}; the discrete counterpart of a derivative.
  double finite_difference(Index n) {
    if (n < 1) {
      throw IndexError(
          "finite_difference requires n >= 1, got " + std::to_string(n), n);
    }
    return value(n) - value(n - 1);
  }

  /// sum_{j=m+1}^n base(j) = F_n - F_m.
  ///
  /// Taken as the difference of the unrounded (sum, compensation) pairs, so
  /// a short tail keeps its own precision instead of inheriting the rounding
  /// of F_n. F_m + tail_sum(m, n) reproduces F_n to within one ulp.
  double tail_sum(Index m, Index n) {
    if (m < 1 || m > n) {
      throw RangeError("tail_sum requires 1 <= m <= n, got m=" +
                       std::to_string(m) + ", n=" + std::to_string(n));
    }
    extend_to(n);
    const auto i = static_cast<std::size_t>(m);
    const auto k = static_cast<std::size_t>(n);
    return (running_[k] - running_[i]) + (correction_[k] - correction_[i]);
  }

 private:
  Sequence base_;
  std::vector<double> prefix_{0.0};
  std::vector<double> running_{0.0};
  std::vector<double> correction_{0.0};
  CompensatedSum accumulator_;
};

/// Running product of positive factors kept as a compensated sum of logs.
///
/// A non-positive (or NaN) factor poisons the accumulator: sign_valid()
/// turns false and stays false.
class LogProductAccumulator {
 public:
  LogProductAccumulator push(double x) const {
    LogProductAccumulator next = *this;
    if (!(x > 0.0) || !sign_valid_) {
      next.sign_valid_ = false;
      return next;
    }
    next.log_sum_.add(std::log(x));
    return next;
  }

  /// Pushes the factor 1 - a using log1p for accuracy when a is small.
  LogProductAccumulator push_one_minus(double a) const {
    LogProductAccumulator next = *this;
    if (!(a < 1.0) || !sign_valid_) {
      next.sign_valid_ = false;
      return next;
    }
    next.log_sum_.add(std::log1p(-a));
    return next;
  }

  double log_value() const noexcept { return log_sum_.value(); }
  bool sign_valid() const noexcept { return sign_valid_; }
  double value() const noexcept {
    return sign_valid_ ? std::exp(log_value()) : std::nan("");
  }

 private:
  CompensatedSum log_sum_;
  bool sign_valid_ = true;
};

}  // namespace stolz
