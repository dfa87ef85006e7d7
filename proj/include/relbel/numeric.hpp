#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace relbel {

/// Tolerance for "sums to one" checks on probability vectors.
inline constexpr double kNormTol = 1e-9;

/// Slack used when comparing accumulated posterior content against a target
/// level. Region memberships themselves are decided on exact comparisons.
inline constexpr double kContentTol = 1e-12;

// Neumaier compensated summation.
class KahanSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  KahanSum& operator+=(double v) noexcept {
    add(v);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double accurate_sum(std::span<const double> values) noexcept {
  KahanSum s;
  for (double v : values) s += v;
  return s.value();
}

struct IndexPick {
  std::size_t index = 0;
  bool tie = false;  // another entry attains the same extreme value
};

/// Largest value, smallest index on ties. Requires a nonempty span.
inline IndexPick argmax(std::span<const double> values) noexcept {
  IndexPick pick;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[pick.index]) {
      pick.index = i;
      pick.tie = false;
    } else if (values[i] == values[pick.index]) {
      pick.tie = true;
    }
  }
  return pick;
}

inline IndexPick argmin(std::span<const double> values) noexcept {
  IndexPick pick;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[pick.index]) {
      pick.index = i;
      pick.tie = false;
    } else if (values[i] == values[pick.index]) {
      pick.tie = true;
    }
  }
  return pick;
}

/// Process-wide record of every evidence table built, so test harnesses can
/// check the normalization invariant across a whole run.
class TableAudit {
 public:
  static TableAudit& instance() {
    static TableAudit audit;
    return audit;
  }

  void record(double normalization) noexcept {
    count_.fetch_add(1, std::memory_order_relaxed);
    const double dev = std::fabs(normalization - 1.0);
    double cur = max_dev_.load(std::memory_order_relaxed);
    while (dev > cur && !max_dev_.compare_exchange_weak(cur, dev, std::memory_order_relaxed)) {
    }
  }

  long count() const noexcept { return count_.load(); }
  double max_deviation() const noexcept { return max_dev_.load(); }

 private:
  std::atomic<long> count_{0};
  std::atomic<double> max_dev_{0.0};
};

}  // namespace relbel
