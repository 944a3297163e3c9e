#pragma once

#include <cmath>
#include <cstdint>

namespace qnoise {

/// Streaming mean/variance (Welford), mergeable with Chan's update. Adding a
/// constant sequence leaves the mean bit-identical to that constant.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double total = static_cast<double>(count_ + other.count_);
    const double delta = other.mean_ - mean_;
    mean_ += delta * (static_cast<double>(other.count_) / total);
    m2_ += other.m2_ + delta * delta * (static_cast<double>(count_) * static_cast<double>(other.count_) / total);
    count_ += other.count_;
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }

  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const { return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1); }
  double stddev() const { return std::sqrt(variance()); }
  double standard_error() const { return count_ == 0 ? 0.0 : stddev() / std::sqrt(static_cast<double>(count_)); }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace qnoise
