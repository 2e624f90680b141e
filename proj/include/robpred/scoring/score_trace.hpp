// Online accumulation of the log-likelihood functional
//   L(F, y_{1:k}) = sum_j log p_hat(y_j | y_{1:j-1})
// with saturating -inf arithmetic and divergence bookkeeping.
#pragma once

#include <robpred/core/types.hpp>

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace robpred::scoring {

struct ScoringOptions {
  /// Cumulative scores below this are treated as diverged.
  double floor = -1e9;
  /// A step whose log-density is below this has a density that is not
  /// representable as a positive double; it scores -inf.
  double step_floor = kLogSmallestDensity;
};

class ScoreTrace {
 public:
  ScoreTrace() = default;
  explicit ScoreTrace(ScoringOptions options) : options_(options) {}

  /// Appends one step. NaN is counted and scored as -inf.
  void add(double step_ll) {
    if (std::isnan(step_ll)) {
      ++nan_count_;
      step_ll = kNegInf;
    }
    if (step_ll < options_.step_floor) step_ll = kNegInf;
    per_step_.push_back(step_ll);
    if (!diverged_at_) {
      cumulative_ = saturating_add(cumulative_, step_ll);
      if (!std::isfinite(cumulative_) || cumulative_ < options_.floor) {
        cumulative_ = kNegInf;
        diverged_at_ = per_step_.size();
      }
    }
    history_.push_back(cumulative_);
  }

  const std::vector<double>& per_step() const { return per_step_; }
  /// Cumulative score after each step.
  const std::vector<double>& cumulative_history() const { return history_; }
  double cumulative() const { return cumulative_; }
  /// 1-based step at which the cumulative score first diverged.
  std::optional<std::size_t> diverged_at() const { return diverged_at_; }
  bool diverged() const { return diverged_at_.has_value(); }
  std::size_t nan_count() const { return nan_count_; }
  std::size_t size() const { return per_step_.size(); }
  const ScoringOptions& options() const { return options_; }

 private:
  ScoringOptions options_{};
  std::vector<double> per_step_;
  std::vector<double> history_;
  double cumulative_ = 0.0;
  std::optional<std::size_t> diverged_at_;
  std::size_t nan_count_ = 0;
};

inline ScoreTrace accumulate(ScoreTrace trace, double step_ll) {
  trace.add(step_ll);
  return trace;
}

}  // namespace robpred::scoring
