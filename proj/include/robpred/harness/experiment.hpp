// Monte Carlo experiment runner: simulate trajectories with per-trajectory
// seeds, score each with the configured predictor, then aggregate per-step
// statistics in trajectory order so results do not depend on scheduling.
#pragma once

#include <robpred/harness/config.hpp>
#include <robpred/harness/parallel.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#ifndef ROBPRED_SOURCE_FINGERPRINT
#define ROBPRED_SOURCE_FINGERPRINT "unknown"
#endif

namespace robpred::harness {

inline std::string source_fingerprint() { return ROBPRED_SOURCE_FINGERPRINT; }

struct TrajectoryOutcome {
  std::vector<double> cumulative;  ///< cumulative score after each step
  std::size_t stage_index = 0;
  bool exhausted = false;
  std::size_t nan_count = 0;
  std::optional<std::string> error;
};

/// Scores trajectory `index` of the experiment. Component errors are caught
/// and recorded; the trajectory then scores -inf from step 1.
inline TrajectoryOutcome score_trajectory(const ExperimentConfig& cfg, std::size_t index) {
  TrajectoryOutcome out;
  try {
    RandomStream rng = RandomStream::for_trajectory(cfg.master_seed, index);
    const model::Trajectory traj = model::simulate_trajectory(cfg.system, cfg.horizon, rng);
    if (cfg.policy.is_adaptive()) {
      const predictor::AdaptiveConfig ac{cfg.system, cfg.beliefs, cfg.policy};
      predictor::AdaptiveRun run = predictor::run_adaptive(ac, traj);
      out.cumulative = run.trace.cumulative_history();
      out.stage_index = run.stage_index;
      out.exhausted = run.exhausted;
      out.nan_count = run.trace.nan_count();
    } else {
      const auto run = predictor::run_predictor(cfg.beliefs, cfg.policy, traj, cfg.system, false);
      out.cumulative = run.trace.cumulative_history();
      out.nan_count = run.trace.nan_count();
    }
  } catch (const std::exception& e) {
    out.error = e.what();
    out.cumulative.assign(cfg.horizon, kNegInf);
  }
  return out;
}

inline std::vector<TrajectoryOutcome> score_trajectories(const ExperimentConfig& cfg, std::size_t workers = 0) {
  cfg.validate();
  std::vector<TrajectoryOutcome> outcomes(cfg.trials);
  parallel_for(cfg.trials, workers, [&](std::size_t i) { outcomes[i] = score_trajectory(cfg, i); });
  return outcomes;
}

struct StepStatistics {
  std::size_t k = 0;
  double mean_finite_ll = kNaN;  ///< NaN when every trajectory has diverged
  double q10 = kNaN, q50 = kNaN, q90 = kNaN;
  std::size_t diverged_count = 0;
  double divergence_proportion = 0.0;
  std::vector<std::uint64_t> histogram;  ///< [underflow, bins..., overflow]

  friend bool operator==(const StepStatistics&, const StepStatistics&) = default;
};

struct TrajectoryFailure {
  std::size_t trajectory = 0;
  std::string message;

  friend bool operator==(const TrajectoryFailure&, const TrajectoryFailure&) = default;
};

struct ExperimentSummary {
  std::string label;
  std::size_t trials = 0;
  std::size_t horizon = 0;
  double final_mean_finite_ll = kNaN;
  double final_std_error = kNaN;
  std::size_t final_finite_count = 0;
  std::size_t total_diverged = 0;
  std::size_t nan_steps = 0;
  std::map<std::string, std::size_t> stage_counts;
  std::size_t exhausted_count = 0;
  std::vector<TrajectoryFailure> failures;
  Json config;
  std::string source_fingerprint;
};

namespace detail {
inline bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }
inline bool same_step(const StepStatistics& a, const StepStatistics& b) {
  return a.k == b.k && same_double(a.mean_finite_ll, b.mean_finite_ll) && same_double(a.q10, b.q10) &&
         same_double(a.q50, b.q50) && same_double(a.q90, b.q90) && a.diverged_count == b.diverged_count &&
         same_double(a.divergence_proportion, b.divergence_proportion) && a.histogram == b.histogram;
}
}  // namespace detail

struct ExperimentResult {
  std::vector<StepStatistics> per_step;
  ExperimentSummary summary;

  /// Exact equality, with NaN equal to NaN.
  friend bool operator==(const ExperimentResult& a, const ExperimentResult& b) {
    const auto& x = a.summary;
    const auto& y = b.summary;
    if (a.per_step.size() != b.per_step.size()) return false;
    for (std::size_t i = 0; i < a.per_step.size(); ++i) {
      if (!detail::same_step(a.per_step[i], b.per_step[i])) return false;
    }
    return x.label == y.label && x.trials == y.trials && x.horizon == y.horizon &&
           detail::same_double(x.final_mean_finite_ll, y.final_mean_finite_ll) &&
           detail::same_double(x.final_std_error, y.final_std_error) &&
           x.final_finite_count == y.final_finite_count && x.total_diverged == y.total_diverged &&
           x.nan_steps == y.nan_steps && x.stage_counts == y.stage_counts &&
           x.exhausted_count == y.exhausted_count && x.failures == y.failures && x.config == y.config &&
           x.source_fingerprint == y.source_fingerprint;
  }
};

/// Kept out of result files so they stay byte-identical across runs.
struct RunTelemetry {
  double wall_seconds = 0.0;
  std::size_t workers = 0;
};

/// Type-7 quantile of ascending data; -inf entries are ordinary values, and
/// interpolating towards a -inf neighbour gives -inf.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return kNaN;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
  const double a = sorted[lo], b = sorted[lo + 1];
  if (a == kNegInf) return kNegInf;
  return a + frac * (b - a);
}

/// Bin 0 holds scores below ll_min (including -inf), bin bins+1 scores at or
/// above ll_max.
inline std::size_t histogram_bin(const HistogramSpec& h, double score) {
  if (!(score >= h.ll_min)) return 0;
  if (score >= h.ll_max) return h.bins + 1;
  const double w = (h.ll_max - h.ll_min) / static_cast<double>(h.bins);
  const auto b = static_cast<std::size_t>((score - h.ll_min) / w);
  return std::min(b, h.bins - 1) + 1;
}

inline std::string policy_label(const predictor::PredictorPolicy& p) {
  if (!p.is_adaptive()) return p.family.label();
  std::string s = "adaptive[";
  for (std::size_t i = 0; i < p.fallback_ladder.size(); ++i) {
    if (i) s += ",";
    s += p.fallback_ladder[i].label();
  }
  return s + "]";
}

inline ExperimentResult aggregate(const ExperimentConfig& cfg, const std::vector<TrajectoryOutcome>& outcomes) {
  ExperimentResult result;
  auto& sum = result.summary;
  sum.label = policy_label(cfg.policy);
  sum.trials = outcomes.size();
  sum.horizon = cfg.horizon;
  sum.config = config_to_json(cfg);
  sum.source_fingerprint = source_fingerprint();

  std::vector<double> column(outcomes.size());
  for (std::size_t k = 0; k < cfg.horizon; ++k) {
    StepStatistics st;
    st.k = k + 1;
    st.histogram.assign(cfg.histogram.bins + 2, 0);
    double total = 0.0;
    std::size_t finite = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const double c = outcomes[i].cumulative[k];
      column[i] = c;
      ++st.histogram[histogram_bin(cfg.histogram, c)];
      if (std::isfinite(c)) {
        total += c;
        ++finite;
      }
    }
    st.diverged_count = outcomes.size() - finite;
    st.divergence_proportion = static_cast<double>(st.diverged_count) / static_cast<double>(outcomes.size());
    if (finite > 0) st.mean_finite_ll = total / static_cast<double>(finite);
    std::sort(column.begin(), column.end());
    st.q10 = quantile_sorted(column, 0.10);
    st.q50 = quantile_sorted(column, 0.50);
    st.q90 = quantile_sorted(column, 0.90);
    result.per_step.push_back(std::move(st));
  }

  const StepStatistics& last = result.per_step.back();
  sum.final_mean_finite_ll = last.mean_finite_ll;
  sum.final_finite_count = outcomes.size() - last.diverged_count;
  sum.total_diverged = last.diverged_count;
  if (sum.final_finite_count > 1) {
    double ss = 0.0;
    for (const auto& o : outcomes) {
      const double c = o.cumulative.back();
      if (std::isfinite(c)) ss += (c - sum.final_mean_finite_ll) * (c - sum.final_mean_finite_ll);
    }
    const auto n = static_cast<double>(sum.final_finite_count);
    sum.final_std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    sum.nan_steps += o.nan_count;
    if (o.exhausted) ++sum.exhausted_count;
    if (o.error) {
      sum.failures.push_back({i, *o.error});
    } else {
      ++sum.stage_counts[cfg.policy.fallback_ladder.at(o.stage_index).label()];
    }
  }
  return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, RunTelemetry* telemetry = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t workers = cfg.workers ? cfg.workers : default_workers();
  ExperimentResult result = aggregate(cfg, score_trajectories(cfg, workers));
  if (telemetry) {
    telemetry->workers = workers;
    telemetry->wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return result;
}

struct Comparison {
  std::vector<std::string> labels;
  std::vector<ExperimentResult> results;
};

/// One experiment per family on the same trajectory realizations: every run
/// shares the base config's system, beliefs and master seed.
inline Comparison compare_predictors(const ExperimentConfig& base, const std::vector<predictor::FamilySpec>& families,
                                     std::vector<RunTelemetry>* telemetry = nullptr) {
  if (families.empty()) throw ConfigError("compare_predictors: no families given");
  Comparison cmp;
  for (const auto& f : families) {
    ExperimentConfig cfg = base;
    cfg.policy = predictor::PredictorPolicy::single(f, base.policy.support);
    cfg.policy.inf_threshold = base.policy.inf_threshold;
    cfg.policy.scoring = base.policy.scoring;
    RunTelemetry t;
    cmp.results.push_back(run_experiment(cfg, &t));
    cmp.labels.push_back(f.label());
    if (telemetry) telemetry->push_back(t);
  }
  return cmp;
}

}  // namespace robpred::harness
