// KF moment-based robust probabilistic predictor: at every step the Kalman
// filter supplies conditional moments, the policy's family turns them into a
// predictive distribution, and the observation is scored before the update.
#pragma once

#include <robpred/distributions/fit.hpp>
#include <robpred/kalman/kalman_filter.hpp>
#include <robpred/scoring/score_trace.hpp>

#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace robpred::predictor {

enum class Family { order0, order1, order2, laplace, student_t };

struct FamilySpec {
  Family family = Family::order2;
  double dof = 0.0;  ///< only for student_t

  static FamilySpec student_t(double dof) { return {Family::student_t, dof}; }

  /// Accepts order0, order1, order2, laplace and t(<dof>).
  static FamilySpec parse(const std::string& text) {
    if (text == "order0") return {Family::order0};
    if (text == "order1") return {Family::order1};
    if (text == "order2" || text == "gaussian") return {Family::order2};
    if (text == "laplace") return {Family::laplace};
    if (text.size() > 3 && text.rfind("t(", 0) == 0 && text.back() == ')') {
      const std::string inner = text.substr(2, text.size() - 3);
      char* end = nullptr;
      const double dof = std::strtod(inner.c_str(), &end);
      if (end != inner.c_str() && *end == '\0' && dof > 0.0) return student_t(dof);
    }
    throw ConfigError("unknown predictor family '" + text + "'");
  }

  std::string label() const {
    switch (family) {
      case Family::order0: return "order0";
      case Family::order1: return "order1";
      case Family::order2: return "order2";
      case Family::laplace: return "laplace";
      case Family::student_t: {
        std::string s = std::to_string(dof);
        s.erase(s.find_last_not_of('0') + 1);
        if (s.back() == '.') s.pop_back();
        return "t(" + s + ")";
      }
    }
    return "unknown";
  }

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

inline std::vector<FamilySpec> default_ladder() {
  return {{Family::order2}, {Family::laplace}, FamilySpec::student_t(2.0), FamilySpec::student_t(1.0)};
}

struct PredictorPolicy {
  FamilySpec family{Family::order2};
  std::optional<dist::Support> support;  ///< needed by order0 / order1
  std::vector<FamilySpec> fallback_ladder{FamilySpec{Family::order2}};
  double inf_threshold = -1e6;
  scoring::ScoringOptions scoring{};

  static PredictorPolicy single(FamilySpec f, std::optional<dist::Support> support = std::nullopt) {
    PredictorPolicy p;
    p.family = f;
    p.support = std::move(support);
    p.fallback_ladder = {f};
    return p;
  }

  static PredictorPolicy adaptive(std::vector<FamilySpec> ladder,
                                  std::optional<dist::Support> support = std::nullopt,
                                  double inf_threshold = -1e6) {
    if (ladder.empty()) throw ConfigError("PredictorPolicy: fallback ladder must not be empty");
    PredictorPolicy p;
    p.family = ladder.front();
    p.support = std::move(support);
    p.fallback_ladder = std::move(ladder);
    p.inf_threshold = inf_threshold;
    return p;
  }

  bool is_adaptive() const { return fallback_ladder.size() > 1; }

  PredictorPolicy at_stage(const FamilySpec& stage) const {
    PredictorPolicy p = *this;
    p.family = stage;
    return p;
  }

  /// Checks requirements that do not depend on data. Unbounded supports are
  /// not rejected here: they surface as NoRobustPredictor from the fits.
  void validate() const {
    if (fallback_ladder.empty()) throw ConfigError("PredictorPolicy: fallback ladder must not be empty");
    auto check = [this](const FamilySpec& f) {
      if (f.family == Family::student_t && !(f.dof > 0.0)) {
        throw ConfigError("PredictorPolicy: student_t needs a positive dof");
      }
      if ((f.family == Family::order0 || f.family == Family::order1) && !support) {
        throw ConfigError("PredictorPolicy: " + f.label() + " needs a support");
      }
    };
    check(family);
    for (const auto& f : fallback_ladder) check(f);
  }
};

/// Moment estimate of y_k given y_{1:k-1}: mean z and covariance Sigma.
using MomentEstimate = kalman::ConditionalMoments;

inline dist::PredictiveDistribution one_step_predict(const PredictorPolicy& policy,
                                                     const MomentEstimate& est) {
  switch (policy.family.family) {
    case Family::order0:
      if (!policy.support) throw ConfigError("order0 predictor needs a support");
      return dist::fit_order0(*policy.support);
    case Family::order1:
      if (!policy.support) throw ConfigError("order1 predictor needs a support");
      return dist::fit_order1(*policy.support, est.mean);
    case Family::order2:
      return dist::fit_order2(est.mean, est.cov);
    case Family::laplace:
      // Second-moment match: a centered Laplace with scale b has E s^2 = 2 b^2.
      return dist::fit_laplace(est.mean, (est.cov.diagonal() / 2.0).cwiseSqrt());
    case Family::student_t:
      return dist::fit_student_t(policy.family.dof, est.mean, est.cov);
  }
  throw ConfigError("unknown predictor family");
}

struct PredictorRun {
  scoring::ScoreTrace trace;
  std::vector<dist::PredictiveDistribution> predictions;  ///< empty unless requested
};

/// Filter, predict, score and update over the whole trajectory. Only F, G, H
/// of `sds_known` are used.
inline PredictorRun run_predictor(const kalman::PriorBeliefs& beliefs, const PredictorPolicy& policy,
                                  const model::Trajectory& trajectory, const model::LinearSds& sds_known,
                                  bool keep_predictions = true) {
  if (trajectory.size() < 1) throw DomainError("run_predictor: trajectory is empty");
  beliefs.check_against(sds_known);
  PredictorRun run{scoring::ScoreTrace(policy.scoring), {}};
  if (keep_predictions) run.predictions.reserve(trajectory.size());
  kalman::KalmanState state = kalman::initial_state(beliefs);
  for (const Vector& y : trajectory.observations) {
    state = kalman::predict_step(state, sds_known, beliefs);
    const MomentEstimate est = kalman::conditional_moments(state, sds_known, beliefs);
    dist::PredictiveDistribution pred = one_step_predict(policy, est);
    run.trace.add(dist::log_density(pred, y));
    if (keep_predictions) run.predictions.push_back(std::move(pred));
    state = kalman::update_step(state, y, sds_known, beliefs);
  }
  return run;
}

struct AdaptiveConfig {
  model::LinearSds sds_known;
  kalman::PriorBeliefs beliefs;
  PredictorPolicy policy;
};

struct AdaptiveRun {
  scoring::ScoreTrace trace;
  FamilySpec chosen_stage;
  std::size_t stage_index = 0;
  bool exhausted = false;
  std::vector<std::string> stage_errors;  ///< "<label>: <message>" per failed construction
};

/// Re-scores the whole trajectory with each ladder stage in turn and stops at
/// the first stage whose final score is >= inf_threshold. A stage whose
/// predictor cannot be built scores -inf at every step.
inline AdaptiveRun run_adaptive(const AdaptiveConfig& config, const model::Trajectory& trajectory) {
  const auto& ladder = config.policy.fallback_ladder;
  if (ladder.empty()) throw ConfigError("run_adaptive: fallback ladder must not be empty");
  AdaptiveRun out;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const PredictorPolicy stage = config.policy.at_stage(ladder[i]);
    scoring::ScoreTrace trace(stage.scoring);
    try {
      trace = run_predictor(config.beliefs, stage, trajectory, config.sds_known, false).trace;
    } catch (const NoRobustPredictor& e) {
      out.stage_errors.push_back(ladder[i].label() + ": " + e.what());
      for (std::size_t k = 0; k < trajectory.size(); ++k) trace.add(kNegInf);
    }
    out.trace = std::move(trace);
    out.chosen_stage = ladder[i];
    out.stage_index = i;
    if (out.trace.cumulative() >= config.policy.inf_threshold) return out;
  }
  out.exhausted = true;
  return out;
}

}  // namespace robpred::predictor
