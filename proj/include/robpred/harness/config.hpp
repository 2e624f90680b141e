// Experiment configuration, loaded from YAML. Schema (all keys optional
// unless marked):
//
//   system:            preset: phi1 | phi2, or explicit F, H (required), G,
//                      x0, x0_cov, inputs, process_noise, observation_noise.
//                      Explicit keys override a preset.
//   beliefs:           "exact", or a table of Q_hat, R_hat, x0_hat, P0_hat,
//                      inputs_hat. Defaults: identities and the true x0.
//   policy:            family, ladder, inf_threshold, support {lower, upper},
//                      scoring {floor, step_floor}.
//   horizon, trials, master_seed, workers, output
//   histogram:         ll_min, ll_max, bins
//
// Noise tables: {type: gaussian, mean, cov}, {type: student_t, dof,
// location, scale} or {type: two_point, first, second, prob_first}.
#pragma once

#include <robpred/harness/json_util.hpp>
#include <robpred/kalman/kalman_filter.hpp>
#include <robpred/predictor/predictor.hpp>

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace robpred::harness {

struct HistogramSpec {
  double ll_min = -2000.0;
  double ll_max = 0.0;
  std::size_t bins = 100;

  void validate() const {
    if (!(ll_min < ll_max)) throw ConfigError("histogram: ll_min must be below ll_max");
    if (bins < 1) throw ConfigError("histogram: bins must be >= 1");
  }
};

/// Identity noise beliefs, P0_hat = I and the system's own x0.
inline kalman::PriorBeliefs default_beliefs(const model::LinearSds& sds) {
  const Index dx = sds.state_dim(), dy = sds.output_dim();
  return kalman::PriorBeliefs(Matrix::Identity(dx, dx), Matrix::Identity(dy, dy), sds.x0(),
                              Matrix::Identity(dx, dx));
}

/// Beliefs equal to the true Gaussian noise covariances and initial state.
inline kalman::PriorBeliefs exact_beliefs(const model::LinearSds& sds) {
  const auto* q = std::get_if<model::GaussianNoise>(&sds.process_noise());
  const auto* r = std::get_if<model::GaussianNoise>(&sds.observation_noise());
  if (!q || !r) throw ConfigError("beliefs: exact requires Gaussian process and observation noise");
  const Index dx = sds.state_dim();
  return kalman::PriorBeliefs(q->cov(), r->cov(), sds.x0(),
                              sds.x0_cov().value_or(Matrix::Identity(dx, dx)), sds.inputs());
}

struct ExperimentConfig {
  std::string system_label;  ///< phi1, phi2 or custom
  model::LinearSds system;
  kalman::PriorBeliefs beliefs;
  predictor::PredictorPolicy policy;
  std::size_t horizon = 100;
  std::size_t trials = 5000;
  std::uint64_t master_seed = 1;
  HistogramSpec histogram{};
  std::string output = "results/run";
  std::size_t workers = 0;  ///< 0 means default_workers()

  ExperimentConfig(std::string label, model::LinearSds sds, kalman::PriorBeliefs b,
                   predictor::PredictorPolicy p = {})
      : system_label(std::move(label)), system(std::move(sds)), beliefs(std::move(b)), policy(std::move(p)) {}

  static ExperimentConfig preset(model::PhiVariant v) {
    model::LinearSds sds = model::make_phi(v);
    kalman::PriorBeliefs b = default_beliefs(sds);
    return ExperimentConfig(v == model::PhiVariant::phi1 ? "phi1" : "phi2", std::move(sds), std::move(b));
  }

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    histogram.validate();
    policy.validate();
    beliefs.check_against(system);
    if (!system.inputs().empty() && system.inputs().size() < horizon) {
      throw ConfigError("system inputs shorter than the horizon");
    }
    if (!beliefs.inputs_hat.empty() && beliefs.inputs_hat.size() < horizon) {
      throw ConfigError("believed inputs shorter than the horizon");
    }
    if (policy.support) require_dim(policy.support->dim(), system.output_dim(), "policy support");
  }
};

namespace detail {

inline double yaml_number(const YAML::Node& n, const std::string& what) {
  try {
    const auto s = n.as<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return kNegInf;
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(what + ": expected a number");
  }
}

inline Vector yaml_vector(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw ConfigError(what + ": expected a list of numbers");
  Vector v(static_cast<Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) v(static_cast<Index>(i)) = yaml_number(n[i], what);
  return v;
}

inline Matrix yaml_matrix(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw ConfigError(what + ": expected a list of rows");
  if (n.size() == 0) return Matrix(0, 0);
  const std::size_t cols = n[0].size();
  Matrix m(static_cast<Index>(n.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < n.size(); ++r) {
    if (!n[r].IsSequence() || n[r].size() != cols) throw ConfigError(what + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = yaml_number(n[r][c], what);
    }
  }
  return m;
}

inline std::vector<Vector> yaml_vector_list(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw ConfigError(what + ": expected a list of vectors");
  std::vector<Vector> out;
  for (const auto& item : n) out.push_back(yaml_vector(item, what));
  return out;
}

inline model::NoiseSpec yaml_noise(const YAML::Node& n, Index dim, const std::string& what) {
  if (!n.IsMap()) throw ConfigError(what + ": expected a noise table");
  const std::string type = n["type"] ? n["type"].as<std::string>() : "gaussian";
  if (type == "gaussian") {
    Vector mean = n["mean"] ? yaml_vector(n["mean"], what + ".mean") : Vector::Zero(dim);
    if (n["cov"] && n["cov"].IsSequence() && n["cov"].size() == 0) {
      return model::GaussianNoise::degenerate(std::move(mean));
    }
    Matrix cov = n["cov"] ? yaml_matrix(n["cov"], what + ".cov") : Matrix::Identity(dim, dim);
    return model::GaussianNoise(std::move(mean), std::move(cov));
  }
  if (type == "student_t") {
    if (!n["dof"]) throw ConfigError(what + ": student_t needs dof");
    Vector loc = n["location"] ? yaml_vector(n["location"], what + ".location") : Vector::Zero(dim);
    Matrix scale = n["scale"] ? yaml_matrix(n["scale"], what + ".scale") : Matrix::Identity(dim, dim);
    return model::StudentTNoise(yaml_number(n["dof"], what + ".dof"), std::move(loc), std::move(scale));
  }
  if (type == "two_point") {
    if (!n["first"] || !n["second"]) throw ConfigError(what + ": two_point needs first and second");
    const double p = n["prob_first"] ? yaml_number(n["prob_first"], what + ".prob_first") : 0.5;
    return model::TwoPointNoise(yaml_vector(n["first"], what + ".first"),
                                yaml_vector(n["second"], what + ".second"), p);
  }
  throw ConfigError(what + ": unknown noise type '" + type + "'");
}

inline std::pair<std::string, model::LinearSds> yaml_system(const YAML::Node& n) {
  if (!n || !n.IsMap()) throw ConfigError("system: expected a table");
  std::string label = "custom";
  std::optional<model::LinearSds::Params> base;
  if (n["preset"]) {
    label = n["preset"].as<std::string>();
    if (label == "phi1") base = model::make_phi(model::PhiVariant::phi1).params();
    else if (label == "phi2") base = model::make_phi(model::PhiVariant::phi2).params();
    else throw ConfigError("system.preset: unknown preset '" + label + "'");
  }
  const bool overridden = n.size() > (n["preset"] ? 1u : 0u);
  if (!base) {
    if (!n["F"] || !n["H"]) throw ConfigError("system: F and H are required without a preset");
    const Matrix F = yaml_matrix(n["F"], "system.F");
    const Matrix H = yaml_matrix(n["H"], "system.H");
    base = model::LinearSds::Params{
        .F = F,
        .G = Matrix::Zero(F.rows(), 0),
        .H = H,
        .process_noise = model::GaussianNoise::standard(F.rows()),
        .observation_noise = model::GaussianNoise::standard(H.rows()),
        .x0 = Vector::Zero(F.rows()),
        .x0_cov = std::nullopt,
        .inputs = {},
    };
  }
  auto& p = *base;
  if (n["F"]) p.F = yaml_matrix(n["F"], "system.F");
  if (n["H"]) p.H = yaml_matrix(n["H"], "system.H");
  if (n["G"]) p.G = yaml_matrix(n["G"], "system.G");
  if (n["x0"]) p.x0 = yaml_vector(n["x0"], "system.x0");
  if (n["x0_cov"]) p.x0_cov = yaml_matrix(n["x0_cov"], "system.x0_cov");
  if (n["inputs"]) p.inputs = yaml_vector_list(n["inputs"], "system.inputs");
  if (n["process_noise"]) p.process_noise = yaml_noise(n["process_noise"], p.F.rows(), "system.process_noise");
  if (n["observation_noise"]) {
    p.observation_noise = yaml_noise(n["observation_noise"], p.H.rows(), "system.observation_noise");
  }
  if (overridden && label != "custom") label += "+overrides";
  return {label, model::LinearSds(std::move(p))};
}

inline kalman::PriorBeliefs yaml_beliefs(const YAML::Node& n, const model::LinearSds& sds) {
  if (!n) return default_beliefs(sds);
  if (n.IsScalar()) {
    const auto s = n.as<std::string>();
    if (s == "exact") return exact_beliefs(sds);
    if (s == "default") return default_beliefs(sds);
    throw ConfigError("beliefs: unknown shorthand '" + s + "'");
  }
  const Index dx = sds.state_dim(), dy = sds.output_dim();
  return kalman::PriorBeliefs(
      n["Q_hat"] ? yaml_matrix(n["Q_hat"], "beliefs.Q_hat") : Matrix::Identity(dx, dx),
      n["R_hat"] ? yaml_matrix(n["R_hat"], "beliefs.R_hat") : Matrix::Identity(dy, dy),
      n["x0_hat"] ? yaml_vector(n["x0_hat"], "beliefs.x0_hat") : sds.x0(),
      n["P0_hat"] ? yaml_matrix(n["P0_hat"], "beliefs.P0_hat") : Matrix::Identity(dx, dx),
      n["inputs_hat"] ? yaml_vector_list(n["inputs_hat"], "beliefs.inputs_hat") : std::vector<Vector>{});
}

inline predictor::PredictorPolicy yaml_policy(const YAML::Node& n) {
  using predictor::FamilySpec;
  predictor::PredictorPolicy policy;
  if (!n) return policy;
  std::optional<dist::Support> support;
  if (n["support"]) {
    support = dist::Support(yaml_vector(n["support"]["lower"], "policy.support.lower"),
                            yaml_vector(n["support"]["upper"], "policy.support.upper"));
  }
  const double inf = n["inf_threshold"] ? yaml_number(n["inf_threshold"], "policy.inf_threshold") : -1e6;
  if (n["ladder"]) {
    std::vector<FamilySpec> ladder;
    for (const auto& item : n["ladder"]) ladder.push_back(FamilySpec::parse(item.as<std::string>()));
    policy = predictor::PredictorPolicy::adaptive(std::move(ladder), support, inf);
  } else {
    const FamilySpec f = n["family"] ? FamilySpec::parse(n["family"].as<std::string>()) : FamilySpec{};
    policy = predictor::PredictorPolicy::single(f, support);
    policy.inf_threshold = inf;
  }
  if (const auto s = n["scoring"]) {
    if (s["floor"]) policy.scoring.floor = yaml_number(s["floor"], "policy.scoring.floor");
    if (s["step_floor"]) {
      policy.scoring.step_floor = s["step_floor"].as<std::string>() == "none"
                                      ? kNegInf
                                      : yaml_number(s["step_floor"], "policy.scoring.step_floor");
    }
  }
  return policy;
}

}  // namespace detail

inline ExperimentConfig parse_config(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("config: top level must be a table");
  auto [label, sds] = detail::yaml_system(root["system"]);
  kalman::PriorBeliefs beliefs = detail::yaml_beliefs(root["beliefs"], sds);
  ExperimentConfig cfg(label, std::move(sds), std::move(beliefs), detail::yaml_policy(root["policy"]));
  try {
    if (root["horizon"]) cfg.horizon = root["horizon"].as<std::size_t>();
    if (root["trials"]) cfg.trials = root["trials"].as<std::size_t>();
    if (root["master_seed"]) cfg.master_seed = root["master_seed"].as<std::uint64_t>();
    if (root["workers"]) cfg.workers = root["workers"].as<std::size_t>();
    if (root["output"]) cfg.output = root["output"].as<std::string>();
    if (const auto h = root["histogram"]) {
      if (h["ll_min"]) cfg.histogram.ll_min = detail::yaml_number(h["ll_min"], "histogram.ll_min");
      if (h["ll_max"]) cfg.histogram.ll_max = detail::yaml_number(h["ll_max"], "histogram.ll_max");
      if (h["bins"]) cfg.histogram.bins = h["bins"].as<std::size_t>();
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  try {
    return parse_config(YAML::Load(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(YAML::LoadFile(path));
  } catch (const YAML::BadFile&) {
    throw ConfigError("config: cannot read '" + path + "'");
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

inline Json noise_to_json(const model::NoiseSpec& spec) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, model::GaussianNoise>) {
          return {{"type", "gaussian"}, {"mean", encode_vector(s.mean())}, {"cov", encode_matrix(s.cov())}};
        } else if constexpr (std::is_same_v<T, model::StudentTNoise>) {
          return {{"type", "student_t"},
                  {"dof", encode_number(s.dof())},
                  {"location", encode_vector(s.location())},
                  {"scale", encode_matrix(s.scale())}};
        } else {
          return {{"type", "two_point"},
                  {"first", encode_vector(s.first())},
                  {"second", encode_vector(s.second())},
                  {"prob_first", encode_number(s.prob_first())}};
        }
      },
      spec);
}

/// Normalized echo of every setting that influences results. Worker count
/// and output path are left out.
inline Json config_to_json(const ExperimentConfig& cfg) {
  const auto& s = cfg.system;
  Json inputs = Json::array();
  for (const auto& u : s.inputs()) inputs.push_back(encode_vector(u));
  Json inputs_hat = Json::array();
  for (const auto& u : cfg.beliefs.inputs_hat) inputs_hat.push_back(encode_vector(u));
  Json ladder = Json::array();
  for (const auto& f : cfg.policy.fallback_ladder) ladder.push_back(f.label());
  Json policy = {{"family", cfg.policy.family.label()},
                 {"ladder", ladder},
                 {"adaptive", cfg.policy.is_adaptive()},
                 {"inf_threshold", encode_number(cfg.policy.inf_threshold)},
                 {"scoring",
                  {{"floor", encode_number(cfg.policy.scoring.floor)},
                   {"step_floor", encode_number(cfg.policy.scoring.step_floor)}}}};
  if (cfg.policy.support) {
    policy["support"] = {{"lower", encode_vector(cfg.policy.support->lower())},
                         {"upper", encode_vector(cfg.policy.support->upper())}};
  }
  Json system = {{"label", cfg.system_label},
                 {"F", encode_matrix(s.F())},
                 {"G", encode_matrix(s.G())},
                 {"H", encode_matrix(s.H())},
                 {"x0", encode_vector(s.x0())},
                 {"inputs", inputs},
                 {"process_noise", noise_to_json(s.process_noise())},
                 {"observation_noise", noise_to_json(s.observation_noise())}};
  system["x0_cov"] = s.x0_cov() ? encode_matrix(*s.x0_cov()) : Json();
  return {{"system", system},
          {"beliefs",
           {{"Q_hat", encode_matrix(cfg.beliefs.Q_hat)},
            {"R_hat", encode_matrix(cfg.beliefs.R_hat)},
            {"x0_hat", encode_vector(cfg.beliefs.x0_hat)},
            {"P0_hat", encode_matrix(cfg.beliefs.P0_hat)},
            {"inputs_hat", inputs_hat}}},
          {"policy", policy},
          {"horizon", cfg.horizon},
          {"trials", cfg.trials},
          {"master_seed", cfg.master_seed},
          {"histogram",
           {{"ll_min", encode_number(cfg.histogram.ll_min)},
            {"ll_max", encode_number(cfg.histogram.ll_max)},
            {"bins", cfg.histogram.bins}}}};
}

}  // namespace robpred::harness
