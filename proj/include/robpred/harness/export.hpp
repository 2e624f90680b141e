#pragma once

#include <robpred/harness/experiment.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace robpred::harness {

/// %.17g, with inf / -inf / nan spelled out.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (x == kInf) return "inf";
  if (x == kNegInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "k,mean_finite_ll,q10,q50,q90,divergence_proportion";
  const std::size_t nb = r.per_step.empty() ? 0 : r.per_step.front().histogram.size();
  for (std::size_t b = 0; b < nb; ++b) os << ",bin_" << b;
  os << '\n';
  for (const auto& s : r.per_step) {
    os << s.k << ',' << format_double(s.mean_finite_ll) << ',' << format_double(s.q10) << ','
       << format_double(s.q50) << ',' << format_double(s.q90) << ',' << format_double(s.divergence_proportion);
    for (auto c : s.histogram) os << ',' << c;
    os << '\n';
  }
  return os.str();
}

inline Json to_json(const ExperimentResult& r) {
  Json steps = Json::array();
  for (const auto& s : r.per_step) {
    steps.push_back({{"k", s.k},
                     {"mean_finite_ll", encode_number(s.mean_finite_ll)},
                     {"q10", encode_number(s.q10)},
                     {"q50", encode_number(s.q50)},
                     {"q90", encode_number(s.q90)},
                     {"diverged_count", s.diverged_count},
                     {"divergence_proportion", encode_number(s.divergence_proportion)},
                     {"histogram", s.histogram}});
  }
  const auto& m = r.summary;
  Json failures = Json::array();
  for (const auto& f : m.failures) failures.push_back({{"trajectory", f.trajectory}, {"message", f.message}});
  Json summary = {{"label", m.label},
                  {"trials", m.trials},
                  {"horizon", m.horizon},
                  {"final_mean_finite_ll", encode_number(m.final_mean_finite_ll)},
                  {"final_std_error", encode_number(m.final_std_error)},
                  {"final_finite_count", m.final_finite_count},
                  {"total_diverged", m.total_diverged},
                  {"nan_steps", m.nan_steps},
                  {"stage_counts", m.stage_counts},
                  {"exhausted_count", m.exhausted_count},
                  {"failures", failures},
                  {"config", m.config},
                  {"source_fingerprint", m.source_fingerprint}};
  return {{"per_step", steps}, {"summary", summary}};
}

inline ExperimentResult result_from_json(const Json& j) {
  try {
    ExperimentResult r;
    for (const auto& s : j.at("per_step")) {
      StepStatistics st;
      st.k = s.at("k").get<std::size_t>();
      st.mean_finite_ll = decode_number(s.at("mean_finite_ll"));
      st.q10 = decode_number(s.at("q10"));
      st.q50 = decode_number(s.at("q50"));
      st.q90 = decode_number(s.at("q90"));
      st.diverged_count = s.at("diverged_count").get<std::size_t>();
      st.divergence_proportion = decode_number(s.at("divergence_proportion"));
      st.histogram = s.at("histogram").get<std::vector<std::uint64_t>>();
      r.per_step.push_back(std::move(st));
    }
    const auto& m = j.at("summary");
    auto& out = r.summary;
    out.label = m.at("label").get<std::string>();
    out.trials = m.at("trials").get<std::size_t>();
    out.horizon = m.at("horizon").get<std::size_t>();
    out.final_mean_finite_ll = decode_number(m.at("final_mean_finite_ll"));
    out.final_std_error = decode_number(m.at("final_std_error"));
    out.final_finite_count = m.at("final_finite_count").get<std::size_t>();
    out.total_diverged = m.at("total_diverged").get<std::size_t>();
    out.nan_steps = m.at("nan_steps").get<std::size_t>();
    out.stage_counts = m.at("stage_counts").get<std::map<std::string, std::size_t>>();
    out.exhausted_count = m.at("exhausted_count").get<std::size_t>();
    for (const auto& f : m.at("failures")) {
      out.failures.push_back({f.at("trajectory").get<std::size_t>(), f.at("message").get<std::string>()});
    }
    out.config = m.at("config");
    out.source_fingerprint = m.at("source_fingerprint").get<std::string>();
    return r;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("result JSON: ") + e.what());
  }
}

/// Side-by-side per-step means and divergence proportions, one column pair
/// per compared family.
inline std::string comparison_csv(const Comparison& c) {
  std::ostringstream os;
  os << "k";
  for (const auto& l : c.labels) os << ',' << l << "_mean_finite_ll," << l << "_divergence_proportion";
  os << '\n';
  const std::size_t n = c.results.empty() ? 0 : c.results.front().per_step.size();
  for (std::size_t k = 0; k < n; ++k) {
    os << k + 1;
    for (const auto& r : c.results) {
      os << ',' << format_double(r.per_step[k].mean_finite_ll) << ','
         << format_double(r.per_step[k].divergence_proportion);
    }
    os << '\n';
  }
  return os.str();
}

inline Json predictions_to_json(const predictor::PredictorRun& run) {
  Json steps = Json::array();
  for (std::size_t k = 0; k < run.predictions.size(); ++k) {
    steps.push_back({{"k", k + 1},
                     {"family", dist::family_tag(run.predictions[k])},
                     {"parameters", encode_vector(dist::parameters(run.predictions[k]))},
                     {"step_ll", encode_number(run.trace.per_step()[k])},
                     {"cumulative", encode_number(run.trace.cumulative_history()[k])}});
  }
  return steps;
}

inline Json trajectory_to_json(const model::Trajectory& t, std::size_t index) {
  Json obs = Json::array();
  for (const auto& y : t.observations) obs.push_back(encode_vector(y));
  Json states = Json::array();
  for (const auto& x : t.states) states.push_back(encode_vector(x));
  return {{"trajectory", index}, {"seed", t.seed}, {"states", states}, {"observations", obs}};
}

inline void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw Error("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

enum class ExportFormat { csv, json, both };

/// Writes <prefix>.csv and/or <prefix>.json; returns the paths written.
inline std::vector<std::string> export_result(const ExperimentResult& r, const std::string& prefix,
                                              ExportFormat format) {
  std::vector<std::string> written;
  if (format != ExportFormat::json) {
    write_text(prefix + ".csv", to_csv(r));
    written.push_back(prefix + ".csv");
  }
  if (format != ExportFormat::csv) {
    write_text(prefix + ".json", to_json(r).dump(2) + "\n");
    written.push_back(prefix + ".json");
  }
  return written;
}

inline ExperimentResult load_result_json(const std::string& path) {
  try {
    return result_from_json(Json::parse(read_text(path)));
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

}  // namespace robpred::harness
