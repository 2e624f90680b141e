// robpred: run, compare and sanity-check moment-based robust predictors.

#include <robpred/harness/export.hpp>
#include <robpred/oracle/quadrature.hpp>
#include <robpred/oracle/riccati.hpp>
#include <robpred/oracle/search.hpp>
#include <robpred/scoring/decomposition.hpp>
#include <robpred/scoring/expected.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace robpred;

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> workers;
  std::string out;
  std::string format = "both";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "YAML experiment config");
  cmd->add_option("--preset", o.preset, "Built-in system when no config is given")
      ->check(CLI::IsMember({"phi1", "phi2"}));
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--trials", o.trials, "Number of trajectories");
  cmd->add_option("--horizon", o.horizon, "Trajectory length n");
  cmd->add_option("--workers", o.workers, "Worker threads (default: ROBPRED_WORKERS or all cores)");
  cmd->add_option("--out", o.out, "Output path prefix");
  cmd->add_option("--format", o.format, "Result format")->check(CLI::IsMember({"csv", "json", "both"}));
}

harness::ExperimentConfig build_config(const CommonOptions& o) {
  std::optional<harness::ExperimentConfig> cfg;
  if (!o.config_path.empty()) {
    cfg = harness::load_config(o.config_path);
  } else {
    cfg = harness::ExperimentConfig::preset(o.preset == "phi2" ? model::PhiVariant::phi2
                                                                : model::PhiVariant::phi1);
  }
  if (o.seed) cfg->master_seed = *o.seed;
  if (o.trials) cfg->trials = *o.trials;
  if (o.horizon) cfg->horizon = *o.horizon;
  if (o.workers) cfg->workers = *o.workers;
  if (!o.out.empty()) cfg->output = o.out;
  return *cfg;
}

harness::ExportFormat parse_format(const std::string& f) {
  if (f == "csv") return harness::ExportFormat::csv;
  if (f == "json") return harness::ExportFormat::json;
  return harness::ExportFormat::both;
}

std::vector<predictor::FamilySpec> parse_families(const std::string& list) {
  std::vector<predictor::FamilySpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(predictor::FamilySpec::parse(item));
  }
  if (out.empty()) throw ConfigError("no families given");
  return out;
}

/// t(2) -> t2, safe for file names.
std::string file_label(const std::string& label) {
  std::string s;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-') s += c;
  }
  return s;
}

void write_telemetry(const std::string& prefix, const harness::Json& j) {
  harness::write_text(prefix + ".telemetry.json", j.dump(2) + "\n");
}

void print_summary(const harness::ExperimentResult& r, const harness::RunTelemetry& t) {
  const auto& s = r.summary;
  std::printf("%-24s trials=%zu n=%zu diverged=%zu (%.4f) mean_finite_ll=%s se=%s wall=%.2fs workers=%zu\n",
              s.label.c_str(), s.trials, s.horizon, s.total_diverged,
              r.per_step.back().divergence_proportion, harness::format_double(s.final_mean_finite_ll).c_str(),
              harness::format_double(s.final_std_error).c_str(), t.wall_seconds, t.workers);
  if (!s.failures.empty()) std::printf("  %zu trajectories failed; first: %s\n", s.failures.size(), s.failures.front().message.c_str());
  if (s.stage_counts.size() > 1 || s.exhausted_count > 0) {
    std::printf("  stages:");
    for (const auto& [label, count] : s.stage_counts) std::printf(" %s=%zu", label.c_str(), count);
    std::printf(" exhausted=%zu\n", s.exhausted_count);
  }
}

int cmd_run(const CommonOptions& o, const std::string& family, const std::string& ladder, bool predictions) {
  harness::ExperimentConfig cfg = build_config(o);
  if (!ladder.empty()) {
    cfg.policy = predictor::PredictorPolicy::adaptive(parse_families(ladder), cfg.policy.support,
                                                       cfg.policy.inf_threshold);
  } else if (!family.empty()) {
    auto p = predictor::PredictorPolicy::single(predictor::FamilySpec::parse(family), cfg.policy.support);
    p.inf_threshold = cfg.policy.inf_threshold;
    p.scoring = cfg.policy.scoring;
    cfg.policy = p;
  }
  cfg.validate();
  harness::RunTelemetry t;
  const auto result = harness::run_experiment(cfg, &t);
  for (const auto& path : harness::export_result(result, cfg.output, parse_format(o.format))) {
    std::printf("wrote %s\n", path.c_str());
  }
  write_telemetry(cfg.output, {{"wall_seconds", t.wall_seconds}, {"workers", t.workers}});
  if (predictions) {
    RandomStream rng = RandomStream::for_trajectory(cfg.master_seed, 0);
    const auto traj = model::simulate_trajectory(cfg.system, cfg.horizon, rng);
    const auto run = predictor::run_predictor(cfg.beliefs, cfg.policy.at_stage(cfg.policy.fallback_ladder.front()),
                                              traj, cfg.system, true);
    harness::write_text(cfg.output + ".predictions.json", harness::predictions_to_json(run).dump(2) + "\n");
    std::printf("wrote %s.predictions.json\n", cfg.output.c_str());
  }
  print_summary(result, t);
  return 0;
}

int cmd_compare(const CommonOptions& o, const std::string& families) {
  const harness::ExperimentConfig cfg = build_config(o);
  std::vector<harness::RunTelemetry> tele;
  const auto cmp = harness::compare_predictors(cfg, parse_families(families), &tele);
  harness::Json tj = harness::Json::array();
  for (std::size_t i = 0; i < cmp.results.size(); ++i) {
    const std::string prefix = cfg.output + "_" + file_label(cmp.labels[i]);
    harness::export_result(cmp.results[i], prefix, parse_format(o.format));
    tj.push_back({{"family", cmp.labels[i]}, {"wall_seconds", tele[i].wall_seconds}, {"workers", tele[i].workers}});
    print_summary(cmp.results[i], tele[i]);
  }
  harness::write_text(cfg.output + "_compare.csv", harness::comparison_csv(cmp));
  write_telemetry(cfg.output + "_compare", tj);
  std::printf("wrote %s_compare.csv\n", cfg.output.c_str());
  return 0;
}

int cmd_simulate(const CommonOptions& o) {
  const harness::ExperimentConfig cfg = build_config(o);
  cfg.validate();
  harness::Json all = harness::Json::array();
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    RandomStream rng = RandomStream::for_trajectory(cfg.master_seed, i);
    all.push_back(harness::trajectory_to_json(model::simulate_trajectory(cfg.system, cfg.horizon, rng), i));
  }
  const std::string path = cfg.output + ".trajectories.json";
  harness::write_text(path, harness::Json{{"config", harness::config_to_json(cfg)}, {"trajectories", all}}.dump() + "\n");
  std::printf("wrote %s (%zu trajectories)\n", path.c_str(), cfg.trials);
  return 0;
}

struct CheckLine {
  std::string name;
  bool ok;
  std::string detail;
};

/// Quick closed-form versus oracle comparisons; the full suite lives in the
/// acceptance binary.
int cmd_check() {
  std::vector<CheckLine> lines;
  auto add = [&](std::string name, bool ok, double got, double want) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "got %.12g want %.12g", got, want);
    lines.push_back({std::move(name), ok, buf});
  };
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);

  {
    const double cf = scoring::expected_ll_gaussian_predictor_1d(0.0, 1.0, 0.0, 4.0);
    const auto pred = dist::fit_order2(Vector::Zero(1), Matrix::Constant(1, 1, 4.0));
    const double q = oracle::quad_expected_score(
        [](double s) { return std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi); }, pred,
        oracle::QuadratureSpec::around(0.0, 40.0));
    add("gaussian expected score vs quadrature", std::abs(cf - q) < 1e-8, q, cf);
  }
  {
    const auto chk = scoring::expected_ll_decomposition_check(
        scoring::student_t_truth(3.0, 0.0, 1.0), dist::fit_order2(Vector::Zero(1), Matrix::Constant(1, 1, 3.0)));
    add("entropy + KL decomposition, t(3) truth", std::abs(chk.direct - chk.decomposed) < 1e-6, chk.decomposed,
        chk.direct);
  }
  {
    const auto fit = dist::fit_order1(dist::Support(Vector::Zero(1), Vector::Ones(1)), Vector::Constant(1, 0.25));
    const double lambda = dist::parameters(fit)[2];
    const double root = oracle::bisect_root(
        [](double x) { return dist::order1_root_equation(0.0, 1.0, 0.25, x); }, -100.0, -0.1);
    add("order-1 exponential rate vs bisection", std::abs(lambda - root) < 1e-9, lambda, root);
  }
  {
    const auto sds = model::make_phi(model::PhiVariant::phi2);
    const kalman::PriorBeliefs b = harness::default_beliefs(sds);
    auto st = kalman::initial_state(b);
    for (int k = 0; k < 200; ++k) {
      st = kalman::predict_step(st, sds, b);
      st = kalman::update_step(st, sds.H() * st.x_minus, sds, b);
    }
    st = kalman::predict_step(st, sds, b);
    const auto fp = oracle::riccati_fixed_point(sds.F(), sds.H(), b.Q_hat, b.R_hat, b.P0_hat);
    const double diff = (st.P_minus - fp.P_minus).norm();
    add("steady-state prior covariance vs Riccati iteration", diff < 1e-9, diff, 0.0);
  }
  add("two-point score", std::abs(scoring::two_point_score(1.0) + half_log_2pi + 0.5) < 1e-12,
      scoring::two_point_score(1.0), -half_log_2pi - 0.5);

  bool all_ok = true;
  for (const auto& l : lines) {
    std::printf("%s  %s  (%s)\n", l.ok ? "PASS" : "FAIL", l.name.c_str(), l.detail.c_str());
    all_ok = all_ok && l.ok;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-based robust probabilistic predictors for linear stochastic systems"};
  app.require_subcommand(1);

  CommonOptions run_opts, cmp_opts, sim_opts;
  std::string family, ladder, families = "order2,laplace,t(2),t(1)";
  bool predictions = false;

  auto* run = app.add_subcommand("run", "Run one experiment and export per-step statistics");
  add_common(run, run_opts);
  run->add_option("--family", family, "Single predictor family: order0, order1, order2, laplace, t(<dof>)");
  run->add_option("--ladder", ladder, "Comma-separated fallback ladder, e.g. order2,laplace,t(2),t(1)");
  run->add_flag("--predictions", predictions, "Also export trajectory 0's per-step predictive distributions");

  auto* cmp = app.add_subcommand("compare", "Run several families on the same trajectories");
  add_common(cmp, cmp_opts);
  cmp->add_option("--families", families, "Comma-separated families");

  auto* sim = app.add_subcommand("simulate", "Write simulated trajectories as JSON");
  add_common(sim, sim_opts);

  auto* check = app.add_subcommand("check", "Closed-form versus oracle self-checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run_opts, family, ladder, predictions);
    if (cmp->parsed()) return cmd_compare(cmp_opts, families);
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (check->parsed()) return cmd_check();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
