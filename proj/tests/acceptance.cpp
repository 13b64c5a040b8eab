// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "peng/analyzer.hpp"
#include "peng/baseline.hpp"
#include "peng/engine.hpp"
#include "peng/fitter.hpp"
#include "peng/metrics.hpp"
#include "peng/replay.hpp"
#include "peng/synth.hpp"
#include "peng/trace_io.hpp"
#include "support/oracles.hpp"

using namespace peng;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s  %-22s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void fit_recovery() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ua(20, 95), ub(1.1, 3.0), uc(0.0, 6.0);
  double worst_truth = 0.0, worst_oracle = 0.0, fit_seconds = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    CurveParams truth{ua(rng), ub(rng), uc(rng)};
    std::vector<Point> points;
    for (int x = 1; x <= 40; ++x) points.push_back({double(x), evaluate(truth, x)});
    auto start = std::chrono::steady_clock::now();
    FitResult result = fit(points);
    fit_seconds += seconds_since(start);
    auto reference = oracle::grid_refine(points);
    worst_truth = std::max(worst_truth, std::abs(result.params.a - truth.a));
    worst_oracle = std::max(worst_oracle, std::abs(result.params.a - reference.params.a));
  }
  report(worst_truth <= 1e-2 && worst_oracle <= 1e-2 && fit_seconds < 5.0, "fit_recovery",
         fmt("50 curves: max|a-truth|=%.2e max|a-oracle|=%.2e fit_time=%.3fs", worst_truth, worst_oracle,
             fit_seconds));
}

void jacobian_check() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.5, 102.5), ub(1.0, 5.0), uc(0.0, 20.0), ux(0.0, 40.0);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    CurveParams p{ua(rng), ub(rng), uc(rng)};
    double x = ux(rng);
    while (std::pow(p.b, p.c - x) > 1e4) x = ux(rng);
    Vec3 analytic = partials(p, x);
    for (int k = 0; k < 3; ++k) {
      double fd = oracle::central_difference(p, x, k, 1e-6);
      worst = std::max(worst, std::abs(fd - analytic[k]) / std::max(1.0, std::abs(analytic[k])));
    }
  }
  report(worst <= 1e-6, "jacobian_check", fmt("1000 draws: max relative error=%.2e", worst));
}

void bounds() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> ua(0.5, 102.5), ub(1.0, 4.0), uc(0.0, 10.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> count(3, 40);
  ParamBox box = default_box();
  int violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    CurveParams truth{ua(rng), ub(rng), uc(rng)};
    std::vector<Point> points;
    int n = count(rng);
    for (int x = 1; x <= n; ++x) {
      points.push_back({double(x), std::clamp(evaluate(truth, x) + noise(rng), 0.0, 100.0)});
    }
    FitResult result = fit(points, box, {}, [&](const CurveParams& p) {
      if (!box.contains(p)) ++violations;
    });
    if (!box.contains(result.params) || !std::isfinite(result.params.b) || !std::isfinite(result.params.c)) {
      ++violations;
    }
  }
  report(violations == 0, "bounds", fmt("500 fits: out-of-box iterates or results=%.0f", violations));
}

History with_predictions(const std::vector<std::pair<double, std::optional<double>>>& rows,
                         const std::vector<double>& losses = {}) {
  History history("m", 0.5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    history.append(0.5 * (i + 1), rows[i].first, losses.empty() ? 1.0 : losses[i]);
    if (rows[i].second) history.set_latest_prediction(*rows[i].second);
  }
  return history;
}

void analyzer_conditions() {
  const DatasetProfile balanced;
  AnalyzerConfig cfg;
  auto window = [](double p1, double p2, double p3) {
    std::vector<std::pair<double, std::optional<double>>> rows(5, {40.0, std::nullopt});
    rows.push_back({70, p1});
    rows.push_back({75, p2});
    rows.push_back({80, p3});
    return with_predictions(rows);
  };

  bool cond1 = analyze(window(101.7, 101.7, 101.7), cfg, balanced).kind == DecisionKind::continue_training;
  EngineDecision tight = analyze(window(84.9, 85.1, 85.0), cfg, balanced);
  bool cond2 = tight.kind == DecisionKind::converged && tight.estimate == 85.0 &&
               analyze(window(84.5, 85.5, 85.0), cfg, balanced).kind == DecisionKind::converged &&
               analyze(window(84.4, 85.5, 85.1), cfg, balanced).kind == DecisionKind::continue_training;

  AnalyzerConfig loss_cfg;
  loss_cfg.loss_check = true;
  std::vector<std::pair<double, std::optional<double>>> pinned;
  for (int i = 0; i < 16; ++i) pinned.push_back({10.0, 10.0 + (i % 3 - 1) * 0.1});
  std::vector<double> fresh(16, 2.3), stale(16, 2.3);
  fresh[11] = 2.2;
  stale[5] = 2.2;
  bool cond3 = analyze(with_predictions(pinned, fresh), loss_cfg, balanced).kind ==
                   DecisionKind::continue_training &&
               analyze(with_predictions(pinned, stale), loss_cfg, balanced).kind == DecisionKind::converged;

  std::vector<std::pair<double, std::optional<double>>> wandering;
  for (int i = 0; i < 40; ++i) wandering.push_back({i == 17 ? 34.2 : 20.0 + 0.1 * i, 60.0 + 5.0 * (i % 2)});
  EngineDecision exhausted = analyze(with_predictions(wandering), cfg, balanced);
  bool fallback = exhausted.kind == DecisionKind::exhausted && exhausted.estimate == 34.2 &&
                  !exhausted.converged && exhausted.stop_epoch == 20.0;

  report(cond1 && cond2 && cond3 && fallback, "analyzer_conditions",
         std::string("cond1=") + (cond1 ? "ok" : "bad") + " cond2=" + (cond2 ? "ok" : "bad") +
             " cond3=" + (cond3 ? "ok" : "bad") + " e_max=" + (fallback ? "ok" : "bad"));
}

struct Experiment {
  std::vector<CurveSpec> specs;
  std::vector<ModelOutcome> outcomes;
  double seconds = 0.0;
};

Experiment run_experiment() {
  auto start = std::chrono::steady_clock::now();
  Experiment ex;
  ProfileFile profile;
  ex.specs = sample_population(default_population(), 200, 7);
  TraceCorpus corpus = generate_corpus(ex.specs, profile);
  KeyValueFile kv = KeyValueFile::parse("loss_check=auto\n");
  EngineConfig config = engine_config_from(kv, profile.profile);
  auto replayed = replay_corpus(corpus, config, 4);
  auto stops = baseline_corpus(corpus, 10.0, 20.0);
  ex.outcomes = join_outcomes(replayed, stops);
  ex.seconds = seconds_since(start);
  return ex;
}

void end_to_end(const Experiment& ex) {
  double saved = epochs_saved(ex.outcomes).mean;
  double gain = throughput_gain(ex.outcomes);
  report(saved >= 50.0 && gain >= 2.0 && ex.seconds < 60.0, "end_to_end_savings",
         fmt("200 traces: mean epochs saved=%.1f%% throughput gain=%.2fx runtime=%.2fs", saved, gain,
             ex.seconds));
}

void fidelity(const Experiment& ex) {
  int converged = 0, close = 0;
  for (std::size_t i = 0; i < ex.specs.size(); ++i) {
    if (ex.specs[i].kind != CurveKind::asymptotic) continue;
    const ModelOutcome& o = ex.outcomes[i];
    if (o.model != synthetic_model_id(i) || !o.engine_converged) continue;
    ++converged;
    if (std::abs(o.engine_estimate - ex.specs[i].params.a) <= 1.0) ++close;
  }
  double share = converged ? static_cast<double>(close) / converged : 0.0;
  report(converged > 0 && share >= 0.9, "estimate_fidelity",
         fmt("asymptotic converged=%.0f within 1.0 of truth=%.0f (%.1f%%)", converged, close, 100.0 * share));
}

void overlap(const Experiment& ex) {
  double ov = top_overlap(ex.outcomes, 20);
  double diff = mean_accuracy_diff(ex.outcomes, 20);
  report(ov >= 0.8 && diff <= 1.0, "top20_overlap", fmt("overlap=%.3f mean_accuracy_diff=%.3f", ov, diff));
}

void baseline_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    double E = trial % 2 ? 0.5 : 1.0;
    Trace trace{"m", {}, "default"};
    double level = 3.0;
    int style = trial % 4;
    for (int i = 0; i < static_cast<int>(20.0 / E); ++i) {
      double loss = 0.0;
      switch (style) {
        case 0: loss = unit(rng); break;
        case 1: level -= 0.2 * unit(rng); loss = level; break;
        case 2: loss = std::round(unit(rng) * 3.0); break;
        default: loss = i < 3 ? 3.0 - i : 1.0 + 0.01 * unit(rng); break;
      }
      trace.rows.push_back({E * (i + 1), 50.0, 1.0, loss});
    }
    double patience = trial % 3 ? 10.0 : 5.0;
    if (baseline_stop_epoch(trace, patience, 20.0) != oracle::naive_baseline_stop(trace, patience, 20.0)) {
      ++mismatches;
    }
  }
  report(mismatches == 0, "baseline_oracle", fmt("200 traces: mismatches=%.0f", mismatches));
}

int run_cli(const std::string& args) {
  std::string command = std::string("'") + PENG_CLI_PATH + "' " + args + " >/dev/null 2>&1";
  int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism() {
  fs::path root = fs::temp_directory_path() / ("peng_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  bool commands_ok = true;
  for (const char* sub : {"a", "b"}) {
    fs::path d = root / sub;
    fs::create_directories(d);
    std::string c = "'" + (d / "corpus.csv").string() + "'";
    std::string o = "'" + (d / "outcomes.csv").string() + "'";
    std::string b = "'" + (d / "baseline.csv").string() + "'";
    commands_ok &= run_cli("gen --n 200 --seed 7 --out " + c) == 0;
    commands_ok &= run_cli("replay --jobs 4 --corpus " + c + " --out " + o) == 0;
    commands_ok &= run_cli("baseline --corpus " + c + " --out " + b) == 0;
    commands_ok &= run_cli("metrics --top 10,20,30 --outcomes " + o + " --baseline " + b + " --out '" +
                           (d / "metrics").string() + "'") == 0;
  }
  int compared = 0, differing = 0;
  if (commands_ok) {
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
      if (!entry.is_regular_file()) continue;
      fs::path twin = root / "b" / fs::relative(entry.path(), root / "a");
      ++compared;
      if (!fs::exists(twin) || read_text_file(entry.path()) != read_text_file(twin)) ++differing;
    }
  }
  fs::remove_all(root);
  report(commands_ok && compared >= 8 && differing == 0, "determinism",
         fmt("gen/replay/baseline/metrics twice: files compared=%.0f differing=%.0f", compared, differing));
}

}  // namespace

int main() {
  fit_recovery();
  jacobian_check();
  bounds();
  analyzer_conditions();
  Experiment ex = run_experiment();
  end_to_end(ex);
  fidelity(ex);
  overlap(ex);
  baseline_oracle();
  determinism();
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
