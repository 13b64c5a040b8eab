// peng: command-line front end for the performance estimation engine.
//
//   peng gen       --n 200 --seed 7 --out corpus.csv [--population pop.kv] [--profile p.kv]
//   peng replay    --corpus corpus.csv --out outcomes.csv [--config engine.kv] [--jobs 4]
//   peng baseline  --corpus corpus.csv --out baseline.csv [--patience 10]
//   peng metrics   --outcomes outcomes.csv --baseline baseline.csv --top 10,20,30 --out dir
//   peng fit       --points points.csv [--box a_upper=100 ...]
//   peng serve     --transport stdio|tcp [--config engine.kv] [--profile p.kv] [--port 7878]
//
// Exit status: 0 success, 2 invalid input, 1 runtime failure.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peng/baseline.hpp"
#include "peng/engine.hpp"
#include "peng/error.hpp"
#include "peng/fitter.hpp"
#include "peng/format.hpp"
#include "peng/keyvalue.hpp"
#include "peng/metrics.hpp"
#include "peng/protocol.hpp"
#include "peng/replay.hpp"
#include "peng/synth.hpp"
#include "peng/trace_io.hpp"

namespace fs = std::filesystem;
using namespace peng;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

ProfileFile profile_or_default(const std::string& path) {
  if (path.empty()) return ProfileFile{};
  return load_profile(path);
}

EngineConfig config_for(const std::string& config_path, const DatasetProfile& profile,
                        double corpus_e = 0.0) {
  KeyValueFile kv = config_path.empty() ? KeyValueFile{} : KeyValueFile::load(config_path);
  if (corpus_e > 0.0 && !kv.contains("E")) kv.set("E", format_double(corpus_e));
  return engine_config_from(kv, profile);
}

std::string metrics_report(const std::vector<ModelOutcome>& outcomes,
                           const std::vector<double>& tops, const fs::path& dir) {
  auto savings = epochs_saved(outcomes);
  std::vector<double> percents;
  for (const auto& s : savings.per_model) percents.push_back(s.percent);
  auto summary = distribution_summary(percents);

  std::size_t converged = 0;
  for (const auto& o : outcomes) converged += o.engine_converged ? 1 : 0;

  KeyValueFile kv;
  kv.set("models", std::to_string(outcomes.size()));
  kv.set("converged", std::to_string(converged));
  kv.set("mean_epochs_saved_percent", format_double(savings.mean));
  kv.set("epochs_saved_p5", format_double(summary.p5));
  kv.set("epochs_saved_p25", format_double(summary.p25));
  kv.set("epochs_saved_p50", format_double(summary.p50));
  kv.set("epochs_saved_p75", format_double(summary.p75));
  kv.set("epochs_saved_p95", format_double(summary.p95));
  kv.set("throughput_gain", format_double(throughput_gain(outcomes)));

  std::string top_csv = "top_percent,k,overlap,mean_accuracy_diff\n";
  std::string dist_csv = "top_percent,set,p5,p25,p50,p75,p95,mean\n";
  for (double x : tops) {
    auto label = format_double(x);
    double overlap = top_overlap(outcomes, x);
    double diff = mean_accuracy_diff(outcomes, x);
    kv.set("overlap_top" + label, format_double(overlap));
    kv.set("mean_accuracy_diff_top" + label, format_double(diff));
    top_csv += label + "," + std::to_string(top_count(outcomes.size(), x)) + "," +
               format_double(overlap) + "," + format_double(diff) + "\n";

    auto accuracies_of = [&](const std::vector<std::string>& ids) {
      std::vector<double> values;
      for (const auto& o : outcomes) {
        if (std::find(ids.begin(), ids.end(), o.model) != ids.end()) values.push_back(o.ground_truth_best);
      }
      return values;
    };
    for (auto [set, ids] : {std::pair{"ground_truth", top_by_ground_truth(outcomes, x)},
                            std::pair{"predicted", top_by_estimate(outcomes, x)}}) {
      auto d = distribution_summary(accuracies_of(ids));
      dist_csv += label + "," + set + "," + format_double(d.p5) + "," + format_double(d.p25) + "," +
                  format_double(d.p50) + "," + format_double(d.p75) + "," + format_double(d.p95) +
                  "," + format_double(d.mean) + "\n";
    }
  }

  std::string savings_csv = "model,epochs_saved_percent\n";
  for (const auto& s : savings.per_model) savings_csv += s.model + "," + format_double(s.percent) + "\n";
  std::string hist_csv = "bin_lower,bin_upper,count\n";
  for (const auto& bin : histogram(percents)) {
    hist_csv += format_double(bin.lower) + "," + format_double(bin.upper) + "," +
                std::to_string(bin.count) + "\n";
  }

  fs::create_directories(dir);
  write_text_file(dir / "metrics.txt", kv.to_string());
  write_text_file(dir / "top_tables.csv", top_csv);
  write_text_file(dir / "accuracy_distribution.csv", dist_csv);
  write_text_file(dir / "savings.csv", savings_csv);
  write_text_file(dir / "savings_histogram.csv", hist_csv);
  return kv.to_string();
}

std::vector<Point> load_points(const std::string& path) {
  std::vector<Point> points;
  std::size_t line_no = 0;
  for (const auto& raw : split(read_text_file(path), '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    if (fields.size() != 2) {
      throw Error(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": expected x,y");
    }
    // Skip a header row.
    if (points.empty() && line_no == 1 && !trim(fields[0]).empty() &&
        std::isalpha(static_cast<unsigned char>(trim(fields[0]).front()))) {
      continue;
    }
    auto ctx = path + ":" + std::to_string(line_no);
    points.push_back({parse_double(fields[0], ctx), parse_double(fields[1], ctx)});
  }
  return points;
}

TcpServer* g_tcp = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early final-accuracy estimation for neural network training runs"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic trace corpus");
  std::string population_path, gen_profile, gen_out;
  std::size_t gen_n = 200;
  std::uint64_t gen_seed = 0;
  gen->add_option("--population", population_path, "Population key=value file (default mixture if omitted)");
  gen->add_option("--n", gen_n, "Number of models")->check(CLI::PositiveNumber);
  gen->add_option("--profile", gen_profile, "Dataset profile key=value file");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output corpus CSV (profile written to <out>.profile)")->required();

  // replay
  auto* replay = app.add_subcommand("replay", "Run the engine over every trace of a corpus");
  std::string replay_corpus_path, replay_config, replay_out;
  unsigned replay_jobs = 1;
  replay->add_option("--corpus", replay_corpus_path, "Corpus CSV")->required();
  replay->add_option("--config", replay_config, "Engine key=value config");
  replay->add_option("--out", replay_out, "Outcomes CSV")->required();
  replay->add_option("--jobs", replay_jobs, "Worker threads")->check(CLI::PositiveNumber);

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Loss-plateau early-termination stops");
  std::string baseline_corpus_path, baseline_out;
  double patience = 10.0, baseline_max = 20.0;
  baseline->add_option("--corpus", baseline_corpus_path, "Corpus CSV")->required();
  baseline->add_option("--patience", patience, "Epochs without a new training-loss minimum");
  baseline->add_option("--e-max", baseline_max, "Maximum training epochs");
  baseline->add_option("--out", baseline_out, "Baseline CSV")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Savings, throughput and top-x% agreement");
  std::string metrics_outcomes, metrics_baseline, metrics_out;
  std::vector<double> tops{10.0, 20.0, 30.0};
  metrics->add_option("--outcomes", metrics_outcomes, "Outcomes CSV from replay")->required();
  metrics->add_option("--baseline", metrics_baseline, "Baseline CSV")->required();
  metrics->add_option("--top", tops, "Top-x percentages")->delimiter(',');
  metrics->add_option("--out", metrics_out, "Output directory")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit the curve to x,y points and print diagnostics");
  std::string points_path;
  std::vector<std::string> box_overrides;
  bool fit_multi = false;
  fit_cmd->add_option("--points", points_path, "CSV of x,y (x rescaled so the first point is 1)")->required();
  fit_cmd->add_option("--box", box_overrides, "Box overrides such as a_upper=100")->delimiter(',');
  fit_cmd->add_flag("--multi-start", fit_multi, "Add four jittered starts");

  // serve
  auto* serve = app.add_subcommand("serve", "Live engine over the line protocol");
  std::string transport = "stdio", serve_config, serve_profile, host = "127.0.0.1";
  std::uint16_t port = 7878;
  serve->add_option("--transport", transport, "stdio or tcp")->check(CLI::IsMember({"stdio", "tcp"}));
  serve->add_option("--config", serve_config, "Engine key=value config");
  serve->add_option("--profile", serve_profile, "Dataset profile key=value file");
  serve->add_option("--host", host, "TCP bind address");
  serve->add_option("--port", port, "TCP port (0 = ephemeral)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*gen) {
      auto profile = profile_or_default(gen_profile);
      auto population = population_path.empty() ? default_population() : load_population(population_path);
      save_corpus(generate_corpus(population, gen_n, profile, gen_seed), gen_out);
    } else if (*replay) {
      auto corpus = load_corpus(replay_corpus_path);
      auto config = config_for(replay_config, corpus.profile, corpus.epochs_per_iteration);
      write_text_file(replay_out, format_outcomes_csv(replay_corpus(corpus, config, replay_jobs)));
    } else if (*baseline) {
      auto corpus = load_corpus(baseline_corpus_path);
      write_text_file(baseline_out, format_baseline_csv(baseline_corpus(corpus, patience, baseline_max)));
    } else if (*metrics) {
      auto outcomes = parse_outcomes_csv(read_text_file(metrics_outcomes), metrics_outcomes);
      auto stops = parse_baseline_csv(read_text_file(metrics_baseline), metrics_baseline);
      std::cout << metrics_report(join_outcomes(outcomes, stops), tops, metrics_out);
    } else if (*fit_cmd) {
      KeyValueFile kv;
      for (const auto& item : box_overrides) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::parse_error, "--box expects key=value, got " + item);
        kv.set(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
      }
      for (const auto& key : kv.keys()) {
        if (key.size() < 3 || (key[0] != 'a' && key[0] != 'b' && key[0] != 'c') || key[1] != '_') {
          throw Error(ErrorCode::parse_error, "unknown box key '" + key + "'");
        }
      }
      auto config = engine_config_from(kv, DatasetProfile{});
      config.fit.multi_start = fit_multi;
      auto points = load_points(points_path);
      auto result = fit(points, config.box, config.fit);
      KeyValueFile out;
      out.set("points", std::to_string(points.size()));
      out.set("a", format_double(result.params.a));
      out.set("b", format_double(result.params.b));
      out.set("c", format_double(result.params.c));
      out.set("status", std::string(to_string(result.status)));
      out.set("converged", result.converged ? "true" : "false");
      out.set("iterations", std::to_string(result.iterations));
      out.set("initial_cost", format_double(result.initial_cost));
      out.set("final_cost", format_double(result.final_cost));
      out.set("rmse", format_double(std::sqrt(result.final_cost / static_cast<double>(points.size()))));
      std::cout << out.to_string();
    } else if (*serve) {
      auto profile = profile_or_default(serve_profile);
      SessionRegistry registry(config_for(serve_config, profile.profile, profile.epochs_per_iteration));
      if (transport == "stdio") {
        serve_stream(registry, std::cin, std::cout);
      } else {
        TcpServer server(registry);
        server.start(host, port);
        g_tcp = &server;
        std::signal(SIGINT, [](int) { if (g_tcp) g_tcp->interrupt(); });
        std::signal(SIGTERM, [](int) { if (g_tcp) g_tcp->interrupt(); });
        std::cerr << "listening on " << host << ":" << server.port() << std::endl;
        server.wait();
        server.stop();
      }
    }
  } catch (const Error& e) {
    std::cerr << "peng: " << e.what() << "\n";
    return e.is_validation() ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "peng: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
