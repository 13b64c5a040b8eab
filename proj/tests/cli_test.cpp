#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>

#include "doctest.h"
#include "peng/synth.hpp"
#include "peng/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("peng_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

int run(const std::string& args) {
  std::string command = std::string("'") + PENG_CLI_PATH + "' " + args + " >/dev/null 2>&1";
  int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return peng::read_text_file(p); }

}  // namespace

TEST_CASE("gen, replay, baseline and metrics are byte-identical across runs") {
  const fs::path d = workdir();
  for (const char* run_id : {"1", "2"}) {
    fs::path sub = d / run_id;
    fs::create_directories(sub);
    REQUIRE(run("gen --n 200 --seed 7 --out " + quoted(sub / "c.csv")) == 0);
    REQUIRE(run("replay --corpus " + quoted(sub / "c.csv") + " --jobs 4 --out " + quoted(sub / "o.csv")) == 0);
    REQUIRE(run("baseline --corpus " + quoted(sub / "c.csv") + " --out " + quoted(sub / "b.csv")) == 0);
    REQUIRE(run("metrics --outcomes " + quoted(sub / "o.csv") + " --baseline " + quoted(sub / "b.csv") +
                " --top 10,20,30 --out " + quoted(sub / "m")) == 0);
  }
  for (const char* file : {"c.csv", "c.csv.profile", "o.csv", "b.csv", "m/metrics.txt", "m/top_tables.csv",
                           "m/savings.csv", "m/savings_histogram.csv", "m/accuracy_distribution.csv"}) {
    INFO(file);
    CHECK(slurp(d / "1" / file) == slurp(d / "2" / file));
  }
  CHECK(slurp(d / "1" / "m/metrics.txt").find("overlap_top20=") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path d = workdir();
  CHECK(run("--help") == 0);
  CHECK(run("gen --n 0 --out " + quoted(d / "x.csv")) == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("replay --corpus " + quoted(d / "missing.csv") + " --out " + quoted(d / "o.csv")) == 1);

  peng::write_text_file(d / "bad.cfg", "N=0\n");
  REQUIRE(run("gen --n 5 --seed 1 --out " + quoted(d / "small.csv")) == 0);
  CHECK(run("replay --corpus " + quoted(d / "small.csv") + " --config " + quoted(d / "bad.cfg") +
            " --out " + quoted(d / "o.csv")) == 2);

  peng::write_text_file(d / "pts.csv", "x,y\n1,10\n2,20\n");
  CHECK(run("fit --points " + quoted(d / "pts.csv")) == 2);
  peng::write_text_file(d / "pts.csv", "x,y\n1,30\n2,45\n3,52\n4,56\n");
  CHECK(run("fit --points " + quoted(d / "pts.csv") + " --box a_upper=100") == 0);
}

TEST_CASE("serve over stdio answers every line and ends with stop") {
  const fs::path d = workdir();
  peng::CurveSpec spec;
  spec.params = {48, 1.7, 1.0};
  spec.acc_noise_sigma = 0.3;
  spec.seed = 21;
  peng::Trace trace = peng::generate_trace(spec, peng::DatasetProfile{}, 0.5, 20.0, "nn-001");
  std::ostringstream requests;
  for (const auto& row : trace.rows) {
    nlohmann::json line = {{"model", trace.model}, {"epoch", row.epoch}, {"val_acc", row.val_acc},
                           {"val_loss", row.val_loss}};
    requests << line.dump() << "\n";
    if (row.epoch >= 20.0) break;
  }
  peng::write_text_file(d / "requests.jsonl", requests.str());

  std::string command = std::string("'") + PENG_CLI_PATH + "' serve --transport stdio < " +
                        quoted(d / "requests.jsonl") + " > " + quoted(d / "responses.jsonl");
  REQUIRE(std::system(command.c_str()) == 0);

  std::istringstream responses(slurp(d / "responses.jsonl"));
  std::string line;
  std::vector<nlohmann::json> parsed;
  while (std::getline(responses, line)) parsed.push_back(nlohmann::json::parse(line));
  REQUIRE(parsed.size() == trace.rows.size());
  nlohmann::json last_decision;
  for (const auto& r : parsed) {
    if (!r.contains("action")) break;
    last_decision = r;
  }
  CHECK(last_decision["action"] == "stop");
}
