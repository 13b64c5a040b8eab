#include "peng/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "peng/error.hpp"
#include "peng/format.hpp"
#include "peng/keyvalue.hpp"
#include "peng/predictor.hpp"

namespace peng {
namespace {

constexpr std::string_view kHeader = "model_id,epoch,val_acc,val_loss,train_loss";
constexpr std::string_view kHeaderNoTrain = "model_id,epoch,val_acc,val_loss";

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

}  // namespace

bool Trace::has_train_loss() const {
  return std::all_of(rows.begin(), rows.end(), [](const TraceRow& r) { return r.train_loss.has_value(); });
}

double Trace::max_val_acc() const {
  double best = 0.0;
  for (const auto& row : rows) best = std::max(best, row.val_acc);
  return best;
}

void TraceCorpus::validate() const {
  profile.validate();
  if (!(epochs_per_iteration > 0.0)) {
    throw Error(ErrorCode::invariant_violation, "corpus E must be positive");
  }
  double steps = full_epochs / epochs_per_iteration;
  if (!(full_epochs > 0.0) || std::abs(steps - std::round(steps)) > 1e-9 * steps) {
    throw Error(ErrorCode::invariant_violation, "e_full must be a positive multiple of E");
  }
  const auto expected_rows = static_cast<std::size_t>(std::llround(steps));
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& trace = traces[t];
    if (t > 0 && !(traces[t - 1].model < trace.model)) {
      throw Error(ErrorCode::invariant_violation,
                  "model " + trace.model + ": traces must be unique and sorted by model id");
    }
    if (trace.rows.size() != expected_rows) {
      throw Error(ErrorCode::invariant_violation,
                  "model " + trace.model + ": expected " + std::to_string(expected_rows) +
                      " rows covering epochs E.." + format_double(full_epochs) + ", got " +
                      std::to_string(trace.rows.size()));
    }
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
      const auto& row = trace.rows[i];
      double expected_epoch = static_cast<double>(i + 1) * epochs_per_iteration;
      if (!same_epoch(row.epoch, expected_epoch)) {
        throw Error(ErrorCode::invariant_violation,
                    "model " + trace.model + ": epoch " + format_double(row.epoch) +
                        " where " + format_double(expected_epoch) + " was expected");
      }
      if (!(row.val_acc >= 0.0 && row.val_acc <= 100.0)) {
        throw Error(ErrorCode::invariant_violation,
                    "model " + trace.model + ": val_acc out of [0,100] at epoch " +
                        format_double(row.epoch));
      }
      if (!(row.val_loss >= 0.0) || !std::isfinite(row.val_loss) ||
          (row.train_loss && (!(*row.train_loss >= 0.0) || !std::isfinite(*row.train_loss)))) {
        throw Error(ErrorCode::invariant_violation,
                    "model " + trace.model + ": losses must be finite and non-negative");
      }
    }
  }
}

std::filesystem::path profile_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p += ".profile";
  return p;
}

std::string format_profile(const DatasetProfile& profile, double epochs_per_iteration,
                           double full_epochs) {
  KeyValueFile kv;
  kv.set("name", profile.name);
  kv.set("num_classes", std::to_string(profile.num_classes));
  std::string fractions;
  for (std::size_t i = 0; i < profile.class_fractions.size(); ++i) {
    if (i) fractions += ',';
    fractions += format_double(profile.class_fractions[i]);
  }
  kv.set("class_fractions", fractions);
  kv.set("balanced", profile.balanced ? "true" : "false");
  kv.set("E", format_double(epochs_per_iteration));
  kv.set("e_full", format_double(full_epochs));
  return kv.to_string();
}

ProfileFile parse_profile(std::string_view text, std::string_view source) {
  auto kv = KeyValueFile::parse(text, source);
  ProfileFile out;
  out.profile.name = kv.get("name").value_or("default");
  out.profile.num_classes = static_cast<int>(kv.get_int("num_classes", 10));
  auto fractions = kv.get("class_fractions").value_or("");
  if (!trim(fractions).empty()) {
    for (const auto& f : split(fractions, ',')) {
      out.profile.class_fractions.push_back(parse_double(f, std::string(source) + ": class_fractions"));
    }
  }
  out.profile.balanced = kv.get_bool("balanced", out.profile.class_fractions.empty());
  out.epochs_per_iteration = kv.get_double("E", 0.5);
  out.full_epochs = kv.get_double("e_full", 20.0);
  try {
    out.profile.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, std::string(source) + ": " + e.what());
  }
  return out;
}

ProfileFile load_profile(const std::filesystem::path& path) {
  return parse_profile(read_text_file(path), path.string());
}

std::string format_corpus_csv(const TraceCorpus& corpus) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& trace : corpus.traces) {
    for (const auto& row : trace.rows) {
      out += trace.model;
      out += ',';
      out += format_double(row.epoch);
      out += ',';
      out += format_double(row.val_acc);
      out += ',';
      out += format_double(row.val_loss);
      out += ',';
      if (row.train_loss) out += format_double(*row.train_loss);
      out += '\n';
    }
  }
  return out;
}

TraceCorpus parse_corpus_csv(std::string_view csv, const ProfileFile& profile,
                             std::string_view source) {
  auto lines = split(csv, '\n');
  std::size_t line_no = 0;
  std::size_t columns = 0;
  std::map<std::string, Trace> traces;

  for (const auto& raw : lines) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (columns == 0) {
      if (line == kHeader) {
        columns = 5;
      } else if (line == kHeaderNoTrain) {
        columns = 4;
      } else {
        throw Error(ErrorCode::parse_error,
                    where(source, line_no) + ": expected header '" + std::string(kHeader) + "'");
      }
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != columns) {
      throw Error(ErrorCode::parse_error, where(source, line_no) + ": expected " +
                                              std::to_string(columns) + " fields, got " +
                                              std::to_string(fields.size()));
    }
    auto ctx = where(source, line_no);
    std::string model(trim(fields[0]));
    if (model.empty()) throw Error(ErrorCode::parse_error, ctx + ": empty model_id");
    TraceRow row;
    row.epoch = parse_double(fields[1], ctx + ": epoch");
    row.val_acc = parse_double(fields[2], ctx + ": val_acc");
    row.val_loss = parse_double(fields[3], ctx + ": val_loss");
    if (columns == 5 && !trim(fields[4]).empty()) {
      row.train_loss = parse_double(fields[4], ctx + ": train_loss");
    }
    auto& trace = traces[model];
    if (trace.model.empty()) {
      trace.model = model;
      trace.profile_ref = profile.profile.name;
    }
    if (!trace.rows.empty() && !(row.epoch > trace.rows.back().epoch)) {
      throw Error(ErrorCode::invariant_violation,
                  "model " + model + ": epochs not strictly increasing at " + ctx);
    }
    trace.rows.push_back(row);
  }
  if (columns == 0) throw Error(ErrorCode::parse_error, std::string(source) + ": missing header row");

  TraceCorpus corpus;
  corpus.profile = profile.profile;
  corpus.epochs_per_iteration = profile.epochs_per_iteration;
  corpus.full_epochs = profile.full_epochs;
  corpus.traces.reserve(traces.size());
  for (auto& [_, trace] : traces) corpus.traces.push_back(std::move(trace));
  corpus.validate();
  return corpus;
}

TraceCorpus load_corpus(const std::filesystem::path& path) {
  auto profile = load_profile(profile_path_for(path));
  return parse_corpus_csv(read_text_file(path), profile, path.string());
}

void save_corpus(const TraceCorpus& corpus, const std::filesystem::path& path) {
  corpus.validate();
  write_text_file(path, format_corpus_csv(corpus));
  write_text_file(profile_path_for(path),
                  format_profile(corpus.profile, corpus.epochs_per_iteration, corpus.full_epochs));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace peng
