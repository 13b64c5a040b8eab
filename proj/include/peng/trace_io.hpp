#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "peng/analyzer.hpp"

namespace peng {

struct TraceRow {
  double epoch = 0.0;
  double val_acc = 0.0;
  double val_loss = 0.0;
  std::optional<double> train_loss;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Full learning curve of one model at every E epochs.
struct Trace {
  std::string model;
  std::vector<TraceRow> rows;
  std::string profile_ref;

  bool has_train_loss() const;
  double max_val_acc() const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct TraceCorpus {
  std::vector<Trace> traces;
  DatasetProfile profile;
  double epochs_per_iteration = 0.5;
  double full_epochs = 20.0;

  /// Throws Error(invariant_violation) naming the offending model.
  void validate() const;

  friend bool operator==(const TraceCorpus&, const TraceCorpus&) = default;
};

/// Sidecar path holding the profile for a corpus CSV: "<csv>.profile".
std::filesystem::path profile_path_for(const std::filesystem::path& csv_path);

// Profile sidecar: key=value with name, num_classes, class_fractions (comma
// separated, may be empty), balanced, E, e_full.
std::string format_profile(const DatasetProfile& profile, double epochs_per_iteration,
                           double full_epochs);

struct ProfileFile {
  DatasetProfile profile;
  double epochs_per_iteration = 0.5;
  double full_epochs = 20.0;
};
ProfileFile parse_profile(std::string_view text, std::string_view source = "<profile>");
ProfileFile load_profile(const std::filesystem::path& path);

// CSV: header "model_id,epoch,val_acc,val_loss,train_loss"; train_loss may be
// empty and the column itself may be missing.
std::string format_corpus_csv(const TraceCorpus& corpus);
TraceCorpus parse_corpus_csv(std::string_view csv, const ProfileFile& profile,
                             std::string_view source = "<csv>");

/// Reads `path` and its profile sidecar; traces come back sorted by model id.
TraceCorpus load_corpus(const std::filesystem::path& path);
void save_corpus(const TraceCorpus& corpus, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace peng
