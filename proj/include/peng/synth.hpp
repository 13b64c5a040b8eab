#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peng/curve_model.hpp"
#include "peng/trace_io.hpp"

namespace peng {

enum class CurveKind { asymptotic, never_learn, delayed, custom };

std::string_view to_string(CurveKind kind);
CurveKind parse_curve_kind(std::string_view text);

/// floor + (initial - floor) * exp(-decay_rate * epochs) plus Gaussian noise.
struct LossModel {
  double initial = 4.6;
  double decay_rate = 0.3;
  double floor = 0.8;
  double noise_sigma = 0.02;
};

struct CurveSpec {
  CurveKind kind = CurveKind::asymptotic;
  CurveParams params{85.0, 1.5, 2.0};
  /// Epochs spent at the guessing rate before learning starts (delayed only).
  double delay = 0.0;
  double acc_noise_sigma = 0.0;
  LossModel loss;
  std::uint64_t seed = 0;
  /// Accuracy per iteration for `custom`; the last value repeats if short.
  std::vector<double> custom_acc;

  /// Throws Error(invalid_spec).
  void validate() const;
};

/// Rows at E, 2E, ..., e_full for one synthetic model; deterministic in spec.seed.
///
///  - asymptotic: val_acc = clamp(f(e/E) + noise, 0, 100), losses decay to the floor
///  - never_learn: val_acc = guessing rate + noise; after a one-epoch warmup the
///    losses never drop below the warmup value
///  - delayed: never_learn until `delay`, then the asymptotic curve restarted at
///    e - delay (never below the guessing rate)
///  - custom: the given accuracies with decaying losses
Trace generate_trace(const CurveSpec& spec, const DatasetProfile& profile,
                     double epochs_per_iteration, double full_epochs,
                     std::string model = "model-0001");

/// Closed interval sampled uniformly; lo == hi is a constant.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  double sample(std::mt19937_64& rng) const;
};

struct PopulationGroup {
  std::string name;
  CurveKind kind = CurveKind::asymptotic;
  double weight = 1.0;
  Range a{30.0, 95.0};
  Range b{1.2, 2.5};
  Range c{0.0, 4.0};
  Range delay{3.0, 10.0};
  Range acc_noise_sigma{0.3, 0.3};
  Range loss_initial{4.6, 4.6};
  Range loss_decay_rate{0.2, 0.5};
  Range loss_floor{0.5, 1.2};
  Range loss_noise_sigma{0.02, 0.02};
};

/// Weighted mixture of curve families.
///
/// File form (key=value):
///   groups=learners,flat
///   learners.kind=asymptotic
///   learners.weight=0.8
///   learners.a=30:95          # lo:hi, or a single value
///   flat.kind=never_learn
///   flat.weight=0.2
/// Other per-group keys: b, c, delay, acc_noise_sigma, loss_initial,
/// loss_decay_rate, loss_floor, loss_noise_sigma.
struct Population {
  std::vector<PopulationGroup> groups;

  void validate() const;
};

/// 70% asymptotic (c <= 4), 15% never-learn, 15% delayed, accuracy noise 0.3.
Population default_population();
Population parse_population(std::string_view text, std::string_view source = "<population>");
Population load_population(const std::filesystem::path& path);
std::string format_population(const Population& population);

/// Per-group counts by largest remainder, assigned to ids in a seeded shuffle,
/// with parameters drawn from each group's ranges. Reproducible per seed.
std::vector<CurveSpec> sample_population(const Population& population, std::size_t n,
                                         std::uint64_t seed);

/// Zero-based index to model id: 0 -> "model-0001".
std::string synthetic_model_id(std::size_t index);

TraceCorpus generate_corpus(const Population& population, std::size_t n,
                            const ProfileFile& profile, std::uint64_t seed);
TraceCorpus generate_corpus(std::span<const CurveSpec> specs, const ProfileFile& profile);

}  // namespace peng
