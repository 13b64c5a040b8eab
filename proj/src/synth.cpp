#include "peng/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "peng/error.hpp"
#include "peng/format.hpp"
#include "peng/keyvalue.hpp"

namespace peng {
namespace {

constexpr double kWarmupEpochs = 1.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Noise {
 public:
  explicit Noise(std::uint64_t seed) : rng_(seed) {}

  double gaussian(double sigma) {
    double z = normal_(rng_);
    return sigma > 0.0 ? sigma * z : 0.0;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double decayed(const LossModel& loss, double epochs) {
  return loss.floor + (loss.initial - loss.floor) * std::exp(-loss.decay_rate * epochs);
}

// Train loss settles lower than validation loss.
LossModel train_loss_model(const LossModel& loss) {
  LossModel train = loss;
  train.floor = 0.5 * loss.floor;
  return train;
}

Range parse_range(std::string_view text, const std::string& what) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    double v = parse_double(text, what);
    return {v, v};
  }
  return {parse_double(text.substr(0, colon), what), parse_double(text.substr(colon + 1), what)};
}

std::string format_range(const Range& r) {
  if (r.lo == r.hi) return format_double(r.lo);
  return format_double(r.lo) + ":" + format_double(r.hi);
}

}  // namespace

std::string_view to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::asymptotic: return "asymptotic";
    case CurveKind::never_learn: return "never_learn";
    case CurveKind::delayed: return "delayed";
    case CurveKind::custom: return "custom";
  }
  return "unknown";
}

CurveKind parse_curve_kind(std::string_view text) {
  text = trim(text);
  if (text == "asymptotic") return CurveKind::asymptotic;
  if (text == "never_learn") return CurveKind::never_learn;
  if (text == "delayed") return CurveKind::delayed;
  if (text == "custom") return CurveKind::custom;
  throw Error(ErrorCode::invalid_spec, "unknown curve kind '" + std::string(text) + "'");
}

void CurveSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_spec, msg); };
  if ((kind == CurveKind::asymptotic || kind == CurveKind::delayed) &&
      !default_box().contains(params)) {
    fail("curve params outside the parameter box");
  }
  if (!(delay >= 0.0) || !std::isfinite(delay)) fail("delay must be >= 0");
  if (!(acc_noise_sigma >= 0.0) || !(loss.noise_sigma >= 0.0)) fail("noise sigmas must be >= 0");
  if (!(loss.initial >= 0.0) || !(loss.floor >= 0.0) || !(loss.decay_rate >= 0.0)) {
    fail("loss model parameters must be >= 0");
  }
  if (kind == CurveKind::custom) {
    if (custom_acc.empty()) fail("custom curve needs accuracy values");
    for (double v : custom_acc) {
      if (!(v >= 0.0 && v <= 100.0)) fail("custom accuracies must lie in [0,100]");
    }
  }
}

Trace generate_trace(const CurveSpec& spec, const DatasetProfile& profile,
                     double epochs_per_iteration, double full_epochs, std::string model) {
  spec.validate();
  profile.validate();
  if (!(epochs_per_iteration > 0.0) || !(full_epochs >= epochs_per_iteration)) {
    throw Error(ErrorCode::invalid_spec, "need 0 < E <= e_full");
  }
  const double guess = guessing_rate(profile);
  const auto rows = static_cast<std::size_t>(std::llround(full_epochs / epochs_per_iteration));
  if (spec.kind == CurveKind::custom && spec.custom_acc.size() != rows) {
    throw Error(ErrorCode::invalid_spec, "custom curve has " + std::to_string(spec.custom_acc.size()) +
                                             " accuracies for " + std::to_string(rows) + " rows");
  }
  const LossModel val_loss = spec.loss;
  const LossModel train_loss = train_loss_model(spec.loss);

  Noise noise(spec.seed);
  Trace trace;
  trace.model = std::move(model);
  trace.profile_ref = profile.name;
  trace.rows.reserve(rows);

  // Non-learning rows ease from the initial loss to a plateau during the
  // warmup and never drop below that plateau afterwards.
  auto plateau_of = [](const LossModel& m) { return m.initial - 0.1 * (m.initial - m.floor); };
  const double plateau_val = plateau_of(val_loss);
  const double plateau_train = plateau_of(train_loss);

  for (std::size_t i = 0; i < rows; ++i) {
    const double epoch = static_cast<double>(i + 1) * epochs_per_iteration;
    const double acc_noise = noise.gaussian(spec.acc_noise_sigma);
    const double val_noise = noise.gaussian(spec.loss.noise_sigma);
    const double train_noise = noise.gaussian(spec.loss.noise_sigma);

    double acc = guess;
    bool learning = true;
    double learning_epochs = epoch;
    switch (spec.kind) {
      case CurveKind::asymptotic:
        acc = evaluate(spec.params, epoch / epochs_per_iteration);
        break;
      case CurveKind::never_learn:
        learning = false;
        break;
      case CurveKind::delayed:
        if (epoch < spec.delay) {
          learning = false;
        } else {
          learning_epochs = epoch - spec.delay;
          acc = std::max(guess, evaluate(spec.params, learning_epochs / epochs_per_iteration));
        }
        break;
      case CurveKind::custom:
        acc = spec.custom_acc[i];
        break;
    }
    TraceRow row;
    row.epoch = epoch;
    row.val_acc = std::clamp(acc + acc_noise, 0.0, 100.0);

    if (learning) {
      row.val_loss = std::max(0.0, decayed(val_loss, learning_epochs) + val_noise);
      row.train_loss = std::max(0.0, decayed(train_loss, learning_epochs) + train_noise);
    } else if (epoch <= kWarmupEpochs) {
      double progress = epoch / kWarmupEpochs;
      row.val_loss = val_loss.initial - (val_loss.initial - plateau_val) * progress;
      row.train_loss = train_loss.initial - (train_loss.initial - plateau_train) * progress;
    } else {
      row.val_loss = plateau_val + std::abs(val_noise);
      row.train_loss = plateau_train + std::abs(train_noise);
    }
    trace.rows.push_back(row);
  }
  return trace;
}

double Range::sample(std::mt19937_64& rng) const {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void Population::validate() const {
  if (groups.empty()) throw Error(ErrorCode::invalid_spec, "population has no groups");
  double total = 0.0;
  for (const auto& g : groups) {
    if (!(g.weight >= 0.0) || !std::isfinite(g.weight)) {
      throw Error(ErrorCode::invalid_spec, "group " + g.name + ": weight must be >= 0");
    }
    if (g.kind == CurveKind::custom) {
      throw Error(ErrorCode::invalid_spec, "group " + g.name + ": custom curves cannot be sampled");
    }
    for (const Range* r : {&g.a, &g.b, &g.c, &g.delay, &g.acc_noise_sigma, &g.loss_initial,
                           &g.loss_decay_rate, &g.loss_floor, &g.loss_noise_sigma}) {
      if (!(r->lo <= r->hi) || !std::isfinite(r->lo) || !std::isfinite(r->hi)) {
        throw Error(ErrorCode::invalid_spec, "group " + g.name + ": ranges need finite lo <= hi");
      }
    }
    total += g.weight;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::invalid_spec, "population weights sum to zero");
}

Population default_population() {
  Population pop;
  PopulationGroup learners;
  learners.name = "asymptotic";
  learners.kind = CurveKind::asymptotic;
  learners.weight = 0.70;
  pop.groups.push_back(learners);

  PopulationGroup flat;
  flat.name = "never_learn";
  flat.kind = CurveKind::never_learn;
  flat.weight = 0.15;
  pop.groups.push_back(flat);

  PopulationGroup late;
  late.name = "delayed";
  late.kind = CurveKind::delayed;
  late.weight = 0.15;
  late.a = {20.0, 70.0};
  pop.groups.push_back(late);
  return pop;
}

Population parse_population(std::string_view text, std::string_view source) {
  auto kv = KeyValueFile::parse(text, source);
  Population pop;
  for (const auto& raw : split(kv.require("groups"), ',')) {
    std::string name(trim(raw));
    if (name.empty()) throw Error(ErrorCode::invalid_spec, std::string(source) + ": empty group name");
    PopulationGroup g;
    g.name = name;
    auto key = [&](const char* field) { return name + "." + field; };
    auto range = [&](const char* field, Range& out) {
      if (auto v = kv.get(key(field))) out = parse_range(*v, std::string(source) + ": " + key(field));
    };
    g.kind = parse_curve_kind(kv.require(key("kind")));
    if (g.kind == CurveKind::delayed) g.a = {20.0, 70.0};
    g.weight = kv.get_double(key("weight"), 1.0);
    range("a", g.a);
    range("b", g.b);
    range("c", g.c);
    range("delay", g.delay);
    range("acc_noise_sigma", g.acc_noise_sigma);
    range("loss_initial", g.loss_initial);
    range("loss_decay_rate", g.loss_decay_rate);
    range("loss_floor", g.loss_floor);
    range("loss_noise_sigma", g.loss_noise_sigma);
    pop.groups.push_back(g);
  }
  pop.validate();
  return pop;
}

Population load_population(const std::filesystem::path& path) {
  return parse_population(read_text_file(path), path.string());
}

std::string format_population(const Population& population) {
  KeyValueFile kv;
  std::string names;
  for (const auto& g : population.groups) {
    if (!names.empty()) names += ',';
    names += g.name;
  }
  kv.set("groups", names);
  for (const auto& g : population.groups) {
    kv.set(g.name + ".kind", std::string(to_string(g.kind)));
    kv.set(g.name + ".weight", format_double(g.weight));
    kv.set(g.name + ".a", format_range(g.a));
    kv.set(g.name + ".b", format_range(g.b));
    kv.set(g.name + ".c", format_range(g.c));
    kv.set(g.name + ".delay", format_range(g.delay));
    kv.set(g.name + ".acc_noise_sigma", format_range(g.acc_noise_sigma));
    kv.set(g.name + ".loss_initial", format_range(g.loss_initial));
    kv.set(g.name + ".loss_decay_rate", format_range(g.loss_decay_rate));
    kv.set(g.name + ".loss_floor", format_range(g.loss_floor));
    kv.set(g.name + ".loss_noise_sigma", format_range(g.loss_noise_sigma));
  }
  return kv.to_string();
}

std::vector<CurveSpec> sample_population(const Population& population, std::size_t n,
                                         std::uint64_t seed) {
  population.validate();
  const double total = std::accumulate(population.groups.begin(), population.groups.end(), 0.0,
                                       [](double acc, const PopulationGroup& g) { return acc + g.weight; });

  // Largest-remainder apportionment of n slots; ties go to the earlier group.
  std::vector<std::size_t> counts(population.groups.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < population.groups.size(); ++g) {
    double quota = population.groups[g].weight / total * static_cast<double>(n);
    counts[g] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[g];
    remainders.emplace_back(quota - std::floor(quota), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& lhs, const auto& rhs) { return lhs.first > rhs.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];

  std::vector<std::size_t> slots;
  slots.reserve(n);
  for (std::size_t g = 0; g < counts.size(); ++g) slots.insert(slots.end(), counts[g], g);

  std::mt19937_64 rng(splitmix64(seed));
  // Fisher-Yates by hand: std::shuffle's draw pattern is not pinned by the standard.
  for (std::size_t i = slots.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(slots[i - 1], slots[j]);
  }

  std::vector<CurveSpec> specs;
  specs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = population.groups[slots[i]];
    CurveSpec spec;
    spec.kind = g.kind;
    spec.params = {g.a.sample(rng), g.b.sample(rng), g.c.sample(rng)};
    spec.delay = g.kind == CurveKind::delayed ? g.delay.sample(rng) : 0.0;
    spec.acc_noise_sigma = g.acc_noise_sigma.sample(rng);
    spec.loss.initial = g.loss_initial.sample(rng);
    spec.loss.decay_rate = g.loss_decay_rate.sample(rng);
    spec.loss.floor = g.loss_floor.sample(rng);
    spec.loss.noise_sigma = g.loss_noise_sigma.sample(rng);
    spec.seed = splitmix64(seed ^ splitmix64(i + 1));
    specs.push_back(spec);
  }
  return specs;
}

std::string synthetic_model_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "model-%04zu", index + 1);
  return buf;
}

TraceCorpus generate_corpus(std::span<const CurveSpec> specs, const ProfileFile& profile) {
  TraceCorpus corpus;
  corpus.profile = profile.profile;
  corpus.epochs_per_iteration = profile.epochs_per_iteration;
  corpus.full_epochs = profile.full_epochs;
  corpus.traces.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    corpus.traces.push_back(generate_trace(specs[i], profile.profile, profile.epochs_per_iteration,
                                           profile.full_epochs, synthetic_model_id(i)));
  }
  std::sort(corpus.traces.begin(), corpus.traces.end(),
            [](const Trace& lhs, const Trace& rhs) { return lhs.model < rhs.model; });
  corpus.validate();
  return corpus;
}

TraceCorpus generate_corpus(const Population& population, std::size_t n, const ProfileFile& profile,
                            std::uint64_t seed) {
  auto specs = sample_population(population, n, seed);
  return generate_corpus(specs, profile);
}

}  // namespace peng
