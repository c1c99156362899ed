#include "fedprint/harness/runner.hpp"

#include <chrono>
#include <fstream>

#include "fedprint/augment/augment.hpp"
#include "fedprint/common/rng.hpp"
#include "fedprint/fedavg/federation.hpp"
#include "fedprint/nn/checkpoint.hpp"
#include "fedprint/signalgen/profile.hpp"
#include "fedprint/signalgen/scenario.hpp"
#include "fedprint/signalgen/synthesize.hpp"

namespace fedprint::harness {
namespace {

using Slices = std::vector<datapipe::SliceExample>;

void note(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

std::optional<augment::AugmentConfig> augment_config(const ExperimentSpec& spec) {
  const std::vector<double> phi = spec.effective_phi();
  if (phi.empty()) return std::nullopt;
  augment::AugmentConfig cfg;
  cfg.phi = phi;
  cfg.seed = spec.seeds.augment;
  return cfg;
}

void append(Slices& dst, const Slices& src) { dst.insert(dst.end(), src.begin(), src.end()); }

nn::Model fresh_model(const ExperimentSpec& spec, const std::string& key) {
  return nn::Model(spec_arch(spec), derive_seed(spec.seeds.init, {hash_string(key)}));
}

nn::FitOptions fit_options(const ExperimentSpec& spec) {
  nn::FitOptions o;
  o.max_epochs = spec.epochs;
  o.batch_size = spec.batch_size;
  o.patience = spec.patience;
  return o;
}

// Trains `key`'s model and records its curve with per-epoch test accuracy.
nn::Model train_model(const ExperimentSpec& spec, const std::string& key, const Slices& train, const Slices& val,
                      std::vector<CurvePoint>& curves) {
  nn::Model model = fresh_model(spec, key);
  Rng rng = make_rng(spec.seeds.train, {hash_string(key)});
  const nn::FitResult fit = nn::fit(model, train, val, fit_options(spec), rng);
  for (const nn::EpochRecord& e : fit.curve) curves.push_back({key, e.epoch, e.train_loss, e.val_accuracy, {}});
  return model;
}

void add_confusion(std::vector<std::vector<std::uint64_t>>& acc, const nn::Evaluation& ev) {
  if (acc.empty()) {
    acc = ev.confusion;
    return;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    for (std::size_t j = 0; j < acc[i].size(); ++j) acc[i][j] += ev.confusion[i][j];
  }
}

void fill_evaluation(ResultsRecord& r, const nn::Model& model, const Corpus& corpus, const Slices& union_test) {
  const nn::Evaluation ev = nn::evaluate(model, union_test);
  r.test_accuracy = ev.accuracy;
  r.comm_accuracy = ev.comm_accuracy;
  r.test_examples = ev.total;
  r.confusion = ev.confusion;
  for (const ScenarioData& s : corpus.scenarios) {
    r.scenario_accuracy.push_back(nn::evaluate(model, s.split.test).accuracy);
  }
}

}  // namespace

double CrossMatrix::diagonal_mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < accuracy.size(); ++i) s += accuracy[i][i];
  return accuracy.empty() ? 0.0 : s / static_cast<double>(accuracy.size());
}

double CrossMatrix::off_diagonal_mean() const {
  const std::size_t n = accuracy.size();
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) s += accuracy[i][j];
    }
  }
  return s / static_cast<double>(n * (n - 1));
}

double CrossMatrix::mean() const {
  const std::size_t n = accuracy.size();
  double s = 0.0;
  for (const auto& row : accuracy) {
    for (double v : row) s += v;
  }
  return n == 0 ? 0.0 : s / static_cast<double>(n * n);
}

nn::ArchConfig spec_arch(const ExperimentSpec& spec) {
  nn::ArchConfig arch;
  arch.num_conv_blocks = spec.convs;
  arch.input_len = spec.window;
  arch.num_classes = spec.tags;
  arch.validate();
  return arch;
}

signalgen::ChannelScenario resolve_scenario(const ExperimentSpec& spec, const std::string& name) {
  const signalgen::ScenarioCatalog catalog = signalgen::resolve_catalog(spec.catalog);
  signalgen::ChannelScenario s = catalog.find(name);
  s.seed = derive_seed(spec.seeds.corpus, {s.seed});
  return s;
}

Corpus build_corpus(const ExperimentSpec& spec) {
  spec.validate();
  const auto population = signalgen::generate_population(spec.tags, spec.seeds.population);
  Corpus corpus;
  for (const std::string& name : spec.scenarios) {
    ScenarioData d;
    d.scenario = resolve_scenario(spec, name);
    d.label = signalgen::short_label({d.scenario.distance_cm, d.scenario.obstacle});
    {
      const auto waves = signalgen::synthesize_scenario(population, d.scenario, spec.comms_per_tag);
      d.split = datapipe::split_corpus(waves, {}, spec.fraction, spec.seeds.split, spec.window);
    }
    if (d.split.train.empty() || d.split.test.empty()) {
      throw SpecError("window " + std::to_string(spec.window) + " yields no slices for scenario " + d.label);
    }
    corpus.scenarios.push_back(std::move(d));
  }
  return corpus;
}

CrossMatrix run_cross_matrix(const ExperimentSpec& spec, const Corpus& corpus) {
  if (corpus.scenarios.empty()) throw SpecError("cross matrix needs at least one scenario");
  const std::optional<augment::AugmentConfig> aug = augment_config(spec);
  CrossMatrix m;
  for (const ScenarioData& s : corpus.scenarios) m.labels.push_back(s.label);
  for (std::size_t i = 0; i < corpus.scenarios.size(); ++i) {
    const ScenarioData& s = corpus.scenarios[i];
    const Slices train = fedavg::reader_training_set(s.split.train, aug, static_cast<std::uint32_t>(i));
    const nn::Model model = train_model(spec, s.label, train, s.split.validation, m.curves);
    std::vector<double> row;
    std::vector<nn::Evaluation> evs;
    for (const ScenarioData& t : corpus.scenarios) {
      evs.push_back(nn::evaluate(model, t.split.test));
      row.push_back(evs.back().accuracy);
    }
    m.accuracy.push_back(std::move(row));
    m.evaluations.push_back(std::move(evs));
  }
  return m;
}

ResultsRecord run_experiment(const ExperimentSpec& spec, const Corpus& corpus) {
  spec.validate();
  if (corpus.scenarios.size() != spec.scenarios.size()) throw SpecError("corpus does not match the spec");
  const auto t0 = std::chrono::steady_clock::now();
  ResultsRecord r;
  r.spec = spec;
  for (const ScenarioData& s : corpus.scenarios) r.scenario_labels.push_back(s.label);
  const std::optional<augment::AugmentConfig> aug = augment_config(spec);

  Slices union_test;
  for (const ScenarioData& s : corpus.scenarios) append(union_test, s.split.test);

  switch (spec.mode) {
    case Mode::local:
    case Mode::baseline: {
      const CrossMatrix m = run_cross_matrix(spec, corpus);
      r.curves = m.curves;
      r.cross_matrix = m.accuracy;
      r.test_accuracy = m.mean();
      double comm = 0.0;
      for (const auto& row : m.evaluations) {
        for (const nn::Evaluation& ev : row) {
          add_confusion(r.confusion, ev);
          r.test_examples += ev.total;
          comm += ev.comm_accuracy;
        }
      }
      r.comm_accuracy = comm / static_cast<double>(m.accuracy.size() * m.accuracy.size());
      for (std::size_t i = 0; i < corpus.scenarios.size(); ++i) {
        r.scenario_accuracy.push_back(m.accuracy[i][i]);
        r.train_examples += corpus.scenarios[i].split.train.size() * (aug ? 1 + aug->phi.size() : 1);
      }
      break;
    }
    case Mode::union_:
    case Mode::union_da: {
      Slices train;
      Slices val;
      for (std::size_t i = 0; i < corpus.scenarios.size(); ++i) {
        append(train, fedavg::reader_training_set(corpus.scenarios[i].split.train, aug, static_cast<std::uint32_t>(i)));
        append(val, corpus.scenarios[i].split.validation);
      }
      r.train_examples = train.size();
      const nn::Model model = train_model(spec, "union", train, val, r.curves);
      fill_evaluation(r, model, corpus, union_test);
      break;
    }
    case Mode::federated:
    case Mode::federated_da: {
      fedavg::FederationConfig fc;
      fc.arch = spec_arch(spec);
      fc.rounds = spec.rounds;
      fc.policy = spec.policy;
      fc.local_epochs = spec.local_epochs;
      fc.bootstrap_epochs = spec.bootstrap_epochs;
      fc.batch_size = spec.batch_size;
      fc.seed = derive_seed(spec.seeds.init, {spec.seeds.train});
      fc.augment = aug;
      std::vector<fedavg::ReaderInput> readers;
      for (std::size_t i = 0; i < corpus.scenarios.size(); ++i) {
        readers.push_back({static_cast<std::uint32_t>(i), corpus.scenarios[i].split.train,
                           corpus.scenarios[i].split.test});
      }
      const fedavg::FederationResult fr = fedavg::run_federation(readers, fc);
      for (const fedavg::RoundMetrics& m : fr.rounds) {
        double loss = 0.0;
        for (double l : m.reader_loss) loss += l;
        r.curves.push_back({"federated", m.round, loss / static_cast<double>(m.reader_loss.size()), {},
                            m.union_accuracy});
      }
      for (std::size_t n : fr.train_sizes) r.train_examples += n;
      r.rounds_completed = fr.rounds.size();
      r.payload_bytes = nn::checkpoint_size(fc.arch);
      if (!fr.rounds.empty()) {
        const fedavg::Traffic& t = fr.traffic.by_round.at(1);
        r.bytes_per_round_down = t.bytes_down;
        r.bytes_per_round_up = t.bytes_up;
      }
      const nn::Model model(fc.arch, fr.final_weights);
      fill_evaluation(r, model, corpus, union_test);
      break;
    }
  }
  r.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

ResultsRecord run_experiment(const ExperimentSpec& spec) { return run_experiment(spec, build_corpus(spec)); }

std::vector<SuiteOutcome> run_suite(const std::vector<ExperimentSpec>& specs, const std::filesystem::path& out_dir,
                                    const ProgressFn& progress) {
  std::vector<SuiteOutcome> outcomes;
  for (const ExperimentSpec& spec : specs) {
    SuiteOutcome o;
    o.name = spec.name;
    o.dir = out_dir / spec.name;
    std::error_code ec;
    std::filesystem::remove_all(o.dir, ec);
    note(progress, "running " + spec.name + " (" + mode_name(spec.mode) + ")");
    try {
      write_results(o.dir, run_experiment(spec));
      o.ok = true;
      note(progress, "finished " + spec.name);
    } catch (const std::exception& e) {
      o.error = e.what();
      note(progress, "failed " + spec.name + ": " + o.error);
      std::filesystem::create_directories(o.dir, ec);
      std::ofstream(o.dir / kSpecFile) << spec_to_json(spec) << "\n";
      std::ofstream(o.dir / kErrorFile) << o.error << "\n";
    }
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

}  // namespace fedprint::harness
