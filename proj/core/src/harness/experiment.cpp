#include "fedprint/harness/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <set>

#include "fedprint/fedavg/session.hpp"
#include "fedprint/nn/arch.hpp"

namespace fedprint::harness {
namespace {

using nlohmann::json;

const std::vector<std::string> kFields = {
    "name",         "catalog",      "scenarios",        "tags",   "comms_per_tag", "fraction",
    "window",       "convs",        "mode",             "epochs", "patience",      "rounds",
    "local_epochs", "bootstrap_epochs", "policy",       "batch_size", "phi",       "large_population",
    "seeds"};
const std::vector<std::string> kSeedFields = {"population", "corpus", "split", "init", "train", "augment"};

json seeds_json(const Seeds& s) {
  return json{{"population", s.population}, {"corpus", s.corpus}, {"split", s.split},
              {"init", s.init},             {"train", s.train},   {"augment", s.augment}};
}

json to_object(const ExperimentSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["catalog"] = spec.catalog;
  j["scenarios"] = spec.scenarios;
  j["tags"] = spec.tags;
  j["comms_per_tag"] = spec.comms_per_tag;
  j["fraction"] = spec.fraction;
  j["window"] = spec.window;
  j["convs"] = spec.convs;
  j["mode"] = mode_name(spec.mode);
  j["epochs"] = spec.epochs;
  j["patience"] = spec.patience;
  j["rounds"] = spec.rounds;
  j["local_epochs"] = spec.local_epochs;
  j["bootstrap_epochs"] = spec.bootstrap_epochs;
  j["policy"] = fedavg::policy_name(spec.policy);
  j["batch_size"] = spec.batch_size;
  j["phi"] = spec.phi;
  j["large_population"] = spec.large_population;
  j["seeds"] = seeds_json(spec.seeds);
  return j;
}

template <typename T>
T field(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SpecError("spec field '" + key + "': " + e.what());
  }
}

// Reads the fields present in `j` over `spec`; with `strict`, every field
// must be present.
ExperimentSpec from_object(const json& j, ExperimentSpec spec, bool strict, bool check = true) {
  if (!j.is_object()) throw SpecError("spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
      throw SpecError("unknown spec field '" + key + "'");
    }
  }
  if (strict) {
    for (const std::string& key : kFields) {
      if (!j.contains(key)) throw SpecError("spec is missing field '" + key + "'");
    }
  }
  auto has = [&](const char* key) { return j.contains(key); };
  if (has("name")) spec.name = field<std::string>(j, "name");
  if (has("catalog")) spec.catalog = field<std::string>(j, "catalog");
  if (has("scenarios")) spec.scenarios = field<std::vector<std::string>>(j, "scenarios");
  if (has("tags")) spec.tags = field<std::uint32_t>(j, "tags");
  if (has("comms_per_tag")) spec.comms_per_tag = field<std::uint32_t>(j, "comms_per_tag");
  if (has("fraction")) spec.fraction = field<double>(j, "fraction");
  if (has("window")) spec.window = field<std::uint32_t>(j, "window");
  if (has("convs")) spec.convs = field<std::uint32_t>(j, "convs");
  if (has("mode")) spec.mode = parse_mode(field<std::string>(j, "mode"));
  if (has("epochs")) spec.epochs = field<std::size_t>(j, "epochs");
  if (has("patience")) spec.patience = field<std::size_t>(j, "patience");
  if (has("rounds")) spec.rounds = field<std::size_t>(j, "rounds");
  if (has("local_epochs")) spec.local_epochs = field<std::size_t>(j, "local_epochs");
  if (has("bootstrap_epochs")) spec.bootstrap_epochs = field<std::size_t>(j, "bootstrap_epochs");
  if (has("policy")) {
    try {
      spec.policy = fedavg::parse_policy(field<std::string>(j, "policy"));
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
  }
  if (has("batch_size")) spec.batch_size = field<std::size_t>(j, "batch_size");
  if (has("phi")) spec.phi = field<std::vector<double>>(j, "phi");
  if (has("large_population")) spec.large_population = field<bool>(j, "large_population");
  if (has("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_object()) throw SpecError("spec field 'seeds' must be an object");
    for (const auto& [key, value] : s.items()) {
      if (std::find(kSeedFields.begin(), kSeedFields.end(), key) == kSeedFields.end()) {
        throw SpecError("unknown seed '" + key + "'");
      }
    }
    if (strict) {
      for (const std::string& key : kSeedFields) {
        if (!s.contains(key)) throw SpecError("spec is missing seed '" + key + "'");
      }
    }
    if (s.contains("population")) spec.seeds.population = field<std::uint64_t>(s, "population");
    if (s.contains("corpus")) spec.seeds.corpus = field<std::uint64_t>(s, "corpus");
    if (s.contains("split")) spec.seeds.split = field<std::uint64_t>(s, "split");
    if (s.contains("init")) spec.seeds.init = field<std::uint64_t>(s, "init");
    if (s.contains("train")) spec.seeds.train = field<std::uint64_t>(s, "train");
    if (s.contains("augment")) spec.seeds.augment = field<std::uint64_t>(s, "augment");
  }
  if (check) spec.validate();
  return spec;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::local:
      return "local";
    case Mode::union_:
      return "union";
    case Mode::baseline:
      return "baseline";
    case Mode::federated:
      return "federated";
    case Mode::federated_da:
      return "federated+DA";
    case Mode::union_da:
      return "union+DA";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::local, Mode::union_, Mode::baseline, Mode::federated, Mode::federated_da, Mode::union_da}) {
    if (mode_name(m) == name) return m;
  }
  throw SpecError("unknown mode '" + std::string(name) +
                  "' (local|union|baseline|federated|federated+DA|union+DA)");
}

bool uses_augmentation(Mode mode) { return mode == Mode::federated_da || mode == Mode::union_da; }

std::vector<double> ExperimentSpec::effective_phi() const {
  if (uses_augmentation(mode) && phi.empty()) return {0.20, 0.10, 0.05, 0.01};
  return phi;
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw SpecError("spec name is empty");
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' || c == '+')) {
      throw SpecError("spec name '" + name + "' may only use letters, digits, '-', '_', '.', '+'");
    }
  }
  if (name == "." || name == "..") throw SpecError("spec name '" + name + "' is reserved");
  if (catalog.empty()) throw SpecError("catalog is empty");
  if (scenarios.empty()) throw SpecError("spec '" + name + "' lists no scenarios");
  if (std::set<std::string>(scenarios.begin(), scenarios.end()).size() != scenarios.size()) {
    throw SpecError("spec '" + name + "' repeats a scenario");
  }
  if (mode == Mode::local && scenarios.size() != 1) {
    throw SpecError("local mode trains on exactly one scenario, got " + std::to_string(scenarios.size()));
  }
  const std::uint32_t max_tags = large_population ? 200 : 100;
  if (tags < 2 || tags > max_tags) {
    throw SpecError("tags must be in 2.." + std::to_string(max_tags) + ", got " + std::to_string(tags) +
                    (large_population ? "" : " (more than 100 tags needs large_population)"));
  }
  if (comms_per_tag < 10) throw SpecError("comms_per_tag must be >= 10");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw SpecError("fraction must be in (0, 1]");
  if (epochs < 1 || rounds < 1 || local_epochs < 1 || batch_size < 1) {
    throw SpecError("epochs, rounds, local_epochs and batch_size must be >= 1");
  }
  if (bootstrap_epochs > fedavg::kMaxBootstrapEpochs) {
    throw SpecError("bootstrap_epochs must be <= " + std::to_string(fedavg::kMaxBootstrapEpochs));
  }
  for (double p : phi) {
    if (!std::isfinite(p) || p < 0.0) throw SpecError("phi values must be finite and >= 0");
  }
  if (!phi.empty() && !uses_augmentation(mode) && mode != Mode::local) {
    throw SpecError("phi is only used by local, union+DA and federated+DA modes");
  }
  nn::ArchConfig arch;
  arch.num_conv_blocks = convs;
  arch.input_len = window;
  arch.num_classes = tags;
  try {
    arch.validate();
  } catch (const std::exception& e) {
    throw SpecError(std::string("window/convs: ") + e.what());
  }
}

std::string spec_to_json(const ExperimentSpec& spec) { return to_object(spec).dump(2); }

ExperimentSpec spec_from_json(std::string_view text) { return from_object(parse(text), ExperimentSpec{}, true); }

std::vector<ExperimentSpec> load_suite(std::string_view text) {
  const json doc = parse(text);
  json list;
  ExperimentSpec base;
  if (doc.is_array()) {
    list = doc;
  } else if (doc.is_object() && doc.contains("specs")) {
    for (const auto& [key, value] : doc.items()) {
      if (key != "specs" && key != "defaults") throw SpecError("unknown suite key '" + key + "'");
    }
    list = doc.at("specs");
    if (doc.contains("defaults")) {
      json d = doc.at("defaults");
      if (!d.is_object()) throw SpecError("suite 'defaults' must be an object");
      for (const auto& [key, value] : d.items()) {
        if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
          throw SpecError("unknown spec field '" + key + "' in defaults");
        }
      }
      json merged = to_object(base);
      merged.merge_patch(d);
      base = from_object(merged, ExperimentSpec{}, false, false);
    }
  } else {
    throw SpecError("suite must be an array of specs or an object with 'specs'");
  }
  if (!list.is_array() || list.empty()) throw SpecError("suite has no specs");
  std::vector<ExperimentSpec> specs;
  std::set<std::string> names;
  for (const json& item : list) {
    json merged = to_object(base);
    merged.merge_patch(item);
    specs.push_back(from_object(merged, ExperimentSpec{}, false));
    if (!names.insert(specs.back().name).second) throw SpecError("duplicate spec name '" + specs.back().name + "'");
  }
  return specs;
}

}  // namespace fedprint::harness
