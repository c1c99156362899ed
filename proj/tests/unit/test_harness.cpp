#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "fedprint/harness.hpp"
#include "fedprint/fedavg/wire.hpp"
#include "fedprint/nn/checkpoint.hpp"
#include "test_util.hpp"

using namespace fedprint;
using namespace fedprint::harness;
using nlohmann::json;

namespace {

ExperimentSpec tiny_spec(const std::string& name, Mode mode) {
  ExperimentSpec s;
  s.name = name;
  s.mode = mode;
  s.scenarios = {"OTA20", "OTA50"};
  s.tags = 3;
  s.comms_per_tag = 10;
  s.epochs = 2;
  s.rounds = 2;
  s.batch_size = 8;
  return s;
}

void expect_same_record(const ResultsRecord& a, const ResultsRecord& b) {
  EXPECT_EQ(a.spec, b.spec);
  EXPECT_EQ(a.curves, b.curves);
  EXPECT_EQ(a.test_accuracy, b.test_accuracy);
  EXPECT_EQ(a.comm_accuracy, b.comm_accuracy);
  EXPECT_EQ(a.train_examples, b.train_examples);
  EXPECT_EQ(a.test_examples, b.test_examples);
  EXPECT_EQ(a.confusion, b.confusion);
  EXPECT_EQ(a.scenario_labels, b.scenario_labels);
  EXPECT_EQ(a.scenario_accuracy, b.scenario_accuracy);
  EXPECT_EQ(a.cross_matrix, b.cross_matrix);
  EXPECT_EQ(a.rounds_completed, b.rounds_completed);
  EXPECT_EQ(a.payload_bytes, b.payload_bytes);
  EXPECT_EQ(a.bytes_per_round_down, b.bytes_per_round_down);
  EXPECT_EQ(a.bytes_per_round_up, b.bytes_per_round_up);
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Spec, ModeNames) {
  for (Mode m : {Mode::local, Mode::union_, Mode::baseline, Mode::federated, Mode::federated_da, Mode::union_da}) {
    EXPECT_EQ(parse_mode(mode_name(m)), m);
  }
  EXPECT_EQ(mode_name(Mode::federated_da), "federated+DA");
  EXPECT_THROW(parse_mode("federated-DA"), SpecError);
  EXPECT_TRUE(uses_augmentation(Mode::union_da));
  EXPECT_FALSE(uses_augmentation(Mode::federated));
}

TEST(Spec, JsonRoundTrip) {
  ExperimentSpec s = tiny_spec("round.trip+1", Mode::federated_da);
  s.phi = {0.3, 0.0};
  s.policy = fedavg::AggregationPolicy::data_weighted;
  s.bootstrap_epochs = 4;
  s.seeds.augment = 0xFFFFFFFFFFFFull;
  s.fraction = 0.1;
  EXPECT_EQ(spec_from_json(spec_to_json(s)), s);
  EXPECT_EQ(spec_from_json(spec_to_json(ExperimentSpec{})), ExperimentSpec{});
}

TEST(Spec, ParsingIsStrict) {
  json full = json::parse(spec_to_json(tiny_spec("x", Mode::union_)));
  for (const auto& [key, value] : full.items()) {
    json missing = full;
    missing.erase(key);
    EXPECT_THROW(spec_from_json(missing.dump()), SpecError) << key;
  }
  json extra = full;
  extra["learning_rate"] = 0.1;
  EXPECT_THROW(spec_from_json(extra.dump()), SpecError);
  json seed = full;
  seed["seeds"].erase("split");
  EXPECT_THROW(spec_from_json(seed.dump()), SpecError);
  json typed = full;
  typed["tags"] = "twenty";
  EXPECT_THROW(spec_from_json(typed.dump()), SpecError);
  EXPECT_THROW(spec_from_json("{not json"), SpecError);
}

TEST(Spec, Validation) {
  int line = 0;
  auto bad = [&](auto mutate) {
    ExperimentSpec s = tiny_spec("v", Mode::union_);
    mutate(s);
    EXPECT_THROW(s.validate(), SpecError) << "case " << line;
    ++line;
  };
  bad([](ExperimentSpec& s) { s.name = "a/b"; });
  bad([](ExperimentSpec& s) { s.name = ".."; });
  bad([](ExperimentSpec& s) { s.scenarios.clear(); });
  bad([](ExperimentSpec& s) { s.scenarios = {"OTA20", "OTA20"}; });
  bad([](ExperimentSpec& s) { s.mode = Mode::local; });
  bad([](ExperimentSpec& s) { s.tags = 1; });
  bad([](ExperimentSpec& s) { s.tags = 150; });
  bad([](ExperimentSpec& s) { s.tags = 201, s.large_population = true; });
  bad([](ExperimentSpec& s) { s.comms_per_tag = 9; });
  bad([](ExperimentSpec& s) { s.fraction = 0.0; });
  bad([](ExperimentSpec& s) { s.fraction = 1.01; });
  bad([](ExperimentSpec& s) { s.rounds = 0; });
  bad([](ExperimentSpec& s) { s.bootstrap_epochs = 11; });
  bad([](ExperimentSpec& s) { s.phi = {0.1}; });
  bad([](ExperimentSpec& s) { s.window = 1022; });
  bad([](ExperimentSpec& s) { s.convs = 0; });

  ExperimentSpec ok = tiny_spec("ok", Mode::union_);
  ok.tags = 150;
  ok.large_population = true;
  EXPECT_NO_THROW(ok.validate());
  ok.mode = Mode::federated_da;
  EXPECT_EQ(ok.effective_phi(), (std::vector<double>{0.20, 0.10, 0.05, 0.01}));
  ok.mode = Mode::union_;
  EXPECT_TRUE(ok.effective_phi().empty());
}

TEST(Suite, DefaultsApplyThenSpecsOverride) {
  const auto specs = load_suite(R"({
    "defaults": {"tags": 5, "fraction": 0.5},
    "specs": [{"name": "a"}, {"name": "b", "tags": 7, "mode": "federated"}]
  })");
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].tags, 5u);
  EXPECT_EQ(specs[0].fraction, 0.5);
  EXPECT_EQ(specs[0].mode, Mode::union_);
  EXPECT_EQ(specs[0].epochs, ExperimentSpec{}.epochs);
  EXPECT_EQ(specs[1].tags, 7u);
  EXPECT_EQ(specs[1].mode, Mode::federated);
  EXPECT_EQ(load_suite(R"([{"name": "only"}])").front().name, "only");

  EXPECT_THROW(load_suite(R"({"specs": []})"), SpecError);
  EXPECT_THROW(load_suite(R"({"specs": [{"name": "a"}, {"name": "a"}]})"), SpecError);
  EXPECT_THROW(load_suite(R"({"specs": [{"name": "a"}], "extra": 1})"), SpecError);
  EXPECT_THROW(load_suite(R"({"defaults": {"bogus": 1}, "specs": [{"name": "a"}]})"), SpecError);
  EXPECT_THROW(load_suite(R"([{"name": "a", "tags": 1}])"), SpecError);
  EXPECT_THROW(load_suite("42"), SpecError);
}

TEST(Results, WriteReadRoundTrip) {
  fedprint::testing::TempDir tmp("results");
  ResultsRecord r;
  r.spec = tiny_spec("rec", Mode::baseline);
  r.curves = {{"OTA20", 1, 0.75, 0.5, std::nullopt}, {"OTA20", 2, 0.1 + 0.2, std::nullopt, 1.0 / 3.0}};
  r.confusion = {{3, 1, 0}, {0, 2, 0}, {1, 0, 5}};
  r.test_accuracy = confusion_accuracy(r.confusion);
  r.comm_accuracy = 0.875;
  r.train_examples = 80;
  r.test_examples = 12;
  r.scenario_labels = {"OTA20", "OTA50"};
  r.scenario_accuracy = {0.5, 0.25};
  r.cross_matrix = {{1.0, 0.5}, {0.25, 0.9}};
  r.wall_clock_s = 1.5;
  write_results(tmp.path(), r);
  for (const char* f : {kSpecFile, kCurvesFile, kConfusionFile, kSummaryFile}) {
    EXPECT_TRUE(std::filesystem::exists(tmp.path() / f)) << f;
  }
  const ResultsRecord back = read_results(tmp.path());
  expect_same_record(r, back);
  EXPECT_EQ(back.wall_clock_s, 1.5);
  EXPECT_NEAR(r.test_accuracy, 10.0 / 12.0, 1e-15);
}

TEST(Results, ConfusionMustAgreeWithAccuracy) {
  fedprint::testing::TempDir tmp("results");
  ResultsRecord r;
  r.spec = tiny_spec("rec", Mode::union_);
  r.confusion = {{1, 1}, {0, 2}};
  r.test_accuracy = 0.5;
  write_results(tmp.path(), r);
  EXPECT_THROW(read_results(tmp.path()), ResultsError);
}

TEST(Report, RefusesARecordWithAMissingField) {
  fedprint::testing::TempDir tmp("report");
  ResultsRecord r;
  r.spec = tiny_spec("good", Mode::union_);
  r.confusion = {{2, 0}, {1, 1}};
  r.test_accuracy = 0.75;
  write_results(tmp.path() / "good", r);
  const std::string md = emit_report(tmp.path());
  EXPECT_NE(md.find("| good |"), std::string::npos);
  EXPECT_NE(md.find("75.00"), std::string::npos);

  r.spec.name = "partial";
  write_results(tmp.path() / "partial", r);
  json spec = json::parse(spec_to_json(r.spec));
  spec.erase("window");
  write_file(tmp.path() / "partial" / kSpecFile, spec.dump());
  EXPECT_THROW(emit_report(tmp.path()), ResultsError);
}

TEST(Report, ListsFailedSpecs) {
  fedprint::testing::TempDir tmp("report");
  std::filesystem::create_directories(tmp.path() / "broken");
  write_file(tmp.path() / "broken" / kErrorFile, "scenario 'OTA999' not found\n");
  const std::string md = emit_report(tmp.path());
  EXPECT_NE(md.find("Failed specs"), std::string::npos);
  EXPECT_NE(md.find("OTA999"), std::string::npos);
  fedprint::testing::TempDir empty("report");
  EXPECT_THROW(emit_report(empty.path()), ResultsError);
  EXPECT_THROW(emit_report(empty.path() / "missing"), ResultsError);
}

TEST(Runner, TinyUnionRunIsDeterministic) {
  const ExperimentSpec spec = tiny_spec("det", Mode::union_);
  const Corpus corpus = build_corpus(spec);
  ASSERT_EQ(corpus.scenarios.size(), 2u);
  const ResultsRecord a = run_experiment(spec, corpus);
  const ResultsRecord b = run_experiment(spec);
  expect_same_record(a, b);
  EXPECT_GT(a.train_examples, 0u);
  EXPECT_GT(a.test_examples, 0u);
  EXPECT_EQ(a.confusion.size(), 3u);
  EXPECT_DOUBLE_EQ(confusion_accuracy(a.confusion), a.test_accuracy);
  EXPECT_EQ(a.scenario_accuracy.size(), 2u);
}

TEST(Runner, TinyFederatedRunReportsTraffic) {
  const ExperimentSpec spec = tiny_spec("fed", Mode::federated);
  const ResultsRecord a = run_experiment(spec);
  const ResultsRecord b = run_experiment(spec);
  expect_same_record(a, b);
  EXPECT_EQ(a.rounds_completed, 2u);
  EXPECT_EQ(a.payload_bytes, nn::checkpoint_size(spec_arch(spec)));
  EXPECT_EQ(a.bytes_per_round_down, 2 * (fedavg::kFrameHeaderSize + a.payload_bytes));
  EXPECT_EQ(a.bytes_per_round_up, a.bytes_per_round_down);
}

TEST(Runner, CorpusSeedChangesTheData) {
  ExperimentSpec spec = tiny_spec("seed", Mode::union_);
  const Corpus a = build_corpus(spec);
  spec.seeds.corpus += 1;
  const Corpus b = build_corpus(spec);
  EXPECT_NE(a.scenarios[0].split.train.front().data, b.scenarios[0].split.train.front().data);
  EXPECT_NE(resolve_scenario(spec, "OTA20").seed, a.scenarios[0].scenario.seed);
  EXPECT_THROW(resolve_scenario(spec, "OTA999"), std::exception);
}

TEST(Runner, SuiteIsolatesFailures) {
  fedprint::testing::TempDir tmp("suite");
  ExperimentSpec broken = tiny_spec("broken", Mode::union_);
  broken.scenarios = {"OTA999"};
  ExperimentSpec fine = tiny_spec("fine", Mode::baseline);
  fine.epochs = 1;
  std::vector<std::string> log;
  const auto outcomes = run_suite({broken, fine}, tmp.path(), [&](const std::string& m) { log.push_back(m); });
  ASSERT_EQ(outcomes.size(), 2u);
  EXPECT_FALSE(outcomes[0].ok);
  EXPECT_NE(outcomes[0].error.find("OTA999"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "broken" / kErrorFile));
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "broken" / kSpecFile));
  EXPECT_TRUE(outcomes[1].ok);
  const ResultsRecord r = read_results(tmp.path() / "fine");
  EXPECT_EQ(r.cross_matrix.size(), 2u);
  EXPECT_EQ(r.cross_matrix[0].size(), 2u);
  const std::string md = emit_report(tmp.path());
  EXPECT_NE(md.find("Cross matrix: fine"), std::string::npos);
  EXPECT_NE(md.find("broken"), std::string::npos);
}
