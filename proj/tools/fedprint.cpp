// fedprint command-line interface.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedprint/augment.hpp"
#include "fedprint/datapipe.hpp"
#include "fedprint/fedavg.hpp"
#include "fedprint/harness.hpp"
#include "fedprint/nn.hpp"
#include "fedprint/signalgen.hpp"

namespace fs = std::filesystem;
using namespace fedprint;

namespace {

void log_line(const std::string& msg) { std::cerr << "[fedprint] " << msg << std::endl; }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Options shared by train and cross.
struct CommonOpts {
  std::string catalog = "desk";
  std::uint32_t tags = 20;
  std::uint32_t comms = 200;
  double fraction = 1.0;
  std::uint32_t window = 1024;
  std::uint32_t convs = 2;
  std::size_t epochs = 30;
  std::size_t patience = 0;
  std::size_t batch = 64;
  std::uint64_t seed = 1;
  bool large = false;
  std::string out;
  std::string name;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--catalog", o.catalog, "Builtin catalog name or catalog JSON file")->capture_default_str();
  cmd->add_option("--tags", o.tags, "Number of tags")->capture_default_str();
  cmd->add_option("--comms", o.comms, "Communications per tag")->capture_default_str();
  cmd->add_option("--fraction", o.fraction, "Fraction of each tag's communications to use")->capture_default_str();
  cmd->add_option("--window", o.window, "Slice length L")->capture_default_str();
  cmd->add_option("--convs", o.convs, "Number of conv blocks M")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--patience", o.patience, "Early-stopping patience (0 = off)")->capture_default_str();
  cmd->add_option("--batch", o.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Base seed; every other seed derives from it")->capture_default_str();
  cmd->add_flag("--large-population", o.large, "Allow up to 200 tags");
  cmd->add_option("--out", o.out, "Results directory");
  cmd->add_option("--name", o.name, "Experiment name");
}

harness::ExperimentSpec spec_from(const CommonOpts& o) {
  harness::ExperimentSpec s;
  s.catalog = o.catalog;
  s.tags = o.tags;
  s.comms_per_tag = o.comms;
  s.fraction = o.fraction;
  s.window = o.window;
  s.convs = o.convs;
  s.epochs = o.epochs;
  s.patience = o.patience;
  s.batch_size = o.batch;
  s.large_population = o.large;
  s.seeds = {o.seed, o.seed + 1, o.seed + 2, o.seed + 3, o.seed + 4, o.seed + 5};
  return s;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

int cmd_gen(const std::vector<std::string>& scenarios, const std::string& catalog, std::uint32_t tags,
            std::uint32_t comms, const std::string& out, std::uint64_t seed, bool large) {
  harness::ExperimentSpec spec;
  spec.catalog = catalog;
  spec.scenarios = scenarios;
  spec.tags = tags;
  spec.comms_per_tag = comms;
  spec.large_population = large;
  spec.seeds.population = seed;
  spec.seeds.corpus = seed + 1;
  spec.validate();
  const auto population = signalgen::generate_population(tags, spec.seeds.population);
  std::vector<signalgen::IQWaveform> waves;
  datapipe::CorpusMetadata meta;
  meta.population_seed = spec.seeds.population;
  meta.num_tags = tags;
  meta.comms_per_tag = comms;
  for (const std::string& name : scenarios) {
    const signalgen::ChannelScenario s = harness::resolve_scenario(spec, name);
    meta.scenarios.push_back(s);
    auto w = signalgen::synthesize_scenario(population, s, comms);
    waves.insert(waves.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    log_line("synthesized " + s.name + ": " + std::to_string(tags) + " tags x " + std::to_string(comms) +
             " communications");
  }
  datapipe::write_corpus(out, waves, meta);
  std::cout << "wrote " << waves.size() << " communications to " << out << "\n";
  return 0;
}

int finish(const harness::ExperimentSpec& spec, const std::string& out) {
  const fs::path dir = out.empty() ? fs::path("results") / spec.name : fs::path(out);
  const harness::ResultsRecord r = harness::run_experiment(spec);
  harness::write_results(dir, r);
  if (r.cross_matrix.size() > 1) {
    std::cout << "cross accuracy (rows: train, columns: test)\n        ";
    for (const std::string& l : r.scenario_labels) std::printf(" %9s", l.c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < r.cross_matrix.size(); ++i) {
      std::printf("%-8s", r.scenario_labels[i].c_str());
      for (double v : r.cross_matrix[i]) std::printf(" %9s", pct(v).c_str());
      std::printf("\n");
    }
  }
  std::cout << harness::mode_name(spec.mode) << " test accuracy " << pct(r.test_accuracy) << " (communication vote "
            << pct(r.comm_accuracy) << ")\nresults in " << dir.string() << "\n";
  return 0;
}

int cmd_serve(std::size_t readers, std::size_t rounds, const std::string& policy, std::uint16_t port,
              const std::string& bind, const CommonOpts& o, std::size_t bootstrap, const std::string& out) {
  nn::ArchConfig arch;
  arch.num_conv_blocks = o.convs;
  arch.input_len = o.window;
  arch.num_classes = o.tags;
  arch.validate();
  fedavg::ServerConfig cfg{arch, readers, rounds, fedavg::parse_policy(policy), bootstrap};
  auto observer = [&](const fedavg::RoundReport& r) {
    log_line("round " + std::to_string(r.round) + " aggregated from " + std::to_string(r.updates.size()) + " readers");
    return true;
  };
  fedavg::ServerSession session(cfg, fedavg::initial_weights(arch, o.seed), observer);
  fedavg::TcpListener listener(bind, port);
  log_line("listening on " + bind + ":" + std::to_string(listener.port()) + ", payload " +
           std::to_string(session.payload_size()) + " bytes per weight message");
  fedavg::ServeOptions opts;
  opts.log = log_line;
  const fedavg::TransferStats stats = fedavg::serve(listener, session, opts);
  nn::save_checkpoint(out, arch, session.weights());
  if (auto it = stats.by_round.find(1); it != stats.by_round.end()) {
    std::cout << "bytes per round: down " << it->second.bytes_down << ", up " << it->second.bytes_up << "\n";
  }
  std::cout << "total bytes: down " << stats.total.bytes_down << ", up " << stats.total.bytes_up << "\n"
            << "final weights in " << out << "\n";
  return 0;
}

int cmd_client(std::uint32_t reader_id, const std::string& data, const std::string& server, const std::string& scenario,
               const CommonOpts& o, std::size_t local_epochs, std::uint64_t split_seed, const std::string& augment_flag) {
  const auto [host, port] = fedavg::parse_endpoint(server);
  std::vector<signalgen::IQWaveform> waves = datapipe::read_corpus(data);
  if (!scenario.empty()) {
    std::vector<signalgen::IQWaveform> keep;
    for (auto& w : waves) {
      if (w.scenario_name == scenario) keep.push_back(std::move(w));
    }
    if (keep.empty()) throw std::invalid_argument("corpus has no scenario named " + scenario);
    waves = std::move(keep);
  } else {
    for (const auto& w : waves) {
      if (w.scenario_name != waves.front().scenario_name) {
        throw std::invalid_argument("corpus holds several scenarios; pick one with --scenario");
      }
    }
  }
  const datapipe::SplitDataset split = datapipe::split_corpus(waves, {}, o.fraction, split_seed, o.window);
  waves.clear();

  fedavg::FederationConfig fc;
  fc.arch.num_conv_blocks = o.convs;
  fc.arch.input_len = o.window;
  fc.arch.num_classes = o.tags;
  fc.arch.validate();
  fc.batch_size = o.batch;
  fc.local_epochs = local_epochs;
  fc.seed = o.seed;
  if (!augment_flag.empty()) fc.augment = augment::parse_augment_flag(augment_flag, o.seed);
  const auto train = fedavg::reader_training_set(split.train, fc.augment, reader_id);
  fedavg::ReaderClient reader = fedavg::make_reader_client(fc, reader_id, train);
  fedavg::ClientSession session(reader);
  fedavg::Socket sock = fedavg::tcp_connect(host, port, 30000);
  log_line("reader " + std::to_string(reader_id) + " connected with " + std::to_string(train.size()) + " slices");
  fedavg::run_client(sock, session, [&](const std::string& m) { log_line("reader " + std::to_string(reader_id) + ": " + m); });
  const nn::Evaluation ev = nn::evaluate(reader.model, split.test);
  std::cout << "reader " << reader_id << " local test accuracy " << pct(ev.accuracy) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RFID fingerprinting with federated learning"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Synthesize a corpus directory");
  std::string gen_scen, gen_catalog = "desk", gen_out;
  std::uint32_t gen_tags = 20, gen_comms = 200;
  std::uint64_t gen_seed = 1;
  bool gen_large = false;
  gen->add_option("--scenario", gen_scen, "Scenario name(s), comma separated")->required();
  gen->add_option("--catalog", gen_catalog, "Builtin catalog name or catalog JSON file")->capture_default_str();
  gen->add_option("--tags", gen_tags, "Number of tags")->capture_default_str();
  gen->add_option("--comms", gen_comms, "Communications per tag")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Population and channel seed")->capture_default_str();
  gen->add_flag("--large-population", gen_large, "Allow up to 200 tags");

  // train
  auto* train = app.add_subcommand("train", "Train and test on one scenario");
  CommonOpts train_o;
  std::string train_scen, train_aug;
  train->add_option("--scenario", train_scen, "Scenario name")->required();
  train->add_option("--augment", train_aug, "AWGN augmentation, e.g. phi=0.20,0.10,0.05,0.01");
  add_common(train, train_o);

  // cross
  auto* cross = app.add_subcommand("cross", "Cross-channel accuracy matrix and baseline");
  CommonOpts cross_o;
  std::string cross_scen;
  cross->add_option("--scenarios", cross_scen, "Comma-separated scenario names")->required();
  add_common(cross, cross_o);

  // run
  auto* run = app.add_subcommand("run", "Run every spec of a suite file");
  std::string suite, run_out = "results";
  run->add_option("--suite", suite, "Suite JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Results root directory")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Summarize a results directory");
  std::string report_dir, report_out;
  report->add_option("dir", report_dir, "Results root directory")->required();
  report->add_option("--out", report_out, "Report file (default <dir>/report.md)");

  // serve
  auto* serve = app.add_subcommand("serve", "Federated-averaging server");
  CommonOpts serve_o;
  std::size_t serve_readers = 3, serve_rounds = 30, serve_boot = 0;
  std::string serve_policy = "uniform", serve_bind = "127.0.0.1", serve_out = "federated.fpwt";
  std::uint16_t serve_port = 7878;
  serve->add_option("--readers", serve_readers, "Number of readers")->capture_default_str();
  serve->add_option("--rounds", serve_rounds, "Federated rounds")->capture_default_str();
  serve->add_option("--policy", serve_policy, "uniform|weighted")->capture_default_str();
  serve->add_option("--port", serve_port, "TCP port (0 = any)")->capture_default_str();
  serve->add_option("--bind", serve_bind, "Listen address")->capture_default_str();
  serve->add_option("--bootstrap", serve_boot, "Bootstrap epochs on the lowest reader id")->capture_default_str();
  serve->add_option("--tags", serve_o.tags, "Number of classes")->capture_default_str();
  serve->add_option("--window", serve_o.window, "Slice length L")->capture_default_str();
  serve->add_option("--convs", serve_o.convs, "Number of conv blocks M")->capture_default_str();
  serve->add_option("--seed", serve_o.seed, "Initial-weight seed (match the clients)")->capture_default_str();
  serve->add_option("--out", serve_out, "Final checkpoint file")->capture_default_str();

  // client
  auto* client = app.add_subcommand("client", "Federated reader client");
  CommonOpts client_o;
  std::uint32_t reader_id = 0;
  std::string client_data, client_server = "127.0.0.1:7878", client_scen, client_aug;
  std::size_t local_epochs = 1;
  std::uint64_t split_seed = 3;
  client->add_option("--reader-id", reader_id, "Reader id")->required();
  client->add_option("--data", client_data, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  client->add_option("--server", client_server, "host:port")->capture_default_str();
  client->add_option("--scenario", client_scen, "Scenario to use when the corpus holds several");
  client->add_option("--fraction", client_o.fraction, "Fraction of communications to use")->capture_default_str();
  client->add_option("--tags", client_o.tags, "Number of classes")->capture_default_str();
  client->add_option("--window", client_o.window, "Slice length L")->capture_default_str();
  client->add_option("--convs", client_o.convs, "Number of conv blocks M")->capture_default_str();
  client->add_option("--batch", client_o.batch, "Mini-batch size")->capture_default_str();
  client->add_option("--local-epochs", local_epochs, "Local epochs per round")->capture_default_str();
  client->add_option("--seed", client_o.seed, "Training seed (match the server)")->capture_default_str();
  client->add_option("--split-seed", split_seed, "Train/validation/test split seed")->capture_default_str();
  client->add_option("--augment", client_aug, "AWGN augmentation, e.g. phi=0.20,0.10,0.05,0.01");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen(split_list(gen_scen), gen_catalog, gen_tags, gen_comms, gen_out, gen_seed, gen_large);
    }
    if (train->parsed()) {
      harness::ExperimentSpec spec = spec_from(train_o);
      spec.mode = harness::Mode::local;
      spec.scenarios = {train_scen};
      if (!train_aug.empty()) spec.phi = augment::parse_augment_flag(train_aug).phi;
      spec.name = train_o.name.empty() ? "train-" + train_scen : train_o.name;
      spec.validate();
      return finish(spec, train_o.out);
    }
    if (cross->parsed()) {
      harness::ExperimentSpec spec = spec_from(cross_o);
      spec.mode = harness::Mode::baseline;
      spec.scenarios = split_list(cross_scen);
      if (spec.scenarios.size() < 2) throw std::invalid_argument("cross needs at least two scenarios");
      spec.name = cross_o.name.empty() ? "cross" : cross_o.name;
      spec.validate();
      return finish(spec, cross_o.out);
    }
    if (run->parsed()) {
      const auto specs = harness::load_suite(read_file(suite));
      const auto outcomes = harness::run_suite(specs, run_out, log_line);
      int failed = 0;
      for (const auto& o : outcomes) {
        std::cout << (o.ok ? "ok     " : "FAILED ") << o.name << (o.ok ? "" : ": " + o.error) << "\n";
        failed += o.ok ? 0 : 1;
      }
      return failed == 0 ? 0 : 2;
    }
    if (report->parsed()) {
      const std::string text = harness::emit_report(report_dir);
      const fs::path out = report_out.empty() ? fs::path(report_dir) / "report.md" : fs::path(report_out);
      std::ofstream(out) << text;
      std::cout << text;
      return 0;
    }
    if (serve->parsed()) {
      return cmd_serve(serve_readers, serve_rounds, serve_policy, serve_port, serve_bind, serve_o, serve_boot,
                       serve_out);
    }
    if (client->parsed()) {
      return cmd_client(reader_id, client_data, client_server, client_scen, client_o, local_epochs, split_seed,
                        client_aug);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
