#include "fedprint/harness/results.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace fedprint::harness {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResultsError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResultsError("cannot write " + path.string());
  out << text;
  if (!out) throw ResultsError("write failed for " + path.string());
}

// Shortest round-trip formatting.
std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

double confusion_accuracy(const std::vector<std::vector<std::uint64_t>>& confusion) {
  std::uint64_t trace = 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < confusion.size(); ++i) {
    for (std::size_t j = 0; j < confusion[i].size(); ++j) {
      total += confusion[i][j];
      if (i == j) trace += confusion[i][j];
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(trace) / static_cast<double>(total);
}

std::string curves_to_csv(const std::vector<CurvePoint>& curves) {
  std::ostringstream ss;
  ss << "model,step,train_loss,val_accuracy,test_accuracy\n";
  for (const CurvePoint& c : curves) {
    ss << c.model << ',' << c.step << ',' << num(c.train_loss) << ',';
    if (c.val_accuracy) ss << num(*c.val_accuracy);
    ss << ',';
    if (c.test_accuracy) ss << num(*c.test_accuracy);
    ss << '\n';
  }
  return ss.str();
}

std::string confusion_to_csv(const std::vector<std::vector<std::uint64_t>>& confusion) {
  std::ostringstream ss;
  ss << "true\\predicted";
  for (std::size_t j = 0; j < confusion.size(); ++j) ss << ',' << j;
  ss << '\n';
  for (std::size_t i = 0; i < confusion.size(); ++i) {
    ss << i;
    for (std::uint64_t v : confusion[i]) ss << ',' << v;
    ss << '\n';
  }
  return ss.str();
}

void write_results(const fs::path& dir, const ResultsRecord& r) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ResultsError("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / kSpecFile, spec_to_json(r.spec) + "\n");
  write_text(dir / kCurvesFile, curves_to_csv(r.curves));
  write_text(dir / kConfusionFile, confusion_to_csv(r.confusion));

  json s;
  s["mode"] = mode_name(r.spec.mode);
  s["test_accuracy"] = r.test_accuracy;
  s["comm_accuracy"] = r.comm_accuracy;
  s["train_examples"] = r.train_examples;
  s["test_examples"] = r.test_examples;
  s["scenario_labels"] = r.scenario_labels;
  s["scenario_accuracy"] = r.scenario_accuracy;
  s["cross_matrix"] = r.cross_matrix;
  s["rounds_completed"] = r.rounds_completed;
  s["payload_bytes"] = r.payload_bytes;
  s["bytes_per_round_down"] = r.bytes_per_round_down;
  s["bytes_per_round_up"] = r.bytes_per_round_up;
  s["wall_clock_s"] = r.wall_clock_s;
  write_text(dir / kSummaryFile, s.dump(2) + "\n");
}

ResultsRecord read_results(const fs::path& dir) {
  ResultsRecord r;
  if (!fs::exists(dir / kSpecFile)) throw ResultsError(dir.string() + " has no spec file");
  try {
    r.spec = spec_from_json(read_text(dir / kSpecFile));
  } catch (const SpecError& e) {
    throw ResultsError(dir.string() + ": " + e.what());
  }

  json s;
  try {
    s = json::parse(read_text(dir / kSummaryFile));
    r.test_accuracy = s.at("test_accuracy").get<double>();
    r.comm_accuracy = s.at("comm_accuracy").get<double>();
    r.train_examples = s.at("train_examples").get<std::size_t>();
    r.test_examples = s.at("test_examples").get<std::size_t>();
    r.scenario_labels = s.at("scenario_labels").get<std::vector<std::string>>();
    r.scenario_accuracy = s.at("scenario_accuracy").get<std::vector<double>>();
    r.cross_matrix = s.at("cross_matrix").get<std::vector<std::vector<double>>>();
    r.rounds_completed = s.at("rounds_completed").get<std::size_t>();
    r.payload_bytes = s.at("payload_bytes").get<std::uint64_t>();
    r.bytes_per_round_down = s.at("bytes_per_round_down").get<std::uint64_t>();
    r.bytes_per_round_up = s.at("bytes_per_round_up").get<std::uint64_t>();
    r.wall_clock_s = s.at("wall_clock_s").get<double>();
  } catch (const json::exception& e) {
    throw ResultsError(dir.string() + "/summary: " + e.what());
  }

  std::istringstream curves(read_text(dir / kCurvesFile));
  std::string line;
  std::getline(curves, line);
  while (std::getline(curves, line)) {
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw ResultsError(dir.string() + "/curves.csv: bad row '" + line + "'");
    CurvePoint c;
    c.model = cells[0];
    c.step = std::stoull(cells[1]);
    c.train_loss = std::stod(cells[2]);
    if (!cells[3].empty()) c.val_accuracy = std::stod(cells[3]);
    if (!cells[4].empty()) c.test_accuracy = std::stod(cells[4]);
    r.curves.push_back(std::move(c));
  }

  std::istringstream conf(read_text(dir / kConfusionFile));
  std::getline(conf, line);
  while (std::getline(conf, line)) {
    const auto cells = split_csv(line);
    std::vector<std::uint64_t> row;
    for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(std::stoull(cells[j]));
    r.confusion.push_back(std::move(row));
  }
  if (std::abs(confusion_accuracy(r.confusion) - r.test_accuracy) > 1e-12) {
    throw ResultsError(dir.string() + ": confusion matrix disagrees with test_accuracy");
  }
  return r;
}

}  // namespace fedprint::harness
