#include "fedprint/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "fedprint/harness/results.hpp"

namespace fedprint::harness {
namespace {

namespace fs = std::filesystem;

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

const std::vector<Mode> kColumns = {Mode::baseline, Mode::local,        Mode::union_,
                                    Mode::union_da, Mode::federated,    Mode::federated_da};

}  // namespace

std::string emit_report(const fs::path& results_dir) {
  if (!fs::is_directory(results_dir)) throw ResultsError(results_dir.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(results_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  std::vector<ResultsRecord> records;
  std::vector<std::pair<std::string, std::string>> failures;
  for (const fs::path& d : dirs) {
    if (fs::exists(d / kErrorFile)) {
      std::ifstream in(d / kErrorFile);
      std::string msg;
      std::getline(in, msg);
      failures.emplace_back(d.filename().string(), msg);
      continue;
    }
    records.push_back(read_results(d));
  }
  if (records.empty() && failures.empty()) throw ResultsError("no results under " + results_dir.string());

  using Key = std::tuple<std::uint32_t, double, std::uint32_t, std::uint32_t, std::string>;
  std::map<Key, std::vector<const ResultsRecord*>> groups;
  for (const ResultsRecord& r : records) {
    const ExperimentSpec& s = r.spec;
    groups[{s.tags, s.fraction, s.window, s.convs, s.catalog + ": " + join(s.scenarios, ", ")}].push_back(&r);
  }

  std::ostringstream md;
  md << "# Results\n\n";
  md << "Slice-level test accuracy (%); communication majority vote in parentheses.\n\n";
  for (const auto& [key, recs] : groups) {
    const auto& [tags, fraction, window, convs, scen] = key;
    md << "## " << tags << " tags, " << pct(fraction) << "% data, L=" << window << ", M=" << convs << "\n\n";
    md << "Scenarios: " << scen << "\n\n";
    md << "| spec |";
    for (Mode m : kColumns) md << ' ' << mode_name(m) << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < kColumns.size(); ++i) md << "---|";
    md << '\n';
    for (const ResultsRecord* r : recs) {
      md << "| " << r->spec.name << " |";
      for (Mode m : kColumns) {
        if (r->spec.mode == m) {
          md << ' ' << pct(r->test_accuracy) << " (" << pct(r->comm_accuracy) << ") |";
        } else {
          md << " |";
        }
      }
      md << '\n';
    }
    md << '\n';
  }

  for (const ResultsRecord& r : records) {
    if (r.cross_matrix.size() < 2) continue;
    md << "## Cross matrix: " << r.spec.name << "\n\nRows: training scenario. Columns: test scenario.\n\n|  |";
    for (const std::string& l : r.scenario_labels) md << ' ' << l << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < r.scenario_labels.size(); ++i) md << "---|";
    md << '\n';
    for (std::size_t i = 0; i < r.cross_matrix.size(); ++i) {
      md << "| " << r.scenario_labels[i] << " |";
      for (double v : r.cross_matrix[i]) md << ' ' << pct(v) << " |";
      md << '\n';
    }
    md << '\n';
  }

  for (const ResultsRecord& r : records) {
    md << "## Confusion: " << r.spec.name << " (" << mode_name(r.spec.mode) << ")\n\n```\n"
       << confusion_to_csv(r.confusion) << "```\n\n";
  }

  if (!failures.empty()) {
    md << "## Failed specs\n\n";
    for (const auto& [name, msg] : failures) md << "- " << name << ": " << msg << '\n';
    md << '\n';
  }
  return md.str();
}

}  // namespace fedprint::harness
