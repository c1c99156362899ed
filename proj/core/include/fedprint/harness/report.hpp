#pragma once

#include <filesystem>
#include <string>

namespace fedprint::harness {

/// Builds a Markdown report over every results directory under `results_dir`:
/// an accuracy table per (tags, fraction, window, convs, scenario set) with
/// one column per mode, the baseline cross matrices and every confusion
/// matrix. Failed specs are listed. Throws ResultsError when a record is
/// incomplete, e.g. a spec missing a field.
std::string emit_report(const std::filesystem::path& results_dir);

}  // namespace fedprint::harness
