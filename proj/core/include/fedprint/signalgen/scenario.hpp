#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fedprint/signalgen/types.hpp"

namespace fedprint::signalgen {

/// Default tissue coefficients (UHF, dB/cm).
inline constexpr double kFatAttenDbPerCm = 0.9;
inline constexpr double kMuscleAttenDbPerCm = 1.6;
inline constexpr double kPm0ThicknessCm = 0.5;
inline constexpr double kPm1ThicknessCm = 3.0;

/// The (distance, obstacle) pair carried by a "SCEN-dist-obst" name.
struct ScenarioCode {
  double distance_cm = kReferenceDistanceCm;
  Obstacle obstacle;

  friend bool operator==(const ScenarioCode&, const ScenarioCode&) = default;
};

/// "SCEN-050-PM1" style names. Obstacle codes: OTA, PM0 (fat, 0.5 cm),
/// PM1 (muscle, 3 cm), or TIS<thickness mm>x<dB/cm * 10> for anything else.
/// Distances are whole centimetres.
std::string encode_scenario_name(const ScenarioCode& code);
ScenarioCode decode_scenario_name(std::string_view name);

/// Short alias used in tables, e.g. "OTA20", "PM1-50".
std::string short_label(const ScenarioCode& code);

/// Builds a scenario with a canonical name.
ChannelScenario make_scenario(double distance_cm, Obstacle obstacle, double snr_db,
                              std::vector<Interferer> interferers, std::uint64_t seed);

/// A named list of scenarios. Stored on disk as JSON.
struct ScenarioCatalog {
  std::string name;
  std::vector<ChannelScenario> scenarios;

  const ChannelScenario& find(std::string_view scenario_name) const;
  void validate() const;
};

/// Single scenario record as compact JSON text.
std::string scenario_to_json(const ChannelScenario& scenario);
ChannelScenario scenario_from_json(std::string_view text);

std::string catalog_to_json(const ScenarioCatalog& catalog);
ScenarioCatalog catalog_from_json(std::string_view text);
ScenarioCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const ScenarioCatalog& catalog, const std::filesystem::path& path);

/// Built-in catalogs: "desk" (three OTA and four tissue analogs) and
/// "desk-lowsnr" (the OTA analogs at low SNR).
ScenarioCatalog builtin_catalog(std::string_view name);
std::vector<std::string> builtin_catalog_names();

/// Either a builtin name or a path to a catalog file.
ScenarioCatalog resolve_catalog(std::string_view name_or_path);

}  // namespace fedprint::signalgen
