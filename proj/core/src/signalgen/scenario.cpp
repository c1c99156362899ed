#include "fedprint/signalgen/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedprint/common/rng.hpp"

namespace fedprint::signalgen {
namespace {

using nlohmann::json;

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

bool is_pm0(const Obstacle& o) {
  return o.kind == Obstacle::Kind::tissue && near(o.thickness_cm, kPm0ThicknessCm) &&
         near(o.atten_db_per_cm, kFatAttenDbPerCm);
}
bool is_pm1(const Obstacle& o) {
  return o.kind == Obstacle::Kind::tissue && near(o.thickness_cm, kPm1ThicknessCm) &&
         near(o.atten_db_per_cm, kMuscleAttenDbPerCm);
}

std::string obstacle_code(const Obstacle& o) {
  if (o.kind == Obstacle::Kind::none) return "OTA";
  if (is_pm0(o)) return "PM0";
  if (is_pm1(o)) return "PM1";
  const long mm = std::lround(o.thickness_cm * 10.0);
  const long ddb = std::lround(o.atten_db_per_cm * 10.0);
  return "TIS" + std::to_string(mm) + "x" + std::to_string(ddb);
}

long parse_long(std::string_view s, std::string_view what, std::string_view name) {
  long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw InvalidArgument("bad " + std::string(what) + " in scenario name '" + std::string(name) + "'");
  }
  return v;
}

json snr_to_json(double snr) { return std::isfinite(snr) ? json(snr) : json("inf"); }

double snr_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw InvalidArgument("snr_db must be a number or \"inf\"");
  }
  return j.get<double>();
}

json scenario_json(const ChannelScenario& s) {
  json interferers = json::array();
  for (const Interferer& i : s.interferers) {
    interferers.push_back({{"freq_hz", i.freq_hz}, {"relative_power_db", i.relative_power_db}});
  }
  json obstacle = {{"kind", s.obstacle.kind == Obstacle::Kind::none ? "none" : "tissue"}};
  if (s.obstacle.kind == Obstacle::Kind::tissue) {
    obstacle["thickness_cm"] = s.obstacle.thickness_cm;
    obstacle["atten_db_per_cm"] = s.obstacle.atten_db_per_cm;
  }
  return {{"name", s.name},         {"distance_cm", s.distance_cm}, {"obstacle", obstacle},
          {"snr_db", snr_to_json(s.snr_db)}, {"interferers", interferers}, {"seed", s.seed}};
}

ChannelScenario scenario_from(const json& j) {
  ChannelScenario s;
  s.name = j.at("name").get<std::string>();
  s.distance_cm = j.at("distance_cm").get<double>();
  const json& o = j.at("obstacle");
  const std::string kind = o.at("kind").get<std::string>();
  if (kind == "none") {
    s.obstacle = Obstacle::none();
  } else if (kind == "tissue") {
    s.obstacle = Obstacle::tissue(o.at("thickness_cm").get<double>(), o.at("atten_db_per_cm").get<double>());
  } else {
    throw InvalidArgument("unknown obstacle kind '" + kind + "'");
  }
  s.snr_db = snr_from_json(j.at("snr_db"));
  for (const json& i : j.value("interferers", json::array())) {
    s.interferers.push_back({i.at("freq_hz").get<double>(), i.at("relative_power_db").get<double>()});
  }
  s.seed = j.at("seed").get<std::uint64_t>();
  s.validate();
  return s;
}

}  // namespace

std::string encode_scenario_name(const ScenarioCode& code) {
  if (!(code.distance_cm > 0.0)) throw InvalidArgument("distance_cm must be > 0");
  const long d = std::lround(code.distance_cm);
  if (!near(static_cast<double>(d), code.distance_cm)) {
    throw InvalidArgument("scenario names carry whole-centimetre distances");
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03ld", d);
  return "SCEN-" + std::string(buf) + "-" + obstacle_code(code.obstacle);
}

ScenarioCode decode_scenario_name(std::string_view name) {
  constexpr std::string_view prefix = "SCEN-";
  if (name.substr(0, prefix.size()) != prefix) {
    throw InvalidArgument("scenario name '" + std::string(name) + "' does not start with SCEN-");
  }
  const std::string_view rest = name.substr(prefix.size());
  const auto dash = rest.find('-');
  if (dash == std::string_view::npos) throw InvalidArgument("scenario name '" + std::string(name) + "' lacks obstacle");
  ScenarioCode code;
  code.distance_cm = static_cast<double>(parse_long(rest.substr(0, dash), "distance", name));
  if (code.distance_cm <= 0.0) throw InvalidArgument("scenario distance must be > 0");

  const std::string_view obst = rest.substr(dash + 1);
  if (obst == "OTA") {
    code.obstacle = Obstacle::none();
  } else if (obst == "PM0") {
    code.obstacle = Obstacle::tissue(kPm0ThicknessCm, kFatAttenDbPerCm);
  } else if (obst == "PM1") {
    code.obstacle = Obstacle::tissue(kPm1ThicknessCm, kMuscleAttenDbPerCm);
  } else if (obst.substr(0, 3) == "TIS") {
    const std::string_view body = obst.substr(3);
    const auto x = body.find('x');
    if (x == std::string_view::npos) throw InvalidArgument("bad tissue code in '" + std::string(name) + "'");
    code.obstacle = Obstacle::tissue(static_cast<double>(parse_long(body.substr(0, x), "thickness", name)) / 10.0,
                                     static_cast<double>(parse_long(body.substr(x + 1), "attenuation", name)) / 10.0);
  } else {
    throw InvalidArgument("unknown obstacle code '" + std::string(obst) + "'");
  }
  return code;
}

std::string short_label(const ScenarioCode& code) {
  const long d = std::lround(code.distance_cm);
  const std::string obst = obstacle_code(code.obstacle);
  if (obst == "OTA") return "OTA" + std::to_string(d);
  return obst + "-" + std::to_string(d);
}

void ChannelScenario::validate() const {
  if (!(distance_cm > 0.0) || !std::isfinite(distance_cm)) throw InvalidArgument("distance_cm must be > 0");
  if (obstacle.kind == Obstacle::Kind::tissue) {
    if (!(obstacle.thickness_cm >= 0.0)) throw InvalidArgument("thickness_cm must be >= 0");
    if (!std::isfinite(obstacle.atten_db_per_cm)) throw InvalidArgument("atten_db_per_cm must be finite");
  }
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw InvalidArgument("snr_db must be a real number or +inf");
  }
  for (const Interferer& i : interferers) {
    if (!std::isfinite(i.freq_hz) || !std::isfinite(i.relative_power_db)) {
      throw InvalidArgument("interferer fields must be finite");
    }
  }
  const ScenarioCode code = decode_scenario_name(name);
  if (!near(code.distance_cm, distance_cm) || code.obstacle.kind != obstacle.kind ||
      !near(code.obstacle.thickness_cm, obstacle.thickness_cm) ||
      !near(code.obstacle.atten_db_per_cm, obstacle.atten_db_per_cm)) {
    throw InvalidArgument("scenario name '" + name + "' does not match its distance/obstacle fields");
  }
}

ChannelScenario make_scenario(double distance_cm, Obstacle obstacle, double snr_db,
                              std::vector<Interferer> interferers, std::uint64_t seed) {
  ChannelScenario s;
  s.name = encode_scenario_name({distance_cm, obstacle});
  s.distance_cm = distance_cm;
  s.obstacle = obstacle;
  s.snr_db = snr_db;
  s.interferers = std::move(interferers);
  s.seed = seed;
  s.validate();
  return s;
}

const ChannelScenario& ScenarioCatalog::find(std::string_view scenario_name) const {
  for (const ChannelScenario& s : scenarios) {
    if (s.name == scenario_name) return s;
  }
  // Short labels ("OTA20", "PM1-50") are accepted too.
  for (const ChannelScenario& s : scenarios) {
    if (short_label({s.distance_cm, s.obstacle}) == scenario_name) return s;
  }
  throw InvalidArgument("scenario '" + std::string(scenario_name) + "' not in catalog '" + name + "'");
}

void ScenarioCatalog::validate() const {
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    scenarios[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (scenarios[j].name == scenarios[i].name) throw InvalidArgument("duplicate scenario " + scenarios[i].name);
    }
  }
}

std::string scenario_to_json(const ChannelScenario& scenario) { return scenario_json(scenario).dump(); }

ChannelScenario scenario_from_json(std::string_view text) {
  try {
    return scenario_from(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad scenario record: ") + e.what());
  }
}

std::string catalog_to_json(const ScenarioCatalog& catalog) {
  json scenarios = json::array();
  for (const ChannelScenario& s : catalog.scenarios) scenarios.push_back(scenario_json(s));
  return json{{"catalog", catalog.name}, {"scenarios", scenarios}}.dump(2) + "\n";
}

ScenarioCatalog catalog_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("scenario catalog is not valid JSON: ") + e.what());
  }
  ScenarioCatalog c;
  c.name = j.value("catalog", std::string("custom"));
  try {
    for (const json& s : j.at("scenarios")) c.scenarios.push_back(scenario_from(s));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad scenario catalog: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scenario catalog " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return catalog_from_json(ss.str());
}

void save_catalog(const ScenarioCatalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write scenario catalog " + path.string());
  out << catalog_to_json(catalog);
}

ScenarioCatalog builtin_catalog(std::string_view name) {
  const auto seed = [](std::string_view label) { return hash_string(label) & 0xFFFFFFFFULL; };
  ScenarioCatalog c;
  c.name = std::string(name);
  const Obstacle pm0 = Obstacle::tissue(kPm0ThicknessCm, kFatAttenDbPerCm);
  const Obstacle pm1 = Obstacle::tissue(kPm1ThicknessCm, kMuscleAttenDbPerCm);
  if (name == "desk") {
    c.scenarios = {
        make_scenario(20, Obstacle::none(), 25.0, {{180e3, -3.0}}, seed("OTA20")),
        make_scenario(50, Obstacle::none(), 20.0, {{-420e3, -3.0}}, seed("OTA50")),
        make_scenario(100, Obstacle::none(), 15.0, {{730e3, -3.0}}, seed("OTA100")),
        make_scenario(20, pm0, 22.0, {{260e3, -6.0}}, seed("PM0-20")),
        make_scenario(50, pm0, 17.0, {{-610e3, -6.0}}, seed("PM0-50")),
        make_scenario(20, pm1, 15.0, {{340e3, -6.0}}, seed("PM1-20")),
        make_scenario(50, pm1, 10.0, {{-150e3, -6.0}}, seed("PM1-50")),
    };
  } else if (name == "desk-lowsnr") {
    c.scenarios = {
        make_scenario(20, Obstacle::none(), 15.0, {{180e3, -3.0}}, seed("OTA20-lowsnr")),
        make_scenario(50, Obstacle::none(), 12.0, {{-420e3, -3.0}}, seed("OTA50-lowsnr")),
        make_scenario(100, Obstacle::none(), 9.0, {{730e3, -3.0}}, seed("OTA100-lowsnr")),
    };
  } else {
    throw InvalidArgument("unknown builtin catalog '" + std::string(name) + "'");
  }
  return c;
}

std::vector<std::string> builtin_catalog_names() { return {"desk", "desk-lowsnr"}; }

ScenarioCatalog resolve_catalog(std::string_view name_or_path) {
  for (const std::string& n : builtin_catalog_names()) {
    if (n == name_or_path) return builtin_catalog(n);
  }
  return load_catalog(std::filesystem::path(name_or_path));
}

}  // namespace fedprint::signalgen
