#include "spce/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "spce/errors.hpp"

namespace spce {

namespace {

using nlohmann::json;

[[noreturn]] void unknown_key(const std::string& key, const std::string& where) {
  throw ValidationError("unknown key '" + key + "' in " + where);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) unknown_key(item.key(), where);
  }
}

double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ValidationError(std::string("missing key '") + key + "' in " + where);
  }
  if (!obj[key].is_number()) {
    throw ValidationError(std::string("key '") + key + "' in " + where +
                          " must be a number");
  }
  return obj[key].get<double>();
}

double number_or(const json& obj, const char* key, double fallback,
                 const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw ValidationError(std::string("key '") + key + "' in " + where +
                          " must be a number");
  }
  return obj[key].get<double>();
}

Direction direction_from_angle_deg(double deg) {
  return Direction::from_plane_angle(deg * std::numbers::pi / 180.0);
}

struct AnalyzerFields {
  Direction direction = Direction::x_axis();
  double angle_deg = 0.0;
  bool from_angle = true;
  double epsilon = 0.0;
  int setting = 1;
};

AnalyzerFields parse_analyzer(const json& obj, const std::string& where) {
  check_keys(obj, where, {"angle_deg", "direction", "epsilon", "setting"});
  AnalyzerFields out;
  if (obj.contains("angle_deg") && obj.contains("direction")) {
    throw ValidationError(where + ": give either angle_deg or direction, not both");
  }
  if (obj.contains("direction")) {
    const auto& d = obj["direction"];
    if (!d.is_array() || d.size() != 3) {
      throw ValidationError(where + ".direction must be a 3-element array");
    }
    out.direction = Direction::normalized(d[0].get<double>(), d[1].get<double>(),
                                          d[2].get<double>());
    out.from_angle = false;
  } else {
    out.angle_deg = number_or(obj, "angle_deg", 0.0, where);
    out.direction = direction_from_angle_deg(out.angle_deg);
  }
  out.epsilon = number_or(obj, "epsilon", 0.0, where);
  if (!(out.epsilon >= 0.0 && out.epsilon <= 2.0)) {
    throw ValidationError(where + ".epsilon must lie in [0, 2]");
  }
  if (obj.contains("setting")) {
    out.setting = obj["setting"].get<int>();
    if (out.setting != 1 && out.setting != 2) {
      throw ValidationError(where + ".setting must be 1 or 2");
    }
  }
  return out;
}

std::int64_t int_field(const json& obj, const char* key, std::int64_t fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ValidationError(std::string("key '") + key + "' in " + where +
                          " must be an integer");
  }
  return obj[key].get<std::int64_t>();
}

void fill_shared(const json& root, ExperimentConfig& config) {
  config.model_id = root.at("model").get<std::string>();
  {
    bool known = false;
    for (const auto& id : known_model_ids()) {
      if (id == config.model_id) known = true;
    }
    if (!known) throw ValidationError("unknown model id '" + config.model_id + "'");
  }
  const std::int64_t n_pairs = int_field(root, "n_pairs", -1, "config");
  if (n_pairs < 1) throw ValidationError("n_pairs must be an integer >= 1");
  config.n_pairs = n_pairs;
  config.master_seed =
      static_cast<std::uint64_t>(int_field(root, "seed", 1, "config"));
  config.efficiency_a = number_or(root, "efficiency_a", 1.0, "config");
  config.efficiency_b = number_or(root, "efficiency_b", 1.0, "config");
  config.pair_rate_hz = number_or(root, "pair_rate_hz", 1.0e4, "config");
  config.coincidence_window_ns =
      int_field(root, "coincidence_window_ns", 2000, "config");
  config.jitter_ns = int_field(root, "jitter_ns", -1, "config");
}

ParsedConfig parse_json(const json& root) {
  if (!root.is_object()) throw ValidationError("config root must be an object");
  if (!root.contains("model")) throw ValidationError("missing key 'model' in config");

  ParsedConfig parsed;
  if (root.contains("campaign")) {
    check_keys(root, "config",
               {"model", "n_pairs", "seed", "campaign", "efficiency_a",
                "efficiency_b", "pair_rate_hz", "coincidence_window_ns",
                "jitter_ns"});
    const json& camp = root["campaign"];
    check_keys(camp, "campaign", {"a_deg", "b_deg", "epsilon_a", "epsilon_b"});
    for (const char* key : {"a_deg", "b_deg"}) {
      if (!camp.contains(key) || !camp[key].is_array() || camp[key].size() != 2) {
        throw ValidationError(std::string("campaign.") + key +
                              " must be a 2-element array of angles in degrees");
      }
    }
    const double eps_a = number_or(camp, "epsilon_a", 0.0, "campaign");
    const double eps_b = number_or(camp, "epsilon_b", 0.0, "campaign");
    const double a_deg[2] = {camp["a_deg"][0].get<double>(),
                             camp["a_deg"][1].get<double>()};
    const double b_deg[2] = {camp["b_deg"][0].get<double>(),
                             camp["b_deg"][1].get<double>()};

    ExperimentConfig base;
    fill_shared(root, base);
    // CHSH order: (a,b), (a,b'), (a',b'), (a',b). One master seed; per-run
    // streams are keyed by the run_id hash.
    const int order[4][2] = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    for (const auto& [ia, ib] : order) {
      ExperimentConfig run = base;
      run.analyzer_a = CapSpec(direction_from_angle_deg(a_deg[ia]), eps_a);
      run.analyzer_b = CapSpec(direction_from_angle_deg(b_deg[ib]), eps_b);
      run.setting_a = ia + 1;
      run.setting_b = ib + 1;
      run.run_id = "a" + std::to_string(ia + 1) + "b" + std::to_string(ib + 1);
      run.validate();
      parsed.runs.push_back(std::move(run));
    }
    parsed.campaign = true;
    return parsed;
  }

  check_keys(root, "config",
             {"model", "n_pairs", "seed", "run_id", "analyzer_a", "analyzer_b",
              "efficiency_a", "efficiency_b", "pair_rate_hz",
              "coincidence_window_ns", "jitter_ns"});
  ExperimentConfig config;
  fill_shared(root, config);
  if (root.contains("run_id")) config.run_id = root["run_id"].get<std::string>();
  if (root.contains("analyzer_a")) {
    const auto fields = parse_analyzer(root["analyzer_a"], "analyzer_a");
    config.analyzer_a = CapSpec(fields.direction, fields.epsilon);
    config.setting_a = fields.setting;
  }
  if (root.contains("analyzer_b")) {
    const auto fields = parse_analyzer(root["analyzer_b"], "analyzer_b");
    config.analyzer_b = CapSpec(fields.direction, fields.epsilon);
    config.setting_b = fields.setting;
  }
  config.validate();
  parsed.runs.push_back(std::move(config));
  return parsed;
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ":" + std::to_string(line_of_byte(text, e.byte)) +
                     ": " + e.what());
  }
  try {
    return parse_json(root);
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

ParsedConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

void echo_config(const ExperimentConfig& config, ReportDoc& doc,
                 const std::string& prefix) {
  doc.put(prefix + "model", config.model_id);
  doc.put(prefix + "run_id", config.run_id);
  doc.put(prefix + "n_pairs", config.n_pairs);
  doc.put(prefix + "seed", config.master_seed);
  doc.put(prefix + "analyzer_a.x", config.analyzer_a.center.x());
  doc.put(prefix + "analyzer_a.y", config.analyzer_a.center.y());
  doc.put(prefix + "analyzer_a.z", config.analyzer_a.center.z());
  doc.put(prefix + "analyzer_a.epsilon", config.analyzer_a.epsilon);
  doc.put(prefix + "analyzer_a.setting", config.setting_a);
  doc.put(prefix + "analyzer_b.x", config.analyzer_b.center.x());
  doc.put(prefix + "analyzer_b.y", config.analyzer_b.center.y());
  doc.put(prefix + "analyzer_b.z", config.analyzer_b.center.z());
  doc.put(prefix + "analyzer_b.epsilon", config.analyzer_b.epsilon);
  doc.put(prefix + "analyzer_b.setting", config.setting_b);
  doc.put(prefix + "efficiency_a", config.efficiency_a);
  doc.put(prefix + "efficiency_b", config.efficiency_b);
  doc.put(prefix + "pair_rate_hz", config.pair_rate_hz);
  doc.put(prefix + "coincidence_window_ns", config.coincidence_window_ns);
  doc.put(prefix + "jitter_ns", config.effective_jitter_ns());
}

}  // namespace spce
