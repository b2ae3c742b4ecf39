#include "msph/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace msph {

using nlohmann::json;

ConfigError::ConfigError(const std::string& what, std::vector<std::string> problems)
    : std::runtime_error(what), problems_(std::move(problems)) {}

namespace {

[[noreturn]] void schema_error(const std::string& source, const std::string& msg) {
  throw ConfigError(source + ": " + msg, {msg});
}

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, const std::string& source)
      : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object()) schema_error(source_, where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& required(const std::string& key) {
    if (!j_.contains(key)) schema_error(source_, "missing required key '" + child(key) + "'");
    seen_.insert(key);
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  double number(const std::string& key) { return as_number(required(key), child(key)); }

  void number(const std::string& key, double& out) {
    if (const json* v = optional(key)) out = as_number(*v, child(key));
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = optional(key)) out = as_int(*v, child(key));
  }

  void direction(const std::string& key, Direction& out) {
    if (const json* v = optional(key)) out = as_direction(*v, child(key));
  }

  ObjectReader object(const std::string& key) { return {required(key), child(key), source_}; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) schema_error(source_, "unknown key '" + child(item.key()) + "'");
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double as_number(const json& v, const std::string& path) const {
    if (!v.is_number()) schema_error(source_, "'" + path + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) schema_error(source_, "'" + path + "' must be finite");
    return x;
  }

  int as_int(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) schema_error(source_, "'" + path + "' must be an integer");
    return v.get<int>();
  }

  Direction as_direction(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 2) {
      schema_error(source_, "'" + path + "' must be [theta, phi] in radians");
    }
    return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
  }

  const std::string& source() const { return source_; }

 private:
  std::string where() const { return path_.empty() ? "top level" : "'" + path_ + "'"; }

  const json& j_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> seen_;
};

SensorPair read_sensors(const json& v, const std::string& source) {
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    if (name == "symmetric") return SensorPair::symmetric();
    if (name == "asymmetric") return SensorPair::asymmetric();
    schema_error(source, "'sensors' must be \"symmetric\", \"asymmetric\" or an object");
  }
  ObjectReader r(v, "sensors", source);
  SensorPair out;
  const Direction l = r.as_direction(r.required("left"), "sensors.left");
  const Direction rt = r.as_direction(r.required("right"), "sensors.right");
  r.finish();
  out.left = {l.theta, l.phi};
  out.right = {rt.theta, rt.phi};
  return out;
}

void read_optimizer(ObjectReader& r, OptimizerConfig& opt) {
  r.number("learning_rate", opt.learning_rate);
  r.integer("max_iters", opt.max_iters);
  r.integer("patience", opt.patience);
}

std::vector<double> read_snrs(const json& v, const std::string& source) {
  if (!v.is_array() || v.empty()) schema_error(source, "'sweep.snr_db' must be a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (x.is_string() && x.get<std::string>() == "inf") {
      out.push_back(INFINITY);
    } else if (x.is_number()) {
      out.push_back(x.get<double>());
    } else {
      schema_error(source, "'sweep.snr_db' entries must be numbers or \"inf\"");
    }
  }
  return out;
}

ExperimentConfig read_root(const json& root, const std::string& source) {
  ExperimentConfig cfg;
  SceneConfig& sc = cfg.scene;
  ObjectReader r(root, "", source);

  {
    ObjectReader m = r.object("media");
    sc.media.rho_o = m.number("rho_o");
    sc.media.c_o = m.number("c_o");
    sc.media.rho_i = m.number("rho_i");
    sc.media.c_i = m.number("c_i");
    m.finish();
  }
  {
    ObjectReader g = r.object("geometry");
    sc.geometry.a1 = g.number("a1");
    sc.geometry.a2 = g.number("a2");
    sc.geometry.a3 = g.number("a3");
    sc.geometry.offset3_z = g.number("offset3_z");
    g.finish();
  }
  if (const json* v = r.optional("sensors")) sc.sensors = read_sensors(*v, source);
  if (r.has("freqs")) {
    ObjectReader f = r.object("freqs");
    sc.freqs.min_hz = f.number("min_hz");
    sc.freqs.max_hz = f.number("max_hz");
    sc.freqs.count = f.as_int(f.required("count"), "freqs.count");
    f.finish();
  }
  if (const json* v = r.optional("truncation_override"); v && !v->is_null()) {
    sc.truncation_override = r.as_int(*v, "truncation_override");
  }
  if (const json* v = r.optional("seed")) {
    if (!v->is_number_unsigned()) schema_error(source, "'seed' must be a non-negative integer");
    sc.seed = v->get<std::uint64_t>();
  }
  if (const json* v = r.optional("hrtf_reference")) {
    const std::string name = v->is_string() ? v->get<std::string>() : "";
    if (name == "center") {
      sc.reference = HrtfReference::Center;
    } else if (name == "sensor_point") {
      sc.reference = HrtfReference::SensorPoint;
    } else {
      schema_error(source, "'hrtf_reference' must be \"center\" or \"sensor_point\"");
    }
  }

  if (r.has("cues")) {
    ObjectReader c = r.object("cues");
    c.direction("source", cfg.cues.source);
    c.finish();
  }
  if (r.has("localize")) {
    ObjectReader l = r.object("localize");
    l.direction("truth", cfg.localize.truth);
    if (const json* v = l.optional("init")) cfg.localize.init = l.as_direction(*v, "localize.init");
    read_optimizer(l, cfg.localize.optimizer);
    l.finish();
  }
  if (r.has("sweep")) {
    ObjectReader s = r.object("sweep");
    if (const json* v = s.optional("snr_db")) cfg.sweep.snrs_db = read_snrs(*v, source);
    s.integer("trials", cfg.sweep.trials);
    if (const json* v = s.optional("directions")) {
      if (!v->is_array() || v->empty()) {
        schema_error(source, "'sweep.directions' must be a non-empty array");
      }
      std::vector<Direction> dirs;
      for (std::size_t i = 0; i < v->size(); ++i) {
        dirs.push_back(s.as_direction((*v)[i], "sweep.directions[" + std::to_string(i) + "]"));
      }
      cfg.sweep.directions = std::move(dirs);
    }
    read_optimizer(s, cfg.sweep.optimizer);
    s.finish();
  }
  if (r.has("track")) {
    ObjectReader t = r.object("track");
    t.direction("start", cfg.track.start);
    t.direction("end", cfg.track.end);
    t.integer("steps", cfg.track.steps);
    t.number("sigma_ild_db", cfg.track.sigma_ild_db);
    if (const json* v = t.optional("sigma_itd_us")) {
      cfg.track.sigma_itd_s = t.as_number(*v, "track.sigma_itd_us") * 1e-6;
    }
    t.number("sigma_acc", cfg.track.sigma_acc);
    t.number("dt", cfg.track.dt);
    t.direction("init", cfg.track.init);
    t.finish();
  }
  if (r.has("beamform")) {
    ObjectReader b = r.object("beamform");
    b.direction("look", cfg.beamform.look);
    b.integer("grid", cfg.beamform.grid);
    b.finish();
  }
  r.finish();
  return cfg;
}

std::vector<std::string> validate_experiments(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  auto check_opt = [&](const OptimizerConfig& opt, const std::string& name) {
    try {
      opt.validate();
    } catch (const std::exception& e) {
      out.push_back(name + "." + e.what());
    }
  };
  check_opt(cfg.localize.optimizer, "localize");
  check_opt(cfg.sweep.optimizer, "sweep");
  if (cfg.sweep.trials < 1) out.push_back("sweep.trials must be >= 1");
  if (cfg.track.steps < 1) out.push_back("track.steps must be >= 1");
  if (!(cfg.track.dt > 0.0)) out.push_back("track.dt must be > 0");
  if (!(cfg.track.sigma_ild_db > 0.0)) out.push_back("track.sigma_ild_db must be > 0");
  if (!(cfg.track.sigma_itd_s > 0.0)) out.push_back("track.sigma_itd_us must be > 0");
  if (cfg.track.sigma_acc < 0.0) out.push_back("track.sigma_acc must be >= 0");
  if (cfg.beamform.grid < 12) out.push_back("beamform.grid must be >= 12");
  return out;
}

}  // namespace

std::vector<std::string> validate_scene(const SceneConfig& scene) {
  std::vector<std::string> out;
  for (const auto& v : validate_geometry(scene.geometry, scene.media)) out.push_back(v.message);
  const FrequencyGrid& f = scene.freqs;
  if (!(f.min_hz > 0.0)) out.push_back("freqs.min_hz must be > 0");
  if (!(f.min_hz < f.max_hz)) out.push_back("freqs.min_hz must be < freqs.max_hz");
  if (f.count < 2) out.push_back("freqs.count must be >= 2");
  if (scene.truncation_override && *scene.truncation_override < 1) {
    out.push_back("truncation_override must be >= 1");
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line and column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << col << ": parse error: " << e.what();
    throw ConfigError(msg.str(), {msg.str()});
  }

  ExperimentConfig cfg = read_root(root, source);
  std::vector<std::string> problems = validate_scene(cfg.scene);
  for (auto& p : validate_experiments(cfg)) problems.push_back(std::move(p));
  if (!problems.empty()) {
    std::string msg = source + ": invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg, problems);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'", {"cannot open file"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace msph
