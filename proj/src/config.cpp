#include "tfs/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <thread>

#include "tfs/io.hpp"

extern "C" char** environ;

namespace tfs {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strip a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void fail(const std::string& what, int line) {
  throw ConfigError("config: " + what + (line > 0 ? " (line " + std::to_string(line) + ")" : ""));
}

Real parse_real(const std::string& v, const std::string& key, int line) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    fail("key " + key + ": expected a number, got '" + v + "'", line);
  return d;
}

std::int64_t parse_int(const std::string& v, const std::string& key, int line) {
  errno = 0;
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    fail("key " + key + ": expected an integer, got '" + v + "'", line);
  return i;
}

std::uint64_t parse_uint(const std::string& v, const std::string& key, int line) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0' || v.find('-') != std::string::npos)
    fail("key " + key + ": expected an unsigned integer, got '" + v + "'", line);
  return i;
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail("key " + key + ": expected true or false, got '" + v + "'", line);
}

std::string parse_string(const std::string& v, const std::string& key, int line) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (!v.empty() && v.find('"') == std::string::npos) return v;  // bare token (env overrides)
  fail("key " + key + ": malformed string '" + v + "'", line);
}

std::vector<Real> parse_real_array(const std::string& v, const std::string& key, int line) {
  const std::string t = trim(v);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    fail("key " + key + ": expected an array like [0.1, 0.2], got '" + v + "'", line);
  std::vector<Real> out;
  std::string inner = t.substr(1, t.size() - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string it = trim(item);
    if (it.empty()) fail("key " + key + ": empty array element", line);
    out.push_back(parse_real(it, key, line));
  }
  if (out.empty()) fail("key " + key + ": array must be nonempty", line);
  return out;
}

// All known keys, in canonical rendering order.
const char* kKnownKeys[] = {
    "run.setting",        "run.seed",          "run.threads",       "run.out_dir",
    "run.trace",          "cell.n",            "cell.inner_radius_m",
    "cell.outer_radius_m", "cell.edge_snr_db", "cell.path_loss_exponent",
    "cell.noise_power",   "cell.gamma_max",    "synthetic.kind",    "synthetic.mu",
    "demands.w",          "demands.mode",      "schedule.s0",       "schedule.kappa",
    "learn.horizon",      "checkpoints.per_decade", "checkpoints.t_min",
    "roc.reps",           "roc.horizon",       "oracle.method",     "oracle.batch",
    "oracle.tol",         "oracle.max_iters",  "oracle.u_batch",    "oracle.t_ref",
    "oracle.cache_dir",   "oracle.check_agreement", "epoch.m",      "epoch.alpha_star",
    "epoch.k",
};

void apply_kv(RunConfig& c, const std::string& key, const std::string& value, int line) {
  if (key == "run.setting") {
    const std::string s = parse_string(value, key, line);
    if (s == "oma")
      c.setting = Setting::oma;
    else if (s == "noma")
      c.setting = Setting::noma;
    else if (s == "synthetic")
      c.setting = Setting::synthetic;
    else
      fail("run.setting must be oma | noma | synthetic, got '" + s + "'", line);
  } else if (key == "run.seed") {
    c.seed = parse_uint(value, key, line);
  } else if (key == "run.threads") {
    c.threads = static_cast<int>(parse_int(value, key, line));
  } else if (key == "run.out_dir") {
    c.out_dir = parse_string(value, key, line);
  } else if (key == "run.trace") {
    c.trace = parse_bool(value, key, line);
  } else if (key == "cell.n") {
    c.cell.n = static_cast<int>(parse_int(value, key, line));
  } else if (key == "cell.inner_radius_m") {
    c.cell.inner_radius_m = parse_real(value, key, line);
  } else if (key == "cell.outer_radius_m") {
    c.cell.outer_radius_m = parse_real(value, key, line);
  } else if (key == "cell.edge_snr_db") {
    c.cell.edge_snr_db = parse_real(value, key, line);
  } else if (key == "cell.path_loss_exponent") {
    c.cell.path_loss_exponent = parse_real(value, key, line);
  } else if (key == "cell.noise_power") {
    c.cell.noise_power = parse_real(value, key, line);
  } else if (key == "cell.gamma_max") {
    c.cell.gamma_max = parse_real(value, key, line);
  } else if (key == "synthetic.kind") {
    const std::string s = parse_string(value, key, line);
    if (s == "uniform01")
      c.synth_kind = SyntheticKind::uniform01;
    else if (s == "exponential")
      c.synth_kind = SyntheticKind::exponential;
    else
      fail("synthetic.kind must be uniform01 | exponential, got '" + s + "'", line);
  } else if (key == "synthetic.mu") {
    c.synth_mu = parse_real(value, key, line);
  } else if (key == "demands.w") {
    c.w = parse_real_array(value, key, line);
  } else if (key == "demands.mode") {
    const std::string s = parse_string(value, key, line);
    if (s != "auto" && s != "equality" && s != "lower_bound")
      fail("demands.mode must be auto | equality | lower_bound, got '" + s + "'", line);
    c.demand_mode = s;
  } else if (key == "schedule.s0") {
    c.schedule.s0 = parse_real(value, key, line);
  } else if (key == "schedule.kappa") {
    c.schedule.kappa = parse_real(value, key, line);
  } else if (key == "learn.horizon") {
    c.horizon = parse_int(value, key, line);
  } else if (key == "checkpoints.per_decade") {
    c.per_decade = static_cast<int>(parse_int(value, key, line));
  } else if (key == "checkpoints.t_min") {
    c.t_min = parse_int(value, key, line);
  } else if (key == "roc.reps") {
    c.reps = static_cast<int>(parse_int(value, key, line));
  } else if (key == "roc.horizon") {
    c.roc_horizon = parse_int(value, key, line);
  } else if (key == "oracle.method") {
    const std::string s = parse_string(value, key, line);
    if (s != "auto" && s != "quantile" && s != "longrun")
      fail("oracle.method must be auto | quantile | longrun, got '" + s + "'", line);
    c.method = s;
  } else if (key == "oracle.batch") {
    c.batch = parse_int(value, key, line);
  } else if (key == "oracle.tol") {
    c.tol = parse_real(value, key, line);
  } else if (key == "oracle.max_iters") {
    c.max_iters = static_cast<int>(parse_int(value, key, line));
  } else if (key == "oracle.u_batch") {
    c.u_batch = parse_int(value, key, line);
  } else if (key == "oracle.t_ref") {
    c.t_ref = parse_int(value, key, line);
  } else if (key == "oracle.cache_dir") {
    c.cache_dir = parse_string(value, key, line);
  } else if (key == "oracle.check_agreement") {
    c.check_agreement = parse_bool(value, key, line);
  } else if (key == "epoch.m") {
    c.epoch_m = static_cast<int>(parse_int(value, key, line));
  } else if (key == "epoch.alpha_star") {
    c.epoch_alpha_star = parse_real(value, key, line);
  } else if (key == "epoch.k") {
    c.epoch_k = static_cast<int>(parse_int(value, key, line));
  } else {
    fail("unknown key '" + key + "'", line);
  }
}

std::string env_name_for(const std::string& key) {
  std::string name = "TFS_";
  for (char ch : key) {
    if (ch == '.')
      name += '_';
    else
      name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return name;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::stringstream ss(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name", lineno);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value, got '" + line + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key", lineno);
    if (section.empty()) fail("key '" + key + "' outside any [section]", lineno);
    apply_kv(cfg, section + "." + key, value, lineno);
  }
  return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind("TFS_", 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    const std::string value = entry.substr(eq + 1);
    bool known = false;
    for (const char* key : kKnownKeys) {
      if (env_name_for(key) == name) {
        apply_kv(cfg, key, value, 0);
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("config: unknown environment override " + name);
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (!path.empty()) cfg = parse_config_text(read_text_file(path));
  apply_env_overrides(cfg);
  return cfg;
}

int setting_n_max(const RunConfig& cfg) { return cfg.setting == Setting::noma ? 2 : 1; }

std::string setting_name(const RunConfig& cfg) {
  switch (cfg.setting) {
    case Setting::oma: return "oma";
    case Setting::noma: return "noma";
    default: return "synthetic";
  }
}

TlaMode resolved_mode(const RunConfig& cfg) {
  if (cfg.demand_mode == "equality") return TlaMode::equality;
  if (cfg.demand_mode == "lower_bound") return TlaMode::lower_bound;
  return cfg.setting == Setting::noma ? TlaMode::lower_bound : TlaMode::equality;
}

std::string resolved_method(const RunConfig& cfg) {
  if (cfg.method == "quantile") return "quantile_fixed_point";
  if (cfg.method == "longrun") return "long_run_tla";
  return cfg.setting == Setting::synthetic ? "quantile_fixed_point" : "long_run_tla";
}

std::string resolved_cache_dir(const RunConfig& cfg) {
  return cfg.cache_dir.empty() ? cfg.out_dir : cfg.cache_dir;
}

int resolved_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

DemandVector make_demands(const RunConfig& cfg) {
  Vec w(static_cast<Index>(cfg.w.size()));
  for (Index i = 0; i < w.size(); ++i) w[i] = cfg.w[static_cast<std::size_t>(i)];
  return resolved_mode(cfg) == TlaMode::equality ? DemandVector::equality(w)
                                                 : DemandVector::lower_bounds(w);
}

std::unique_ptr<Sampler> make_sampler(const RunConfig& cfg) {
  if (cfg.setting == Setting::synthetic)
    return std::make_unique<SyntheticSampler>(cfg.synth_kind, cfg.cell.n, cfg.synth_mu);
  return std::make_unique<ChannelSampler>(
      ChannelSampler::make(cfg.cell, setting_n_max(cfg), cfg.seed));
}

void validate(const RunConfig& cfg) {
  if (cfg.setting == Setting::synthetic) {
    if (cfg.cell.n < 1) throw ConfigError("config: cell.n must be >= 1");
    if (!(cfg.synth_mu > 0)) throw ConfigError("config: synthetic.mu must be > 0");
  } else {
    validate(cfg.cell);
  }
  if (cfg.threads < 0) throw ConfigError("config: run.threads must be >= 0 (0 = auto)");
  if (cfg.out_dir.empty()) throw ConfigError("config: run.out_dir must be nonempty");
  validate(cfg.schedule);
  if (cfg.horizon < 1) throw ConfigError("config: learn.horizon must be >= 1");
  if (cfg.per_decade < 1) throw ConfigError("config: checkpoints.per_decade must be >= 1");
  if (cfg.t_min < 1) throw ConfigError("config: checkpoints.t_min must be >= 1");
  if (cfg.reps < 1) throw ConfigError("config: roc.reps must be >= 1");
  if (cfg.roc_horizon < 1) throw ConfigError("config: roc.horizon must be >= 1");
  if (cfg.batch < 1 || cfg.u_batch < 1) throw ConfigError("config: oracle batches must be >= 1");
  if (!(cfg.tol > 0)) throw ConfigError("config: oracle.tol must be > 0");
  if (cfg.max_iters < 1) throw ConfigError("config: oracle.max_iters must be >= 1");
  if (cfg.t_ref < 1'000'000) throw ConfigError("config: oracle.t_ref must be >= 1e6");
  if (static_cast<int>(cfg.w.size()) != cfg.cell.n)
    throw ConfigError("config: demands.w has " + std::to_string(cfg.w.size()) +
                      " entries but cell.n = " + std::to_string(cfg.cell.n));
  const DemandVector demands = make_demands(cfg);
  const FeasibilityReport rep = check_feasibility(demands, setting_n_max(cfg));
  if (!rep.ok) throw ConfigError("config: infeasible demands: " + rep.message);
  // Epoch parameters are validated by build_epoch_plan when used.
}

namespace {

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string render_w(const std::vector<Real>& w) {
  std::string out = "[";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ", ";
    out += format_real(w[i]);
  }
  out += "]";
  return out;
}

}  // namespace

std::string canonical_text(const RunConfig& cfg) {
  // Execution-environment keys (run.threads, run.out_dir, run.trace,
  // oracle.cache_dir) are deliberately omitted: results must not depend on
  // them, so artifacts stay byte-identical across thread counts and output
  // locations.
  std::string o;
  o += "[run]\n";
  o += "setting = " + quoted(setting_name(cfg)) + "\n";
  o += "seed = " + std::to_string(cfg.seed) + "\n";
  o += "[cell]\n";
  o += "n = " + std::to_string(cfg.cell.n) + "\n";
  o += "inner_radius_m = " + format_real(cfg.cell.inner_radius_m) + "\n";
  o += "outer_radius_m = " + format_real(cfg.cell.outer_radius_m) + "\n";
  o += "edge_snr_db = " + format_real(cfg.cell.edge_snr_db) + "\n";
  o += "path_loss_exponent = " + format_real(cfg.cell.path_loss_exponent) + "\n";
  o += "noise_power = " + format_real(cfg.cell.noise_power) + "\n";
  o += "gamma_max = " + format_real(cfg.cell.gamma_max) + "\n";
  o += "[synthetic]\n";
  o += "kind = " +
       quoted(cfg.synth_kind == SyntheticKind::uniform01 ? "uniform01" : "exponential") + "\n";
  o += "mu = " + format_real(cfg.synth_mu) + "\n";
  o += "[demands]\n";
  o += "w = " + render_w(cfg.w) + "\n";
  o += "mode = " +
       quoted(resolved_mode(cfg) == TlaMode::equality ? "equality" : "lower_bound") + "\n";
  o += "[schedule]\n";
  o += "s0 = " + format_real(cfg.schedule.s0) + "\n";
  o += "kappa = " + format_real(cfg.schedule.kappa) + "\n";
  o += "[learn]\n";
  o += "horizon = " + std::to_string(cfg.horizon) + "\n";
  o += "[checkpoints]\n";
  o += "per_decade = " + std::to_string(cfg.per_decade) + "\n";
  o += "t_min = " + std::to_string(cfg.t_min) + "\n";
  o += "[roc]\n";
  o += "reps = " + std::to_string(cfg.reps) + "\n";
  o += "horizon = " + std::to_string(cfg.roc_horizon) + "\n";
  o += "[oracle]\n";
  o += "method = " +
       quoted(resolved_method(cfg) == "quantile_fixed_point" ? "quantile" : "longrun") + "\n";
  o += "batch = " + std::to_string(cfg.batch) + "\n";
  o += "tol = " + format_real(cfg.tol) + "\n";
  o += "max_iters = " + std::to_string(cfg.max_iters) + "\n";
  o += "u_batch = " + std::to_string(cfg.u_batch) + "\n";
  o += "t_ref = " + std::to_string(cfg.t_ref) + "\n";
  o += std::string("check_agreement = ") + (cfg.check_agreement ? "true" : "false") + "\n";
  o += "[epoch]\n";
  o += "m = " + std::to_string(cfg.epoch_m) + "\n";
  o += "alpha_star = " + format_real(cfg.epoch_alpha_star) + "\n";
  o += "k = " + std::to_string(cfg.epoch_k) + "\n";
  return o;
}

std::string setting_text(const RunConfig& cfg) {
  std::string o;
  o += "setting = " + setting_name(cfg) + "\n";
  o += "seed = " + std::to_string(cfg.seed) + "\n";
  o += "n = " + std::to_string(cfg.cell.n) + "\n";
  if (cfg.setting == Setting::synthetic) {
    o += std::string("kind = ") +
         (cfg.synth_kind == SyntheticKind::uniform01 ? "uniform01" : "exponential") + "\n";
    o += "mu = " + format_real(cfg.synth_mu) + "\n";
  } else {
    o += "inner_radius_m = " + format_real(cfg.cell.inner_radius_m) + "\n";
    o += "outer_radius_m = " + format_real(cfg.cell.outer_radius_m) + "\n";
    o += "edge_snr_db = " + format_real(cfg.cell.edge_snr_db) + "\n";
    o += "path_loss_exponent = " + format_real(cfg.cell.path_loss_exponent) + "\n";
    o += "noise_power = " + format_real(cfg.cell.noise_power) + "\n";
    o += "gamma_max = " + format_real(cfg.cell.gamma_max) + "\n";
  }
  o += "w = " + render_w(cfg.w) + "\n";
  o += std::string("mode = ") +
       (resolved_mode(cfg) == TlaMode::equality ? "equality" : "lower_bound") + "\n";
  o += "s0 = " + format_real(cfg.schedule.s0) + "\n";
  o += "kappa = " + format_real(cfg.schedule.kappa) + "\n";
  o += "method = " + resolved_method(cfg) + "\n";
  o += "batch = " + std::to_string(cfg.batch) + "\n";
  o += "tol = " + format_real(cfg.tol) + "\n";
  o += "max_iters = " + std::to_string(cfg.max_iters) + "\n";
  o += "u_batch = " + std::to_string(cfg.u_batch) + "\n";
  o += "t_ref = " + std::to_string(cfg.t_ref) + "\n";
  return o;
}

std::string config_hash(const RunConfig& cfg) { return fnv1a64_hex(canonical_text(cfg)); }

std::string setting_hash(const RunConfig& cfg) { return fnv1a64_hex(setting_text(cfg)); }

}  // namespace tfs
