#include "tfs/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tfs {

using nlohmann::json;

std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view s) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void emit_comments(std::string& out, const std::vector<std::string>& comments) {
  for (const auto& line : comments) {
    out += "# ";
    out += line;
    out += '\n';
  }
}

void emit_vec(std::string& out, const Vec& v) {
  for (Index i = 0; i < v.size(); ++i) {
    out += ',';
    out += format_real(v[i]);
  }
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& arr) {
  Vec v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = arr.at(static_cast<std::size_t>(i)).get<Real>();
  return v;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string trajectory_csv(const TlaRunResult& run, const std::vector<std::string>& comments) {
  std::string out;
  emit_comments(out, comments);
  const Index n = run.state.lambda_hat.size();
  out += "t";
  for (Index i = 1; i <= n; ++i) out += ",lambda_" + std::to_string(i);
  for (Index i = 1; i <= n; ++i) out += ",share_" + std::to_string(i);
  out += ",avg_utility\n";
  for (const TrajectoryPoint& pt : run.trajectory) {
    out += std::to_string(pt.t);
    emit_vec(out, pt.lambda_hat);
    emit_vec(out, pt.shares);
    out += ',';
    out += format_real(pt.avg_utility);
    out += '\n';
  }
  return out;
}

std::string roc_csv(const RoCSeries& series, const std::vector<std::string>& comments) {
  std::string out;
  emit_comments(out, comments);
  out += "t,x_t,y_t,stderr_x,stderr_y\n";
  for (std::size_t c = 0; c < series.checkpoints.size(); ++c) {
    const Index i = static_cast<Index>(c);
    out += std::to_string(series.checkpoints[c]);
    out += ',';
    out += format_real(series.x[i]);
    out += ',';
    out += format_real(series.y[i]);
    out += ',';
    out += format_real(series.stderr_x[i]);
    out += ',';
    out += format_real(series.stderr_y[i]);
    out += '\n';
  }
  return out;
}

std::string epoch_csv(const EpochRunResult& run, const std::vector<std::string>& comments) {
  std::string out;
  emit_comments(out, comments);
  const Index n = run.final_shares.size();
  out += "t,phase,epoch_k,running_avg_utility";
  for (Index i = 1; i <= n; ++i) out += ",share_" + std::to_string(i);
  out += '\n';
  for (const EpochTracePoint& pt : run.trace) {
    out += std::to_string(pt.t);
    out += pt.phase == EpochPhase::greedy ? ",greedy," : ",tbs,";
    out += std::to_string(pt.epoch_k);
    out += ',';
    out += format_real(pt.running_avg_utility);
    emit_vec(out, pt.shares);
    out += '\n';
  }
  return out;
}

std::string slot_trace_csv(const std::vector<SlotRecord>& slots,
                           const std::vector<std::string>& comments) {
  std::string out;
  emit_comments(out, comments);
  const Index n = slots.empty() ? 0 : slots.front().shares.size();
  out += "t,selected_j";
  out += ",utility";
  for (Index i = 1; i <= n; ++i) out += ",share_" + std::to_string(i);
  out += '\n';
  for (const SlotRecord& s : slots) {
    out += std::to_string(s.t);
    out += ',';
    out += std::to_string(s.selected + 1);  // 1-based virtual-user index
    out += ',';
    out += format_real(s.utility);
    emit_vec(out, s.shares);
    out += '\n';
  }
  return out;
}

std::string reference_json(const ReferenceSolution& ref, const std::string& config_text,
                           const std::string& version) {
  json j;
  j["version"] = version;
  j["method"] = ref.method;
  j["lambda_star"] = vec_to_json(ref.lambda_star);
  j["u_star"] = ref.u_star;
  j["ci_halfwidth"] = ref.ci_halfwidth;
  j["sample_budget"] = ref.sample_budget;
  j["converged"] = ref.converged;
  j["sweeps_used"] = ref.sweeps_used;
  j["activation_freq"] = vec_to_json(ref.activation_freq);
  j["setting_hash"] = ref.setting_hash;
  if (ref.multistart_checked) {
    j["multistart_agrees"] = ref.multistart_agrees;
    j["multistart_max_dev"] = ref.multistart_max_dev;
  }
  j["config"] = config_text;
  return dump_json(j);
}

ReferenceSolution parse_reference_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ReferenceMismatch(std::string("reference JSON unreadable: ") + e.what());
  }
  ReferenceSolution ref;
  try {
    ref.method = j.at("method").get<std::string>();
    ref.lambda_star = vec_from_json(j.at("lambda_star"));
    ref.u_star = j.at("u_star").get<Real>();
    ref.ci_halfwidth = j.at("ci_halfwidth").get<Real>();
    ref.sample_budget = j.at("sample_budget").get<std::int64_t>();
    ref.converged = j.at("converged").get<bool>();
    ref.sweeps_used = j.at("sweeps_used").get<int>();
    ref.activation_freq = vec_from_json(j.at("activation_freq"));
    ref.setting_hash = j.at("setting_hash").get<std::string>();
    if (j.contains("multistart_agrees")) {
      ref.multistart_checked = true;
      ref.multistart_agrees = j.at("multistart_agrees").get<bool>();
      ref.multistart_max_dev = j.at("multistart_max_dev").get<Real>();
    }
  } catch (const json::exception& e) {
    throw ReferenceMismatch(std::string("reference JSON missing fields: ") + e.what());
  }
  return ref;
}

std::string roc_summary_json(const RoCSummary& summary, const RoCSeries& series,
                             const std::string& config_hash, const std::string& config_text,
                             const std::string& version) {
  json j;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["reference_hash"] = series.reference_hash;
  j["setting"] = series.setting;
  j["reps"] = series.reps;
  j["checkpoints"] = series.checkpoints.size();
  if (summary.slope_available)
    j["slope"] = summary.slope;
  else
    j["slope_warning"] = summary.slope_warning;
  j["flatness_ratio"] = summary.flatness_ratio;
  j["flatness_t0"] = summary.flatness_t0;
  j["flatness_t1"] = summary.flatness_t1;
  j["y_all_negative_tail"] = summary.y_all_negative_tail;
  j["y_tail_points"] = summary.y_tail_points;
  j["verdict_x"] = summary.verdict_x;
  j["verdict_y"] = summary.verdict_y;
  j["config"] = config_text;
  return dump_json(j);
}

std::string learn_state_json(const TlaRunResult& run, const std::string& config_hash,
                             const std::string& config_text, const std::string& version) {
  json j;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["horizon"] = run.horizon;
  j["lambda_hat"] = vec_to_json(run.state.lambda_hat);
  j["shares"] = vec_to_json(run.final_shares);
  j["avg_utility"] = run.final_avg_utility;
  j["config"] = config_text;
  return dump_json(j);
}

std::string epoch_summary_json(const EpochRunResult& run, const EpochPlan& plan, Real u_star,
                               Real u_star_ci, const std::string& config_hash,
                               const std::string& config_text, const std::string& version) {
  json j;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["M"] = plan.M;
  j["alpha_star"] = plan.alpha_star;
  j["K"] = plan.K;
  j["total_slots"] = plan.total_slots;
  json phases = json::array();
  for (const EpochPhaseSpec& ph : plan.epochs) {
    json p;
    p["k"] = ph.k;
    p["greedy_len"] = ph.greedy_len;
    p["tbs_len"] = ph.tbs_len;
    p["est_sample_count"] = ph.est_sample_count;
    phases.push_back(p);
  }
  j["phases"] = phases;
  j["final_avg_utility"] = run.final_avg_utility;
  j["final_shares"] = vec_to_json(run.final_shares);
  j["u_star"] = u_star;
  j["u_star_ci"] = u_star_ci;
  j["config"] = config_text;
  return dump_json(j);
}

}  // namespace tfs
