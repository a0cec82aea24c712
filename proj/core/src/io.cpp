#include "dfd/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dfd {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& pointer, const std::string& why) {
  throw ConfigError("config error at " + pointer + ": " + why);
}

const json& expect(const json& obj, const std::string& pointer, const char* key) {
  if (!obj.contains(key)) fail(pointer + "/" + key, "missing field");
  return obj.at(key);
}

void check_keys(const json& obj, const std::string& pointer,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(pointer + "/" + key, "unknown field");
  }
}

double number_at(const json& v, const std::string& pointer) {
  if (!v.is_number()) fail(pointer, "expected a number");
  return v.get<double>();
}

Eigen::VectorXd vector_at(const json& v, const std::string& pointer, int n) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) {
    std::ostringstream os;
    os << "expected an array of " << n << " numbers";
    fail(pointer, os.str());
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    out(i) = number_at(v.at(static_cast<std::size_t>(i)), pointer + "/" + std::to_string(i));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("file not found: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json_text(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("invalid JSON in " + what);
  return j;
}

DirectedGraph graph_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) fail(pointer, "expected an object");
  check_keys(j, pointer, {"n", "A", "b"});
  const json& jn = expect(j, pointer, "n");
  if (!jn.is_number_integer() || jn.get<int>() < 1) fail(pointer + "/n", "expected a positive integer");
  const int n = jn.get<int>();

  const json& ja = expect(j, pointer, "A");
  if (!ja.is_array() || static_cast<int>(ja.size()) != n) {
    std::ostringstream os;
    os << "expected an array of " << n << " rows";
    fail(pointer + "/A", os.str());
  }
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd row =
        vector_at(ja.at(static_cast<std::size_t>(i)), pointer + "/A/" + std::to_string(i), n);
    a.row(i) = row.transpose();
  }
  const Eigen::VectorXd b = vector_at(expect(j, pointer, "b"), pointer + "/b", n);

  try {
    return build_graph(std::move(a), std::move(b));
  } catch (const std::invalid_argument& err) {
    fail(pointer, err.what());
  }
}

LeaderSignal signal_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) fail(pointer, "expected an object with a terms array");
  check_keys(j, pointer, {"terms"});
  const json& jt = expect(j, pointer, "terms");
  if (!jt.is_array()) fail(pointer + "/terms", "expected an array");
  std::vector<LeaderSignal::Term> terms;
  terms.reserve(jt.size());
  for (std::size_t i = 0; i < jt.size(); ++i) {
    const std::string tp = pointer + "/terms/" + std::to_string(i);
    const json& term = jt.at(i);
    if (!term.is_object()) fail(tp, "expected an object");
    check_keys(term, tp, {"kind", "amplitude", "frequency"});
    const json& kind = expect(term, tp, "kind");
    LeaderSignal::Term t;
    if (kind == "sin") {
      t.kind = LeaderSignal::Waveform::Sin;
    } else if (kind == "cos") {
      t.kind = LeaderSignal::Waveform::Cos;
    } else {
      fail(tp + "/kind", "expected \"sin\" or \"cos\"");
    }
    t.amplitude = number_at(expect(term, tp, "amplitude"), tp + "/amplitude");
    t.frequency = number_at(expect(term, tp, "frequency"), tp + "/frequency");
    terms.push_back(t);
  }
  return LeaderSignal(std::move(terms));
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

json json_number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json json_optional(const std::optional<double>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

}  // namespace

DirectedGraph parse_graph_json(const std::string& text) {
  return graph_from_json(parse_json_text(text, "graph description"), "");
}

DirectedGraph load_graph(const std::string& path) { return parse_graph_json(read_file(path)); }

std::string graph_to_json(const DirectedGraph& g) {
  ordered_json j;
  const int n = g.size();
  j["n"] = n;
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int c = 0; c < n; ++c) row.push_back(g.adjacency(i, c));
    rows.push_back(std::move(row));
  }
  j["A"] = std::move(rows);
  json b = json::array();
  for (int i = 0; i < n; ++i) b.push_back(g.leader_links(i));
  j["b"] = std::move(b);
  return j.dump(2) + "\n";
}

ScenarioConfig parse_scenario_json(const std::string& text, const std::string& base_dir) {
  const json j = parse_json_text(text, "scenario config");
  if (!j.is_object()) fail("", "expected an object");
  check_keys(j, "",
             {"id", "mode", "graph", "graph_file", "gains", "l", "l1", "leader", "disturbances",
              "initial", "input_gain", "dt", "t_end", "tol", "window", "decimate",
              "divergence_threshold"});

  ScenarioConfig c;
  if (j.contains("id")) {
    if (!j.at("id").is_string()) fail("/id", "expected a string");
    c.id = j.at("id").get<std::string>();
  }

  const json& mode = expect(j, "", "mode");
  if (mode == "dfd_r") {
    c.mode = Mode::DfdR;
  } else if (mode == "dfd_a") {
    c.mode = Mode::DfdA;
  } else if (mode == "controller") {
    c.mode = Mode::Controller;
  } else {
    fail("/mode", "expected \"dfd_r\", \"dfd_a\" or \"controller\"");
  }

  if (j.contains("graph") == j.contains("graph_file")) {
    fail("/graph", "exactly one of graph, graph_file is required");
  }
  if (j.contains("graph")) {
    c.graph = graph_from_json(j.at("graph"), "/graph");
  } else {
    const json& gf = j.at("graph_file");
    if (!gf.is_string()) fail("/graph_file", "expected a string");
    std::filesystem::path p = gf.get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    try {
      c.graph = load_graph(p.string());
    } catch (const ConfigError& err) {
      fail("/graph_file", err.what());
    }
  }
  const int n = c.graph.size();

  const json& gains = expect(j, "", "gains");
  if (!gains.is_object()) fail("/gains", "expected an object");
  check_keys(gains, "/gains", {"k1", "k2", "auto", "rho"});
  const bool auto_flag = gains.contains("auto") && gains.at("auto").is_boolean() &&
                         gains.at("auto").get<bool>();
  if (gains.contains("rho")) c.gains.rho = number_at(gains.at("rho"), "/gains/rho");
  if (!(c.gains.rho > 0.0 && c.gains.rho < 1.0)) fail("/gains/rho", "must lie in (0, 1)");
  if (!auto_flag) {
    if (!gains.contains("k1") || !gains.contains("k2")) {
      fail("/gains", "either auto = true or both k1 and k2 are required");
    }
    c.gains.k1 = number_at(gains.at("k1"), "/gains/k1");
    c.gains.k2 = number_at(gains.at("k2"), "/gains/k2");
    if (!(*c.gains.k1 > 0.0)) fail("/gains/k1", "must be positive");
    if (!(*c.gains.k2 > 0.0)) fail("/gains/k2", "must be positive");
  } else if (gains.contains("k1") || gains.contains("k2")) {
    fail("/gains", "auto = true excludes explicit k1/k2");
  }

  if (j.contains("leader")) c.leader = signal_from_json(j.at("leader"), "/leader");

  if (j.contains("disturbances")) {
    const json& jd = j.at("disturbances");
    if (!jd.is_array() || static_cast<int>(jd.size()) != n) {
      std::ostringstream os;
      os << "expected an array of " << n << " signal objects";
      fail("/disturbances", os.str());
    }
    for (std::size_t i = 0; i < jd.size(); ++i) {
      c.disturbances.push_back(
          signal_from_json(jd.at(i), "/disturbances/" + std::to_string(i)));
    }
  }

  // signal bound defaults from the analytic certificates
  if (j.contains("l")) {
    c.l = number_at(j.at("l"), "/l");
    if (c.l < 0.0) fail("/l", "must be nonnegative");
  } else if (c.mode == Mode::Controller) {
    double worst = 0.0;
    for (const auto& d : c.disturbances) worst = std::max(worst, d.rate_bound());
    c.l = worst + c.leader.rate_bound();
  } else {
    c.l = c.leader.acceleration_bound();
  }
  if (j.contains("l1")) {
    c.l1 = number_at(j.at("l1"), "/l1");
    if (c.l1 < 0.0) fail("/l1", "must be nonnegative");
  } else if (c.mode == Mode::DfdR) {
    double worst = 0.0;
    for (const auto& d : c.disturbances) worst = std::max(worst, d.value_bound());
    c.l1 = worst;
  }

  if (j.contains("initial")) {
    const json& init = j.at("initial");
    if (!init.is_object()) fail("/initial", "expected an object");
    check_keys(init, "/initial", {"x", "xdot", "p_hat", "q_hat", "v", "s0"});
    if (init.contains("x")) c.x0 = vector_at(init.at("x"), "/initial/x", n);
    if (init.contains("xdot")) c.xdot0 = vector_at(init.at("xdot"), "/initial/xdot", n);
    if (init.contains("p_hat")) c.p_hat0 = vector_at(init.at("p_hat"), "/initial/p_hat", n);
    if (init.contains("q_hat")) c.q_hat0 = vector_at(init.at("q_hat"), "/initial/q_hat", n);
    if (init.contains("v")) c.v0 = vector_at(init.at("v"), "/initial/v", n);
    if (init.contains("s0")) c.s0_init = number_at(init.at("s0"), "/initial/s0");
  }

  if (j.contains("input_gain")) {
    c.input_gain = vector_at(j.at("input_gain"), "/input_gain", n);
    if (c.input_gain.minCoeff() <= 0.0) fail("/input_gain", "entries must be positive");
  }

  if (j.contains("dt")) c.dt = number_at(j.at("dt"), "/dt");
  if (j.contains("t_end")) c.t_end = number_at(j.at("t_end"), "/t_end");
  if (j.contains("tol")) c.tol = number_at(j.at("tol"), "/tol");
  if (j.contains("window")) c.window = number_at(j.at("window"), "/window");
  if (j.contains("decimate")) {
    const json& d = j.at("decimate");
    if (!d.is_number_integer() || d.get<int>() < 1) fail("/decimate", "expected a positive integer");
    c.decimate = d.get<int>();
  }
  if (j.contains("divergence_threshold")) {
    c.divergence_threshold = number_at(j.at("divergence_threshold"), "/divergence_threshold");
  }
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  const std::string text = read_file(path);
  const std::string dir = std::filesystem::path(path).parent_path().string();
  ScenarioConfig c = parse_scenario_json(text, dir.empty() ? "." : dir);
  if (c.id == "custom") c.id = std::filesystem::path(path).stem().string();
  return c;
}

std::optional<ScenarioConfig> builtin_scenario(const std::string& name) {
  if (name == "vi-a") return scenario_vi_a();
  if (name == "vi-b") return scenario_vi_b();
  if (name == "vi-c") return scenario_vi_c();
  return std::nullopt;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  struct Family {
    const char* name;
    const std::vector<double>* data;
  };
  const Family families[] = {
      {"x", &traj.x},     {"xdot", &traj.xdot}, {"phat", &traj.p_hat}, {"qhat", &traj.q_hat},
      {"y", &traj.y},     {"e", &traj.e},       {"z", &traj.z},        {"u", &traj.u},
  };

  std::string out;
  out.reserve(traj.steps() * 256 + 256);
  out += "t";
  for (const auto& fam : families) {
    if (fam.data->empty()) continue;
    for (int i = 1; i <= traj.n; ++i) {
      out += ',';
      out += fam.name;
      out += '_';
      out += std::to_string(i);
    }
  }
  out += ",V,V1,V2\n";

  for (std::size_t s = 0; s < traj.steps(); ++s) {
    append_number(out, traj.t[s]);
    for (const auto& fam : families) {
      if (fam.data->empty()) continue;
      for (int i = 0; i < traj.n; ++i) {
        out += ',';
        append_number(out, traj.at(*fam.data, s, i));
      }
    }
    out += ',';
    append_number(out, traj.V[s]);
    out += ',';
    append_number(out, traj.V1[s]);
    out += ',';
    append_number(out, traj.V2[s]);
    out += '\n';
  }
  write_text_file(path, out);
}

RunSummary summarize(const ScenarioConfig& config, const PreparedScenario& prep,
                     const Trajectory& traj, const std::string& csv_path,
                     const std::string& summary_path) {
  RunSummary s;
  s.scenario = config.id;
  s.mode = traj.mode;
  s.n = traj.n;
  s.dt = traj.dt;
  s.t_end = config.t_end;
  s.decimate = traj.decimate;
  s.tol = config.tol;
  s.window = config.window;
  s.gains_auto = config.gains.auto_select();
  s.gains = prep.gains;
  s.gain_check = prep.gain_check;
  s.lambda1 = prep.cert.lambda1;
  s.w = prep.cert.w;

  const double horizon = traj.t.empty() ? 0.0 : traj.t.back();
  const double window = std::min(config.window, horizon);
  s.conv_position = convergence_time(traj, ErrorChannel::Position, config.tol, window);
  s.conv_velocity = convergence_time(traj, ErrorChannel::Velocity, config.tol, window);
  s.conv_both = convergence_time(traj, ErrorChannel::Both, config.tol, window);

  s.v0 = traj.lyap_v.empty() ? 0.0 : traj.lyap_v.front();
  if (!prep.gains.degenerate()) {
    s.settling_bound = settling_time_bound(s.v0, prep.gains.k, prep.gains.gamma2);
  }
  if (traj.lyap_t.size() >= 3 && !prep.gains.degenerate()) {
    s.lyapunov = certify_decrease(traj, prep.gains);
  }
  s.disturbance_bound_violations = traj.disturbance_bound_violations;
  s.diverged_at = traj.diverged_at;
  s.csv_path = csv_path;
  s.summary_path = summary_path;
  return s;
}

std::string summary_to_json(const RunSummary& s) {
  ordered_json j;
  j["scenario"] = s.scenario;
  j["mode"] = to_string(s.mode);
  j["n"] = s.n;

  ordered_json run;
  run["dt"] = s.dt;
  run["t_end"] = s.t_end;
  run["decimate"] = s.decimate;
  run["diverged"] = s.diverged_at.has_value();
  run["diverged_at"] = json_optional(s.diverged_at);
  run["disturbance_bound_violations"] = s.disturbance_bound_violations;
  j["run"] = std::move(run);

  ordered_json graph;
  graph["lambda1"] = s.lambda1;
  ordered_json warr = ordered_json::array();
  for (Eigen::Index i = 0; i < s.w.size(); ++i) warr.push_back(s.w(i));
  graph["w"] = std::move(warr);
  j["graph"] = std::move(graph);

  ordered_json gains;
  gains["auto"] = s.gains_auto;
  gains["k1"] = s.gains.k1;
  gains["k2"] = s.gains.k2;
  gains["rho"] = s.gains.rho;
  gains["l"] = s.gains.l;
  gains["l1"] = s.gains.l1;
  gains["l2"] = s.gains.l2;
  gains["gamma0"] = s.gains.gamma0;
  gains["gamma1"] = s.gains.gamma1;
  gains["gamma2"] = s.gains.gamma2;
  gains["k"] = s.gains.k;
  j["gains"] = std::move(gains);

  if (s.gain_check.has_value()) {
    ordered_json check;
    check["k1_required"] = s.gain_check->k1_required;
    check["k2_required"] = s.gain_check->k2_required;
    check["k1_margin"] = s.gain_check->k1_margin;
    check["k2_margin"] = s.gain_check->k2_margin;
    check["certified"] = s.gain_check->certified();
    j["gain_check"] = std::move(check);
  } else {
    j["gain_check"] = nullptr;
  }

  ordered_json conv;
  conv["tol"] = s.tol;
  conv["window"] = s.window;
  conv["position"] = json_optional(s.conv_position);
  conv["velocity"] = json_optional(s.conv_velocity);
  conv["both"] = json_optional(s.conv_both);
  j["convergence"] = std::move(conv);

  ordered_json settling;
  settling["v0"] = s.v0;
  settling["bound"] = json_optional(s.settling_bound);
  settling["observed"] = json_optional(s.conv_both);
  if (s.settling_bound.has_value() && s.conv_both.has_value()) {
    settling["within_bound"] = *s.conv_both <= *s.settling_bound;
  } else {
    settling["within_bound"] = nullptr;
  }
  j["settling"] = std::move(settling);

  ordered_json lyap;
  lyap["violations"] = s.lyapunov.violations;
  lyap["worst_margin"] = json_number_or_null(s.lyapunov.worst_margin);
  lyap["samples_checked"] = s.lyapunov.samples_checked;
  lyap["v_floor"] = s.lyapunov.v_floor;
  lyap["slack"] = s.lyapunov.slack;
  j["lyapunov"] = std::move(lyap);

  ordered_json artifacts;
  artifacts["csv"] = s.csv_path;
  artifacts["summary"] = s.summary_path;
  j["artifacts"] = std::move(artifacts);

  return j.dump(2) + "\n";
}

void write_summary_json(const RunSummary& summary, const std::string& path) {
  write_text_file(path, summary_to_json(summary));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace dfd
