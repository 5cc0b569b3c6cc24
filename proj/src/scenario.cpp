#include "stlsynth/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stlsynth/stl_ast.hpp"

namespace stlsynth::ctrl {
namespace {

using nlohmann::json;

std::string field(double v) { return std::isnan(v) ? "" : stl::dtos(v); }

double parse_field(const std::string& s) {
  return s.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::stod(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::runtime_error("scenario must be an object");
  static const std::set<std::string> known = {
      "name", "spec",  "x0",    "u_max",         "dt",
      "beta", "alpha_gain", "facets", "relax", "relax_penalty",
      "pin_alternative", "seed"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw std::runtime_error("unknown scenario key: " + item.key());

  ScenarioConfig cfg;
  cfg.name = j.value("name", std::string("scenario"));
  if (!j.contains("spec") || !j["spec"].is_string())
    throw std::runtime_error("scenario needs a \"spec\" string");
  cfg.spec_text = j["spec"].get<std::string>();
  if (!j.contains("x0") || !j["x0"].is_array() || j["x0"].empty())
    throw std::runtime_error("scenario needs an \"x0\" array");
  cfg.x0.resize(static_cast<Eigen::Index>(j["x0"].size()));
  for (Eigen::Index i = 0; i < cfg.x0.size(); ++i)
    cfg.x0(i) = j["x0"][static_cast<std::size_t>(i)].get<double>();
  cfg.u_max = j.value("u_max", cfg.u_max);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.alpha_gain = j.value("alpha_gain", cfg.alpha_gain);
  cfg.facets = j.value("facets", cfg.facets);
  cfg.relax = j.value("relax", cfg.relax);
  cfg.relax_penalty = j.value("relax_penalty", cfg.relax_penalty);
  cfg.pin_alternative = j.value("pin_alternative", cfg.pin_alternative);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void write_csv(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
  const Eigen::Index n =
      report.records.empty() ? 0 : report.records.front().x.size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << (i + 1);
  for (Eigen::Index i = 0; i < n; ++i) out << ",u" << (i + 1);
  out << ",h,h_hold,b,active_subtask,critical_term,qp_status,slack\n";
  for (const auto& rec : report.records) {
    out << stl::dtos(rec.t);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << stl::dtos(rec.x(i));
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << stl::dtos(rec.u(i));
    out << ',' << field(rec.h) << ',' << field(rec.h_hold) << ','
        << field(rec.b) << ',' << rec.active_subtask << ','
        << rec.critical_term << ',' << rec.qp_status << ','
        << stl::dtos(rec.slack_used) << '\n';
  }
}

std::string report_to_json(const RunReport& report) {
  json j;
  j["name"] = report.name;
  j["satisfied"] = report.satisfied;
  j["robustness"] = std::isinf(report.robustness) ? 1e300 : report.robustness;
  j["cost"] = report.cost;
  j["horizon"] = report.horizon;
  j["steps"] = report.steps;
  j["min_h"] = std::isinf(report.min_h) ? 1e300 : report.min_h;
  j["min_b"] = std::isinf(report.min_b) ? 1e300 : report.min_b;
  j["resets"] = report.resets;
  j["resequence_events"] = report.resequence_events;
  j["mean_solve_ms"] = report.mean_solve_ms;
  j["max_solve_ms"] = report.max_solve_ms;
  j["slack_used_total"] = report.slack_used_total;
  j["qp_status_counts"] = report.qp_status_counts;
  j["initial_order"] = report.initial_order;
  j["alternative"] = report.alternative;
  j["events"] = json::array();
  for (const auto& ev : report.events) {
    json e;
    e["t"] = ev.t;
    e["kind"] = ev.kind;
    e["subtask_id"] = ev.subtask_id;
    if (!ev.order_ids.empty()) e["order"] = ev.order_ids;
    j["events"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file: " + path);
  out << report_to_json(report);
}

stl::Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty trajectory file: " + path);
  const auto header = split_csv_line(line);
  int n = 0;
  for (const auto& col : header)
    if (col.size() >= 2 && col[0] == 'x' &&
        col.find_first_not_of("0123456789", 1) == std::string::npos)
      ++n;
  if (header.empty() || header[0] != "t" || n == 0)
    throw std::runtime_error("trajectory file lacks t/x columns: " + path);

  stl::Trajectory traj;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < static_cast<std::size_t>(1 + n))
      throw std::runtime_error("short trajectory row in " + path);
    stl::Sample s;
    s.t = parse_field(cells[0]);
    s.x.resize(n);
    for (int i = 0; i < n; ++i)
      s.x(i) = parse_field(cells[static_cast<std::size_t>(1 + i)]);
    times.push_back(s.t);
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.size() < 2)
    throw std::runtime_error("trajectory needs at least two rows: " + path);
  traj.dt = times[1] - times[0];
  if (traj.dt <= 0.0)
    throw std::runtime_error("non-increasing time column in " + path);
  return traj;
}

}  // namespace stlsynth::ctrl
