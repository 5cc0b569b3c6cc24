#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stlsynth/controller.hpp"
#include "stlsynth/monitor.hpp"
#include "stlsynth/parser.hpp"
#include "stlsynth/scenario.hpp"
#include "stlsynth/sequencer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace stlsynth;

struct Overrides {
  CLI::Option* dt = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* alpha_gain = nullptr;
  CLI::Option* facets = nullptr;
  CLI::Option* relax = nullptr;
  CLI::Option* seed = nullptr;
  double dt_v = 0.0, beta_v = 0.0, alpha_v = 0.0;
  int facets_v = 0;
  unsigned seed_v = 0;

  void attach(CLI::App* cmd) {
    dt = cmd->add_option("--dt", dt_v, "control period override");
    beta = cmd->add_option("--beta", beta_v, "smooth min/max sharpness override");
    alpha_gain =
        cmd->add_option("--alpha-gain", alpha_v, "barrier class-K slope override");
    facets = cmd->add_option("--facets", facets_v, "input polygon facet count");
    relax = cmd->add_flag("--relax", "allow a penalized slack on the chain row");
    seed = cmd->add_option("--seed", seed_v, "seed forwarded to the report");
  }
  void apply(ctrl::ScenarioConfig& cfg) const {
    if (dt->count()) cfg.dt = dt_v;
    if (beta->count()) cfg.beta = beta_v;
    if (alpha_gain->count()) cfg.alpha_gain = alpha_v;
    if (facets->count()) cfg.facets = facets_v;
    if (relax->count()) cfg.relax = true;
    if (seed->count()) cfg.seed = seed_v;
  }
};

// Exit codes shared by run and sequences: 2 malformed input, 3 no feasible
// plan from the start, 4 lost feasibility mid-run.
int code_for(const std::exception& e) {
  if (dynamic_cast<const ctrl::MidRunInfeasible*>(&e)) return 4;
  if (dynamic_cast<const seq::NoFeasibleSequence*>(&e)) return 3;
  if (dynamic_cast<const ctrl::InitiallyInfeasible*>(&e)) return 3;
  return 2;
}

void print_summary(const ctrl::RunReport& r) {
  std::printf("scenario: %s\n", r.name.c_str());
  std::printf("satisfied: %s\n", r.satisfied ? "yes" : "no");
  std::printf("robustness: %.6f\n", r.robustness);
  std::printf("cost: %.4f\n", r.cost);
  std::printf("steps: %d  horizon: %.2f s\n", r.steps, r.horizon);
  std::printf("solve time: mean %.4f ms, max %.4f ms\n", r.mean_solve_ms,
              r.max_solve_ms);
  std::printf("min primary barrier: %.6f  min chain barrier: %.6f\n", r.min_h,
              r.min_b);
  std::printf("resets: %d  resequences: %d\n", r.resets, r.resequence_events);
  for (const auto& ev : r.events) {
    std::printf("  t=%7.2f  %-12s", ev.t, ev.kind.c_str());
    if (ev.subtask_id >= 0) std::printf("  subtask %d", ev.subtask_id);
    if (!ev.order_ids.empty()) {
      std::printf("  order");
      for (int id : ev.order_ids) std::printf(" %d", id);
    }
    std::printf("\n");
  }
}

int cmd_run(const std::string& path, std::string out, std::string report,
            const Overrides& ov) {
  ctrl::ScenarioConfig cfg;
  try {
    cfg = ctrl::load_scenario(path);
  } catch (const stl::ParseError& e) {
    std::fprintf(stderr, "%s: spec %s\n", path.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
    return 2;
  }
  ov.apply(cfg);

  const std::string stem = fs::path(path).stem().string();
  if (out.empty()) out = stem + ".csv";
  if (report.empty()) report = stem + ".report.json";

  try {
    ctrl::RunReport rep = ctrl::run_scenario(cfg);
    ctrl::write_csv(out, rep);
    ctrl::write_report_json(report, rep);
    print_summary(rep);
    std::printf("trajectory: %s\nreport: %s\n", out.c_str(), report.c_str());
    return rep.satisfied ? 0 : 1;
  } catch (const ctrl::MidRunInfeasible& e) {
    std::fprintf(stderr, "infeasible at t=%.3f: %s\n", e.t, e.what());
    return 4;
  } catch (const stl::ParseError& e) {
    std::fprintf(stderr, "%s: spec %s\n", path.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return code_for(e);
  }
}

// The spec argument is a scenario JSON path, a text file of STL, or the
// STL text itself; tried in that order.
std::string resolve_spec_text(const std::string& arg) {
  std::error_code ec;
  if (fs::exists(arg, ec)) {
    if (fs::path(arg).extension() == ".json")
      return ctrl::load_scenario(arg).spec_text;
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return arg;
}

int cmd_check(const std::string& traj_path, const std::string& spec_arg) {
  try {
    const std::string spec_text = resolve_spec_text(spec_arg);
    const stl::SpecTree spec = stl::parse_spec(spec_text);
    const stl::Trajectory traj = ctrl::read_trajectory_csv(traj_path);
    const stl::MonitorResult res = stl::monitor(traj, spec);
    std::printf("robustness: %.6f\n", res.robustness);
    std::printf("satisfied: %s\n", res.satisfied ? "yes" : "no");
    return res.satisfied ? 0 : 1;
  } catch (const stl::ParseError& e) {
    std::fprintf(stderr, "spec %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
}

const char* kind_name(stl::OpKind k) {
  switch (k) {
    case stl::OpKind::Finally: return "F";
    case stl::OpKind::Globally: return "G";
    case stl::OpKind::FinallyGlobally: return "FG";
    case stl::OpKind::GloballyFinally: return "GF";
    case stl::OpKind::Until: return "U";
  }
  return "?";
}

void print_order_table(const std::vector<seq::Term>& order,
                       const seq::Feasibility& fb, double t) {
  std::printf("    %-4s %-4s %9s %9s %9s\n", "id", "kind", "required",
              "remaining", "slack");
  for (size_t j = 0; j < order.size(); ++j) {
    const seq::Term& tm = order[j];
    std::printf("    %-4d %-4s %9.3f %9.3f %9.3f\n", tm.subtask_id,
                kind_name(tm.kind), fb.arrival[j] - t, tm.deadline_abs - t,
                fb.slack[j]);
  }
}

int cmd_sequences(const std::string& path, const Overrides& ov) {
  ctrl::ScenarioConfig cfg;
  try {
    cfg = ctrl::load_scenario(path);
    ov.apply(cfg);
    const stl::SpecTree spec = stl::parse_spec(cfg.spec_text);
    const auto alts = seq::enumerate_alternatives(spec, cfg.u_max);

    bool any_feasible = false;
    for (size_t i = 0; i < alts.size(); ++i) {
      std::printf("alternative %zu:\n", i);
      std::vector<seq::Term> order;
      try {
        order = seq::select_terms(alts[i].terms, cfg.x0, 0.0, cfg.u_max).order;
        any_feasible = true;
      } catch (const seq::NoFeasibleSequence& e) {
        for (int id : e.best_ids)
          for (const auto& tm : alts[i].terms)
            if (tm.subtask_id == id) order.push_back(tm);
      }
      const seq::Feasibility fb = seq::feasibility(order, cfg.x0, 0.0, cfg.u_max);
      print_order_table(order, fb, 0.0);
      if (fb.feasible)
        std::printf("    feasible, slack sum %.3f\n", fb.slack_sum);
      else
        std::printf("    infeasible, deficit %.3f\n", fb.deficit);
    }
    if (!any_feasible) {
      std::fprintf(stderr, "no alternative admits a feasible order\n");
      return 3;
    }

    const seq::Selection sel =
        seq::select(alts, cfg.x0, 0.0, cfg.u_max, true, cfg.pin_alternative);
    std::printf("selected alternative %d, order:", sel.alternative);
    for (const auto& tm : sel.order) std::printf(" %d", tm.subtask_id);
    std::printf("\n");
    for (const auto& tm : sel.order)
      if (tm.kind == stl::OpKind::GloballyFinally)
        std::printf("  subtask %d resequences at runtime\n", tm.subtask_id);
    return 0;
  } catch (const stl::ParseError& e) {
    std::fprintf(stderr, "%s: spec %s\n", path.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return code_for(e);
  }
}

int cmd_bench(const std::string& dir, const Overrides& ov) {
  const std::vector<std::string> names = {"conflict", "recurrence",
                                          "disjunction", "case_study"};
  std::printf("%-12s %-9s %10s %10s %10s\n", "scenario", "satisfied", "cost",
              "robust", "mean ms");
  bool all_ok = true;
  for (const auto& name : names) {
    const std::string path = dir + "/" + name + ".json";
    try {
      ctrl::ScenarioConfig cfg = ctrl::load_scenario(path);
      ov.apply(cfg);
      const ctrl::RunReport rep = ctrl::run_scenario(cfg);
      std::printf("%-12s %-9s %10.4f %10.4f %10.4f\n", name.c_str(),
                  rep.satisfied ? "yes" : "no", rep.cost, rep.robustness,
                  rep.mean_solve_ms);
      all_ok = all_ok && rep.satisfied;
    } catch (const std::exception& e) {
      std::printf("%-12s %-9s %s\n", name.c_str(), "error", e.what());
      all_ok = false;
    }
  }
  std::printf("reference case-study cost: dual CBF 20.29, MIQP 17.03, NLP 14.65\n");
  std::printf("reference mean solve time: 0.013 ms\n");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STL control synthesis: sequence, steer, verify"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, report_path, traj_path, spec_arg;
  std::string bench_dir = "scenarios";

  CLI::App* run = app.add_subcommand("run", "synthesize a trajectory");
  run->add_option("scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--out", out_path, "trajectory CSV path");
  run->add_option("--report", report_path, "report JSON path");
  Overrides run_ov;
  run_ov.attach(run);

  CLI::App* check = app.add_subcommand("check", "monitor a trajectory CSV");
  check->add_option("trajectory", traj_path, "trajectory CSV")->required();
  check->add_option("spec", spec_arg, "scenario JSON, spec file, or spec text")
      ->required();

  CLI::App* sequences =
      app.add_subcommand("sequences", "list per-alternative order feasibility");
  sequences->add_option("scenario", scenario_path, "scenario JSON")->required();
  Overrides seq_ov;
  seq_ov.attach(sequences);

  CLI::App* bench = app.add_subcommand("bench", "run the bundled scenarios");
  bench->add_option("dir", bench_dir, "scenario directory");
  Overrides bench_ov;
  bench_ov.attach(bench);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(scenario_path, out_path, report_path, run_ov);
  if (check->parsed()) return cmd_check(traj_path, spec_arg);
  if (sequences->parsed()) return cmd_sequences(scenario_path, seq_ov);
  return cmd_bench(bench_dir, bench_ov);
}
