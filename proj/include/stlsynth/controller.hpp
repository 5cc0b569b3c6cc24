#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stlsynth/cbf.hpp"
#include "stlsynth/monitor.hpp"
#include "stlsynth/qp.hpp"
#include "stlsynth/sequencer.hpp"
#include "stlsynth/stl_ast.hpp"

namespace stlsynth::ctrl {

struct ScenarioConfig {
  std::string name;
  std::string spec_text;
  Eigen::VectorXd x0;
  double u_max = 1.0;
  double dt = 0.05;
  double beta = 30.0;
  double alpha_gain = 1.0;   // class-K slope: alpha(h) = alpha_gain * h
  int facets = 32;           // input-ball polygon facets in 2-D
  bool relax = false;        // allow a penalized slack on the secondary row
  double relax_penalty = 1e3;
  int pin_alternative = -1;  // force one disjunction alternative
  unsigned seed = 0;         // consumed by randomized test drivers only
};

struct StepRecord {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double h = std::numeric_limits<double>::quiet_NaN();
  double h_hold = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
  int active_subtask = -1;
  int critical_term = -1;
  std::string qp_status;  // optimal | relaxed
  double slack_used = 0.0;
};

struct SequenceEvent {
  double t = 0.0;
  std::string kind;  // initial|achievement|reset|resequence|removal|
                     // hold_start|hold_end|forced_order
  int subtask_id = -1;
  std::vector<int> order_ids;
};

struct RunReport {
  std::string name;
  bool satisfied = false;
  double robustness = 0.0;
  double cost = 0.0;
  double horizon = 0.0;
  int steps = 0;
  double min_h = std::numeric_limits<double>::infinity();
  double min_b = std::numeric_limits<double>::infinity();
  int resets = 0;
  int resequence_events = 0;
  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
  double slack_used_total = 0.0;
  std::map<std::string, int> qp_status_counts;
  std::vector<int> initial_order;
  int alternative = -1;
  std::vector<SequenceEvent> events;
  std::vector<StepRecord> records;
  stl::Trajectory trajectory;
};

// Initial state violates a barrier certificate before the first step.
class InitiallyInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The step QP admitted no input (after the relax attempt, if enabled).
class MidRunInfeasible : public std::runtime_error {
 public:
  MidRunInfeasible(const std::string& msg, double when)
      : std::runtime_error(msg), t(when) {}
  double t = 0.0;
};

class Controller {
 public:
  explicit Controller(const ScenarioConfig& cfg);

  bool done() const;
  void step();      // one control period: events, QP, Euler update
  RunReport run();  // steps to the horizon and runs the exact monitor

  const stl::SpecTree& spec() const { return spec_; }
  double horizon() const { return horizon_; }
  const std::vector<seq::Term>& pending() const { return pending_; }
  const RunReport& report() const { return report_; }

 private:
  struct Hold {
    int subtask_id = -1;
    stl::InnerFormula inner;
    double end_abs = 0.0;  // +inf for an until guard, retired on achievement
    bool until_guard = false;
    std::optional<geom::TargetSet> set;  // dwell region, empty for a guard
  };
  struct LimboTerm {
    seq::Term term;
    bool inside = true;
  };

  stl::InnerFormula pinned_inner(const seq::Term& t) const;
  bool achieved(const seq::Term& t) const;
  bool inside_window(double t, double lo, double hi) const;
  void process_events();
  void log(const std::string& kind, int subtask, bool with_order = false);
  std::vector<int> pending_ids() const;
  void assemble_rows(std::vector<qp::Row>& rows, StepRecord& rec);
  Eigen::VectorXd solve_input(const std::vector<qp::Row>& rows,
                              StepRecord& rec);
  void verify_initial_state();

  ScenarioConfig cfg_;
  stl::SpecTree spec_;
  double horizon_ = 0.0;
  // Planning speed: the least support of the input polytope over all unit
  // directions. Budgets written against it stay deliverable everywhere.
  double u_eff_ = 1.0;
  double gamma_ = 1.0;
  int n_ = 1;
  double t_ = 0.0;
  long step_count_ = 0;
  Eigen::VectorXd x_;
  std::vector<seq::Term> pending_;
  std::vector<LimboTerm> limbo_;
  std::vector<Hold> holds_;
  std::vector<int> warm_active_;
  int idx_b_ = -1;  // row index of the travel chain, -1 when absent
  double solve_ms_total_ = 0.0;
  RunReport report_;
};

RunReport run_scenario(const ScenarioConfig& cfg);

}  // namespace stlsynth::ctrl
