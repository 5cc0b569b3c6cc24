#include "stlsynth/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "stlsynth/parser.hpp"

namespace stlsynth::ctrl {
namespace {

constexpr double kTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

double nan_val() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

Controller::Controller(const ScenarioConfig& cfg) : cfg_(cfg) {
  if (cfg_.dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (cfg_.u_max <= 0.0) throw std::invalid_argument("u_max must be positive");
  if (cfg_.beta <= 0.0) throw std::invalid_argument("beta must be positive");
  if (cfg_.alpha_gain <= 0.0)
    throw std::invalid_argument("alpha_gain must be positive");
  spec_ = stl::parse_spec(cfg_.spec_text);
  stl::validate_spec(spec_);
  if (cfg_.x0.size() != spec_.state_dim)
    throw std::invalid_argument("x0 dimension does not match the spec");
  if (spec_.state_dim == 2 && cfg_.facets < 8)
    throw std::invalid_argument("need at least 8 input facets in 2-D");
  n_ = spec_.state_dim;
  x_ = cfg_.x0;
  if (n_ == 1)
    u_eff_ = cfg_.u_max;
  else if (n_ == 2)
    u_eff_ = cfg_.u_max * std::cos(M_PI / cfg_.facets);
  else
    u_eff_ = cfg_.u_max / std::sqrt(static_cast<double>(n_));
  gamma_ = cfg_.alpha_gain;
  horizon_ = stl::horizon(spec_);
  report_.name = cfg_.name;
  report_.horizon = horizon_;

  if (!spec_.groups.empty()) {
    const auto alts = seq::enumerate_alternatives(spec_, u_eff_);
    const auto sel =
        seq::select(alts, x_, 0.0, u_eff_, true, cfg_.pin_alternative);
    pending_ = sel.order;
    report_.alternative = sel.alternative;
    report_.initial_order = pending_ids();
    log("initial", -1, true);
    // An until term's left side must hold from time zero until the right
    // side is achieved; the guard enters frozen at one step of margin.
    for (const auto& term : pending_) {
      const stl::Subtask* st = nullptr;
      for (const auto& g : spec_.groups)
        for (const auto& m : g.members)
          if (m.id == term.subtask_id) st = &m;
      if (st && st->op.kind == stl::OpKind::Until && st->until_left)
        holds_.push_back(
            {term.subtask_id, *st->until_left, kInf, true, std::nullopt});
    }
  }
  process_events();
  verify_initial_state();
}

std::vector<int> Controller::pending_ids() const {
  std::vector<int> ids;
  for (const auto& t : pending_) ids.push_back(t.subtask_id);
  return ids;
}

void Controller::log(const std::string& kind, int subtask, bool with_order) {
  SequenceEvent ev;
  ev.t = t_;
  ev.kind = kind;
  ev.subtask_id = subtask;
  if (with_order) ev.order_ids = pending_ids();
  report_.events.push_back(std::move(ev));
}

stl::InnerFormula Controller::pinned_inner(const seq::Term& t) const {
  const auto& member = spec_.groups[static_cast<std::size_t>(t.group)]
                           .members[static_cast<std::size_t>(t.member)];
  stl::InnerFormula f;
  f.clauses.push_back(
      member.inner.clauses[static_cast<std::size_t>(t.clause)]);
  return f;
}

bool Controller::achieved(const seq::Term& t) const {
  const auto& member = spec_.groups[static_cast<std::size_t>(t.group)]
                           .members[static_cast<std::size_t>(t.member)];
  return stl::exact_robustness(x_, member.inner) >= 0.0;
}

bool Controller::inside_window(double t, double lo, double hi) const {
  const double slop = 0.5 * cfg_.dt + kTol;
  return t >= lo - slop && t <= hi + slop;
}

void Controller::process_events() {
  const double slop = 0.5 * cfg_.dt + kTol;
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 64) {
    changed = false;

    for (std::size_t i = 0; i < holds_.size(); ++i) {
      if (!holds_[i].until_guard && t_ >= holds_[i].end_abs - kTol) {
        log("hold_end", holds_[i].subtask_id);
        holds_.erase(holds_.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
    if (changed) continue;

    // Recurrence terms off on an excursion: refresh while achieved, retire
    // in the final window, rejoin the order once the excursion ends.
    for (std::size_t i = 0; i < limbo_.size(); ++i) {
      LimboTerm& lt = limbo_[i];
      const stl::Subtask* st = nullptr;
      for (const auto& g : spec_.groups)
        for (const auto& m : g.members)
          if (m.id == lt.term.subtask_id) st = &m;
      const auto& op = st->op;
      const bool in = achieved(lt.term);
      if (in) {
        lt.inside = true;
        if (inside_window(t_, op.b + op.c, op.b + op.d)) {
          log("removal", lt.term.subtask_id);
          limbo_.erase(limbo_.begin() + static_cast<std::ptrdiff_t>(i));
          changed = true;
          break;
        }
        if (inside_window(t_, op.a + op.c, op.b)) {
          lt.term.deadline_abs = t_ + op.d;
          ++report_.resets;
        }
      } else if (lt.inside) {
        seq::Term back = lt.term;
        limbo_.erase(limbo_.begin() + static_cast<std::ptrdiff_t>(i));
        std::vector<seq::Term> all = pending_;
        all.push_back(back);
        try {
          const auto sel =
              seq::select_terms(all, x_, t_, u_eff_, true);
          pending_ = sel.order;
          ++report_.resequence_events;
          log("resequence", back.subtask_id, true);
        } catch (const seq::NoFeasibleSequence& e) {
          // Best-effort: adopt the least-deficit order and let the
          // relaxed secondary row absorb what it can.
          std::vector<seq::Term> forced;
          for (int id : e.best_ids)
            for (const auto& term : all)
              if (term.subtask_id == id) forced.push_back(term);
          pending_ = std::move(forced);
          ++report_.resequence_events;
          log("forced_order", back.subtask_id, true);
        }
        changed = true;
        break;
      }
    }
    if (changed) continue;

    for (std::size_t i = 0; i < pending_.size(); ++i) {
      const seq::Term& term = pending_[i];
      const stl::Subtask* st = nullptr;
      for (const auto& g : spec_.groups)
        for (const auto& m : g.members)
          if (m.id == term.subtask_id) st = &m;
      const auto& op = st->op;
      const bool in = achieved(term);

      if (term.kind == stl::OpKind::Finally ||
          term.kind == stl::OpKind::Until) {
        if (in && inside_window(t_, op.a, op.b)) {
          log("achievement", term.subtask_id);
          if (term.kind == stl::OpKind::Until) {
            holds_.erase(
                std::remove_if(holds_.begin(), holds_.end(),
                               [&](const Hold& h) {
                                 return h.until_guard &&
                                        h.subtask_id == term.subtask_id;
                               }),
                holds_.end());
          }
          pending_ = seq::remove_completed(pending_, term.subtask_id);
          changed = true;
          break;
        }
      } else if (term.kind == stl::OpKind::GloballyFinally) {
        if (in && inside_window(t_, op.b + op.c, op.b + op.d)) {
          log("removal", term.subtask_id);
          pending_ = seq::remove_completed(pending_, term.subtask_id);
          changed = true;
          break;
        }
        if (in && inside_window(t_, op.a + op.c, op.b)) {
          seq::Term moved = term;
          moved.deadline_abs = t_ + op.d;
          ++report_.resets;
          log("reset", term.subtask_id);
          pending_ = seq::remove_completed(pending_, term.subtask_id);
          limbo_.push_back({std::move(moved), true});
          changed = true;
          break;
        }
      } else if (i == 0) {
        // Globally-style dwells start only at the head of the order.
        const double start_hi = (term.kind == stl::OpKind::Globally)
                                    ? op.a
                                    : op.b + op.c;
        if (in && t_ >= term.start_abs - slop && t_ <= start_hi + slop) {
          const double end = (term.kind == stl::OpKind::Globally)
                                 ? op.b
                                 : t_ + term.hold;
          holds_.push_back({term.subtask_id, pinned_inner(term), end,
                            false, term.target});
          log("hold_start", term.subtask_id);
          pending_ = seq::remove_completed(pending_, term.subtask_id);
          changed = true;
          break;
        }
      }
    }
  }
}

void Controller::assemble_rows(std::vector<qp::Row>& rows, StepRecord& rec) {
  rows.clear();
  idx_b_ = -1;
  rec.t = t_;
  rec.x = x_;
  rec.h = nan_val();
  rec.h_hold = nan_val();
  rec.b = nan_val();
  rec.active_subtask = pending_.empty() ? -1 : pending_[0].subtask_id;
  rec.critical_term = -1;

  auto push_primary = [&](const cbf::Evaluation& ev, double tighten = 0.0,
                          double gain = 0.0) {
    qp::Row row;
    row.a = ev.grad_x;
    row.b = -ev.dt_term - (gain > 0.0 ? gain : gamma_) * ev.value + tighten;
    rows.push_back(std::move(row));
  };

  // Containment rows get the fastest stable discrete-time gain. A schedule
  // gain would cap approach toward the boundary at gamma times the margin,
  // an exponential crawl that starves travel rows steering near it; the deep
  // gain permits full speed down to a one-step shell while still keeping
  // each step inside.
  const double gain_hold = 0.5 / cfg_.dt;

  auto hold_tighten = [&](const Hold& hold) {
    // Euler steps erode a curved boundary by dt^2 u^2 / 2r each step;
    // tightening by its rate plus the frozen-slack rate keeps the exact
    // dwell robustness nonnegative instead of decaying through zero.
    double tighten = gain_hold * cfg_.dt;
    if (hold.set)
      if (const auto* disc = std::get_if<geom::Disc>(&*hold.set))
        tighten += cfg_.dt * cfg_.u_max * cfg_.u_max / (2.0 * disc->radius);
    return tighten;
  };

  // A dwell pins the state until its end, minus the time its own region
  // grants for crossing toward the next target. Later travel budgets must
  // subtract that remainder; the selection arithmetic guarantees they stay
  // nonnegative with it.
  double pin_rem = 0.0;
  const Hold* pin_hold = nullptr;
  for (const auto& hold : holds_)
    if (!hold.until_guard && hold.set) {
      pin_rem = std::max(
          pin_rem, (hold.end_abs - t_) - geom::diameter(*hold.set) / u_eff_);
      if (!pin_hold || hold.end_abs > pin_hold->end_abs) pin_hold = &hold;
    }
  pin_rem = std::max(pin_rem, 0.0);

  auto travel_eval = [&](const stl::InnerFormula& inner, double deadline) {
    cbf::Deadline dl{deadline, 0.0, false, 0.0};
    auto ev = cbf::primary_value(x_, t_, inner, dl, u_eff_, cfg_.beta);
    if (pin_rem > 0.0) {
      ev.value -= pin_rem;
      ev.dt_term += 1.0;
    }
    return ev;
  };

  if (!pending_.empty()) {
    const seq::Term& head = pending_[0];
    if (pin_hold) {
      // A plain travel row demands free-space approach rates the dwell
      // cannot deliver near its far side. While the dwell pins the state,
      // plan the approach through its interior: steer to the point nearest
      // the next target, hold there behind the tightened equilibrium shell,
      // and dash the remaining gap after release. Both budgets below are
      // the dwell arithmetic the selection already proved nonnegative.
      const Eigen::VectorXd exit =
          geom::nearest_point_to(*pin_hold->set, head.target);
      const double standoff =
          hold_tighten(*pin_hold) / gain_hold + cfg_.dt * cfg_.u_max;
      const double gap = std::max(0.0, (x_ - exit).norm() - standoff);
      const double rem = pin_hold->end_abs - t_;
      const bool driving = gap / u_eff_ > rem;
      const Eigen::VectorXd toward =
          gap > 0.0 ? Eigen::VectorXd((exit - x_).normalized() / u_eff_)
                    : Eigen::VectorXd::Zero(n_);

      cbf::Evaluation ev;
      ev.value = (head.deadline_abs - t_) -
                 geom::point_set_distance(exit, head.target) / u_eff_ -
                 std::max(rem, gap / u_eff_);
      ev.dt_term = driving ? -1.0 : 0.0;
      ev.grad_x = driving ? toward : Eigen::VectorXd::Zero(n_);
      rec.h = ev.value;
      report_.min_h = std::min(report_.min_h, ev.value);
      push_primary(ev);

      // Only while the gap is open: parked at the exit the row would pair a
      // zero gradient with a running clock and turn infeasible on its own.
      if (gap > 0.0) {
        cbf::Evaluation steer;
        steer.value = rem - gap / u_eff_;
        steer.dt_term = -1.0;
        steer.grad_x = toward;
        report_.min_h = std::min(report_.min_h, steer.value);
        push_primary(steer);
      }
    } else {
      const auto ev = travel_eval(pinned_inner(head), head.deadline_abs);
      rec.h = ev.value;
      report_.min_h = std::min(report_.min_h, ev.value);
      push_primary(ev);
    }
  }

  for (const auto& hold : holds_) {
    cbf::Deadline dl{0.0, 0.0, true, cfg_.dt};
    const auto ev =
        cbf::primary_value(x_, t_, hold.inner, dl, u_eff_, cfg_.beta);
    rec.h_hold = std::isnan(rec.h_hold) ? ev.value
                                        : std::min(rec.h_hold, ev.value);
    report_.min_h = std::min(report_.min_h, ev.value);
    push_primary(ev, hold.until_guard ? 0.0 : hold_tighten(hold), gain_hold);
  }

  for (const auto& lt : limbo_) {
    const auto ev =
        travel_eval(pinned_inner(lt.term), lt.term.deadline_abs);
    report_.min_h = std::min(report_.min_h, ev.value);
    push_primary(ev);
  }

  if (pending_.size() >= 2) {
    // Travel chain from the head through every intermediate stop; an
    // active dwell pins the state, so its remaining time delays all of it.
    std::vector<cbf::LaterTerm> later;
    double cum = pin_rem;
    for (std::size_t i = 1; i < pending_.size(); ++i) {
      cum += pending_[i - 1].excess +
             geom::ordered_set_distance(pending_[i - 1].target,
                                        pending_[i].target) /
                 u_eff_;
      later.push_back({pending_[i].deadline_abs - t_, cum});
    }
    int critical = -1;
    const auto ev = cbf::secondary_value(x_, pending_[0].target, u_eff_,
                                         later, &critical);
    rec.b = ev.value;
    rec.critical_term =
        pending_[static_cast<std::size_t>(critical) + 1].subtask_id;
    report_.min_b = std::min(report_.min_b, ev.value);
    idx_b_ = static_cast<int>(rows.size());
    qp::Row row;
    row.a = ev.grad_x;
    row.b = -ev.dt_term - gamma_ * ev.value;
    rows.push_back(std::move(row));

    if (ev.value >= 0.0) {
      // The chain certificate must cover every pending budget exactly.
      for (std::size_t i = 1; i < pending_.size(); ++i) {
        const double exact =
            (pending_[i].deadline_abs - t_) +
            stl::exact_robustness(x_, pinned_inner(pending_[i])) /
                u_eff_;
        if (exact < -kTol)
          throw std::logic_error(
              "secondary certificate nonnegative but a pending budget "
              "certificate is negative");
      }
    }
  }

  for (auto& row : qp::ball_rows(n_, cfg_.u_max, cfg_.facets))
    rows.push_back(std::move(row));
}

Eigen::VectorXd Controller::solve_input(const std::vector<qp::Row>& rows,
                                        StepRecord& rec) {
  const int idx_b = idx_b_;
  const auto t0 = std::chrono::steady_clock::now();
  qp::Problem p = qp::min_norm_problem(n_);
  p.rows = rows;
  std::vector<int> warm;
  for (int idx : warm_active_)
    if (idx >= 0 && idx < static_cast<int>(rows.size())) warm.push_back(idx);
  qp::Solution sol = warm.empty() ? qp::solve(p) : qp::solve_warm(p, warm);

  Eigen::VectorXd u;
  if (sol.status == qp::Status::Optimal) {
    rec.qp_status = "optimal";
    rec.slack_used = 0.0;
    warm_active_ = sol.active;
    u = sol.u;
  } else if (cfg_.relax && idx_b >= 0) {
    // Penalized slack on the chain row only; hard rows stay hard.
    qp::Problem px;
    px.H = Eigen::MatrixXd::Identity(n_ + 1, n_ + 1);
    px.H(n_, n_) = 2.0 * cfg_.relax_penalty;
    px.c = Eigen::VectorXd::Zero(n_ + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      qp::Row row;
      row.a = Eigen::VectorXd::Zero(n_ + 1);
      row.a.head(n_) = rows[i].a;
      if (static_cast<int>(i) == idx_b) row.a(n_) = 1.0;
      row.b = rows[i].b;
      px.rows.push_back(std::move(row));
    }
    qp::Row pos;
    pos.a = Eigen::VectorXd::Zero(n_ + 1);
    pos.a(n_) = 1.0;
    pos.b = 0.0;
    px.rows.push_back(std::move(pos));
    const qp::Solution relaxed = qp::solve(px);
    if (relaxed.status != qp::Status::Optimal) {
      std::ostringstream msg;
      msg << "step quadratic program infeasible at t=" << t_
          << " even with a relaxed chain row";
      throw MidRunInfeasible(msg.str(), t_);
    }
    rec.qp_status = "relaxed";
    rec.slack_used = relaxed.u(n_);
    report_.slack_used_total += rec.slack_used;
    warm_active_.clear();
    u = relaxed.u.head(n_);
  } else {
    if (std::getenv("STLSYNTH_DEBUG_ROWS")) {
      std::ostringstream dbg;
      dbg << "rows at t=" << t_ << " x=" << x_.transpose() << "\n";
      for (std::size_t i = 0; i < rows.size(); ++i)
        dbg << "  [" << i << "] a=" << rows[i].a.transpose()
            << " b=" << rows[i].b << "\n";
      std::fputs(dbg.str().c_str(), stderr);
    }
    std::ostringstream msg;
    msg << "step quadratic program "
        << (sol.status == qp::Status::Infeasible ? "infeasible" : "stalled")
        << " at t=" << t_;
    throw MidRunInfeasible(msg.str(), t_);
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  solve_ms_total_ += ms;
  report_.max_solve_ms = std::max(report_.max_solve_ms, ms);
  ++report_.qp_status_counts[rec.qp_status];

  const double norm = u.norm();
  if (norm > cfg_.u_max) {
    if (norm > cfg_.u_max * (1.0 + 1e-6))
      throw std::logic_error("input bound violated by the QP solution");
    u *= cfg_.u_max / norm;
  }
  return u;
}

void Controller::verify_initial_state() {
  std::vector<qp::Row> rows;
  StepRecord rec;
  assemble_rows(rows, rec);
  std::ostringstream bad;
  if (!std::isnan(rec.h) && rec.h < -kTol)
    bad << " head certificate " << rec.h;
  if (!std::isnan(rec.h_hold) && rec.h_hold < -kTol)
    bad << " hold certificate " << rec.h_hold;
  if (!std::isnan(rec.b) && rec.b < -kTol)
    bad << " chain certificate " << rec.b;
  if (!bad.str().empty())
    throw InitiallyInfeasible("initial state violates:" + bad.str());
}

bool Controller::done() const {
  return t_ >= horizon_ - 1e-9;
}

void Controller::step() {
  process_events();
  std::vector<qp::Row> rows;
  StepRecord rec;
  assemble_rows(rows, rec);
  const Eigen::VectorXd u = solve_input(rows, rec);
  rec.u = u;
  report_.records.push_back(rec);
  report_.trajectory.samples.push_back({t_, x_, u});
  report_.cost += u.squaredNorm() * cfg_.dt;
  x_ += cfg_.dt * u;
  ++step_count_;
  t_ = static_cast<double>(step_count_) * cfg_.dt;
}

RunReport Controller::run() {
  while (!done()) step();
  process_events();  // terminal-sample achievements and removals

  StepRecord rec;
  std::vector<qp::Row> rows;
  assemble_rows(rows, rec);
  rec.u = Eigen::VectorXd::Zero(n_);
  rec.qp_status = "terminal";
  report_.records.push_back(rec);
  report_.trajectory.samples.push_back({t_, x_, Eigen::VectorXd::Zero(n_)});

  report_.trajectory.dt = cfg_.dt;
  report_.steps = static_cast<int>(step_count_);
  report_.mean_solve_ms =
      step_count_ > 0 ? solve_ms_total_ / static_cast<double>(step_count_)
                      : 0.0;
  if (spec_.groups.empty()) {
    report_.satisfied = true;
    report_.robustness = kInf;
  } else {
    const auto m = stl::monitor(report_.trajectory, spec_);
    report_.satisfied = m.satisfied;
    report_.robustness = m.robustness;
  }
  return report_;
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  Controller c(cfg);
  return c.run();
}

}  // namespace stlsynth::ctrl
