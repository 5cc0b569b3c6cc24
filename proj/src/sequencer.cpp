#include "stlsynth/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stlsynth::seq {
namespace {

constexpr double kSlop = 1e-9;
constexpr int kExhaustiveCutoff = 8;
constexpr std::size_t kMaxAlternatives = 64;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Index-decoded permutation (factorial number system) so parallel sweeps
// agree with the serial order bit for bit.
void decode_permutation(std::uint64_t idx, int k, std::vector<int>& out) {
  out.resize(static_cast<std::size_t>(k));
  std::vector<int> pool(static_cast<std::size_t>(k));
  std::iota(pool.begin(), pool.end(), 0);
  std::uint64_t rem = idx;
  for (int pos = 0; pos < k; ++pos) {
    std::uint64_t block = 1;
    for (int i = 2; i <= k - 1 - pos; ++i) block *= static_cast<std::uint64_t>(i);
    const auto digit = static_cast<std::size_t>(rem / block);
    rem %= block;
    out[static_cast<std::size_t>(pos)] = pool[digit];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digit));
  }
}

struct Workspace {
  std::vector<double> to_first;            // signed travel time x -> set_i
  std::vector<std::vector<double>> legs;   // sup travel time set_i -> set_j
};

Workspace build_workspace(const std::vector<Term>& terms,
                          const Eigen::VectorXd& x, double u_max) {
  const std::size_t k = terms.size();
  Workspace w;
  w.to_first.resize(k);
  w.legs.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    w.to_first[i] = -geom::signed_distance(x, terms[i].target) / u_max;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      w.legs[i][j] =
          geom::ordered_set_distance(terms[i].target, terms[j].target) / u_max;
    }
  }
  return w;
}

Feasibility evaluate_order(const std::vector<Term>& terms,
                           const std::vector<int>& perm, const Workspace& w,
                           double t) {
  const std::size_t k = perm.size();
  Feasibility f;
  f.arrival.resize(k);
  f.pure_arrival.resize(k);
  f.slack.resize(k);
  f.feasible = true;
  double ready = 0.0;
  double pure = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const Term& tm = terms[static_cast<std::size_t>(perm[j])];
    const double open = std::max(0.0, tm.open_abs - t);
    const double start = std::max(0.0, tm.start_abs - t);
    const double r = tm.deadline_abs - t;
    double arrive;
    if (j == 0) {
      arrive = std::max(w.to_first[static_cast<std::size_t>(perm[0])], open);
      pure = w.to_first[static_cast<std::size_t>(perm[0])];
    } else {
      const double leg =
          w.legs[static_cast<std::size_t>(perm[j - 1])]
                [static_cast<std::size_t>(perm[j])];
      arrive = std::max(ready + leg, open);
      pure += leg;
    }
    f.arrival[j] = arrive;
    f.pure_arrival[j] = pure;
    f.slack[j] = r - pure;
    f.slack_sum += f.slack[j];
    f.deficit = std::max(f.deficit, arrive - r);
    if (arrive > r + kSlop) f.feasible = false;
    ready = std::max(arrive, start) + tm.excess;
    pure += tm.excess;
  }
  return f;
}

// Total order on sweep outcomes: feasibility first, then slack sum, then
// the subtask-id sequence, then the permutation index. min() of keys is
// associative, so reductions are deterministic under any thread schedule.
struct Best {
  bool has = false;
  bool feasible = false;
  double slack_sum = -std::numeric_limits<double>::infinity();
  double deficit = std::numeric_limits<double>::infinity();
  std::vector<int> ids;
  std::uint64_t perm_idx = 0;
  std::vector<int> perm;
};

bool better(const Best& a, const Best& b) {
  if (!b.has) return true;
  if (!a.has) return false;
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) {
    if (a.slack_sum != b.slack_sum) return a.slack_sum > b.slack_sum;
    if (a.ids != b.ids) return a.ids < b.ids;
    return a.perm_idx < b.perm_idx;
  }
  if (a.deficit != b.deficit) return a.deficit < b.deficit;
  if (a.ids != b.ids) return a.ids < b.ids;
  return a.perm_idx < b.perm_idx;
}

std::vector<int> ids_of(const std::vector<Term>& terms,
                        const std::vector<int>& perm) {
  std::vector<int> ids;
  ids.reserve(perm.size());
  for (int p : perm) ids.push_back(terms[static_cast<std::size_t>(p)].subtask_id);
  return ids;
}

Best sweep_serial(const std::vector<Term>& terms, const Workspace& w, double t,
                  std::uint64_t total) {
  Best best;
  std::vector<int> perm;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    decode_permutation(idx, static_cast<int>(terms.size()), perm);
    const Feasibility f = evaluate_order(terms, perm, w, t);
    Best cand;
    cand.has = true;
    cand.feasible = f.feasible;
    cand.slack_sum = f.slack_sum;
    cand.deficit = f.deficit;
    cand.ids = ids_of(terms, perm);
    cand.perm_idx = idx;
    cand.perm = perm;
    if (better(cand, best)) best = cand;
  }
  return best;
}

Best sweep_parallel(const std::vector<Term>& terms, const Workspace& w,
                    double t, std::uint64_t total) {
#ifdef _OPENMP
  Best best;
#pragma omp parallel
  {
    Best local;
    std::vector<int> perm;
#pragma omp for schedule(static)
    for (std::int64_t sidx = 0; sidx < static_cast<std::int64_t>(total);
         ++sidx) {
      const auto idx = static_cast<std::uint64_t>(sidx);
      decode_permutation(idx, static_cast<int>(terms.size()), perm);
      const Feasibility f = evaluate_order(terms, perm, w, t);
      Best cand;
      cand.has = true;
      cand.feasible = f.feasible;
      cand.slack_sum = f.slack_sum;
      cand.deficit = f.deficit;
      cand.ids = ids_of(terms, perm);
      cand.perm_idx = idx;
      cand.perm = perm;
      if (better(cand, local)) local = std::move(cand);
    }
#pragma omp critical(stlsynth_seq_best)
    {
      if (better(local, best)) best = std::move(local);
    }
  }
  return best;
#else
  return sweep_serial(terms, w, t, total);
#endif
}

Best greedy_edf(const std::vector<Term>& terms, const Workspace& w, double t) {
  std::vector<int> perm(terms.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](int a, int b) {
    const Term& ta = terms[static_cast<std::size_t>(a)];
    const Term& tb = terms[static_cast<std::size_t>(b)];
    if (ta.deadline_abs != tb.deadline_abs)
      return ta.deadline_abs < tb.deadline_abs;
    return ta.subtask_id < tb.subtask_id;
  });
  const Feasibility f = evaluate_order(terms, perm, w, t);
  Best b;
  b.has = true;
  b.feasible = f.feasible;
  b.slack_sum = f.slack_sum;
  b.deficit = f.deficit;
  b.ids = ids_of(terms, perm);
  b.perm = perm;
  return b;
}

Best best_order(const std::vector<Term>& terms, const Eigen::VectorXd& x,
                double t, double u_max, bool parallel) {
  const Workspace w = build_workspace(terms, x, u_max);
  const int k = static_cast<int>(terms.size());
  if (k == 0) {
    Best b;
    b.has = true;
    b.feasible = true;
    b.slack_sum = 0.0;
    b.deficit = 0.0;
    return b;
  }
  if (k > kExhaustiveCutoff) return greedy_edf(terms, w, t);
  const auto total = static_cast<std::uint64_t>(factorial(k));
  return parallel ? sweep_parallel(terms, w, t, total)
                  : sweep_serial(terms, w, t, total);
}

Selection to_selection(const std::vector<Term>& terms, const Best& b,
                       int alternative) {
  Selection s;
  s.alternative = alternative;
  s.slack_sum = b.slack_sum;
  s.order.reserve(b.perm.size());
  for (int p : b.perm) s.order.push_back(terms[static_cast<std::size_t>(p)]);
  return s;
}

[[noreturn]] void throw_infeasible(const Best& b) {
  std::ostringstream msg;
  msg << "no feasible subtask order; best order (by subtask id)";
  for (int id : b.ids) msg << ' ' << id;
  msg << " misses its worst deadline by " << b.deficit << " s";
  throw NoFeasibleSequence(msg.str(), b.ids, b.deficit);
}

Term make_term(const stl::Subtask& st, int group, int member, int clause,
               geom::TargetSet target, double u_max) {
  Term t;
  t.subtask_id = st.id;
  t.group = group;
  t.member = member;
  t.clause = clause;
  t.kind = st.op.kind;
  t.target = std::move(target);
  const auto& op = st.op;
  switch (op.kind) {
    case stl::OpKind::Finally:
      t.deadline_abs = op.b;
      t.open_abs = op.a;
      break;
    case stl::OpKind::Globally:
      t.deadline_abs = op.a;
      t.start_abs = op.a;
      t.hold = op.b - op.a;
      break;
    case stl::OpKind::FinallyGlobally:
      t.deadline_abs = op.b + op.c;
      t.start_abs = op.a + op.c;
      t.hold = op.d - op.c;
      break;
    case stl::OpKind::GloballyFinally:
      t.deadline_abs = op.a + op.d;
      t.open_abs = op.a + op.c;
      break;
    case stl::OpKind::Until:
      t.deadline_abs = op.b;
      t.open_abs = op.a;
      break;
  }
  t.excess = std::max(0.0, t.hold - geom::diameter(t.target) / u_max);
  return t;
}

}  // namespace

std::vector<Alternative> enumerate_alternatives(const stl::SpecTree& spec,
                                                double u_max) {
  if (u_max <= 0.0) throw std::invalid_argument("u_max must be positive");
  // choices[g] lists every member x clause term for group g.
  std::vector<std::vector<Term>> choices;
  choices.reserve(spec.groups.size());
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    std::vector<Term> opts;
    const auto& group = spec.groups[g];
    for (std::size_t m = 0; m < group.members.size(); ++m) {
      const auto& st = group.members[m];
      for (std::size_t c = 0; c < st.inner.clauses.size(); ++c) {
        geom::TargetSet set =
            stl::clause_target_set(st.inner.clauses[c], spec.state_dim);
        opts.push_back(make_term(st, static_cast<int>(g), static_cast<int>(m),
                                 static_cast<int>(c), std::move(set), u_max));
      }
    }
    choices.push_back(std::move(opts));
  }
  std::size_t count = 1;
  for (const auto& opts : choices) {
    count *= opts.size();
    if (count > kMaxAlternatives)
      throw std::invalid_argument(
          "too many disjunction alternatives to enumerate");
  }
  std::vector<Alternative> alts;
  if (choices.empty()) return alts;
  alts.reserve(count);
  std::vector<std::size_t> pick(choices.size(), 0);
  for (;;) {
    Alternative alt;
    alt.terms.reserve(choices.size());
    for (std::size_t g = 0; g < choices.size(); ++g)
      alt.terms.push_back(choices[g][pick[g]]);
    alts.push_back(std::move(alt));
    std::size_t g = choices.size();
    while (g > 0) {
      --g;
      if (++pick[g] < choices[g].size()) break;
      pick[g] = 0;
      if (g == 0) return alts;
    }
  }
}

Feasibility feasibility(const std::vector<Term>& order,
                        const Eigen::VectorXd& x, double t, double u_max) {
  if (u_max <= 0.0) throw std::invalid_argument("u_max must be positive");
  const Workspace w = build_workspace(order, x, u_max);
  std::vector<int> perm(order.size());
  std::iota(perm.begin(), perm.end(), 0);
  return evaluate_order(order, perm, w, t);
}

Selection select_terms(const std::vector<Term>& pending,
                       const Eigen::VectorXd& x, double t, double u_max,
                       bool parallel) {
  if (u_max <= 0.0) throw std::invalid_argument("u_max must be positive");
  const Best b = best_order(pending, x, t, u_max, parallel);
  if (!b.feasible) throw_infeasible(b);
  return to_selection(pending, b, -1);
}

Selection select(const std::vector<Alternative>& alts,
                 const Eigen::VectorXd& x, double t, double u_max,
                 bool parallel, int pin_alternative) {
  if (u_max <= 0.0) throw std::invalid_argument("u_max must be positive");
  if (alts.empty()) return Selection{{}, -1, 0.0};
  if (pin_alternative >= static_cast<int>(alts.size()))
    throw std::invalid_argument("pinned alternative index out of range");
  Best best;
  int best_alt = -1;
  for (std::size_t a = 0; a < alts.size(); ++a) {
    if (pin_alternative >= 0 && static_cast<int>(a) != pin_alternative)
      continue;
    Best b = best_order(alts[a].terms, x, t, u_max, parallel);
    if (better(b, best)) {
      best = std::move(b);
      best_alt = static_cast<int>(a);
    }
  }
  if (!best.feasible) throw_infeasible(best);
  return to_selection(alts[static_cast<std::size_t>(best_alt)].terms, best,
                      best_alt);
}

std::vector<Term> remove_completed(std::vector<Term> order, int subtask_id) {
  order.erase(std::remove_if(order.begin(), order.end(),
                             [&](const Term& t) {
                               return t.subtask_id == subtask_id;
                             }),
              order.end());
  return order;
}

}  // namespace stlsynth::seq
