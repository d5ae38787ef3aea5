#pragma once

// repair planning and execution. a single systematic failure reads only the
// chosen rows of the helpers, recovers the remaining rows through appended
// cells, and falls back to plain base equations for rows the construction
// left unscheduled. multiple failures select parity equations greedily by
// unknown coverage and certify full rank before anything is read.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "htec/codec.hpp"
#include "htec/construction.hpp"
#include "htec/galois.hpp"

namespace htec {

struct repair_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct too_many_failures_error : repair_error {
  using repair_error::repair_error;
};

struct missing_symbol_error : repair_error {
  using repair_error::repair_error;
};

struct singular_repair_error : repair_error {
  using repair_error::repair_error;
};

struct unsolvable_error : repair_error {
  using repair_error::repair_error;
};

struct repair_plan {
  std::vector<int> failed;                     // ascending node ids
  std::map<int, std::vector<int>> reads;       // helper node -> ascending distinct rows
  std::vector<std::pair<int, int>> equations;  // (l, i) parity equations solving systematic cells
  std::vector<std::pair<int, int>> reencode;   // (l, i) parity cells rebuilt directly
  bool decode_fallback = false;

  int total_symbols() const {
    int total = 0;
    for (const auto& [node, rows] : reads) {
      (void)node;
      total += static_cast<int>(rows.size());
    }
    return total;
  }
  int helper_count() const { return static_cast<int>(reads.size()); }
  double gamma(int alpha) const { return static_cast<double>(total_symbols()) / alpha; }
};

namespace detail {

inline void add_read(std::map<int, std::vector<int>>& reads, int node, int row) {
  std::vector<int>& rows = reads[node];
  const auto it = std::lower_bound(rows.begin(), rows.end(), row);
  if (it == rows.end() || *it != row) rows.insert(it, row);
}

inline void decode_cost_reads(repair_plan& plan, const code_params& p,
                              const std::set<int>& dead) {
  plan.reads.clear();
  plan.equations.clear();
  plan.decode_fallback = true;
  int taken = 0;
  for (int node = 1; node <= p.n && taken < p.k; ++node) {
    if (dead.count(node)) continue;
    for (int i = 1; i <= p.alpha; ++i) add_read(plan.reads, node, i);
    ++taken;
  }
}

}  // end of namespace detail

inline repair_plan plan_single_repair(const index_array_set& arrays, int node) {
  const code_params& p = arrays.params;
  if (node < 1 || node > p.n) {
    throw parameter_error("failed node must be between 1 and n, got " + std::to_string(node));
  }
  repair_plan plan;
  plan.failed = {node};
  if (node > p.k) {
    for (int j = 1; j <= p.k; ++j) {
      for (int i = 1; i <= p.alpha; ++i) detail::add_read(plan.reads, j, i);
    }
    for (int i = 1; i <= p.alpha; ++i) plan.reencode.emplace_back(node - p.k, i);
    return plan;
  }
  const std::vector<int> chosen = arrays.chosen_rows(node);
  std::vector<char> solved(static_cast<std::size_t>(p.alpha) + 1, 0);
  for (int i : chosen) {
    plan.equations.emplace_back(1, i);
    detail::add_read(plan.reads, p.k + 1, i);
    for (int j = 1; j <= p.k; ++j) {
      if (j != node) detail::add_read(plan.reads, j, i);
    }
    solved[static_cast<std::size_t>(i)] = 1;
  }
  for (int l = 2; l <= p.r; ++l) {
    for (int i : chosen) {
      const std::vector<cell> refs = arrays.equation_refs(l, i);
      bool keep = false;
      for (const cell& ref : refs) {
        if (ref.j == node && !solved[static_cast<std::size_t>(ref.i)]) keep = true;
      }
      if (!keep) continue;
      plan.equations.emplace_back(l, i);
      detail::add_read(plan.reads, p.k + l, i);
      for (const cell& ref : refs) {
        if (ref.j == node) {
          solved[static_cast<std::size_t>(ref.i)] = 1;
        } else {
          detail::add_read(plan.reads, ref.j, ref.i);
        }
      }
    }
  }
  for (int i = 1; i <= p.alpha; ++i) {
    if (solved[static_cast<std::size_t>(i)]) continue;
    plan.equations.emplace_back(1, i);
    detail::add_read(plan.reads, p.k + 1, i);
    for (int j = 1; j <= p.k; ++j) {
      if (j != node) detail::add_read(plan.reads, j, i);
    }
  }
  if (plan.total_symbols() > p.k * p.alpha) {
    detail::decode_cost_reads(plan, p, {node});
  }
  return plan;
}

inline repair_plan plan_single_repair(const code_instance& ci, int node) {
  return plan_single_repair(ci.arrays, node);
}

// failed holds systematic node ids; live_parities lists the parity arrays
// still available. the plan starts from every live parity equation on the
// union of the failed nodes' chosen rows, extends coverage greedily, and
// then adds equations until the unknowns have full rank.
inline repair_plan plan_multi_repair(const code_instance& ci, std::vector<int> failed,
                                     std::vector<int> live_parities = {}) {
  const code_params& p = ci.params;
  std::sort(failed.begin(), failed.end());
  failed.erase(std::unique(failed.begin(), failed.end()), failed.end());
  if (failed.empty()) throw parameter_error("no failed nodes given");
  for (int node : failed) {
    if (node < 1 || node > p.k) {
      throw parameter_error("multi repair plans systematic nodes, got " + std::to_string(node));
    }
  }
  if (live_parities.empty()) {
    for (int l = 1; l <= p.r; ++l) live_parities.push_back(l);
  }
  std::sort(live_parities.begin(), live_parities.end());
  const int t = static_cast<int>(failed.size());
  if (t + (p.r - static_cast<int>(live_parities.size())) > p.r) {
    throw too_many_failures_error("more than r total failures");
  }
  if (t == 1 && static_cast<int>(live_parities.size()) == p.r) {
    return plan_single_repair(ci.arrays, failed[0]);
  }

  std::map<int, int> fpos;
  for (int idx = 0; idx < t; ++idx) fpos[failed[static_cast<std::size_t>(idx)]] = idx;
  const int cols = t * p.alpha;
  const auto col_of = [&](const cell& ref) {
    return fpos.at(ref.j) * p.alpha + ref.i - 1;
  };

  std::vector<int> rows_union;
  {
    std::set<int> acc;
    for (int node : failed) {
      for (int i : ci.arrays.chosen_rows(node)) acc.insert(i);
    }
    rows_union.assign(acc.begin(), acc.end());
  }

  std::vector<std::pair<int, int>> selected;
  std::set<std::pair<int, int>> selected_set;
  std::vector<char> covered(static_cast<std::size_t>(cols), 0);
  int uncovered = cols;
  const auto select_eq = [&](int l, int i) {
    selected.emplace_back(l, i);
    selected_set.insert({l, i});
    for (const eq_term& term : ci.equation_terms(l, i)) {
      if (!fpos.count(term.ref.j)) continue;
      char& c = covered[static_cast<std::size_t>(col_of(term.ref))];
      if (!c) {
        c = 1;
        --uncovered;
      }
    }
  };
  for (int i : rows_union) {
    for (int l : live_parities) select_eq(l, i);
  }
  while (uncovered > 0) {
    int best_l = 0, best_i = 0, best_gain = 0;
    for (int i = 1; i <= p.alpha; ++i) {
      for (int l : live_parities) {
        if (selected_set.count({l, i})) continue;
        int gain = 0;
        for (const eq_term& term : ci.equation_terms(l, i)) {
          if (fpos.count(term.ref.j) && !covered[static_cast<std::size_t>(col_of(term.ref))]) {
            ++gain;
          }
        }
        if (gain > best_gain) {
          best_gain = gain;
          best_l = l;
          best_i = i;
        }
      }
    }
    if (best_gain == 0) {
      throw unsolvable_error("no remaining equation covers an unknown cell");
    }
    select_eq(best_l, best_i);
  }

  const auto unknown_row = [&](int l, int i) {
    gf_vec row(static_cast<std::size_t>(cols), 0);
    for (const eq_term& term : ci.equation_terms(l, i)) {
      if (!fpos.count(term.ref.j)) continue;
      const std::size_t c = static_cast<std::size_t>(col_of(term.ref));
      row[c] = ci.fld.add(row[c], term.c);
    }
    return row;
  };
  rank_tracker trk(ci.fld, cols);
  for (const auto& [l, i] : selected) trk.try_add(unknown_row(l, i));
  if (trk.rank() < cols) {
    // rows outside the chosen union cost one read per live systematic node,
    // so each new row opens with its lowest live parity and further parities
    // on that row are taken only when all their live references are covered
    // by reads already planned
    std::set<std::pair<int, int>> read;
    for (const auto& [l, i] : selected) {
      for (const eq_term& term : ci.equation_terms(l, i)) {
        if (!fpos.count(term.ref.j)) read.insert({term.ref.j, term.ref.i});
      }
    }
    const auto take = [&](int l, int i) {
      selected.emplace_back(l, i);
      selected_set.insert({l, i});
      for (const eq_term& term : ci.equation_terms(l, i)) {
        if (!fpos.count(term.ref.j)) read.insert({term.ref.j, term.ref.i});
      }
    };
    for (int i = 1; i <= p.alpha && trk.rank() < cols; ++i) {
      bool opened = false;
      for (int l : live_parities) {
        if (selected_set.count({l, i})) continue;
        if (!opened) {
          if (trk.try_add(unknown_row(l, i))) {
            take(l, i);
            opened = true;
          }
          continue;
        }
        bool zero_cost = true;
        for (const eq_term& term : ci.equation_terms(l, i)) {
          if (!fpos.count(term.ref.j) && !read.count({term.ref.j, term.ref.i})) zero_cost = false;
        }
        if (!zero_cost) continue;
        if (trk.try_add(unknown_row(l, i))) take(l, i);
        if (trk.rank() == cols) break;
      }
    }
    for (int i = 1; i <= p.alpha && trk.rank() < cols; ++i) {
      for (int l : live_parities) {
        if (selected_set.count({l, i})) continue;
        if (trk.try_add(unknown_row(l, i))) {
          take(l, i);
          if (trk.rank() == cols) break;
        }
      }
    }
  }
  if (trk.rank() < cols) {
    throw unsolvable_error("live parity equations reach rank " + std::to_string(trk.rank()) +
                           " of " + std::to_string(cols));
  }

  repair_plan plan;
  plan.failed = failed;
  plan.equations = selected;
  for (const auto& [l, i] : selected) {
    detail::add_read(plan.reads, p.k + l, i);
    for (const eq_term& term : ci.equation_terms(l, i)) {
      if (!fpos.count(term.ref.j)) detail::add_read(plan.reads, term.ref.j, term.ref.i);
    }
  }
  if (plan.total_symbols() > p.k * p.alpha) {
    std::set<int> dead(failed.begin(), failed.end());
    for (int l = 1; l <= p.r; ++l) {
      if (!std::binary_search(live_parities.begin(), live_parities.end(), l)) dead.insert(p.k + l);
    }
    detail::decode_cost_reads(plan, p, dead);
  }
  return plan;
}

// any mix of up to r failed nodes. dead parity cells are rebuilt by
// re-encoding; failed systematic cells go through the multi planner with
// only the live parity arrays.
inline repair_plan plan_repair(const code_instance& ci, std::vector<int> failed) {
  const code_params& p = ci.params;
  std::sort(failed.begin(), failed.end());
  failed.erase(std::unique(failed.begin(), failed.end()), failed.end());
  if (failed.empty()) throw parameter_error("no failed nodes given");
  for (int node : failed) {
    if (node < 1 || node > p.n) {
      throw parameter_error("failed node must be between 1 and n, got " + std::to_string(node));
    }
  }
  if (static_cast<int>(failed.size()) > p.r) {
    throw too_many_failures_error("cannot repair " + std::to_string(failed.size()) +
                                  " failures with r = " + std::to_string(p.r));
  }
  std::vector<int> failed_systematic, dead_parities, live_parities;
  for (int node : failed) {
    if (node <= p.k) failed_systematic.push_back(node);
    else dead_parities.push_back(node - p.k);
  }
  for (int l = 1; l <= p.r; ++l) {
    if (!std::count(dead_parities.begin(), dead_parities.end(), l)) live_parities.push_back(l);
  }
  repair_plan plan;
  if (failed_systematic.empty()) {
    for (int j = 1; j <= p.k; ++j) {
      for (int i = 1; i <= p.alpha; ++i) detail::add_read(plan.reads, j, i);
    }
  } else if (failed_systematic.size() == 1 && dead_parities.empty()) {
    plan = plan_single_repair(ci.arrays, failed_systematic[0]);
  } else {
    plan = plan_multi_repair(ci, failed_systematic, live_parities);
  }
  for (int l : dead_parities) {
    for (int i = 1; i <= p.alpha; ++i) {
      plan.reencode.emplace_back(l, i);
      if (plan.decode_fallback) continue;
      for (const eq_term& term : ci.equation_terms(l, i)) {
        if (!std::count(failed_systematic.begin(), failed_systematic.end(), term.ref.j)) {
          detail::add_read(plan.reads, term.ref.j, term.ref.i);
        }
      }
    }
  }
  plan.failed = failed;
  if (!plan.decode_fallback && plan.total_symbols() > p.k * p.alpha) {
    std::set<int> dead(failed.begin(), failed.end());
    detail::decode_cost_reads(plan, p, dead);
  }
  return plan;
}

using symbol_map = std::map<std::pair<int, int>, gf_t>;  // (node, row) -> value

// recovers every failed node's full column from exactly the planned symbols
inline std::map<int, gf_vec> execute_repair(const code_instance& ci, const repair_plan& plan,
                                            const symbol_map& symbols) {
  const code_params& p = ci.params;
  const auto get = [&](int node, int row) {
    const auto it = symbols.find({node, row});
    if (it == symbols.end()) {
      throw missing_symbol_error("symbol for node " + std::to_string(node) + " row " +
                                 std::to_string(row) + " was not provided");
    }
    return it->second;
  };
  std::vector<int> failed_systematic;
  for (int node : plan.failed) {
    if (node <= p.k) failed_systematic.push_back(node);
  }
  std::map<int, gf_vec> result;
  for (int node : plan.failed) {
    result[node] = gf_vec(static_cast<std::size_t>(p.alpha), 0);
  }

  if (plan.decode_fallback) {
    std::map<int, gf_vec> available;
    for (const auto& [node, rows] : plan.reads) {
      gf_vec column(static_cast<std::size_t>(p.alpha), 0);
      for (int i : rows) column[static_cast<std::size_t>(i - 1)] = get(node, i);
      available[node] = std::move(column);
    }
    const gf_mat data = decode(ci, available);
    for (int node : plan.failed) {
      if (node <= p.k) {
        for (int i = 1; i <= p.alpha; ++i) {
          result[node][static_cast<std::size_t>(i - 1)] =
              data[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(node - 1)];
        }
      } else {
        for (int i = 1; i <= p.alpha; ++i) {
          gf_t acc = 0;
          for (const eq_term& term : ci.equation_terms(node - p.k, i)) {
            acc = ci.fld.add(acc, ci.fld.mul(term.c, data[static_cast<std::size_t>(term.ref.i - 1)]
                                                        [static_cast<std::size_t>(term.ref.j - 1)]));
          }
          result[node][static_cast<std::size_t>(i - 1)] = acc;
        }
      }
    }
    return result;
  }

  std::map<int, int> fpos;
  for (int idx = 0; idx < static_cast<int>(failed_systematic.size()); ++idx) {
    fpos[failed_systematic[static_cast<std::size_t>(idx)]] = idx;
  }
  if (!failed_systematic.empty()) {
    const int cols = static_cast<int>(failed_systematic.size()) * p.alpha;
    gf_mat m;
    gf_vec rhs;
    for (const auto& [l, i] : plan.equations) {
      gf_vec row(static_cast<std::size_t>(cols), 0);
      gf_t b = get(p.k + l, i);
      for (const eq_term& term : ci.equation_terms(l, i)) {
        const auto it = fpos.find(term.ref.j);
        if (it != fpos.end()) {
          const std::size_t c = static_cast<std::size_t>(it->second * p.alpha + term.ref.i - 1);
          row[c] = ci.fld.add(row[c], term.c);
        } else {
          b = ci.fld.add(b, ci.fld.mul(term.c, get(term.ref.j, term.ref.i)));
        }
      }
      m.push_back(std::move(row));
      rhs.push_back(b);
    }
    gf_vec x;
    try {
      x = solve_linear_system(ci.fld, std::move(m), std::move(rhs));
    } catch (const field_error& e) {
      throw singular_repair_error(std::string("planned equations do not solve the failure: ") +
                                  e.what());
    }
    for (const auto& [node, idx] : fpos) {
      for (int i = 1; i <= p.alpha; ++i) {
        result[node][static_cast<std::size_t>(i - 1)] =
            x[static_cast<std::size_t>(idx * p.alpha + i - 1)];
      }
    }
  }
  for (const auto& [l, i] : plan.reencode) {
    gf_t acc = 0;
    for (const eq_term& term : ci.equation_terms(l, i)) {
      const auto it = fpos.find(term.ref.j);
      const gf_t v = it != fpos.end()
                         ? result[term.ref.j][static_cast<std::size_t>(term.ref.i - 1)]
                         : get(term.ref.j, term.ref.i);
      acc = ci.fld.add(acc, ci.fld.mul(term.c, v));
    }
    result[p.k + l][static_cast<std::size_t>(i - 1)] = acc;
  }
  return result;
}

struct repair_stats {
  int t = 0;
  int total_symbols = 0;
  double gamma = 0;
  int helpers = 0;
  std::map<int, int> per_helper;
  double lower_bound = 0;
  double upper_bound = 0;
  bool lower_applicable = false;
  bool upper_applicable = false;
  bool within_bounds = true;
};

// normalized repair bandwidth against the structural bounds for systematic
// failures; each bound carries a domain flag and only applicable bounds are
// enforced.
inline repair_stats compute_repair_stats(const repair_plan& plan, const code_params& p) {
  repair_stats st;
  st.t = static_cast<int>(plan.failed.size());
  st.total_symbols = plan.total_symbols();
  st.gamma = static_cast<double>(st.total_symbols) / p.alpha;
  st.helpers = plan.helper_count();
  for (const auto& [node, rows] : plan.reads) {
    st.per_helper[node] = static_cast<int>(rows.size());
  }
  bool systematic_only = true;
  for (int node : plan.failed) {
    if (node > p.k) systematic_only = false;
  }
  if (!systematic_only) return st;
  const int portion = portion_size(p.alpha, p.r);
  if (st.t == 1) {
    st.lower_bound = static_cast<double>(p.n - 1) / p.r;
    st.lower_applicable = true;
    st.upper_bound = st.lower_bound + static_cast<double>(p.r - 1) * portion *
                                          group_count(p.k, p.r) / p.alpha;
    st.upper_applicable = p.alpha % p.r == 0;
  } else {
    st.lower_bound = static_cast<double>(st.t) * portion * (p.n - st.t) / p.alpha;
    // the lower formula assumes each failed node contributes a full disjoint
    // portion of rows; chosen subsets are forced to overlap when r does not
    // divide alpha, and the formula can then exceed the decode ceiling k
    st.lower_applicable = p.alpha % p.r == 0;
    st.upper_bound = p.k;
    st.upper_applicable = true;
  }
  if (st.lower_applicable && st.gamma < st.lower_bound - 1e-9) st.within_bounds = false;
  if (st.upper_applicable && st.gamma > st.upper_bound + 1e-9) st.within_bounds = false;
  return st;
}

}  // end of namespace htec
