#pragma once

// index array construction for hashtag codes. a code with k data nodes and
// r = n - k parity nodes at sub-packetization alpha is described by r index
// arrays P_1..P_r. P_1 is the plain alpha x k grid of data cells; P_2..P_r
// additionally carry g = ceil(k/r) appended columns. the systematic nodes are
// split into g groups of up to r nodes; appended column k+nu belongs to group
// nu. every node d_j of group nu gets a partition of its rows {1..alpha} into
// subsets of size up to portion = ceil(alpha/r); one subset is designated and
// the remaining residual rows are written, one subset per parity array, into
// column k+nu at the rows of the designated subset. the appended layout is
// what gives each node a repair cost below the trivial k*alpha.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "htec/galois.hpp"

namespace htec {

struct construction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invalid (n, k, alpha) or malformed override / input shape
struct parameter_error : construction_error {
  using construction_error::construction_error;
};

struct no_valid_partition_error : construction_error {
  int node;
  explicit no_valid_partition_error(int nd)
      : construction_error("no valid partition for node " + std::to_string(nd)), node(nd) {}
};

struct precondition_violated_error : construction_error {
  using construction_error::construction_error;
};

struct code_params {
  int n = 0;
  int k = 0;
  int r = 0;
  int alpha = 0;
  field_spec field;
};

// r^e without overflow for the ranges the validator admits
inline long long ipow_ll(long long base, int e) {
  long long acc = 1;
  for (int i = 0; i < e; ++i) {
    if (acc > (1LL << 40)) return acc;
    acc *= base;
  }
  return acc;
}

inline int group_count(int k, int r) { return (k + r - 1) / r; }
inline int portion_size(int alpha, int r) { return (alpha + r - 1) / r; }

inline void validate_params(const code_params& p) {
  if (p.k < 1) throw parameter_error("k must be at least 1");
  if (p.r < 1) throw parameter_error("r must be at least 1");
  if (p.n != p.k + p.r) throw parameter_error("n must equal k + r");
  if (p.alpha < 1) throw parameter_error("alpha must be at least 1");
  const long long cap = ipow_ll(p.r, group_count(p.k, p.r));
  if (p.alpha > cap) {
    throw parameter_error("alpha " + std::to_string(p.alpha) + " exceeds r^ceil(k/r) = " +
                          std::to_string(cap));
  }
  if (p.field.w < 1 || p.field.w > 16) throw parameter_error("field width must be 1..16");
}

// one element coordinate (row, node), 1-based; (0,0) marks an empty cell
struct cell {
  int i = 0;
  int j = 0;
  bool empty() const { return i == 0; }
};

inline bool operator==(cell a, cell b) { return a.i == b.i && a.j == b.j; }
inline bool operator!=(cell a, cell b) { return !(a == b); }

struct valid_partition {
  int node = 0;                           // 1-based systematic node
  std::vector<std::vector<int>> subsets;  // partition of {1..alpha} in emission order, each ascending
  std::vector<int> chosen;                // the designated subset, ascending
};

struct partition_override {
  int node = 0;
  std::vector<std::vector<int>> subsets;
  std::vector<int> chosen;
};

// walk parameters for one group. groups whose previous group already walks
// with run 1 have no regular pattern of their own and fill in phase 2, where
// every uniform stride is tried.
struct partition_schedule {
  int nu = 0;
  int portion = 0;
  int run = 0;
  int step = 0;
  bool phase2 = false;
};

inline partition_schedule schedule_for_group(const code_params& p, int nu) {
  partition_schedule s;
  s.nu = nu;
  s.portion = portion_size(p.alpha, p.r);
  const auto run_of = [&](int v) {
    const long long denom = ipow_ll(p.r, v);
    return static_cast<int>((p.alpha + denom - 1) / denom);
  };
  s.run = run_of(nu);
  s.step = nu == 1 ? 0 : run_of(nu - 1) - s.run;
  s.phase2 = nu >= 2 && run_of(nu - 1) == 1;
  return s;
}

// continuous cyclic walk over {1..alpha}: emit the first unused index at or
// after the cursor, advance one position, and after every `run` emissions
// jump a further `step` positions (used positions count). the emission order
// chunked into portions is the walk's partition.
inline std::vector<int> walk_sequence(int start, int run, int step, int alpha) {
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(alpha));
  std::vector<char> used(static_cast<std::size_t>(alpha) + 1, 0);
  int pos = start;
  int in_run = 0;
  const auto wrap = [alpha](int v) { return (v - 1) % alpha + 1; };
  while (static_cast<int>(seq.size()) < alpha) {
    while (used[static_cast<std::size_t>(pos)]) pos = wrap(pos + 1);
    seq.push_back(pos);
    used[static_cast<std::size_t>(pos)] = 1;
    pos = wrap(pos + 1);
    if (++in_run == run) {
      pos = wrap(pos + step);
      in_run = 0;
    }
  }
  return seq;
}

inline std::vector<std::vector<int>> walk_partition(int start, int run, int step, int alpha,
                                                    int portion) {
  const std::vector<int> seq = walk_sequence(start, run, step, alpha);
  std::vector<std::vector<int>> parts;
  for (int at = 0; at < alpha; at += portion) {
    const int end = std::min(alpha, at + portion);
    std::vector<int> sub(seq.begin() + at, seq.begin() + end);
    std::sort(sub.begin(), sub.end());
    parts.push_back(std::move(sub));
  }
  return parts;
}

// the walk restricted to fresh ground: emitting an index twice means the
// subset cannot be produced by this (run, step) pattern from this start
inline std::vector<int> pure_walk(int start, int run, int step, int count, int alpha) {
  std::vector<int> out;
  std::vector<char> used(static_cast<std::size_t>(alpha) + 1, 0);
  int pos = start;
  int in_run = 0;
  const auto wrap = [alpha](int v) { return (v - 1) % alpha + 1; };
  while (static_cast<int>(out.size()) < count) {
    if (used[static_cast<std::size_t>(pos)]) return {};
    out.push_back(pos);
    used[static_cast<std::size_t>(pos)] = 1;
    pos = wrap(pos + 1);
    if (++in_run == run) {
      pos = wrap(pos + step);
      in_run = 0;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool subset_matches_pattern(const std::vector<int>& subset, int run, int step, int alpha) {
  for (int s : subset) {
    if (pure_walk(s, run, step, static_cast<int>(subset.size()), alpha) == subset) return true;
  }
  return false;
}

struct index_array_set {
  code_params params;
  int g = 0;
  int portion = 0;
  std::vector<std::vector<int>> groups;  // groups[nu-1] = member nodes, 1-based
  // appended[m][row][col] is the cell of parity array P_{m+2} at element row
  // row+1, appended column k+col+1
  std::vector<std::vector<std::vector<cell>>> appended;
  std::vector<valid_partition> partitions;        // index node-1
  std::vector<std::pair<int, int>> unscheduled;   // (residual row, node) without a home
  int relax_level = 0;                            // strictest relaxation any node needed

  int group_of(int node) const { return (node - 1) / params.r + 1; }

  const std::vector<int>& chosen_rows(int node) const {
    return partitions[static_cast<std::size_t>(node - 1)].chosen;
  }

  cell at(int l, int row, int col) const {  // l in 2..r
    return appended[static_cast<std::size_t>(l - 2)][static_cast<std::size_t>(row - 1)]
                   [static_cast<std::size_t>(col)];
  }

  // every cell one parity equation touches: the base row plus, for l >= 2,
  // the occupied appended cells of that row
  std::vector<cell> equation_refs(int l, int i) const {
    std::vector<cell> refs;
    refs.reserve(static_cast<std::size_t>(params.k + g));
    for (int j = 1; j <= params.k; ++j) refs.push_back(cell{i, j});
    if (l >= 2) {
      for (int c = 0; c < g; ++c) {
        const cell e = at(l, i, c);
        if (!e.empty()) refs.push_back(e);
      }
    }
    return refs;
  }
};

namespace detail {

inline std::vector<std::vector<int>> canonical_partition(std::vector<std::vector<int>> subsets) {
  for (auto& s : subsets) std::sort(s.begin(), s.end());
  std::sort(subsets.begin(), subsets.end());
  return subsets;
}

struct construction_state {
  code_params p;
  int g = 0, portion = 0, arrays = 0;
  std::vector<std::vector<std::vector<cell>>> appended;     // [m][row][col]
  std::map<std::vector<int>, int> chosen_global;            // subset -> times designated
  std::vector<std::map<std::vector<int>, int>> chosen_group;
  std::vector<std::vector<std::vector<int>>> established;   // per group, emission order; empty = none
  std::vector<std::pair<int, int>> unscheduled;

  bool cell_free(int m, int row, int col) const {
    return appended[static_cast<std::size_t>(m)][static_cast<std::size_t>(row - 1)]
                   [static_cast<std::size_t>(col)].empty();
  }

  // an array qualifies for a designated subset when the subset's rows are
  // still unwritten in the group's column
  bool rows_free(int m, const std::vector<int>& rows, int col) const {
    for (int rrow : rows) {
      if (!cell_free(m, rrow, col)) return false;
    }
    return true;
  }

  bool any_array_free(const std::vector<int>& rows, int col) const {
    for (int m = 0; m < arrays; ++m) {
      if (rows_free(m, rows, col)) return true;
    }
    return false;
  }

  int load_at_rows(int m, const std::vector<int>& rows) const {
    int load = 0;
    for (int rrow : rows) {
      for (int c = 0; c < g; ++c) {
        if (!cell_free(m, rrow, c)) ++load;
      }
    }
    return load;
  }

  // residual subsets are handed out in ascending order of their smallest
  // element; each goes wholesale to the least loaded array whose target rows
  // are free, ties to the lowest array. inside a subset, ascending residual
  // rows map to ascending designated rows.
  void place_residuals(const valid_partition& vp, int nu) {
    const int col = nu - 1;
    std::vector<int> rows = vp.chosen;
    std::sort(rows.begin(), rows.end());
    std::vector<std::vector<int>> rest;
    bool chosen_taken = false;
    for (const auto& s : vp.subsets) {
      std::vector<int> sorted = s;
      std::sort(sorted.begin(), sorted.end());
      if (!chosen_taken && sorted == vp.chosen) {
        chosen_taken = true;
        continue;
      }
      rest.push_back(std::move(sorted));
    }
    std::sort(rest.begin(), rest.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a[0] < b[0]; });
    for (const auto& s : rest) {
      const int cnt = std::min(s.size(), rows.size());
      const std::vector<int> target(rows.begin(), rows.begin() + cnt);
      int best = -1, best_load = 0;
      for (int m = 0; m < arrays; ++m) {
        if (!rows_free(m, target, col)) continue;
        const int load = load_at_rows(m, rows);
        if (best < 0 || load < best_load) {
          best = m;
          best_load = load;
        }
      }
      if (best < 0) {
        for (int row : s) unscheduled.emplace_back(row, vp.node);
        continue;
      }
      for (int idx = 0; idx < cnt; ++idx) {
        appended[static_cast<std::size_t>(best)][static_cast<std::size_t>(target[idx] - 1)]
                [static_cast<std::size_t>(col)] = cell{s[static_cast<std::size_t>(idx)], vp.node};
      }
      for (std::size_t idx = cnt; idx < s.size(); ++idx) {
        unscheduled.emplace_back(s[idx], vp.node);
      }
    }
  }

  std::vector<std::vector<std::vector<int>>> candidates_for(int nu,
                                                            const partition_schedule& sch) const {
    const int gi = nu - 1;
    if (p.alpha % p.r == 0 && !established[static_cast<std::size_t>(gi)].empty()) {
      return {established[static_cast<std::size_t>(gi)]};
    }
    std::vector<std::vector<std::vector<int>>> out;
    std::set<std::vector<std::vector<int>>> seen;
    const auto push = [&](std::vector<std::vector<int>> cand) {
      if (seen.insert(canonical_partition(cand)).second) out.push_back(std::move(cand));
    };
    if (!sch.phase2) {
      for (int s = 1; s <= p.alpha; ++s) {
        push(walk_partition(s, sch.run, sch.step, p.alpha, sch.portion));
      }
    } else {
      for (int s = 1; s <= p.alpha; ++s) {
        for (int stride = 0; stride < p.alpha; ++stride) {
          push(walk_partition(s, 1, stride, p.alpha, sch.portion));
        }
      }
    }
    return out;
  }

  // first-fit over the candidate partitions with a relaxation ladder:
  // level 0 wants the designated subset unused anywhere, level 1 only unused
  // within the group, level 2 admits repeats but picks the globally least
  // designated subset, level 3 takes the first portion-sized subset of the
  // first candidate no matter what. the pattern check binds only the node
  // that establishes its group's partition in a phase-1 group.
  std::pair<valid_partition, int> find_partition(int node, int nu, const partition_schedule& sch) {
    const int gi = nu - 1;
    const int col = nu - 1;
    const auto candidates = candidates_for(nu, sch);
    if (candidates.empty()) throw no_valid_partition_error(node);
    const bool establishing = established[static_cast<std::size_t>(gi)].empty();
    for (int level = 0; level <= 2; ++level) {
      for (const auto& cand : candidates) {
        int pick = -1, pick_uses = 0;
        for (std::size_t si = 0; si < cand.size(); ++si) {
          const std::vector<int>& s = cand[si];
          if (static_cast<int>(s.size()) != portion) continue;
          const auto guses = chosen_global.find(s);
          const int uses = guses == chosen_global.end() ? 0 : guses->second;
          if (level == 0 && uses > 0) continue;
          if (level == 1) {
            const auto& in_group = chosen_group[static_cast<std::size_t>(gi)];
            if (in_group.find(s) != in_group.end()) continue;
          }
          if (!any_array_free(s, col)) continue;
          if (establishing && !sch.phase2 && !subset_matches_pattern(s, sch.run, sch.step, p.alpha)) {
            continue;
          }
          if (level <= 1) {
            pick = static_cast<int>(si);
            break;
          }
          if (pick < 0 || uses < pick_uses) {
            pick = static_cast<int>(si);
            pick_uses = uses;
          }
        }
        if (pick >= 0) {
          valid_partition vp;
          vp.node = node;
          vp.subsets = cand;
          vp.chosen = cand[static_cast<std::size_t>(pick)];
          return {vp, level};
        }
      }
    }
    for (const auto& cand : candidates) {
      for (const auto& s : cand) {
        if (static_cast<int>(s.size()) != portion) continue;
        valid_partition vp;
        vp.node = node;
        vp.subsets = cand;
        vp.chosen = s;
        return {vp, 3};
      }
    }
    throw no_valid_partition_error(node);
  }
};

}  // end of namespace detail

inline index_array_set build_index_arrays(const code_params& p,
                                          const std::vector<partition_override>& overrides = {}) {
  validate_params(p);
  index_array_set out;
  out.params = p;
  out.g = group_count(p.k, p.r);
  out.portion = portion_size(p.alpha, p.r);
  out.groups.resize(static_cast<std::size_t>(out.g));
  for (int j = 1; j <= p.k; ++j) {
    out.groups[static_cast<std::size_t>((j - 1) / p.r)].push_back(j);
  }

  detail::construction_state st;
  st.p = p;
  st.g = out.g;
  st.portion = out.portion;
  st.arrays = p.r - 1;
  st.appended.assign(static_cast<std::size_t>(st.arrays),
                     std::vector<std::vector<cell>>(static_cast<std::size_t>(p.alpha),
                                                    std::vector<cell>(static_cast<std::size_t>(out.g))));
  st.chosen_group.resize(static_cast<std::size_t>(out.g));
  st.established.resize(static_cast<std::size_t>(out.g));

  std::map<int, const partition_override*> by_node;
  for (const auto& ov : overrides) {
    if (ov.node < 1 || ov.node > p.k) throw parameter_error("override node out of range");
    std::vector<char> hit(static_cast<std::size_t>(p.alpha) + 1, 0);
    int total = 0;
    for (const auto& s : ov.subsets) {
      for (int v : s) {
        if (v < 1 || v > p.alpha || hit[static_cast<std::size_t>(v)]) {
          throw parameter_error("override subsets are not a partition of 1..alpha");
        }
        hit[static_cast<std::size_t>(v)] = 1;
        ++total;
      }
    }
    if (total != p.alpha) throw parameter_error("override subsets are not a partition of 1..alpha");
    bool chosen_found = false;
    std::vector<int> want = ov.chosen;
    std::sort(want.begin(), want.end());
    for (const auto& s : ov.subsets) {
      std::vector<int> sorted = s;
      std::sort(sorted.begin(), sorted.end());
      if (sorted == want) chosen_found = true;
    }
    if (!chosen_found) throw parameter_error("override chosen subset is not one of its subsets");
    if (by_node.count(ov.node)) throw parameter_error("duplicate override for one node");
    by_node[ov.node] = &ov;
  }

  out.partitions.resize(static_cast<std::size_t>(p.k));
  for (int j = 1; j <= p.k; ++j) {
    const int nu = (j - 1) / p.r + 1;
    const partition_schedule sch = schedule_for_group(p, nu);
    valid_partition vp;
    int level = 0;
    const auto ov_it = by_node.find(j);
    if (ov_it != by_node.end()) {
      vp.node = j;
      vp.subsets = ov_it->second->subsets;
      for (auto& s : vp.subsets) std::sort(s.begin(), s.end());
      vp.chosen = ov_it->second->chosen;
      std::sort(vp.chosen.begin(), vp.chosen.end());
    } else {
      std::tie(vp, level) = st.find_partition(j, nu, sch);
    }
    if (st.established[static_cast<std::size_t>(nu - 1)].empty()) {
      st.established[static_cast<std::size_t>(nu - 1)] = vp.subsets;
    }
    ++st.chosen_global[vp.chosen];
    ++st.chosen_group[static_cast<std::size_t>(nu - 1)][vp.chosen];
    st.place_residuals(vp, nu);
    out.relax_level = std::max(out.relax_level, level);
    out.partitions[static_cast<std::size_t>(j - 1)] = std::move(vp);
  }

  out.appended = std::move(st.appended);
  out.unscheduled = std::move(st.unscheduled);
  std::sort(out.unscheduled.begin(), out.unscheduled.end());
  return out;
}

// condition 1: some portion-sized subset of the partition is both produced by
// the group's (run, step) walk pattern and addresses still-empty cells in the
// group's appended column of at least one parity array
inline bool check_condition1(const std::vector<std::vector<int>>& subsets,
                             const partition_schedule& sch, const index_array_set& arrays,
                             int column) {
  for (const auto& s : subsets) {
    if (static_cast<int>(s.size()) != sch.portion) continue;
    std::vector<int> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (!subset_matches_pattern(sorted, sch.run, sch.step, arrays.params.alpha)) continue;
    for (int m = 0; m < arrays.params.r - 1; ++m) {
      bool free_rows = true;
      for (int row : sorted) {
        if (!arrays.appended[static_cast<std::size_t>(m)][static_cast<std::size_t>(row - 1)]
                            [static_cast<std::size_t>(column)].empty()) {
          free_rows = false;
          break;
        }
      }
      if (free_rows) return true;
    }
  }
  return false;
}

// condition 2 for a finished construction: inside every group all nodes use
// the same partition, designated subsets are pairwise distinct across the
// whole code, and when portion divides alpha the designated subsets within a
// group are pairwise disjoint
inline bool check_condition2(const index_array_set& arrays) {
  const auto& p = arrays.params;
  std::set<std::vector<int>> chosen_seen;
  for (const auto& vp : arrays.partitions) {
    if (!chosen_seen.insert(vp.chosen).second) return false;
  }
  for (const auto& members : arrays.groups) {
    const auto canon = detail::canonical_partition(
        arrays.partitions[static_cast<std::size_t>(members[0] - 1)].subsets);
    for (int node : members) {
      const auto& vp = arrays.partitions[static_cast<std::size_t>(node - 1)];
      if (detail::canonical_partition(vp.subsets) != canon) return false;
    }
    if (p.alpha % arrays.portion == 0) {
      std::vector<char> used(static_cast<std::size_t>(p.alpha) + 1, 0);
      for (int node : members) {
        for (int row : arrays.partitions[static_cast<std::size_t>(node - 1)].chosen) {
          if (used[static_cast<std::size_t>(row)]) return false;
          used[static_cast<std::size_t>(row)] = 1;
        }
      }
    }
  }
  return true;
}

// every residual row of every systematic node must have landed in its group's
// appended column, exactly once across the parity arrays. callers may only ask
// when r divides alpha; ragged shapes legitimately leave rows unscheduled.
inline bool residuals_fully_scheduled(const index_array_set& arrays) {
  const auto& p = arrays.params;
  if (p.alpha % p.r != 0) {
    throw precondition_violated_error("residual accounting requires r to divide alpha");
  }
  if (!arrays.unscheduled.empty()) return false;
  std::map<std::pair<int, int>, int> seen;  // (row, node) -> occurrences
  for (int m = 0; m < p.r - 1; ++m) {
    for (int row = 1; row <= p.alpha; ++row) {
      for (int c = 0; c < arrays.g; ++c) {
        const cell e = arrays.appended[static_cast<std::size_t>(m)][static_cast<std::size_t>(row - 1)]
                                      [static_cast<std::size_t>(c)];
        if (e.empty()) continue;
        if (arrays.group_of(e.j) != c + 1) return false;
        const auto& chosen = arrays.chosen_rows(e.j);
        if (!std::binary_search(chosen.begin(), chosen.end(), row)) return false;
        ++seen[{e.i, e.j}];
      }
    }
  }
  for (int j = 1; j <= p.k; ++j) {
    const auto& chosen = arrays.chosen_rows(j);
    for (int row = 1; row <= p.alpha; ++row) {
      const bool designated = std::binary_search(chosen.begin(), chosen.end(), row);
      const auto it = seen.find({row, j});
      const int count = it == seen.end() ? 0 : it->second;
      if (designated && count != 0) return false;
      if (!designated && count != 1) return false;
    }
  }
  return true;
}

}  // end of namespace htec
