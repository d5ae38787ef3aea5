#pragma once

// disk read accounting. a node's payload is alpha equal blocks stored in row
// order. the rows a repair plan reads from one helper sort into maximal
// consecutive runs; every run starts with one random io and continues with
// sequential ios, and a block larger than the io size costs ceil(block/io)
// ios of which only the first in a run is random.

#include <chrono>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "htec/codec.hpp"
#include "htec/construction.hpp"
#include "htec/repair.hpp"

namespace htec {

struct disk_model {
  std::uint64_t node_bytes = 9437184;
  std::uint64_t io_bytes = 524288;
};

struct io_stats {
  long long random_ios = 0;
  long long sequential_ios = 0;
  long long total_ios() const { return random_ios + sequential_ios; }
};

inline long long ios_per_block(const disk_model& d, int alpha) {
  const std::uint64_t block = (d.node_bytes + static_cast<std::uint64_t>(alpha) - 1) /
                              static_cast<std::uint64_t>(alpha);
  const std::uint64_t per = (block + d.io_bytes - 1) / d.io_bytes;
  return per < 1 ? 1 : static_cast<long long>(per);
}

inline io_stats count_reads(const repair_plan& plan, const code_params& p, const disk_model& d) {
  const long long per = ios_per_block(d, p.alpha);
  io_stats st;
  long long blocks = 0;
  long long runs = 0;
  for (const auto& [node, rows] : plan.reads) {
    (void)node;
    blocks += static_cast<long long>(rows.size());
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
      if (idx == 0 || rows[idx] != rows[idx - 1] + 1) ++runs;
    }
  }
  st.random_ios = runs;
  st.sequential_ios = blocks * per - runs;
  return st;
}

struct fleet_io {
  double random_avg = 0;
  double sequential_avg = 0;
  double read_ratio = 0;  // random ios over total ios
  double gamma = 0;
  long long total_symbols = 0;
  long long total_random = 0;
  long long total_ios = 0;
};

// equal-weight average over the k single systematic failures
inline fleet_io fleet_single_io(const index_array_set& arrays, const disk_model& d) {
  const code_params& p = arrays.params;
  fleet_io fl;
  for (int node = 1; node <= p.k; ++node) {
    const repair_plan plan = plan_single_repair(arrays, node);
    const io_stats st = count_reads(plan, p, d);
    fl.total_symbols += plan.total_symbols();
    fl.total_random += st.random_ios;
    fl.total_ios += st.total_ios();
  }
  fl.random_avg = static_cast<double>(fl.total_random) / p.k;
  fl.sequential_avg = static_cast<double>(fl.total_ios - fl.total_random) / p.k;
  fl.read_ratio = fl.total_ios == 0 ? 0 : static_cast<double>(fl.total_random) / fl.total_ios;
  fl.gamma = static_cast<double>(fl.total_symbols) / (static_cast<double>(p.k) * p.alpha);
  return fl;
}

// at full sub-packetization every node of the first group repairs with
// exactly one run per helper
inline bool verify_uniform_access(const index_array_set& arrays) {
  const code_params& p = arrays.params;
  if (static_cast<long long>(p.alpha) != ipow_ll(p.r, arrays.g)) {
    throw precondition_violated_error("uniform access holds only at alpha = r^ceil(k/r)");
  }
  for (int node : arrays.groups.front()) {
    const repair_plan plan = plan_single_repair(arrays, node);
    const io_stats st = count_reads(plan, p, disk_model{});
    if (st.random_ios != p.n - 1) return false;
  }
  return true;
}

namespace detail {

// visits partitions of {1..alpha} into subsets of size portion; subsets are
// ascending and ordered by smallest element. fn returning false stops.
template <typename Fn>
struct partition_walker {
  int alpha;
  int portion;
  Fn& fn;
  std::vector<std::vector<int>> acc;
  std::vector<char> used;

  bool next_subset() {
    int first = 0;
    for (int v = 1; v <= alpha; ++v) {
      if (!used[static_cast<std::size_t>(v)]) {
        first = v;
        break;
      }
    }
    if (first == 0) return fn(static_cast<const std::vector<std::vector<int>>&>(acc));
    used[static_cast<std::size_t>(first)] = 1;
    acc.push_back({first});
    const bool keep = grow(first + 1);
    acc.pop_back();
    used[static_cast<std::size_t>(first)] = 0;
    return keep;
  }

  bool grow(int from) {
    if (static_cast<int>(acc.back().size()) == portion) return next_subset();
    for (int v = from; v <= alpha; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = 1;
      acc.back().push_back(v);
      const bool keep = grow(v + 1);
      acc.back().pop_back();
      used[static_cast<std::size_t>(v)] = 0;
      if (!keep) return false;
    }
    return true;
  }
};

template <typename Fn>
inline void each_uniform_partition(int alpha, int portion, Fn&& fn) {
  partition_walker<Fn> w{alpha, portion, fn, {}, std::vector<char>(static_cast<std::size_t>(alpha) + 1, 0)};
  w.next_subset();
}

// visits injective assignments of count slots over m subset indices in
// lexicographic order
template <typename Fn>
inline bool each_injective_assignment(int m, int count, std::vector<int>& acc,
                                      std::vector<char>& taken, Fn&& fn) {
  if (static_cast<int>(acc.size()) == count) {
    return fn(static_cast<const std::vector<int>&>(acc));
  }
  for (int idx = 0; idx < m; ++idx) {
    if (taken[static_cast<std::size_t>(idx)]) continue;
    taken[static_cast<std::size_t>(idx)] = 1;
    acc.push_back(idx);
    const bool keep = each_injective_assignment(m, count, acc, taken, fn);
    acc.pop_back();
    taken[static_cast<std::size_t>(idx)] = 0;
    if (!keep) return false;
  }
  return true;
}

}  // end of namespace detail

struct optimize_result {
  code_instance instance;
  fleet_io before;
  fleet_io after;
  long long candidates_tried = 0;
  int moves_applied = 0;
};

// best-improvement local search over whole-group partition rewrites. a move
// replaces one group's partition and chosen assignment for all its nodes,
// keeps the total repair symbols exactly unchanged, and strictly reduces the
// fleet's random reads. accepted moves re-assign coefficients and re-verify.
// budget caps candidate evaluations; 0 returns the instance unchanged.
inline optimize_result optimize_io(const code_instance& ci, const disk_model& d, long long budget,
                                   int max_attempts = 4096, std::uint64_t time_limit_ms = 0,
                                   bool allow_large = false) {
  const code_params& p = ci.params;
  optimize_result res{ci, fleet_single_io(ci.arrays, d), {}, 0, 0};
  res.after = res.before;
  if (budget <= 0) return res;
  const auto started = std::chrono::steady_clock::now();
  const auto out_of_time = [&] {
    if (time_limit_ms == 0) return false;
    const auto spent = std::chrono::steady_clock::now() - started;
    return std::chrono::duration_cast<std::chrono::milliseconds>(spent).count() >=
           static_cast<long long>(time_limit_ms);
  };
  const long long base_symbols = res.before.total_symbols;
  bool exhausted = false;
  while (!exhausted) {
    long long best_random = res.after.total_random;
    std::vector<partition_override> best_overrides;
    std::vector<partition_override> current;
    for (const valid_partition& vp : res.instance.arrays.partitions) {
      current.push_back(partition_override{vp.node, vp.subsets, vp.chosen});
    }
    for (int nu = 1; nu <= res.instance.arrays.g && !exhausted; ++nu) {
      const int portion = res.instance.arrays.portion;
      if (p.alpha % portion != 0) continue;
      const int m = p.alpha / portion;
      const std::vector<int>& nodes = res.instance.arrays.groups[static_cast<std::size_t>(nu - 1)];
      if (static_cast<int>(nodes.size()) > m) continue;
      detail::each_uniform_partition(p.alpha, portion, [&](const std::vector<std::vector<int>>& q) {
        std::vector<int> acc;
        std::vector<char> taken(static_cast<std::size_t>(m), 0);
        detail::each_injective_assignment(
            m, static_cast<int>(nodes.size()), acc, taken, [&](const std::vector<int>& sigma) {
              if (res.candidates_tried >= budget || out_of_time()) {
                exhausted = true;
                return false;
              }
              ++res.candidates_tried;
              std::vector<partition_override> overrides = current;
              for (std::size_t t = 0; t < nodes.size(); ++t) {
                partition_override& ov = overrides[static_cast<std::size_t>(nodes[t] - 1)];
                ov.subsets = q;
                ov.chosen = q[static_cast<std::size_t>(sigma[t])];
              }
              index_array_set trial;
              try {
                trial = build_index_arrays(p, overrides);
              } catch (const construction_error&) {
                return true;
              }
              const fleet_io fl = fleet_single_io(trial, d);
              if (fl.total_symbols == base_symbols && fl.total_random < best_random) {
                best_random = fl.total_random;
                best_overrides = overrides;
              }
              return true;
            });
        return !exhausted;
      });
    }
    if (best_overrides.empty()) break;
    code_instance moved = assign_coefficients(build_index_arrays(p, best_overrides),
                                              res.instance.seed, max_attempts, allow_large);
    res.instance = std::move(moved);
    res.after = fleet_single_io(res.instance.arrays, d);
    ++res.moves_applied;
  }
  return res;
}

}  // end of namespace htec
