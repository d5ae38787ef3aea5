// disk i/o accounting for repair plans: run merging, the fleet averages for
// the reference code, uniform access at full sub-packetization, and the
// partition re-placement search that trades random for sequential reads.

#include <gtest/gtest.h>

#include <vector>

#include "htec/codec.hpp"
#include "htec/construction.hpp"
#include "htec/iomodel.hpp"
#include "htec/repair.hpp"

namespace {

using htec::code_instance;
using htec::code_params;
using htec::disk_model;
using htec::field_spec;

code_params params(int n, int k, int alpha, int w) {
  return code_params{n, k, n - k, alpha, field_spec{w, 0}};
}

TEST(count_reads, contiguous_rows_merge_into_one_run) {
  const code_params p = params(9, 6, 6, 4);
  const auto arrays = htec::build_index_arrays(p);
  // node 1 reads rows {1,2} from most helpers and {1,2,4} from two of them:
  // eight runs of contiguous rows plus two separated rows make ten seeks
  const htec::io_stats st =
      htec::count_reads(htec::plan_single_repair(arrays, 1), p, disk_model{});
  EXPECT_EQ(10, st.random_ios);
  // 18 symbols at 3 units each, minus one unit per seek already counted
  EXPECT_EQ(44, st.sequential_ios);
  EXPECT_EQ(54, st.total_ios());
}

TEST(count_reads, alpha1_reads_whole_nodes_like_a_flat_code) {
  const code_params p = params(9, 6, 1, 4);
  const auto arrays = htec::build_index_arrays(p);
  const htec::fleet_io fl = htec::fleet_single_io(arrays, disk_model{});
  // one seek per helper and the rest of each node streams sequentially
  EXPECT_DOUBLE_EQ(6.0, fl.random_avg);
  EXPECT_DOUBLE_EQ(102.0, fl.sequential_avg);
  EXPECT_DOUBLE_EQ(6.0, fl.gamma);
}

TEST(count_reads, fleet_numbers_for_the_reference_code) {
  const code_params p = params(9, 6, 6, 4);
  const htec::fleet_io fl = htec::fleet_single_io(htec::build_index_arrays(p), disk_model{});
  EXPECT_NEAR(13.3333, fl.random_avg, 1e-3);
  EXPECT_NEAR(42.6667, fl.sequential_avg, 1e-3);
  EXPECT_NEAR(3.1111, fl.gamma, 1e-4);
  EXPECT_NEAR(fl.random_avg / (fl.random_avg + fl.sequential_avg), fl.read_ratio, 1e-12);
}

TEST(count_reads, io_unit_granularity_scales_the_block_size) {
  const code_params p = params(9, 6, 6, 4);
  const auto plan = htec::plan_single_repair(htec::build_index_arrays(p), 1);
  // a transfer unit as large as a node row makes every read one seek
  disk_model coarse;
  coarse.io_bytes = coarse.node_bytes / 6;
  const htec::io_stats st = htec::count_reads(plan, p, coarse);
  EXPECT_EQ(st.total_ios(), st.random_ios + st.sequential_ios);
  EXPECT_EQ(18, st.total_ios());
}

TEST(uniform_access, full_sub_packetization_seeks_once_per_helper) {
  EXPECT_TRUE(htec::verify_uniform_access(htec::build_index_arrays(params(9, 6, 9, 4))));
  EXPECT_THROW(htec::verify_uniform_access(htec::build_index_arrays(params(9, 6, 6, 4))),
               htec::precondition_violated_error);
}

TEST(optimize, reference_instance_sheds_random_reads) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  const htec::optimize_result res = htec::optimize_io(ci, disk_model{}, 100000);
  EXPECT_EQ(360, res.candidates_tried);
  EXPECT_EQ(1, res.moves_applied);
  EXPECT_NEAR(13.3333, res.before.random_avg, 1e-3);
  EXPECT_NEAR(11.3333, res.after.random_avg, 1e-3);
  // bandwidth must not regress while i/o improves
  EXPECT_DOUBLE_EQ(res.before.gamma, res.after.gamma);
  EXPECT_EQ(res.before.total_symbols, res.after.total_symbols);
  EXPECT_TRUE(res.instance.verified);
  // the accepted move re-partitions the second group
  EXPECT_EQ(std::vector<int>({1, 5}), res.instance.arrays.chosen_rows(4));
  EXPECT_EQ(std::vector<int>({2, 6}), res.instance.arrays.chosen_rows(5));
  EXPECT_EQ(std::vector<int>({3, 4}), res.instance.arrays.chosen_rows(6));
}

TEST(optimize, optimized_appended_columns_golden) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  const htec::optimize_result res = htec::optimize_io(ci, disk_model{}, 100000);
  const std::vector<htec::cell> p2_col8 = {{2, 4}, {1, 5}, {1, 6}, {5, 6}, {6, 4}, {5, 5}};
  const std::vector<htec::cell> p3_col8 = {{3, 4}, {3, 5}, {2, 6}, {6, 6}, {4, 4}, {4, 5}};
  for (int i = 1; i <= 6; ++i) {
    EXPECT_EQ(p2_col8[static_cast<std::size_t>(i - 1)], res.instance.arrays.at(2, i, 1));
    EXPECT_EQ(p3_col8[static_cast<std::size_t>(i - 1)], res.instance.arrays.at(3, i, 1));
  }
}

TEST(optimize, zero_budget_changes_nothing) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  const htec::optimize_result res = htec::optimize_io(ci, disk_model{}, 0);
  EXPECT_EQ(0, res.candidates_tried);
  EXPECT_EQ(0, res.moves_applied);
  EXPECT_DOUBLE_EQ(res.before.random_avg, res.after.random_avg);
}

}  // end of namespace
