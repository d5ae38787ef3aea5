// report generation: the partition comparison table, bandwidth sweeps,
// multi failure summaries, the published-transfer comparison, and a small
// bounds sweep. numeric expectations are pinned as exact rationals where
// the quantity is combinatorial.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "htec/analysis.hpp"

namespace {

TEST(partitions, three_layouts_rank_as_expected) {
  const std::vector<htec::partition_report_row> rows = htec::partition_comparison();
  ASSERT_EQ(3u, rows.size());
  EXPECT_EQ("D1", rows[0].label);
  EXPECT_TRUE(rows[0].condition1);
  EXPECT_TRUE(rows[0].condition2);
  EXPECT_NEAR(8.0 / 3.0, rows[0].gamma, 1e-9);
  EXPECT_EQ("D2", rows[1].label);
  EXPECT_FALSE(rows[1].condition1);
  EXPECT_TRUE(rows[1].condition2);
  EXPECT_NEAR(3.0, rows[1].gamma, 1e-9);
  EXPECT_EQ("D3", rows[2].label);
  EXPECT_FALSE(rows[2].condition1);
  EXPECT_FALSE(rows[2].condition2);
  EXPECT_NEAR(88.0 / 27.0, rows[2].gamma, 1e-9);
}

TEST(partitions, per_node_symbol_loads) {
  const std::vector<htec::partition_report_row> rows = htec::partition_comparison();
  EXPECT_EQ(std::vector<int>(6, 24), rows[0].per_node_symbols);
  EXPECT_EQ(std::vector<int>({24, 24, 24, 30, 30, 30}), rows[1].per_node_symbols);
  EXPECT_EQ(std::vector<int>({28, 28, 30, 30, 30, 30}), rows[2].per_node_symbols);
}

TEST(sweep, reference_code_bandwidth_curve) {
  const auto pts = htec::bandwidth_sweep(6, 3, {1, 3, 6, 9});
  ASSERT_EQ(4u, pts.size());
  EXPECT_NEAR(6.0, pts[0].gamma, 1e-9);
  EXPECT_NEAR(10.0 / 3.0, pts[1].gamma, 1e-9);
  EXPECT_NEAR(28.0 / 9.0, pts[2].gamma, 1e-9);
  EXPECT_NEAR(8.0 / 3.0, pts[3].gamma, 1e-9);
  // i/o columns for the default disk model
  EXPECT_NEAR(6.0, pts[0].random_avg, 1e-9);
  EXPECT_NEAR(102.0, pts[0].sequential_avg, 1e-9);
  EXPECT_NEAR(16.0, pts[3].random_avg, 1e-9);
  EXPECT_NEAR(32.0, pts[3].sequential_avg, 1e-9);
}

TEST(sweep, wide_code_bandwidth_curve) {
  const auto pts = htec::bandwidth_sweep(10, 4, {1, 2, 4, 8, 16, 32, 64});
  ASSERT_EQ(7u, pts.size());
  EXPECT_NEAR(10.0, pts[0].gamma, 1e-9);
  EXPECT_NEAR(5.9, pts[1].gamma, 1e-9);
  EXPECT_NEAR(4.45, pts[2].gamma, 1e-9);
  EXPECT_NEAR(3.45, pts[5].gamma, 1e-9);
  EXPECT_NEAR(3.25, pts[6].gamma, 1e-9);
  // halving the stripe at alpha=2 already saves at least 40 percent
  EXPECT_GE(1.0 - pts[1].gamma / 10.0, 0.40);
}

TEST(multi, double_failures_on_the_full_sub_packetization_code) {
  const htec::code_instance ci = htec::assign_coefficients(
      htec::code_params{9, 6, 3, 9, htec::field_spec{8, 0}}, 7);
  const htec::multi_failure_summary s = htec::multi_failure_report(ci, 2);
  EXPECT_EQ(15, s.sets);
  const std::map<int, int> want = {{42, 6}, {46, 9}};
  EXPECT_EQ(want, s.histogram);
  EXPECT_NEAR(44.4 / 9.0, s.gamma, 1e-9);
  EXPECT_NEAR(44.4, s.avg_symbols, 1e-9);
  EXPECT_DOUBLE_EQ(54.0, s.rs_symbols);
  EXPECT_NEAR(100.0 * (54.0 - 44.4) / 54.0, s.reduction_pct, 1e-9);
}

TEST(multi, t1_report_agrees_with_single_planning) {
  const htec::code_instance ci = htec::assign_coefficients(
      htec::code_params{9, 6, 3, 9, htec::field_spec{8, 0}}, 7);
  const htec::multi_failure_summary s = htec::multi_failure_report(ci, 1);
  EXPECT_EQ(6, s.sets);
  EXPECT_NEAR(24.0, s.avg_symbols, 1e-9);
  EXPECT_NEAR(8.0 / 3.0, s.gamma, 1e-9);
}

TEST(transfer, stays_below_both_published_piggyback_curves) {
  const std::vector<htec::transfer_row> rows = htec::transfer_comparison();
  ASSERT_EQ(7u, rows.size());
  EXPECT_EQ("(12,10)", rows[0].code);
  EXPECT_DOUBLE_EQ(75.0, rows[0].piggyback1);
  EXPECT_TRUE(std::isnan(rows[0].piggyback2));
  EXPECT_DOUBLE_EQ(66.5, rows[2].piggyback2);
  for (const auto& row : rows) {
    EXPECT_LT(row.htec, row.piggyback1) << row.code;
    if (!std::isnan(row.piggyback2)) EXPECT_LT(row.htec, row.piggyback2) << row.code;
  }
}

TEST(transfer, measured_values_are_stable) {
  const std::vector<htec::transfer_row> rows = htec::transfer_comparison();
  const double want[] = {62.5, 63.19444, 60.15625, 60.64815, 41.66667, 44.72222, 41.20370};
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    EXPECT_NEAR(want[idx], rows[idx].htec, 1e-4) << rows[idx].code;
  }
}

TEST(bounds, small_grid_has_no_violations) {
  const auto cells = htec::bounds_sweep(6, {2, 3}, 6, 2);
  ASSERT_FALSE(cells.empty());
  long long violations = 0, unsolved = 0, sets = 0;
  for (const auto& c : cells) {
    violations += c.violations;
    unsolved += c.unsolved;
    sets += c.sets;
  }
  EXPECT_EQ(0, violations);
  EXPECT_EQ(0, unsolved);
  EXPECT_GT(sets, 100);
}

TEST(bounds, cells_are_deterministic_across_thread_counts) {
  const auto one = htec::bounds_sweep(5, {2}, 4, 1);
  const auto many = htec::bounds_sweep(5, {2}, 4, 4);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t idx = 0; idx < one.size(); ++idx) {
    EXPECT_EQ(one[idx].k, many[idx].k);
    EXPECT_EQ(one[idx].alpha, many[idx].alpha);
    EXPECT_EQ(one[idx].t, many[idx].t);
    EXPECT_EQ(one[idx].sets, many[idx].sets);
    EXPECT_EQ(one[idx].violations, many[idx].violations);
    EXPECT_DOUBLE_EQ(one[idx].min_gamma, many[idx].min_gamma);
    EXPECT_DOUBLE_EQ(one[idx].max_gamma, many[idx].max_gamma);
  }
}

TEST(reports, json_schemas_are_stable) {
  const auto pts = htec::bandwidth_sweep(6, 3, {6});
  const nlohmann::json sweep_json = htec::to_json(pts);
  ASSERT_TRUE(sweep_json.is_array());
  for (const char* key : {"alpha", "gamma", "random_avg", "sequential_avg", "read_ratio",
                          "total_symbols"}) {
    EXPECT_TRUE(sweep_json[0].contains(key)) << key;
  }
  const nlohmann::json part_json = htec::to_json(htec::partition_comparison());
  for (const char* key : {"label", "condition1", "condition2", "gamma", "per_node_symbols"}) {
    EXPECT_TRUE(part_json[0].contains(key)) << key;
  }
  const nlohmann::json transfer_json = htec::to_json(htec::transfer_comparison());
  for (const char* key : {"code", "n", "k", "piggyback1", "htec"}) {
    EXPECT_TRUE(transfer_json[0].contains(key)) << key;
  }
  const std::string csv = htec::to_csv(pts);
  EXPECT_EQ(0u, csv.find("alpha,gamma,random_avg,sequential_avg,read_ratio,total_symbols"));
}

}  // end of namespace
