// field arithmetic oracles, the coefficient search, encode/decode round
// trips, and the json serialization with its integrity checksum.

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include <json.hpp>

#include "htec/codec.hpp"
#include "htec/construction.hpp"
#include "htec/galois.hpp"
#include "htec/serialize.hpp"

namespace {

using htec::code_instance;
using htec::code_params;
using htec::field;
using htec::field_spec;
using htec::make_field;
using htec::gf_mat;
using htec::gf_t;
using htec::gf_vec;

code_params params(int n, int k, int alpha, int w) {
  return code_params{n, k, n - k, alpha, field_spec{w, 0}};
}

gf_mat random_message(const code_params& p, std::mt19937_64& rng, int field_size) {
  std::uniform_int_distribution<int> dist(0, field_size - 1);
  gf_mat a(static_cast<std::size_t>(p.alpha), gf_vec(static_cast<std::size_t>(p.k)));
  for (auto& row : a) {
    for (auto& v : row) v = static_cast<gf_t>(dist(rng));
  }
  return a;
}

TEST(field_ops, addition_is_xor) {
  const field f = make_field(field_spec{4, 0});
  EXPECT_EQ(0x6, f.add(0x3, 0x5));
  for (int a = 0; a < 16; ++a) {
    EXPECT_EQ(0, f.add(static_cast<gf_t>(a), static_cast<gf_t>(a)));
    EXPECT_EQ(a, f.add(static_cast<gf_t>(a), 0));
  }
}

TEST(field_ops, gf16_reduction_follows_the_default_polynomial) {
  // x * x^3 = x^4, reduced by x^4 + x^3 + 1 to x^3 + 1
  const field f = make_field(field_spec{4, 0});
  EXPECT_EQ(0x19u, f.poly());
  EXPECT_EQ(0b1001, f.mul(0x2, 0x8));
  for (int a = 0; a < 16; ++a) {
    EXPECT_EQ(a, f.mul(static_cast<gf_t>(a), 1));
    EXPECT_EQ(0, f.mul(static_cast<gf_t>(a), 0));
  }
}

TEST(field_ops, gf32_uses_the_stated_polynomial) {
  EXPECT_EQ(0x29u, make_field(field_spec{5, 0}).poly());
}

TEST(field_ops, inverses_cover_every_nonzero_element) {
  for (int w : {1, 4, 5, 8}) {
    const field f = make_field(field_spec{w, 0});
    for (int a = 1; a < f.size(); ++a) {
      EXPECT_EQ(1, f.mul(static_cast<gf_t>(a), f.inv(static_cast<gf_t>(a)))) << "w=" << w;
    }
    EXPECT_THROW(f.inv(0), htec::zero_inverse_error);
  }
}

TEST(field_ops, axioms_hold_exhaustively_in_gf16) {
  const field f = make_field(field_spec{4, 0});
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      const auto ga = static_cast<gf_t>(a), gb = static_cast<gf_t>(b);
      EXPECT_EQ(f.mul(ga, gb), f.mul(gb, ga));
      EXPECT_EQ(f.add(ga, gb), f.add(gb, ga));
      for (int c = 0; c < 16; ++c) {
        const auto gc = static_cast<gf_t>(c);
        EXPECT_EQ(f.mul(f.mul(ga, gb), gc), f.mul(ga, f.mul(gb, gc)));
        EXPECT_EQ(f.mul(ga, f.add(gb, gc)), f.add(f.mul(ga, gb), f.mul(ga, gc)));
      }
    }
  }
}

TEST(field_ops, gf256_axioms_on_sampled_triples) {
  const field f = make_field(field_spec{8, 0});
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dist(0, 255);
  for (int trial = 0; trial < 20000; ++trial) {
    const auto a = static_cast<gf_t>(dist(rng));
    const auto b = static_cast<gf_t>(dist(rng));
    const auto c = static_cast<gf_t>(dist(rng));
    ASSERT_EQ(f.mul(a, b), f.mul(b, a));
    ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
    ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
  }
}

TEST(linear_solver, identity_returns_rhs) {
  const field f = make_field(field_spec{4, 0});
  gf_mat a(6, gf_vec(6, 0));
  for (int i = 0; i < 6; ++i) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  const gf_vec b = {3, 1, 4, 1, 5, 9};
  EXPECT_EQ(b, htec::solve_linear_system(f, a, b));
}

TEST(linear_solver, duplicated_row_is_rank_deficient) {
  const field f = make_field(field_spec{4, 0});
  gf_mat a = {{1, 2}, {1, 2}};
  EXPECT_THROW(htec::solve_linear_system(f, a, {1, 1}), htec::rank_deficient_error);
  EXPECT_EQ(1, htec::matrix_rank(f, a));
}

TEST(linear_solver, random_invertible_system_round_trips) {
  const field f = make_field(field_spec{4, 0});
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dist(0, 15);
  for (int trial = 0; trial < 50; ++trial) {
    gf_mat a(6, gf_vec(6));
    do {
      for (auto& row : a) {
        for (auto& v : row) v = static_cast<gf_t>(dist(rng));
      }
    } while (htec::matrix_rank(f, a) < 6);
    gf_vec x0(6);
    for (auto& v : x0) v = static_cast<gf_t>(dist(rng));
    gf_vec b(6, 0);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        b[static_cast<std::size_t>(i)] = f.add(
            b[static_cast<std::size_t>(i)],
            f.mul(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                  x0[static_cast<std::size_t>(j)]));
      }
    }
    EXPECT_EQ(x0, htec::solve_linear_system(f, a, b));
  }
}

TEST(search, gf16_code_verifies_and_is_deterministic) {
  const code_params p = params(9, 6, 6, 4);
  const code_instance ci = htec::assign_coefficients(p, 1234);
  EXPECT_TRUE(ci.verified);
  EXPECT_EQ(313, ci.attempt);
  const code_instance again = htec::assign_coefficients(p, 1234);
  EXPECT_EQ(ci.coeffs, again.coeffs);
  for (int l = 1; l <= p.r; ++l) {
    for (int i = 1; i <= p.alpha; ++i) {
      for (int slot = 0; slot < p.k + ci.arrays.g; ++slot) {
        if (ci.slot_active(l, i, slot)) {
          EXPECT_NE(0, ci.coeffs[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(i - 1)]
                                [static_cast<std::size_t>(slot)]);
        }
      }
    }
  }
}

TEST(search, replication_degenerate_verifies_immediately) {
  const code_instance ci = htec::assign_coefficients(params(2, 1, 1, 1), 1);
  EXPECT_TRUE(ci.verified);
  EXPECT_EQ(0, ci.attempt);
  // the single parity is a plain copy of the single data symbol
  EXPECT_EQ(1, ci.coeffs[0][0][0]);
}

TEST(search, too_small_field_reports_the_sufficient_size) {
  try {
    htec::assign_coefficients(params(9, 6, 9, 2), 1, 3);
    FAIL() << "expected the search to give up";
  } catch (const htec::mds_search_exhausted_error& e) {
    // C(9,6) * r * alpha = 84 * 3 * 9
    EXPECT_EQ(2268ull, e.sufficient_field_size);
  }
}

TEST(verify, dropping_a_base_coefficient_to_zero_breaks_mds) {
  code_instance ci = htec::assign_coefficients(params(5, 3, 2, 4), 9);
  ASSERT_TRUE(htec::verify_mds(ci));
  code_instance broken = ci;
  broken.coeffs[0][0][0] = 0;  // first base slot of the first parity row
  EXPECT_FALSE(htec::verify_mds(broken));
  // some appended-slot zeroings leave every k-subset invertible at this
  // shape; the search demands nonzero everywhere, not that every single
  // coefficient is load bearing
  code_instance lucky = ci;
  lucky.coeffs[1][0][3] = 0;
  EXPECT_TRUE(htec::verify_mds(lucky));
}

code_instance all_ones_instance(const code_params& p) {
  code_instance ci(p, htec::build_index_arrays(p), make_field(field_spec{1, 0}));
  for (int l = 1; l <= p.r; ++l) {
    for (int i = 1; i <= p.alpha; ++i) {
      for (int slot = 0; slot < p.k + ci.arrays.g; ++slot) {
        if (ci.slot_active(l, i, slot)) {
          ci.coeffs[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(i - 1)]
                   [static_cast<std::size_t>(slot)] = 1;
        }
      }
    }
  }
  return ci;
}

TEST(verify, all_ones_over_gf2_collapses_once_columns_overlap) {
  // with two systematic nodes the appended cells keep the parity rows
  // independent even over gf(2); a third node makes the unweighted sums
  // collide
  EXPECT_TRUE(htec::verify_mds(all_ones_instance(params(4, 2, 2, 1))));
  EXPECT_FALSE(htec::verify_mds(all_ones_instance(params(5, 3, 2, 1))));
  EXPECT_FALSE(htec::verify_mds(all_ones_instance(params(6, 4, 2, 1))));
}

TEST(codec, zero_message_yields_zero_parity) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  const gf_mat zero(6, gf_vec(6, 0));
  const htec::stripe s = htec::encode(ci, zero);
  for (const auto& row : s.p) {
    for (gf_t v : row) EXPECT_EQ(0, v);
  }
}

TEST(codec, unit_message_reads_back_the_index_arrays) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  gf_mat a(6, gf_vec(6, 0));
  a[0][0] = 7;  // only cell (1,1) set
  const htec::stripe s = htec::encode(ci, a);
  for (int l = 1; l <= 3; ++l) {
    for (int i = 1; i <= 6; ++i) {
      bool touches = false;
      for (const htec::cell& c : ci.arrays.equation_refs(l, i)) {
        if (c.i == 1 && c.j == 1) touches = true;
      }
      const gf_t got = s.p[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(l - 1)];
      EXPECT_EQ(touches, got != 0) << "parity " << l << " row " << i;
    }
  }
  EXPECT_EQ(ci.fld.mul(ci.coeffs[0][0][0], 7), s.p[0][0]);
}

TEST(codec, encode_is_linear) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  std::mt19937_64 rng(3);
  const gf_mat m1 = random_message(ci.params, rng, 16);
  const gf_mat m2 = random_message(ci.params, rng, 16);
  gf_mat sum = m1;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    for (std::size_t j = 0; j < sum[i].size(); ++j) sum[i][j] ^= m2[i][j];
  }
  const htec::stripe s1 = htec::encode(ci, m1);
  const htec::stripe s2 = htec::encode(ci, m2);
  const htec::stripe ss = htec::encode(ci, sum);
  for (std::size_t i = 0; i < ss.p.size(); ++i) {
    for (std::size_t l = 0; l < ss.p[i].size(); ++l) {
      EXPECT_EQ(ss.p[i][l], s1.p[i][l] ^ s2.p[i][l]);
    }
  }
}

std::map<int, gf_vec> node_columns(const code_instance& ci, const htec::stripe& s) {
  std::map<int, gf_vec> cols;
  const code_params& p = ci.params;
  for (int j = 1; j <= p.k; ++j) {
    gf_vec col(static_cast<std::size_t>(p.alpha));
    for (int i = 1; i <= p.alpha; ++i) {
      col[static_cast<std::size_t>(i - 1)] =
          s.a[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
    }
    cols[j] = std::move(col);
  }
  for (int l = 1; l <= p.r; ++l) {
    gf_vec col(static_cast<std::size_t>(p.alpha));
    for (int i = 1; i <= p.alpha; ++i) {
      col[static_cast<std::size_t>(i - 1)] =
          s.p[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(l - 1)];
    }
    cols[p.k + l] = std::move(col);
  }
  return cols;
}

TEST(codec, every_k_subset_decodes_the_message) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  std::mt19937_64 rng(11);
  const gf_mat msg = random_message(ci.params, rng, 16);
  const htec::stripe s = htec::encode(ci, msg);
  const std::map<int, gf_vec> cols = node_columns(ci, s);
  std::vector<int> pick(6);
  int subsets = 0;
  for (int a = 1; a <= 4; ++a)
    for (int b = a + 1; b <= 5; ++b)
      for (int c = b + 1; c <= 6; ++c)
        for (int d = c + 1; d <= 7; ++d)
          for (int e = d + 1; e <= 8; ++e)
            for (int f2 = e + 1; f2 <= 9; ++f2) {
              pick = {a, b, c, d, e, f2};
              std::map<int, gf_vec> avail;
              for (int node : pick) avail[node] = cols.at(node);
              EXPECT_EQ(msg, htec::decode(ci, avail));
              ++subsets;
            }
  EXPECT_EQ(84, subsets);
}

TEST(codec, decode_needs_k_nodes) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  std::mt19937_64 rng(13);
  const htec::stripe s = htec::encode(ci, random_message(ci.params, rng, 16));
  std::map<int, gf_vec> cols = node_columns(ci, s);
  std::map<int, gf_vec> few;
  for (int node = 1; node <= 5; ++node) few[node] = cols.at(node);
  EXPECT_THROW(htec::decode(ci, few), htec::not_enough_nodes_error);
}

TEST(codec, beyond_r_erasures_drops_rank_below_full) {
  // with r+1 nodes gone the surviving stacked matrix cannot span k*alpha
  const code_instance ci = htec::assign_coefficients(params(5, 3, 2, 4), 9);
  const code_params& p = ci.params;
  gf_mat stacked;
  for (int node = 1; node <= p.k - 1; ++node) {
    for (int i = 1; i <= p.alpha; ++i) {
      gf_vec row(static_cast<std::size_t>(p.k) * p.alpha, 0);
      row[static_cast<std::size_t>(node - 1) * p.alpha + i - 1] = 1;
      stacked.push_back(std::move(row));
    }
  }
  EXPECT_LT(htec::matrix_rank(ci.fld, stacked), p.k * p.alpha);
}

TEST(serialization, json_round_trip_preserves_the_instance) {
  const code_instance ci = htec::assign_coefficients(params(9, 6, 6, 4), 1234);
  const nlohmann::json j = htec::code_to_json(ci);
  const code_instance back = htec::code_from_json(j, false);
  EXPECT_EQ(ci.coeffs, back.coeffs);
  EXPECT_EQ(ci.seed, back.seed);
  EXPECT_EQ(ci.attempt, back.attempt);
  EXPECT_EQ(ci.fld.w(), back.fld.w());
  EXPECT_TRUE(back.verified);
  const code_instance reverified = htec::code_from_json(j, true);
  EXPECT_TRUE(reverified.verified);
}

TEST(serialization, tampering_trips_the_checksum) {
  const code_instance ci = htec::assign_coefficients(params(4, 2, 2, 4), 5);
  nlohmann::json j = htec::code_to_json(ci);
  j["coefficients"][0][0][0] = j["coefficients"][0][0][0].get<int>() ^ 1;
  EXPECT_THROW(htec::code_from_json(j, false), htec::integrity_error);
  nlohmann::json wrong_format = htec::code_to_json(ci);
  wrong_format["format"] = "something-else";
  EXPECT_THROW(htec::code_from_json(wrong_format, false), htec::integrity_error);
}

}  // end of namespace
