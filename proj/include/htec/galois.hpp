#pragma once

// arithmetic in GF(2^w) for 1 <= w <= 16, plus the dense linear algebra used by
// the encoder, the any-k decoder and the repair planners. elements are uint16_t
// values below 2^w. addition is xor. multiplication uses a full product table
// for w <= 8 and carryless shift-reduce above that.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace htec {

using gf_t = std::uint16_t;
using gf_vec = std::vector<gf_t>;
using gf_mat = std::vector<gf_vec>;

struct field_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct zero_inverse_error : field_error {
  zero_inverse_error() : field_error("inverse of zero requested") {}
};

struct rank_deficient_error : field_error {
  int rank;
  explicit rank_deficient_error(int rk)
      : field_error("linear system is rank deficient (rank " + std::to_string(rk) + ")"),
        rank(rk) {}
};

struct inconsistent_system_error : field_error {
  inconsistent_system_error() : field_error("linear system is inconsistent") {}
};

// degree of a polynomial over GF(2) packed into an integer; -1 for the zero polynomial
inline int gf2_degree(std::uint64_t p) {
  int d = -1;
  while (p != 0) {
    ++d;
    p >>= 1;
  }
  return d;
}

inline std::uint32_t gf2_mod(std::uint64_t a, std::uint32_t b) {
  int db = gf2_degree(b);
  for (int da = gf2_degree(a); da >= db; da = gf2_degree(a)) {
    a ^= static_cast<std::uint64_t>(b) << (da - db);
  }
  return static_cast<std::uint32_t>(a);
}

// trial division by every polynomial of degree up to deg/2
inline bool gf2_irreducible(std::uint32_t p) {
  const int d = gf2_degree(p);
  if (d < 1) return false;
  for (std::uint32_t q = 2; gf2_degree(q) <= d / 2; ++q) {
    if (gf2_mod(p, q) == 0) return false;
  }
  return true;
}

// smallest irreducible polynomial of degree w, by integer value
inline std::uint32_t smallest_irreducible(int w) {
  const std::uint32_t lo = 1u << w;
  for (std::uint32_t p = lo + 1; p < (lo << 1); p += 2) {
    if (gf2_irreducible(p)) return p;
  }
  throw field_error("no irreducible polynomial of degree " + std::to_string(w));
}

// names a concrete field without building its tables. poly 0 means the
// default polynomial for that width.
struct field_spec {
  int w = 8;
  std::uint32_t poly = 0;
};

class field {
 public:
  field(int w, std::uint32_t poly) : w_(w), poly_(poly) {
    if (w < 1 || w > 16) {
      throw field_error("field width must be between 1 and 16, got " + std::to_string(w));
    }
    if (gf2_degree(poly) != w) {
      throw field_error("reducing polynomial degree does not match field width");
    }
    if (!gf2_irreducible(poly)) {
      throw field_error("reducing polynomial is not irreducible");
    }
    if (w_ <= 8) {
      const int q = 1 << w_;
      table_.assign(static_cast<std::size_t>(q) * q, 0);
      for (int a = 0; a < q; ++a) {
        for (int b = 0; b <= a; ++b) {
          const gf_t p = mul_slow(static_cast<gf_t>(a), static_cast<gf_t>(b));
          table_[static_cast<std::size_t>(a) * q + b] = p;
          table_[static_cast<std::size_t>(b) * q + a] = p;
        }
      }
    }
    inv_.assign(static_cast<std::size_t>(1) << w_, 0);
    for (int a = 1; a < (1 << w_); ++a) {
      inv_[static_cast<std::size_t>(a)] = pow(static_cast<gf_t>(a), (1 << w_) - 2);
    }
  }

  // the two example widths keep their published polynomials; other widths use
  // the smallest irreducible polynomial of that degree
  static field with_default_poly(int w) {
    if (w == 4) return field(4, 0x19);  // x^4 + x^3 + 1
    if (w == 5) return field(5, 0x29);  // x^5 + x^3 + 1
    return field(w, smallest_irreducible(w));
  }

  int w() const { return w_; }
  std::uint32_t poly() const { return poly_; }
  int size() const { return 1 << w_; }

  gf_t add(gf_t a, gf_t b) const { return static_cast<gf_t>(a ^ b); }
  gf_t sub(gf_t a, gf_t b) const { return static_cast<gf_t>(a ^ b); }

  gf_t mul(gf_t a, gf_t b) const {
    if (w_ <= 8) {
      return table_[(static_cast<std::size_t>(a) << w_) + b];
    }
    return mul_slow(a, b);
  }

  gf_t inv(gf_t a) const {
    if (a == 0) throw zero_inverse_error();
    return inv_[a];
  }

  gf_t div(gf_t a, gf_t b) const { return mul(a, inv(b)); }

  gf_t pow(gf_t a, int e) const {
    gf_t acc = 1;
    gf_t base = a;
    while (e > 0) {
      if (e & 1) acc = mul_slow_or_table(acc, base);
      base = mul_slow_or_table(base, base);
      e >>= 1;
    }
    return acc;
  }

 private:
  gf_t mul_slow_or_table(gf_t a, gf_t b) const {
    return table_.empty() ? mul_slow(a, b) : table_[(static_cast<std::size_t>(a) << w_) + b];
  }

  gf_t mul_slow(gf_t a, gf_t b) const {
    std::uint32_t acc = 0;
    std::uint32_t aa = a;
    std::uint32_t bb = b;
    while (bb != 0) {
      if (bb & 1u) acc ^= aa;
      aa <<= 1;
      bb >>= 1;
    }
    for (int d = gf2_degree(acc); d >= w_; d = gf2_degree(acc)) {
      acc ^= poly_ << (d - w_);
    }
    return static_cast<gf_t>(acc);
  }

  int w_;
  std::uint32_t poly_;
  std::vector<gf_t> table_;
  std::vector<gf_t> inv_;
};

inline field make_field(const field_spec& s) {
  return s.poly == 0 ? field::with_default_poly(s.w) : field(s.w, s.poly);
}

// rank of a rectangular matrix, destructive on the copy it takes
inline int matrix_rank(const field& f, gf_mat m) {
  if (m.empty()) return 0;
  const std::size_t cols = m[0].size();
  std::size_t row = 0;
  int rank = 0;
  for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
    std::size_t piv = row;
    while (piv < m.size() && m[piv][col] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[row]);
    const gf_t scale = f.inv(m[row][col]);
    for (std::size_t c = col; c < cols; ++c) m[row][c] = f.mul(m[row][c], scale);
    for (std::size_t rr = 0; rr < m.size(); ++rr) {
      if (rr == row || m[rr][col] == 0) continue;
      const gf_t factor = m[rr][col];
      for (std::size_t c = col; c < cols; ++c) {
        m[rr][c] = f.add(m[rr][c], f.mul(factor, m[row][c]));
      }
    }
    ++row;
    ++rank;
  }
  return rank;
}

// solves a x = b where a has at least as many rows as columns. pivoting picks
// the first nonzero entry in the column. throws rank_deficient_error when the
// columns do not have full rank and inconsistent_system_error when the
// equations contradict each other.
inline gf_vec solve_linear_system(const field& f, gf_mat a, gf_vec b) {
  const std::size_t rows = a.size();
  if (rows != b.size()) throw field_error("matrix and right-hand side size mismatch");
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  if (rows < cols) throw rank_deficient_error(matrix_rank(f, a));

  std::size_t row = 0;
  std::vector<std::size_t> pivot_col;
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t piv = row;
    while (piv < rows && a[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[row]);
    std::swap(b[piv], b[row]);
    const gf_t scale = f.inv(a[row][col]);
    for (std::size_t c = col; c < cols; ++c) a[row][c] = f.mul(a[row][c], scale);
    b[row] = f.mul(b[row], scale);
    for (std::size_t rr = 0; rr < rows; ++rr) {
      if (rr == row || a[rr][col] == 0) continue;
      const gf_t factor = a[rr][col];
      for (std::size_t c = col; c < cols; ++c) {
        a[rr][c] = f.add(a[rr][c], f.mul(factor, a[row][c]));
      }
      b[rr] = f.add(b[rr], f.mul(factor, b[row]));
    }
    pivot_col.push_back(col);
    ++row;
  }
  if (pivot_col.size() < cols) {
    throw rank_deficient_error(static_cast<int>(pivot_col.size()));
  }
  for (std::size_t rr = row; rr < rows; ++rr) {
    if (b[rr] != 0) throw inconsistent_system_error();
  }
  gf_vec x(cols, 0);
  for (std::size_t i = 0; i < cols; ++i) x[pivot_col[i]] = b[i];
  return x;
}

// incremental row-echelon basis over a fixed number of columns. used by the
// multi-failure planner to decide whether one more equation raises the rank.
class rank_tracker {
 public:
  rank_tracker(const field& f, int cols) : f_(&f), cols_(cols) {}

  int rank() const { return static_cast<int>(basis_.size()); }
  int cols() const { return cols_; }

  bool would_add(gf_vec row) const { return reduce(row) >= 0; }

  bool try_add(gf_vec row) {
    const int lead = reduce(row);
    if (lead < 0) return false;
    const gf_t scale = f_->inv(row[static_cast<std::size_t>(lead)]);
    for (auto& v : row) v = f_->mul(v, scale);
    basis_.push_back(std::move(row));
    lead_.push_back(lead);
    return true;
  }

 private:
  // reduces the row against the basis; returns the leading column of the
  // remainder or -1 when the row is in the span
  int reduce(gf_vec& row) const {
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const gf_t factor = row[static_cast<std::size_t>(lead_[i])];
      if (factor == 0) continue;
      for (int c = lead_[i]; c < cols_; ++c) {
        row[static_cast<std::size_t>(c)] =
            f_->add(row[static_cast<std::size_t>(c)], f_->mul(factor, basis_[i][static_cast<std::size_t>(c)]));
      }
    }
    for (int c = 0; c < cols_; ++c) {
      if (row[static_cast<std::size_t>(c)] != 0) return c;
    }
    return -1;
  }

  const field* f_;
  int cols_;
  std::vector<gf_vec> basis_;
  std::vector<int> lead_;
};

}  // end of namespace htec
