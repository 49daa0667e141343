#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "celab/rng.hpp"

namespace celab {

constexpr int kMaxBits = 64;

inline int parity(std::uint64_t w) { return std::popcount(w) & 1; }

inline std::uint64_t low_mask(int len) {
  return len >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << len) - 1);
}

[[noreturn]] void throw_bad_bitvec(int len, std::uint64_t word);

// Fixed-length vector over GF(2), packed into one word. Bit i is the i-th
// coordinate and also bit i of the integer encoding returned by word().
class BitVec {
 public:
  BitVec() = default;
  BitVec(int len, std::uint64_t word) : len_(len), word_(word) {
    if (len < 0 || len > kMaxBits || (word & ~low_mask(len)) != 0) [[unlikely]]
      throw_bad_bitvec(len, word);
  }

  static BitVec zeros(int len) { return BitVec(len, 0); }
  static BitVec unit(int len, int i);
  static BitVec random(int len, Rng& rng);
  // Most significant coordinate first, e.g. "110" has bits 2 and 1 set.
  static BitVec parse(std::string_view text);

  int size() const { return len_; }
  std::uint64_t word() const { return word_; }
  bool bit(int i) const;
  void set(int i, bool value);
  int weight() const { return std::popcount(word_); }

  BitVec operator^(const BitVec& other) const;
  BitVec& operator^=(const BitVec& other);
  bool operator==(const BitVec&) const = default;

  std::string to_string() const;

 private:
  int len_ = 0;
  std::uint64_t word_ = 0;
};

// <a, b> over GF(2). Lengths must agree.
bool inner_product(const BitVec& a, const BitVec& b);

// k x n matrix over GF(2) stored as k row vectors of length n.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(int rows, int cols);
  explicit BitMatrix(std::vector<BitVec> rows);

  static BitMatrix identity(int n);
  static BitMatrix random(int rows, int cols, Rng& rng);

  int rows() const { return static_cast<int>(rows_.size()); }
  int cols() const { return cols_; }
  const BitVec& row(int i) const { return rows_.at(static_cast<std::size_t>(i)); }
  void set_row(int i, const BitVec& r);
  // Unchecked raw row access for hot loops that already validated shapes.
  std::uint64_t row_word(int i) const { return rows_[static_cast<std::size_t>(i)].word(); }
  void set_row_word(int i, std::uint64_t w) { rows_[static_cast<std::size_t>(i)] = BitVec(cols_, w & low_mask(cols_)); }

  int rank() const;

 private:
  int cols_ = 0;
  std::vector<BitVec> rows_;
};

// R x, whose bit j is <row j, x>.
BitVec mat_vec_mul(const BitMatrix& r, const BitVec& x);

// Same product on raw words; the caller guarantees the shapes.
inline std::uint64_t mat_vec_word(const std::uint64_t* rows, int k, std::uint64_t x) {
  std::uint64_t out = 0;
  for (int j = 0; j < k; ++j) out |= static_cast<std::uint64_t>(parity(rows[j] & x)) << j;
  return out;
}

// First `out_len` bits of seed * x for an out_len x n seed matrix.
BitVec leftover_hash_extract(const BitVec& x, const BitMatrix& seed, int out_len);

}  // namespace celab
