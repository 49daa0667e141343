#include "celab/bitlin.hpp"

#include <string>
#include <utility>

#include "celab/errors.hpp"

namespace celab {

namespace {

void check_len(int len) {
  if (len < 0 || len > kMaxBits)
    throw usage_error("bit vector length " + std::to_string(len) + " outside [0, 64]");
}

void check_same(int a, int b, const char* what) {
  if (a != b)
    throw usage_error(std::string(what) + ": length mismatch " + std::to_string(a) + " vs " +
                      std::to_string(b));
}

}  // namespace

void throw_bad_bitvec(int len, std::uint64_t) {
  check_len(len);
  throw usage_error("bit vector word has bits beyond its length");
}

BitVec BitVec::unit(int len, int i) {
  check_len(len);
  if (i < 0 || i >= len) throw usage_error("unit vector index out of range");
  return BitVec(len, std::uint64_t{1} << i);
}

BitVec BitVec::random(int len, Rng& rng) {
  check_len(len);
  return BitVec(len, rng.bits(len));
}

BitVec BitVec::parse(std::string_view text) {
  const int len = static_cast<int>(text.size());
  check_len(len);
  std::uint64_t w = 0;
  for (char c : text) {
    if (c != '0' && c != '1') throw usage_error("bit string may contain only 0 and 1");
    w = (w << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return BitVec(len, w);
}

bool BitVec::bit(int i) const {
  if (i < 0 || i >= len_) throw usage_error("bit index out of range");
  return ((word_ >> i) & 1) != 0;
}

void BitVec::set(int i, bool value) {
  if (i < 0 || i >= len_) throw usage_error("bit index out of range");
  const std::uint64_t m = std::uint64_t{1} << i;
  word_ = value ? (word_ | m) : (word_ & ~m);
}

BitVec BitVec::operator^(const BitVec& other) const {
  BitVec out = *this;
  out ^= other;
  return out;
}

BitVec& BitVec::operator^=(const BitVec& other) {
  check_same(len_, other.len_, "xor");
  word_ ^= other.word_;
  return *this;
}

std::string BitVec::to_string() const {
  std::string s(static_cast<std::size_t>(len_), '0');
  for (int i = 0; i < len_; ++i)
    if ((word_ >> i) & 1) s[static_cast<std::size_t>(len_ - 1 - i)] = '1';
  return s;
}

bool inner_product(const BitVec& a, const BitVec& b) {
  check_same(a.size(), b.size(), "inner product");
  return parity(a.word() & b.word()) != 0;
}

BitMatrix::BitMatrix(int rows, int cols) : cols_(cols) {
  check_len(cols);
  if (rows < 0 || rows > kMaxBits) throw usage_error("matrix row count outside [0, 64]");
  rows_.assign(static_cast<std::size_t>(rows), BitVec::zeros(cols));
}

BitMatrix::BitMatrix(std::vector<BitVec> rows) : rows_(std::move(rows)) {
  if (rows_.size() > static_cast<std::size_t>(kMaxBits))
    throw usage_error("matrix row count outside [0, 64]");
  cols_ = rows_.empty() ? 0 : rows_.front().size();
  for (const auto& r : rows_) check_same(r.size(), cols_, "matrix rows");
}

BitMatrix BitMatrix::identity(int n) {
  BitMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.rows_[static_cast<std::size_t>(i)] = BitVec::unit(n, i);
  return m;
}

BitMatrix BitMatrix::random(int rows, int cols, Rng& rng) {
  BitMatrix m(rows, cols);
  for (auto& r : m.rows_) r = BitVec::random(cols, rng);
  return m;
}

void BitMatrix::set_row(int i, const BitVec& r) {
  if (i < 0 || i >= rows()) throw usage_error("matrix row index out of range");
  check_same(r.size(), cols_, "matrix row");
  rows_[static_cast<std::size_t>(i)] = r;
}

int BitMatrix::rank() const {
  std::vector<std::uint64_t> w;
  w.reserve(rows_.size());
  for (const auto& r : rows_) w.push_back(r.word());
  int rank = 0;
  for (int col = 0; col < cols_ && rank < rows(); ++col) {
    const std::uint64_t m = std::uint64_t{1} << col;
    auto pivot = static_cast<std::size_t>(rank);
    while (pivot < w.size() && (w[pivot] & m) == 0) ++pivot;
    if (pivot == w.size()) continue;
    std::swap(w[pivot], w[static_cast<std::size_t>(rank)]);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (i != static_cast<std::size_t>(rank) && (w[i] & m)) w[i] ^= w[static_cast<std::size_t>(rank)];
    ++rank;
  }
  return rank;
}

BitVec mat_vec_mul(const BitMatrix& r, const BitVec& x) {
  check_same(r.cols(), x.size(), "matrix-vector product");
  std::uint64_t out = 0;
  for (int j = 0; j < r.rows(); ++j)
    out |= static_cast<std::uint64_t>(parity(r.row_word(j) & x.word())) << j;
  return BitVec(r.rows(), out);
}

BitVec leftover_hash_extract(const BitVec& x, const BitMatrix& seed, int out_len) {
  if (out_len < 0 || out_len > seed.rows())
    throw usage_error("extract length exceeds the seed matrix height");
  check_same(seed.cols(), x.size(), "extractor input");
  std::uint64_t out = 0;
  for (int j = 0; j < out_len; ++j)
    out |= static_cast<std::uint64_t>(parity(seed.row_word(j) & x.word())) << j;
  return BitVec(out_len, out);
}

}  // namespace celab
