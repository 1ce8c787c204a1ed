#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace asymnet::wire {

__extension__ typedef unsigned __int128 Gf2Word;

inline unsigned gf2_parity(Gf2Word v) {
  return static_cast<unsigned>(__builtin_parityll(static_cast<std::uint64_t>(v)) ^
                               __builtin_parityll(static_cast<std::uint64_t>(v >> 64)));
}

// Square matrix over GF(2), dimension <= 128. Row i bit j is entry (i, j).
class Gf2Matrix {
 public:
  explicit Gf2Matrix(unsigned n) : n_(n), rows_(n, 0) {
    if (n == 0 || n > 128) throw std::invalid_argument("Gf2Matrix: dimension must be 1..128");
  }

  static Gf2Matrix identity(unsigned n) {
    Gf2Matrix m(n);
    for (unsigned i = 0; i < n; ++i) m.rows_[i] = Gf2Word{1} << i;
    return m;
  }

  // Matrix of a linear state update, sampled on basis vectors.
  static Gf2Matrix from_linear_map(unsigned n, const std::function<Gf2Word(Gf2Word)>& step) {
    Gf2Matrix m(n);
    for (unsigned j = 0; j < n; ++j) {
      Gf2Word col = step(Gf2Word{1} << j);
      for (unsigned i = 0; i < n; ++i)
        if ((col >> i) & 1u) m.rows_[i] |= Gf2Word{1} << j;
    }
    return m;
  }

  unsigned size() const { return n_; }

  Gf2Word apply(Gf2Word v) const {
    Gf2Word out = 0;
    for (unsigned i = 0; i < n_; ++i)
      if (gf2_parity(rows_[i] & v)) out |= Gf2Word{1} << i;
    return out;
  }

  Gf2Matrix operator*(const Gf2Matrix& rhs) const {
    Gf2Matrix out(n_);
    for (unsigned i = 0; i < n_; ++i) {
      Gf2Word acc = 0;
      Gf2Word row = rows_[i];
      for (unsigned k = 0; k < n_; ++k)
        if ((row >> k) & 1u) acc ^= rhs.rows_[k];
      out.rows_[i] = acc;
    }
    return out;
  }

  bool operator==(const Gf2Matrix&) const = default;

 private:
  unsigned n_;
  std::vector<Gf2Word> rows_;
};

// M^steps applied to v, by repeated squaring.
inline Gf2Word gf2_jump(const Gf2Matrix& m, Gf2Word v, std::uint64_t steps) {
  Gf2Matrix p = m;
  while (steps) {
    if (steps & 1u) v = p.apply(v);
    steps >>= 1;
    if (steps) p = p * p;
  }
  return v;
}

}  // namespace asymnet::wire
