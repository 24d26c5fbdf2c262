#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsd/errors.hpp"

namespace qsd {

/// Table-driven arithmetic for F_q, q a small prime power.
///
/// Elements are labeled 0..q-1; 0 is the additive and 1 the multiplicative
/// identity. For extension fields (q = p^e, e > 1) the label's base-p digits
/// are the coefficients of the residue polynomial, constant term first, and
/// arithmetic is modulo a fixed monic reduction polynomial:
///
///   F_4 : x^2 + x + 1
///   F_8 : x^3 + x + 1
///   F_9 : x^2 + 1
///
/// Immutable after construction; safe to share across threads.
struct FieldSpec {
  int q = 0;
  int p = 0;  // characteristic
  int e = 0;  // extension degree, q = p^e
  std::vector<std::uint8_t> reduction;  // e+1 coefficients over F_p, constant first; empty for e == 1

  std::vector<std::uint8_t> add_table;  // q*q, row-major
  std::vector<std::uint8_t> mul_table;  // q*q
  std::vector<std::uint8_t> neg_table;  // q
  std::vector<std::uint8_t> inv_table;  // q, entry 0 unused

  std::uint8_t add(std::uint8_t a, std::uint8_t b) const { return add_table[a * q + b]; }
  std::uint8_t mul(std::uint8_t a, std::uint8_t b) const { return mul_table[a * q + b]; }
  std::uint8_t neg(std::uint8_t a) const { return neg_table[a]; }
  std::uint8_t inv(std::uint8_t a) const {
    if (a == 0) throw std::domain_error("F_" + std::to_string(q) + ": inverse of zero");
    return inv_table[a];
  }
  std::uint8_t sub(std::uint8_t a, std::uint8_t b) const { return add(a, neg(b)); }
};

namespace detail {

inline bool is_prime(int x) {
  if (x < 2) return false;
  for (int d = 2; d * d <= x; ++d)
    if (x % d == 0) return false;
  return true;
}

// Multiply two residue polynomials (base-p digit vectors of length e) modulo
// the reduction polynomial.
inline std::vector<std::uint8_t> polymul_mod(const std::vector<std::uint8_t>& a,
                                             const std::vector<std::uint8_t>& b,
                                             const std::vector<std::uint8_t>& red, int p) {
  const int e = static_cast<int>(a.size());
  std::vector<int> prod(2 * e - 1, 0);
  for (int i = 0; i < e; ++i)
    for (int j = 0; j < e; ++j) prod[i + j] = (prod[i + j] + a[i] * b[j]) % p;
  // reduce: x^e = -(red[0] + red[1] x + ... + red[e-1] x^(e-1)), red monic
  for (int i = 2 * e - 2; i >= e; --i) {
    int c = prod[i];
    if (c == 0) continue;
    prod[i] = 0;
    for (int j = 0; j < e; ++j) {
      int sub = (c * red[j]) % p;
      prod[i - e + j] = ((prod[i - e + j] - sub) % p + p) % p;
    }
  }
  return std::vector<std::uint8_t>(prod.begin(), prod.begin() + e);
}

inline std::vector<std::uint8_t> label_digits(int label, int p, int e) {
  std::vector<std::uint8_t> d(e);
  for (int i = 0; i < e; ++i) {
    d[i] = static_cast<std::uint8_t>(label % p);
    label /= p;
  }
  return d;
}

inline int digits_label(const std::vector<std::uint8_t>& d, int p) {
  int label = 0;
  for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) label = label * p + d[i];
  return label;
}

inline std::unique_ptr<FieldSpec> build_field(int q) {
  int p = 0;
  for (int d = 2; d <= q; ++d)
    if (q % d == 0) {
      p = d;
      break;
    }
  if (!is_prime(p)) throw std::invalid_argument("F_" + std::to_string(q) + ": not a prime power");
  int e = 0, t = q;
  while (t > 1) {
    if (t % p != 0) throw std::invalid_argument("F_" + std::to_string(q) + ": not a prime power");
    t /= p;
    ++e;
  }

  auto f = std::make_unique<FieldSpec>();
  f->q = q;
  f->p = p;
  f->e = e;
  if (e > 1) {
    static const std::map<int, std::vector<std::uint8_t>> kReduction = {
        {4, {1, 1, 1}},     // x^2 + x + 1
        {8, {1, 1, 0, 1}},  // x^3 + x + 1
        {9, {1, 0, 1}},     // x^2 + 1
    };
    auto it = kReduction.find(q);
    if (it == kReduction.end())
      throw std::invalid_argument("F_" + std::to_string(q) + ": unsupported field order");
    f->reduction = it->second;
  }

  f->add_table.resize(q * q);
  f->mul_table.resize(q * q);
  for (int a = 0; a < q; ++a) {
    auto da = label_digits(a, p, e);
    for (int b = 0; b < q; ++b) {
      auto db = label_digits(b, p, e);
      std::vector<std::uint8_t> s(e);
      for (int i = 0; i < e; ++i) s[i] = static_cast<std::uint8_t>((da[i] + db[i]) % p);
      f->add_table[a * q + b] = static_cast<std::uint8_t>(digits_label(s, p));
      if (e == 1) {
        f->mul_table[a * q + b] = static_cast<std::uint8_t>((a * b) % p);
      } else {
        f->mul_table[a * q + b] =
            static_cast<std::uint8_t>(digits_label(polymul_mod(da, db, f->reduction, p), p));
      }
    }
  }
  f->neg_table.resize(q);
  f->inv_table.resize(q, 0);
  for (int a = 0; a < q; ++a) {
    for (int b = 0; b < q; ++b) {
      if (f->add_table[a * q + b] == 0) f->neg_table[a] = static_cast<std::uint8_t>(b);
      if (a != 0 && f->mul_table[a * q + b] == 1) f->inv_table[a] = static_cast<std::uint8_t>(b);
    }
  }
  return f;
}

}  // namespace detail

/// Returns the (process-wide, immutable) field of order q.
/// Supported orders: 2, 3, 4, 5, 7, 8, 9.
inline const FieldSpec& field_new(int q) {
  static constexpr int kSupported[] = {2, 3, 4, 5, 7, 8, 9};
  bool ok = false;
  for (int s : kSupported) ok = ok || (s == q);
  if (!ok) throw std::invalid_argument("F_" + std::to_string(q) + ": unsupported field order");

  static std::mutex mu;
  static std::map<int, std::unique_ptr<FieldSpec>> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[q];
  if (!slot) slot = detail::build_field(q);
  return *slot;
}

}  // namespace qsd
