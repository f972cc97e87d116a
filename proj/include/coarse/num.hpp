#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace coarse {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::rational<BigInt>;

/// A numeric value that is either an exact rational or a double.
/// Mixed-mode arithmetic degrades to double. Strict comparison predicates
/// apply a 1e-9 guard in double mode so float noise never flips a
/// disjointness or norm test.
class Num {
 public:
  static constexpr double kEps = 1e-9;

  Num() : exact_(true), q_(0) {}
  Num(int v) : exact_(true), q_(BigInt(v)) {}
  Num(long long v) : exact_(true), q_(BigInt(v)) {}
  explicit Num(Rat q) : exact_(true), q_(std::move(q)) {}
  Num(BigInt num, BigInt den) : exact_(true), q_(std::move(num), std::move(den)) {}

  static Num real(double v) {
    Num n;
    n.exact_ = false;
    n.d_ = v;
    return n;
  }

  bool exact() const { return exact_; }

  const Rat& rat() const {
    if (!exact_) throw std::logic_error("Num: rational view of an inexact value");
    return q_;
  }

  double value() const {
    if (exact_) return static_cast<double>(q_.numerator()) / static_cast<double>(q_.denominator());
    return d_;
  }

  Num operator+(const Num& o) const {
    if (exact_ && o.exact_) return Num(q_ + o.q_);
    return real(value() + o.value());
  }
  Num operator-(const Num& o) const {
    if (exact_ && o.exact_) return Num(q_ - o.q_);
    return real(value() - o.value());
  }
  Num operator*(const Num& o) const {
    if (exact_ && o.exact_) return Num(q_ * o.q_);
    return real(value() * o.value());
  }
  Num operator/(const Num& o) const {
    if (exact_ && o.exact_) {
      if (o.q_.numerator() == 0) throw std::domain_error("Num: division by zero");
      return Num(q_ / o.q_);
    }
    return real(value() / o.value());
  }
  Num operator-() const {
    if (exact_) return Num(-q_);
    return real(-d_);
  }

  Num abs() const {
    if (exact_) return Num(q_ < Rat(0) ? -q_ : q_);
    return real(d_ < 0 ? -d_ : d_);
  }

  /// Raw ordering: exact when both operands are exact, plain double otherwise.
  int compare(const Num& o) const {
    if (exact_ && o.exact_) {
      if (q_ < o.q_) return -1;
      if (o.q_ < q_) return 1;
      return 0;
    }
    double a = value(), b = o.value();
    if (a < b) return -1;
    if (b < a) return 1;
    return 0;
  }

  bool operator<(const Num& o) const { return compare(o) < 0; }
  bool operator>(const Num& o) const { return compare(o) > 0; }
  bool operator<=(const Num& o) const { return compare(o) <= 0; }
  bool operator>=(const Num& o) const { return compare(o) >= 0; }
  bool operator==(const Num& o) const { return compare(o) == 0; }
  bool operator!=(const Num& o) const { return compare(o) != 0; }

  bool is_zero() const { return exact_ ? q_.numerator() == 0 : d_ == 0.0; }

 private:
  bool exact_;
  Rat q_;
  double d_ = 0.0;
};

/// d > r, with the float-boundary guard in inexact mode.
inline bool gt_strict(const Num& a, const Num& b) {
  if (a.exact() && b.exact()) return a.rat() > b.rat();
  return a.value() > b.value() + Num::kEps;
}

/// d < r, guarded.
inline bool lt_strict(const Num& a, const Num& b) {
  return gt_strict(b, a);
}

/// a >= b up to the guard.
inline bool ge_approx(const Num& a, const Num& b) {
  if (a.exact() && b.exact()) return a.rat() >= b.rat();
  return a.value() >= b.value() - Num::kEps;
}

/// a <= b up to the guard.
inline bool le_approx(const Num& a, const Num& b) {
  return ge_approx(b, a);
}

inline const Num& num_min(const Num& a, const Num& b) { return b < a ? b : a; }
inline const Num& num_max(const Num& a, const Num& b) { return a < b ? b : a; }

/// Smallest integer >= v; in double mode values within the guard of an
/// integer snap down to it.
long long ceil_int(const Num& v);

/// Always inexact (used by the product metric and l2 grids).
Num num_sqrt(const Num& v);

/// Canonical text form: reduced "p/q" (or plain "p") for exact values.
std::string num_to_string(const Num& v);

/// Parses "p/q", "p", or a decimal produced by num_to_string on a double.
Num num_from_string(const std::string& s);

}  // namespace coarse
