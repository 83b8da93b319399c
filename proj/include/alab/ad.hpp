#pragma once

// Reverse-mode scalar tape used to differentiate the simulated loss with
// respect to the policy-network weights. One tape per worker thread, one
// path per tape fill; cleared between paths.
//
// A Var is a value plus an optional node index on the active tape. Vars
// built from plain doubles carry no node and propagate nothing. Branching
// (min/max/comparisons) is decided on values, so gradients follow the
// realized branch.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace alab::ad {

inline constexpr std::uint32_t kNoNode = 0xFFFFFFFFu;

class Tape {
 public:
  struct Node {
    double d0 = 0.0, d1 = 0.0;
    std::uint32_t p0 = kNoNode, p1 = kNoNode;
  };

  std::uint32_t leaf() {
    nodes_.push_back(Node{});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  std::uint32_t unary(std::uint32_t p, double d) {
    nodes_.push_back(Node{d, 0.0, p, kNoNode});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  std::uint32_t binary(std::uint32_t pa, double da, std::uint32_t pb, double db) {
    nodes_.push_back(Node{da, db, pa, pb});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  // Adjoints of every node with the seed node's adjoint set to 1.
  void backward(std::uint32_t seed, std::vector<double>& adj) const {
    adj.assign(nodes_.size(), 0.0);
    if (seed == kNoNode) return;
    adj[seed] = 1.0;
    for (std::uint32_t i = seed + 1; i-- > 0;) {
      const double a = adj[i];
      if (a == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.p0 != kNoNode) adj[n.p0] += a * n.d0;
      if (n.p1 != kNoNode) adj[n.p1] += a * n.d1;
    }
  }

 private:
  std::vector<Node> nodes_;
};

Tape*& active_tape() noexcept;

// RAII activation of a tape on the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& t) : prev_(active_tape()) { active_tape() = &t; }
  ~TapeScope() { active_tape() = prev_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

class Var {
 public:
  Var() = default;
  Var(double v) : v_(v) {}  // constant, off tape
  Var(double v, std::uint32_t ix) : v_(v), ix_(ix) {}

  static Var leaf(double v) {
    Tape* t = active_tape();
    if (!t) throw std::logic_error("ad::Var::leaf with no active tape");
    return Var(v, t->leaf());
  }

  double value() const { return v_; }
  std::uint32_t node() const { return ix_; }
  bool on_tape() const { return ix_ != kNoNode; }

  Var operator-() const {
    if (!on_tape()) return Var(-v_);
    return Var(-v_, active_tape()->unary(ix_, -1.0));
  }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);

 private:
  double v_ = 0.0;
  std::uint32_t ix_ = kNoNode;
};

inline Var binop(double v, const Var& a, double da, const Var& b, double db) {
  const bool ta = a.on_tape(), tb = b.on_tape();
  if (!ta && !tb) return Var(v);
  Tape* t = active_tape();
  if (ta && tb) return Var(v, t->binary(a.node(), da, b.node(), db));
  if (ta) return Var(v, t->unary(a.node(), da));
  return Var(v, t->unary(b.node(), db));
}

inline Var operator+(const Var& a, const Var& b) {
  return binop(a.value() + b.value(), a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return binop(a.value() - b.value(), a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return binop(a.value() * b.value(), a, b.value(), b, a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.value();
  return binop(a.value() * inv, a, inv, b, -a.value() * inv * inv);
}

inline Var operator+(const Var& a, double b) { return a + Var(b); }
inline Var operator+(double a, const Var& b) { return Var(a) + b; }
inline Var operator-(const Var& a, double b) { return a - Var(b); }
inline Var operator-(double a, const Var& b) { return Var(a) - b; }
inline Var operator*(const Var& a, double b) { return a * Var(b); }
inline Var operator*(double a, const Var& b) { return Var(a) * b; }
inline Var operator/(const Var& a, double b) { return a / Var(b); }
inline Var operator/(double a, const Var& b) { return Var(a) / b; }

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline Var exp(const Var& a) {
  const double e = std::exp(a.value());
  if (!a.on_tape()) return Var(e);
  return Var(e, active_tape()->unary(a.node(), e));
}
inline Var log(const Var& a) {
  const double l = std::log(a.value());
  if (!a.on_tape()) return Var(l);
  return Var(l, active_tape()->unary(a.node(), 1.0 / a.value()));
}
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value());
  if (!a.on_tape()) return Var(s);
  return Var(s, active_tape()->unary(a.node(), 0.5 / s));
}
inline Var fabs(const Var& a) {
  if (!a.on_tape()) return Var(std::fabs(a.value()));
  const double g = a.value() >= 0.0 ? 1.0 : -1.0;
  return Var(std::fabs(a.value()), active_tape()->unary(a.node(), g));
}

inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }
inline bool operator<=(const Var& a, const Var& b) { return a.value() <= b.value(); }
inline bool operator>=(const Var& a, const Var& b) { return a.value() >= b.value(); }
inline bool operator<(const Var& a, double b) { return a.value() < b; }
inline bool operator>(const Var& a, double b) { return a.value() > b; }
inline bool operator<(double a, const Var& b) { return a < b.value(); }
inline bool operator>(double a, const Var& b) { return a > b.value(); }

}  // namespace alab::ad

namespace alab {

inline double value_of(double x) { return x; }
inline double value_of(const ad::Var& x) { return x.value(); }

// Branch-selected clamp; usable with both double and ad::Var.
template <class R>
R clamp_scalar(const R& x, double lo, double hi, bool* clipped = nullptr) {
  if (value_of(x) < lo) {
    if (clipped) *clipped = true;
    return R(lo);
  }
  if (value_of(x) > hi) {
    if (clipped) *clipped = true;
    return R(hi);
  }
  return x;
}

}  // namespace alab
