#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace graphpinn {

class Tape;

// Scalar handle on a Tape. A Var without a tape is a constant.
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const noexcept { return value_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::uint32_t index() const noexcept { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index, double value) : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
  double value_ = 0.0;
};

// Reverse-mode recording of scalar arithmetic. Each node stores its value and
// the local partials with respect to its parents; `adjoints` runs one reverse
// sweep. Not thread-safe; one tape per loss evaluation.
class Tape {
 public:
  Var variable(double value);

  // Node with value `value` whose partial with respect to `x` is `dx`.
  Var unary(const Var& x, double value, double dx);
  Var binary(const Var& x, const Var& y, double value, double dx, double dy);
  Var sum(std::span<const Var> terms);

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear();

  // d(output)/d(node) for every node recorded so far.
  std::vector<double> adjoints(const Var& output) const;

 private:
  struct Node {
    std::uint32_t first = 0;  // offset into parents_/partials_
    std::uint32_t count = 0;
  };
  Var push(double value, std::span<const std::uint32_t> parents, std::span<const double> partials);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> parents_;
  std::vector<double> partials_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

Var square(const Var& a);
Var pow(const Var& a, int n);
Var exp(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var sqrt(const Var& a);

inline double square(double a) { return a * a; }

// Sum over terms that may live on a tape; constants are folded.
Var sum(std::span<const Var> terms);

}  // namespace graphpinn
