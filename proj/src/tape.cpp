#include "graphpinn/tape.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace graphpinn {

namespace {

Tape* common_tape(const Var& a, const Var& b) {
  if (a.tape() && b.tape() && a.tape() != b.tape())
    throw std::logic_error("Var arithmetic mixes two different tapes");
  return a.tape() ? a.tape() : b.tape();
}

}  // namespace

Var Tape::push(double value, std::span<const std::uint32_t> parents, std::span<const double> partials) {
  Node n;
  n.first = static_cast<std::uint32_t>(parents_.size());
  n.count = static_cast<std::uint32_t>(parents.size());
  parents_.insert(parents_.end(), parents.begin(), parents.end());
  partials_.insert(partials_.end(), partials.begin(), partials.end());
  nodes_.push_back(n);
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
}

Var Tape::variable(double value) { return push(value, {}, {}); }

Var Tape::unary(const Var& x, double value, double dx) {
  if (x.is_constant()) return Var(value);
  std::array<std::uint32_t, 1> p{x.index()};
  std::array<double, 1> d{dx};
  return push(value, p, d);
}

Var Tape::binary(const Var& x, const Var& y, double value, double dx, double dy) {
  if (x.is_constant()) return unary(y, value, dy);
  if (y.is_constant()) return unary(x, value, dx);
  std::array<std::uint32_t, 2> p{x.index(), y.index()};
  std::array<double, 2> d{dx, dy};
  return push(value, p, d);
}

Var Tape::sum(std::span<const Var> terms) {
  double total = 0.0;
  std::vector<std::uint32_t> p;
  p.reserve(terms.size());
  for (const Var& t : terms) {
    total += t.value();
    if (!t.is_constant()) {
      if (t.tape() != this) throw std::logic_error("Tape::sum term belongs to another tape");
      p.push_back(t.index());
    }
  }
  if (p.empty()) return Var(total);
  std::vector<double> ones(p.size(), 1.0);
  return push(total, p, ones);
}

void Tape::clear() {
  nodes_.clear();
  parents_.clear();
  partials_.clear();
}

std::vector<double> Tape::adjoints(const Var& output) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (output.is_constant()) return adj;
  if (output.tape() != this) throw std::logic_error("adjoints requested for a Var of another tape");
  adj[output.index()] = 1.0;
  for (std::size_t k = output.index() + 1; k-- > 0;) {
    const double a = adj[k];
    if (a == 0.0) continue;
    const Node& n = nodes_[k];
    for (std::uint32_t q = 0; q < n.count; ++q) adj[parents_[n.first + q]] += a * partials_[n.first + q];
  }
  return adj;
}

Var operator+(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  double v = a.value() + b.value();
  return t ? t->binary(a, b, v, 1.0, 1.0) : Var(v);
}

Var operator-(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  double v = a.value() - b.value();
  return t ? t->binary(a, b, v, 1.0, -1.0) : Var(v);
}

Var operator*(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  double v = a.value() * b.value();
  return t ? t->binary(a, b, v, b.value(), a.value()) : Var(v);
}

Var operator/(const Var& a, const Var& b) {
  Tape* t = common_tape(a, b);
  double v = a.value() / b.value();
  return t ? t->binary(a, b, v, 1.0 / b.value(), -v / b.value()) : Var(v);
}

Var operator-(const Var& a) { return a.tape() ? a.tape()->unary(a, -a.value(), -1.0) : Var(-a.value()); }

Var square(const Var& a) {
  double v = a.value() * a.value();
  return a.tape() ? a.tape()->unary(a, v, 2.0 * a.value()) : Var(v);
}

Var pow(const Var& a, int n) {
  double v = std::pow(a.value(), n);
  double d = n == 0 ? 0.0 : n * std::pow(a.value(), n - 1);
  return a.tape() ? a.tape()->unary(a, v, d) : Var(v);
}

Var exp(const Var& a) {
  double v = std::exp(a.value());
  return a.tape() ? a.tape()->unary(a, v, v) : Var(v);
}

Var sin(const Var& a) {
  double v = std::sin(a.value());
  return a.tape() ? a.tape()->unary(a, v, std::cos(a.value())) : Var(v);
}

Var cos(const Var& a) {
  double v = std::cos(a.value());
  return a.tape() ? a.tape()->unary(a, v, -std::sin(a.value())) : Var(v);
}

Var sqrt(const Var& a) {
  double v = std::sqrt(a.value());
  return a.tape() ? a.tape()->unary(a, v, 0.5 / v) : Var(v);
}

Var sum(std::span<const Var> terms) {
  for (const Var& t : terms)
    if (t.tape()) return t.tape()->sum(terms);
  double total = 0.0;
  for (const Var& t : terms) total += t.value();
  return Var(total);
}

}  // namespace graphpinn
