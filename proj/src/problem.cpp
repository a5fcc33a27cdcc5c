#include "graphpinn/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace graphpinn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reaction(const Coefficients& c, double x, double t, double u) { return c.sigma(x, t, u); }

Var reaction(const Coefficients& c, double x, double t, const Var& u) {
  double s = c.sigma(x, t, u.value());
  return u.tape() ? u.tape()->unary(u, s, c.sigma_u(x, t, u.value())) : Var(s);
}

// Transport and reaction part shared by all three operators: (b u)_x + sigma(u) u.
template <class T>
T transport_reaction(const Coefficients& c, const BasicJet<T>& jet, double x, double t) {
  T r = reaction(c, x, t, jet.u) * jet.u;
  const double bx = c.b_x(x, t);
  const double b = c.b(x, t);
  if (bx != 0.0) r = r + bx * jet.u;
  if (b != 0.0) r = r + b * jet.du_dx;
  return r;
}

template <class T>
T diffusion(const Coefficients& c, const BasicJet<T>& jet, double x, double t) {
  // -(mu u_x)_x = -mu_x u_x - mu u_xx
  const double mux = c.mu_x(x, t);
  T d = -(c.mu(x, t) * jet.d2u_dx2);
  if (mux != 0.0) d = d - mux * jet.du_dx;
  return d;
}

template <class T>
T apply(ProblemKind kind, const Coefficients& c, const BasicJet<T>& jet, double x, double t) {
  switch (kind) {
    case ProblemKind::Elliptic:
      return diffusion(c, jet, x, t) + transport_reaction(c, jet, x, t);
    case ProblemKind::Parabolic:
      return jet.du_dt + (diffusion(c, jet, x, t) + transport_reaction(c, jet, x, t));
    case ProblemKind::Hyperbolic:
      return jet.du_dt + transport_reaction(c, jet, x, t);
  }
  throw std::logic_error("unknown problem kind");
}

void check_domain(const Problem& p, double l, double x, double t) {
  if (!(l > 0.0)) throw std::domain_error("edge length must be positive");
  const double slack = 1e-12 * std::max(1.0, l);
  if (!(x >= -slack && x <= l + slack))
    throw std::domain_error("x = " + std::to_string(x) + " outside [0, " + std::to_string(l) + "]");
  if (is_time_dependent(p.kind)) {
    const double tslack = 1e-12 * std::max(1.0, p.horizon);
    if (!(t >= -tslack && t <= p.horizon + tslack))
      throw std::domain_error("t = " + std::to_string(t) + " outside [0, " + std::to_string(p.horizon) + "]");
  }
}

double amplitude(const Problem& p, double t) {
  switch (p.kind) {
    case ProblemKind::Elliptic:
      return 1.0;
    case ProblemKind::Parabolic:
      return 30.0 * std::exp(-t);
    case ProblemKind::Hyperbolic:
      return 10.0 * std::cos(t);
  }
  return 0.0;
}

double amplitude_dt(const Problem& p, double t) {
  switch (p.kind) {
    case ProblemKind::Elliptic:
      return 0.0;
    case ProblemKind::Parabolic:
      return -30.0 * std::exp(-t);
    case ProblemKind::Hyperbolic:
      return -10.0 * std::sin(t);
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Elliptic:
      return "elliptic";
    case ProblemKind::Parabolic:
      return "parabolic";
    case ProblemKind::Hyperbolic:
      return "hyperbolic";
  }
  return "?";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "elliptic") return ProblemKind::Elliptic;
  if (name == "parabolic") return ProblemKind::Parabolic;
  if (name == "hyperbolic") return ProblemKind::Hyperbolic;
  throw std::invalid_argument("unknown problem kind '" + std::string(name) + "'");
}

const Coefficients& default_coefficients() {
  static const Coefficients c{
      [](double, double) { return 1.0; },
      [](double, double) { return 0.0; },
      [](double, double) { return 0.0; },
      [](double, double) { return 0.0; },
      [](double, double, double u) { return u * u; },
      [](double, double, double u) { return 2.0 * u; },
  };
  return c;
}

double apply_operator(ProblemKind kind, const Coefficients& c, const UJet& jet, double x, double t) {
  return apply(kind, c, jet, x, t);
}

Var apply_operator(ProblemKind kind, const Coefficients& c, const BasicJet<Var>& jet, double x, double t) {
  return apply(kind, c, jet, x, t);
}

double exact_u(const Problem& p, double l, double x, double t) {
  check_domain(p, l, x, t);
  return amplitude(p, t) * (std::cos(kTwoPi * x / l) - 1.0);
}

UJet exact_jet(const Problem& p, double l, double x, double t) {
  check_domain(p, l, x, t);
  const double k = kTwoPi / l;
  const double c = std::cos(k * x);
  const double s = std::sin(k * x);
  const double a = amplitude(p, t);
  UJet j;
  j.u = a * (c - 1.0);
  j.du_dx = -a * k * s;
  j.d2u_dx2 = -a * k * k * c;
  j.du_dt = amplitude_dt(p, t) * (c - 1.0);
  return j;
}

double forcing(const Problem& p, double l, double x, double t) {
  check_domain(p, l, x, t);
  const double k = kTwoPi / l;
  const double c = std::cos(k * x);
  const double a = amplitude(p, t);
  const double u = a * (c - 1.0);
  const double u_cubed = u * u * u;
  switch (p.kind) {
    case ProblemKind::Elliptic:
      return k * k * c + u_cubed;
    case ProblemKind::Parabolic:
      // u_t = -u, -u_xx = a k^2 cos(kx)
      return -u + a * k * k * c + u_cubed;
    case ProblemKind::Hyperbolic:
      return amplitude_dt(p, t) * (c - 1.0) + u_cubed;
  }
  return 0.0;
}

double initial_condition(const Problem& p, double l, double x) {
  if (!is_time_dependent(p.kind)) throw std::invalid_argument("initial condition requested for an elliptic problem");
  return exact_u(p, l, x, 0.0);
}

}  // namespace graphpinn
