#pragma once

#include <functional>
#include <string_view>

#include "graphpinn/jet.hpp"
#include "graphpinn/tape.hpp"

namespace graphpinn {

enum class ProblemKind { Elliptic, Parabolic, Hyperbolic };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);

inline bool is_time_dependent(ProblemKind kind) { return kind != ProblemKind::Elliptic; }
inline int input_arity(ProblemKind kind) { return is_time_dependent(kind) ? 2 : 1; }

// Problem kind plus its time horizon (ignored for Elliptic).
struct Problem {
  ProblemKind kind = ProblemKind::Elliptic;
  double horizon = 1.0;
};

// Edge coefficients. Spatial derivatives of mu and b are supplied analytically;
// sigma_u is d(sigma)/du, used when the reaction is differentiated on a tape.
struct Coefficients {
  std::function<double(double x, double t)> mu;
  std::function<double(double x, double t)> mu_x;
  std::function<double(double x, double t)> b;
  std::function<double(double x, double t)> b_x;
  std::function<double(double x, double t, double u)> sigma;
  std::function<double(double x, double t, double u)> sigma_u;
};

// mu = 1, b = 0, sigma(u) = u^2.
const Coefficients& default_coefficients();

using UJet = Jet;

// L1 = -(mu u_x)_x + (b u)_x + sigma(u) u
// L2 = u_t + L1
// L3 = u_t + (b u)_x + sigma(u) u
double apply_operator(ProblemKind kind, const Coefficients& c, const UJet& jet, double x, double t);
Var apply_operator(ProblemKind kind, const Coefficients& c, const BasicJet<Var>& jet, double x, double t);

// Manufactured solutions on an edge of length l:
//   elliptic    cos(2 pi x / l) - 1
//   parabolic   30 e^{-t} (cos(2 pi x / l) - 1)
//   hyperbolic  10 cos(t) (cos(2 pi x / l) - 1)
// All throw std::domain_error outside 0 <= x <= l (and 0 <= t <= T when timed).
double exact_u(const Problem& p, double l, double x, double t = 0.0);
UJet exact_jet(const Problem& p, double l, double x, double t = 0.0);

// Closed-form L_k(exact_u) for the default coefficients.
double forcing(const Problem& p, double l, double x, double t = 0.0);

// g(x) = exact_u(x, 0); std::invalid_argument for Elliptic.
double initial_condition(const Problem& p, double l, double x);

}  // namespace graphpinn
