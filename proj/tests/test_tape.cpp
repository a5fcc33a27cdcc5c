#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "graphpinn/tape.hpp"

using namespace graphpinn;
using Catch::Approx;

TEST_CASE("elementary partials") {
  Tape t;
  const Var x = t.variable(0.7), y = t.variable(-1.3);
  const Var f = x * y + sin(x) / y - exp(y) * cos(x) + sqrt(x) - pow(y, 3);
  const auto a = t.adjoints(f);
  const double xv = 0.7, yv = -1.3;
  CHECK(f.value() == Approx(xv * yv + std::sin(xv) / yv - std::exp(yv) * std::cos(xv) + std::sqrt(xv) -
                            yv * yv * yv));
  CHECK(a[x.index()] == Approx(yv + std::cos(xv) / yv + std::exp(yv) * std::sin(xv) + 0.5 / std::sqrt(xv)));
  CHECK(a[y.index()] ==
        Approx(xv - std::sin(xv) / (yv * yv) - std::exp(yv) * std::cos(xv) - 3 * yv * yv));
}

TEST_CASE("constants fold and carry no tape") {
  const Var c = Var(2.0) * Var(3.0) + 1.0;
  CHECK(c.is_constant());
  CHECK(c.value() == 7.0);
  Tape t;
  const Var x = t.variable(1.5);
  const Var f = square(x - 0.5) * 4.0;
  CHECK(t.adjoints(f)[x.index()] == Approx(8.0));
}

TEST_CASE("sum and reuse of shared subexpressions") {
  Tape t;
  const Var x = t.variable(2.0);
  std::vector<Var> terms{x, x * x, Var(5.0), -x};
  const Var s = sum(terms);
  CHECK(s.value() == 9.0);
  CHECK(t.adjoints(s)[x.index()] == Approx(4.0));
}

TEST_CASE("compound assignment") {
  Tape t;
  const Var x = t.variable(3.0);
  Var acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += x * double(k);
  acc -= x;
  acc *= x;
  CHECK(acc.value() == Approx(45.0));
  CHECK(t.adjoints(acc)[x.index()] == Approx(30.0));
}

TEST_CASE("mixing tapes is an error") {
  Tape a, b;
  const Var x = a.variable(1.0), y = b.variable(2.0);
  CHECK_THROWS_AS(x + y, std::logic_error);
}

TEST_CASE("clear resets the tape") {
  Tape t;
  t.variable(1.0);
  t.variable(2.0);
  CHECK(t.size() == 2);
  t.clear();
  CHECK(t.size() == 0);
}
