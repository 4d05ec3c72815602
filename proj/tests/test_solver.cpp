#include <doctest.h>

#include <cmath>

#include "cbf/solver.hpp"

using namespace cbf;

TEST_CASE("barrier solves a one-dimensional projection") {
  // maximize -(x - 2)^2 s.t. x <= 1
  ConvexProgram prog;
  const int x = prog.add_variable("x");
  prog.objective.value = [x](const Vector& v) { return -(v[x] - 2) * (v[x] - 2); };
  prog.objective.gradient = [x](const Vector& v, Vector& g) { g[x] += -2 * (v[x] - 2); };
  prog.objective.add_hessian = [x](const Vector&, double s, Matrix& h) { h(x, x) += -2 * s; };
  Constraint c;
  c.tag = "cap";
  c.affine.add(x, 1.0).constant = -1.0;
  prog.constraints.push_back(c);

  Vector start(1);
  start << 0.0;
  const Solution sol = solve_barrier(prog, start);
  CHECK(sol.status == SolveStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.lambda[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("barrier finds the principal eigen-direction under a trace budget") {
  ConvexProgram prog;
  const int off = prog.add_block(2, "W");
  CMatrix q = CMatrix::Zero(2, 2);
  q(0, 0) = 2.0;
  q(1, 1) = 1.0;
  Vector c = Vector::Zero(prog.num_vars);
  c.segment(off, 4) = trace_coefficients(q);
  prog.objective = Objective::linear(c);
  Constraint pow;
  pow.tag = "P";
  pow.affine.add(off, trace_coefficients(CMatrix::Identity(2, 2))).constant = -1.0;
  prog.constraints.push_back(pow);

  Vector start = Vector::Zero(prog.num_vars);
  start[0] = 0.25;
  start[1] = 0.25;
  const Solution sol = solve_barrier(prog, start);
  CHECK(sol.status == SolveStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-8));
  const CMatrix w = prog.blocks[0].matrix(sol.x);
  CHECK(std::abs(w(0, 0) - 1.0) < 1e-6);
  CHECK(std::abs(w(1, 1)) < 1e-6);
  CHECK(std::abs(w(0, 1)) < 1e-6);
}
