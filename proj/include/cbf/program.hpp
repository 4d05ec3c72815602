#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cbf/linalg.hpp"

namespace cbf {

// Sparse entries (index, value); repeated indices add up.
using SparseVec = std::vector<std::pair<int, double>>;

struct AffineForm {
  SparseVec terms;
  double constant = 0.0;

  double eval(const Vector& v) const;
  AffineForm& add(int index, double coef);
  AffineForm& add(int offset, const Vector& coefs);
};

enum class ScalarFn { kExp, kSoftplus };

double scalar_fn(ScalarFn fn, double s);
double scalar_fn_d1(ScalarFn fn, double s);
double scalar_fn_d2(ScalarFn fn, double s);

// coeff * f(arg(v)); convex when coeff >= 0.
struct Ridge {
  ScalarFn fn;
  double coeff = 1.0;
  AffineForm arg;
};

// g(v) = affine(v) + sum of ridges, required g(v) <= 0.
struct Constraint {
  std::string tag;
  int user = -1;
  int link = -1;
  AffineForm affine;
  std::vector<Ridge> ridges;

  double value(const Vector& v) const;
  SparseVec gradient(const Vector& v) const;
  void add_hessian(const Vector& v, double scale, Matrix& h) const;
};

// Hermitian positive semidefinite block stored as hermitian_dim(nt) coordinates.
struct PsdBlock {
  int offset = 0;
  int nt = 0;
  std::string name;

  CMatrix matrix(const Vector& v) const;
};

// Concave objective to maximize. value() returns NaN outside its domain.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<void(const Vector&, Vector&)> gradient;
  std::function<void(const Vector&, double, Matrix&)> add_hessian;

  static Objective linear(const Vector& c);
};

struct ConvexProgram {
  int num_vars = 0;
  std::vector<std::string> var_names;
  Objective objective;
  std::vector<Constraint> constraints;
  std::vector<PsdBlock> blocks;

  int add_variable(std::string name);
  int add_block(int nt, std::string name);

  // Largest constraint value and most negative block eigenvalue (sign-flipped).
  double max_violation(const Vector& v) const;
  bool strictly_feasible(const Vector& v) const;
  std::vector<double> residuals(const Vector& v) const;
  int count_tagged(const std::string& tag) const;
};

}  // namespace cbf
