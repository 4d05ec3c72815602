#include "cbf/program.hpp"

#include <cmath>
#include <limits>

namespace cbf {

double AffineForm::eval(const Vector& v) const {
  double s = constant;
  for (const auto& [idx, c] : terms) s += c * v[idx];
  return s;
}

AffineForm& AffineForm::add(int index, double coef) {
  terms.emplace_back(index, coef);
  return *this;
}

AffineForm& AffineForm::add(int offset, const Vector& coefs) {
  for (Eigen::Index p = 0; p < coefs.size(); ++p) {
    if (coefs[p] != 0.0) terms.emplace_back(offset + static_cast<int>(p), coefs[p]);
  }
  return *this;
}

double scalar_fn(ScalarFn fn, double s) {
  if (fn == ScalarFn::kExp) return std::exp(s);
  return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double scalar_fn_d1(ScalarFn fn, double s) {
  if (fn == ScalarFn::kExp) return std::exp(s);
  return s > 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

double scalar_fn_d2(ScalarFn fn, double s) {
  if (fn == ScalarFn::kExp) return std::exp(s);
  const double sig = scalar_fn_d1(fn, s);
  return sig * (1.0 - sig);
}

double Constraint::value(const Vector& v) const {
  double g = affine.eval(v);
  for (const auto& r : ridges) g += r.coeff * scalar_fn(r.fn, r.arg.eval(v));
  return g;
}

SparseVec Constraint::gradient(const Vector& v) const {
  SparseVec g = affine.terms;
  for (const auto& r : ridges) {
    const double d = r.coeff * scalar_fn_d1(r.fn, r.arg.eval(v));
    for (const auto& [idx, c] : r.arg.terms) g.emplace_back(idx, d * c);
  }
  return g;
}

void Constraint::add_hessian(const Vector& v, double scale, Matrix& h) const {
  for (const auto& r : ridges) {
    const double d2 = scale * r.coeff * scalar_fn_d2(r.fn, r.arg.eval(v));
    for (const auto& [p, cp] : r.arg.terms) {
      for (const auto& [q, cq] : r.arg.terms) h(p, q) += d2 * cp * cq;
    }
  }
}

CMatrix PsdBlock::matrix(const Vector& v) const {
  return unpack_hermitian(std::span<const double>(v.data() + offset, static_cast<size_t>(hermitian_dim(nt))), nt);
}

Objective Objective::linear(const Vector& c) {
  Objective o;
  o.value = [c](const Vector& v) { return c.dot(v); };
  o.gradient = [c](const Vector&, Vector& g) { g += c; };
  o.add_hessian = [](const Vector&, double, Matrix&) {};
  return o;
}

int ConvexProgram::add_variable(std::string name) {
  var_names.push_back(std::move(name));
  return num_vars++;
}

int ConvexProgram::add_block(int nt, std::string name) {
  PsdBlock b;
  b.offset = num_vars;
  b.nt = nt;
  b.name = name;
  for (int p = 0; p < hermitian_dim(nt); ++p) add_variable(name + "[" + std::to_string(p) + "]");
  blocks.push_back(std::move(b));
  return blocks.back().offset;
}

double ConvexProgram::max_violation(const Vector& v) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) worst = std::max(worst, c.value(v));
  for (const auto& b : blocks) worst = std::max(worst, -lambda_min(b.matrix(v)));
  return worst;
}

bool ConvexProgram::strictly_feasible(const Vector& v) const {
  for (const auto& c : constraints) {
    const double g = c.value(v);
    if (!(g < 0)) return false;
  }
  for (const auto& b : blocks) {
    Eigen::LLT<CMatrix> llt(b.matrix(v));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

std::vector<double> ConvexProgram::residuals(const Vector& v) const {
  std::vector<double> r;
  r.reserve(constraints.size());
  for (const auto& c : constraints) r.push_back(c.value(v));
  return r;
}

int ConvexProgram::count_tagged(const std::string& tag) const {
  int n = 0;
  for (const auto& c : constraints) n += c.tag == tag ? 1 : 0;
  return n;
}

}  // namespace cbf
