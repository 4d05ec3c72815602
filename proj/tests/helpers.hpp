#pragma once

#include <cmath>
#include <vector>

#include "cbf/model.hpp"
#include "cbf/program.hpp"

namespace testing_support {

using namespace cbf;

// Full-power beamformers along the principal eigenvector of each Q_ii,
// computed here without the library's initializer.
inline BeamformerSet principal_beams(const ChannelSet& cs) {
  std::vector<CVector> w;
  for (int i = 0; i < cs.K; ++i) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cs.q(i, i));
    w.push_back(std::sqrt(cs.P[static_cast<size_t>(i)]) * es.eigenvectors().col(cs.Nt - 1));
  }
  return BeamformerSet::from_vectors(std::move(w));
}

// Central-difference Jacobian of the constraint gradient.
inline Matrix numeric_hessian(const Constraint& c, const Vector& v, double h = 1e-5) {
  const auto n = v.size();
  Matrix H = Matrix::Zero(n, n);
  auto dense_grad = [&](const Vector& p) {
    Vector g = Vector::Zero(n);
    for (const auto& [idx, a] : c.gradient(p)) g[idx] += a;
    return g;
  };
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector vp = v, vm = v;
    vp[j] += h;
    vm[j] -= h;
    H.col(j) = (dense_grad(vp) - dense_grad(vm)) / (2 * h);
  }
  return 0.5 * (H + H.transpose());
}

inline Vector numeric_gradient(const Constraint& c, const Vector& v, double h = 1e-6) {
  Vector g(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    Vector vp = v, vm = v;
    vp[j] += h;
    vm[j] -= h;
    g[j] = (c.value(vp) - c.value(vm)) / (2 * h);
  }
  return g;
}

}  // namespace testing_support
