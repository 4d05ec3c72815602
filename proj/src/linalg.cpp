#include "cbf/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace cbf {

namespace {

// A basis element expanded into at most two elementary matrices e_a e_b^T.
struct Elementary {
  int a, b;
  Complex coef;
};

int expand_basis(int p, int nt, Elementary out[2]) {
  if (p < nt) {
    out[0] = {p, p, 1.0};
    return 1;
  }
  int rest = p - nt;
  int pair = rest / 2;
  bool imag = rest % 2 == 1;
  int a = 0;
  int row_len = nt - 1;
  while (pair >= row_len) {
    pair -= row_len;
    ++a;
    --row_len;
  }
  int b = a + 1 + pair;
  if (imag) {
    out[0] = {a, b, Complex(0, 1)};
    out[1] = {b, a, Complex(0, -1)};
  } else {
    out[0] = {a, b, 1.0};
    out[1] = {b, a, 1.0};
  }
  return 2;
}

}  // namespace

int hermitian_dim(int nt) { return nt * nt; }

CMatrix unpack_hermitian(std::span<const double> coords, int nt) {
  CMatrix w(nt, nt);
  int p = 0;
  for (int a = 0; a < nt; ++a) w(a, a) = coords[p++];
  for (int a = 0; a < nt; ++a) {
    for (int b = a + 1; b < nt; ++b) {
      Complex v(coords[p], coords[p + 1]);
      p += 2;
      w(a, b) = v;
      w(b, a) = std::conj(v);
    }
  }
  return w;
}

void pack_hermitian(const CMatrix& w, std::span<double> coords) {
  const int nt = static_cast<int>(w.rows());
  int p = 0;
  for (int a = 0; a < nt; ++a) coords[p++] = w(a, a).real();
  for (int a = 0; a < nt; ++a) {
    for (int b = a + 1; b < nt; ++b) {
      Complex v = 0.5 * (w(a, b) + std::conj(w(b, a)));
      coords[p++] = v.real();
      coords[p++] = v.imag();
    }
  }
}

Vector trace_coefficients(const CMatrix& m) {
  const int nt = static_cast<int>(m.rows());
  Vector c(hermitian_dim(nt));
  int p = 0;
  for (int a = 0; a < nt; ++a) c[p++] = m(a, a).real();
  for (int a = 0; a < nt; ++a) {
    for (int b = a + 1; b < nt; ++b) {
      // tr(M E) with E = e_a e_b^T + e_b e_a^T is M(b,a) + M(a,b).
      Complex s = m(b, a) + m(a, b);
      Complex d = Complex(0, 1) * (m(b, a) - m(a, b));
      c[p++] = s.real();
      c[p++] = d.real();
    }
  }
  return c;
}

Matrix hermitian_quadratic_form(const CMatrix& a) {
  const int nt = static_cast<int>(a.rows());
  const int n = hermitian_dim(nt);
  Matrix h(n, n);
  Elementary ep[2], eq[2];
  for (int p = 0; p < n; ++p) {
    int np = expand_basis(p, nt, ep);
    for (int q = p; q < n; ++q) {
      int nq = expand_basis(q, nt, eq);
      // tr(A e_a e_b^T A e_c e_d^T) = A(b, c) A(d, a)
      Complex s = 0;
      for (int u = 0; u < np; ++u) {
        for (int v = 0; v < nq; ++v) {
          s += ep[u].coef * eq[v].coef * a(ep[u].b, eq[v].a) *
               a(eq[v].b, ep[u].a);
        }
      }
      h(p, q) = s.real();
      h(q, p) = s.real();
    }
  }
  return h;
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

double hermitian_error(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double trace_product(const CMatrix& a, const CMatrix& b) {
  // tr(A B) = sum_ij A(i,j) B(j,i)
  return (a.cwiseProduct(b.transpose())).sum().real();
}

double lambda_max(const CMatrix& q) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(q.rows() - 1);
}

double lambda_min(const CMatrix& q) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void normalize_phase(CVector& v, double tol) {
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (std::abs(v[j]) > tol) {
      v *= std::conj(v[j]) / std::abs(v[j]);
      v[j] = std::abs(v[j]);
      return;
    }
  }
}

CVector principal_eigenvector(const CMatrix& q) {
  const int nt = static_cast<int>(q.rows());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q);
  const Vector& ev = es.eigenvalues();
  const double top = ev(nt - 1);
  const double tol = 1e-10 * std::max(1.0, std::abs(top));
  int first = nt - 1;
  while (first > 0 && ev(first - 1) >= top - tol) --first;
  CVector v;
  if (first == nt - 1) {
    v = es.eigenvectors().col(nt - 1);
  } else {
    CMatrix basis = es.eigenvectors().rightCols(nt - first);
    const double dim = static_cast<double>(nt - first);
    for (int j = 0; j < nt; ++j) {
      CVector proj = basis * basis.row(j).adjoint();
      if (proj.squaredNorm() >= dim / (2.0 * nt)) {
        v = proj.normalized();
        break;
      }
    }
  }
  normalize_phase(v);
  return v;
}

int numerical_rank(const CMatrix& w, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(w, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double top = ev(ev.size() - 1);
  if (top <= 0) return 0;
  int r = 0;
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    if (ev(j) > rel_tol * top) ++r;
  }
  return r;
}

CMatrix psd_factor(const CMatrix& q, double tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q);
  Vector ev = es.eigenvalues();
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    if (ev(j) < -tol) {
      throw std::invalid_argument("covariance matrix is not positive semidefinite");
    }
    ev(j) = ev(j) > 0 ? std::sqrt(ev(j)) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace cbf
