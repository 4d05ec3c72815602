#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cbf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Hermitian Nt x Nt matrices are parameterized by Nt^2 real coordinates:
// the Nt diagonal entries first, then (re, im) of each strictly-upper entry
// (a, b), a < b, in row-major order. W = sum_p v_p E_p with
//   diagonal a:  E = e_a e_a^T
//   re (a, b):   E = e_a e_b^T + e_b e_a^T
//   im (a, b):   E = i e_a e_b^T - i e_b e_a^T
// so W(a, b) = re + i im.
int hermitian_dim(int nt);

CMatrix unpack_hermitian(std::span<const double> coords, int nt);
void pack_hermitian(const CMatrix& w, std::span<double> coords);

// Coefficient vector c with tr(W M) = c . v for every Hermitian W; equal to
// tr(M E_p) for each basis element.
Vector trace_coefficients(const CMatrix& m);

// H(p, q) = tr(A E_p A E_q) for Hermitian A; the Hessian of -log det W
// when A = W^{-1}.
Matrix hermitian_quadratic_form(const CMatrix& a);

CMatrix hermitize(const CMatrix& m);

double hermitian_error(const CMatrix& m);

double trace_product(const CMatrix& a, const CMatrix& b);

double lambda_max(const CMatrix& q);

double lambda_min(const CMatrix& q);

// Unit principal eigenvector with the first nonzero entry real-positive.
// Degenerate top eigenspaces resolve to the projection of the lowest-index
// standard basis vector that carries a non-negligible component.
CVector principal_eigenvector(const CMatrix& q);

// Apply the phase convention: first entry with |v_j| > tol made real-positive.
void normalize_phase(CVector& v, double tol = 1e-12);

// Numerical rank with eigenvalues below rel_tol * lambda_max treated as zero.
int numerical_rank(const CMatrix& w, double rel_tol = 1e-6);

// Factor L with L L^H = Q, negative eigenvalues within tol clamped to zero.
// Throws std::invalid_argument when an eigenvalue is below -tol.
CMatrix psd_factor(const CMatrix& q, double tol = 1e-10);

}  // namespace cbf
