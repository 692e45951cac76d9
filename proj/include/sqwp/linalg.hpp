// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense operator primitives, superoperators and Choi matrices.
//
// Vectorization convention (used everywhere in the library): vec(rho) stacks
// the columns of rho top to bottom, so vec(A X B) = (B^T kron A) vec(X). This
// is also Eigen's native column-major storage order.
//
// Two-level basis ordering is (|g>, |e>): index 0 is the ground state.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sqwp {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cd I_UNIT{0.0, 1.0};

struct SLHTriple {
  CMatrix S;
  CMatrix L;
  CMatrix H;

  int dim() const { return static_cast<int>(L.rows()); }
  // Throws std::invalid_argument on shape mismatch, non-unitary S or
  // non-Hermitian H.
  void validate(double tol = 1e-10) const;
};

struct SuperOp {
  int dim = 0;
  CMatrix matrix;  // dim^2 x dim^2, acts on vec(rho)
};

CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix anticommutator(const CMatrix& a, const CMatrix& b);
// L rho L^dag - (L^dag L rho + rho L^dag L) / 2
CMatrix dissipator(const CMatrix& l, const CMatrix& rho);

CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, int dim);

SuperOp superop_of(const std::function<CMatrix(const CMatrix&)>& map, int dim);
CMatrix apply(const SuperOp& s, const CMatrix& rho);

// Choi matrix (id kron Phi)(|Omega><Omega|) with |Omega> = sum_i |i>|i>.
CMatrix choi_of(const SuperOp& s);
// Choi matrix of a map from dim_in x dim_in matrices to arbitrary outputs,
// given the images images[i + dim_in * j] = Phi(|i><j|).
CMatrix choi_from_images(const std::vector<CMatrix>& images, int dim_in);

// Ascending eigenvalues of (m + m^dag)/2.
std::vector<double> hermitian_eigenvalues(const CMatrix& m);

struct TwoLevelBasis {
  CMatrix sm, sp, sx, sy, sz, pe, pg, id;
};
const TwoLevelBasis& two_level_basis();

bool is_hermitian(const CMatrix& m, double tol);
double trace_norm_diff(const CMatrix& a, const CMatrix& b);
// Largest singular value.
double operator_norm(const CMatrix& m);

}  // namespace sqwp
