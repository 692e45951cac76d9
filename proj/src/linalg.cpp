// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <string>

namespace sqwp {

namespace {

void require_same_square(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

void SLHTriple::validate(double tol) const {
  const auto d = L.rows();
  if (L.cols() != d || S.rows() != d || S.cols() != d || H.rows() != d ||
      H.cols() != d || d == 0) {
    throw std::invalid_argument("SLH: S, L, H must share one square dimension");
  }
  const CMatrix id = CMatrix::Identity(d, d);
  if ((S.adjoint() * S - id).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("SLH: S is not unitary");
  }
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("SLH: H is not Hermitian");
  }
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  require_same_square(a, b, "commutator");
  return a * b - b * a;
}

CMatrix anticommutator(const CMatrix& a, const CMatrix& b) {
  require_same_square(a, b, "anticommutator");
  return a * b + b * a;
}

CMatrix dissipator(const CMatrix& l, const CMatrix& rho) {
  require_same_square(l, rho, "dissipator");
  const CMatrix ldl = l.adjoint() * l;
  return l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
}

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw std::invalid_argument("unvec: size is not dim^2");
  }
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

SuperOp superop_of(const std::function<CMatrix(const CMatrix&)>& map, int dim) {
  SuperOp s{dim, CMatrix::Zero(dim * dim, dim * dim)};
  for (int j = 0; j < dim * dim; ++j) {
    CMatrix e = CMatrix::Zero(dim, dim);
    e(j % dim, j / dim) = 1.0;
    s.matrix.col(j) = vec(map(e));
  }
  return s;
}

CMatrix apply(const SuperOp& s, const CMatrix& rho) {
  return unvec(s.matrix * vec(rho), s.dim);
}

CMatrix choi_of(const SuperOp& s) {
  const int d = s.dim;
  std::vector<CMatrix> images(d * d);
  for (int j = 0; j < d * d; ++j) images[j] = unvec(s.matrix.col(j), d);
  return choi_from_images(images, d);
}

CMatrix choi_from_images(const std::vector<CMatrix>& images, int dim_in) {
  if (images.size() != static_cast<std::size_t>(dim_in) * dim_in) {
    throw std::invalid_argument("choi_from_images: need dim_in^2 images");
  }
  const auto dout = images.front().rows();
  CMatrix c = CMatrix::Zero(dim_in * dout, dim_in * dout);
  for (int i = 0; i < dim_in; ++i) {
    for (int j = 0; j < dim_in; ++j) {
      c.block(i * dout, j * dout, dout, dout) = images[i + dim_in * j];
    }
  }
  return c;
}

std::vector<double> hermitian_eigenvalues(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermitian_eigenvalues: non-square input");
  }
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

const TwoLevelBasis& two_level_basis() {
  static const TwoLevelBasis b = [] {
    TwoLevelBasis t;
    t.sm = CMatrix::Zero(2, 2);
    t.sm(0, 1) = 1.0;
    t.sp = t.sm.adjoint();
    t.sx = t.sp + t.sm;
    t.sy = -I_UNIT * t.sp + I_UNIT * t.sm;
    t.pe = t.sp * t.sm;
    t.pg = t.sm * t.sp;
    t.sz = t.pe - t.pg;
    t.id = CMatrix::Identity(2, 2);
    return t;
  }();
  return b;
}

bool is_hermitian(const CMatrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double trace_norm_diff(const CMatrix& a, const CMatrix& b) {
  const auto ev = hermitian_eigenvalues(a - b);
  double s = 0.0;
  for (double e : ev) s += std::abs(e);
  return s;
}

double operator_norm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace sqwp
