// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/hierarchy.hpp"

#include <cmath>
#include <stdexcept>

namespace sqwp {

StateTensor::StateTensor(int n_max, int dim) : n_max_(n_max), dim_(dim) {
  if (n_max < 0 || dim <= 0) throw std::invalid_argument("StateTensor: bad shape");
  data_ = CVector::Zero(static_cast<Eigen::Index>(side()) * side() * block_size());
}

Eigen::Map<CMatrix> StateTensor::block(int m, int n) {
  return Eigen::Map<CMatrix>(data_.data() + offset(m, n), dim_, dim_);
}

Eigen::Map<const CMatrix> StateTensor::block(int m, int n) const {
  return Eigen::Map<const CMatrix>(data_.data() + offset(m, n), dim_, dim_);
}

double StateTensor::dagger_pairing_residual() const {
  double worst = 0.0;
  for (int m = 0; m < side(); ++m) {
    for (int n = m; n < side(); ++n) {
      worst = std::max(worst, (block(n, m) - block(m, n).adjoint()).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

FieldState FieldState::pure(const std::vector<cd>& a) {
  FieldState f;
  for (std::size_t m = 0; m < a.size(); ++m) {
    for (std::size_t n = 0; n < a.size(); ++n) {
      const cd c = a[m] * std::conj(a[n]);
      if (c != cd(0.0, 0.0)) f.coeffs[{static_cast<int>(m), static_cast<int>(n)}] = c;
    }
  }
  return f;
}

namespace {

FieldState renormalized_pure(std::vector<cd> a, double* residual) {
  double norm = 0.0;
  for (const auto& x : a) norm += std::norm(x);
  if (residual) *residual = 1.0 - norm;
  const double s = 1.0 / std::sqrt(norm);
  for (auto& x : a) x *= s;
  return FieldState::pure(a);
}

}  // namespace

FieldState FieldState::truncated_squeezed_vacuum(const SqueezeParams& p, int n_max,
                                                 double* residual) {
  return renormalized_pure(squeezed_vacuum_fock_amplitudes(p, n_max), residual);
}

FieldState FieldState::vacuum_in_squeezed_basis(const SqueezeParams& p, int n_max,
                                                double* residual) {
  return renormalized_pure(vacuum_in_squeezed_basis_amplitudes(p, n_max), residual);
}

int FieldState::max_index() const {
  int k = 0;
  for (const auto& [mn, c] : coeffs) k = std::max({k, mn.first, mn.second});
  return k;
}

void FieldState::validate(double tol) const {
  cd tr = 0.0;
  for (const auto& [mn, c] : coeffs) {
    if (mn.first < 0 || mn.second < 0) throw std::invalid_argument("FieldState: negative index");
    if (mn.first == mn.second) tr += c;
    auto it = coeffs.find({mn.second, mn.first});
    const cd partner = it == coeffs.end() ? cd(0.0, 0.0) : it->second;
    if (std::abs(partner - std::conj(c)) > tol) {
      throw std::invalid_argument("FieldState: coefficients are not Hermitian");
    }
  }
  if (std::abs(tr - 1.0) > tol) throw std::invalid_argument("FieldState: trace != 1");
}

HierarchyModel::HierarchyModel(SLHTriple slh, WavePacket wp, SqueezeParams sq, int n_max,
                               TruncationPolicy policy)
    : slh_(std::move(slh)), wp_(std::move(wp)), sq_(sq), n_max_(n_max), policy_(policy) {
  slh_.validate();
  if (n_max < 0) throw std::invalid_argument("HierarchyModel: n_max < 0");
  heff_ = -I_UNIT * slh_.H - 0.5 * slh_.L.adjoint() * slh_.L;
  sds_ = slh_.S.adjoint() * slh_.S;
  s_identity_ = (slh_.S - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff() == 0.0;
}

double HierarchyModel::step_gate(double h) const {
  return wp_.max_abs() * n_max_ * sq_.coshr() * h;
}

StateTensor init_tensor_unchecked(const CMatrix& x, int n_max) {
  StateTensor st(n_max, static_cast<int>(x.rows()));
  for (int n = 0; n <= n_max; ++n) st.block(n, n) = x;
  return st;
}

StateTensor init_tensor(const CMatrix& rho0, int n_max) {
  if (rho0.rows() != rho0.cols()) throw std::invalid_argument("init_tensor: rho0 not square");
  if (!is_hermitian(rho0, 1e-10)) throw std::invalid_argument("init_tensor: rho0 not Hermitian");
  if (std::abs(rho0.trace() - 1.0) > 1e-10) throw std::invalid_argument("init_tensor: tr rho0 != 1");
  if (hermitian_eigenvalues(rho0).front() < -1e-10) {
    throw std::invalid_argument("init_tensor: rho0 not positive semidefinite");
  }
  return init_tensor_unchecked(rho0, n_max);
}

namespace {

template <int D>
void squeezed_kernel(double t, const StateTensor& st, const HierarchyModel& model,
                     StateTensor& out) {
  using Mat = Eigen::Matrix<cd, D, D>;
  using CMap = Eigen::Map<const Mat>;
  const int d = st.dim();
  const int side = st.side();
  const int nmax = st.n_max();
  const Eigen::Index bs = st.block_size();
  const cd* src = st.data().data();
  cd* dst = out.data().data();

  const Mat heff = model.heff();
  const Mat heffd = heff.adjoint();
  const Mat L = model.slh().L;
  const Mat Ld = L.adjoint();
  const Mat S = model.slh().S;
  const Mat Sd = S.adjoint();
  const Mat SdS = model.sds();
  const bool s_id = model.s_is_identity();

  const cd xi = model.packet().sample(t);
  const double xi2 = std::norm(xi);
  const bool coupled = xi != cd(0.0, 0.0);
  const double ch = model.squeeze().coshr();
  const cd se = model.squeeze().sinhr() * model.squeeze().e2iphi();
  const cd sec = std::conj(se);

  std::vector<double> sq(side + 1);
  for (int k = 0; k <= side; ++k) sq[k] = std::sqrt(static_cast<double>(k));

  auto blk = [&](int m, int n) { return CMap(src + (static_cast<Eigen::Index>(m) * side + n) * bs, d, d); };
  // A_{mn} = ch sqrt(m) rho_{m-1,n} - sinh r e^{2i phi} sqrt(m+1) rho_{m+1,n}
  auto A = [&](int m, int n) -> Mat {
    Mat a = Mat::Zero(d, d);
    if (n < 0 || n > nmax) return a;
    if (m > 0) a += (ch * sq[m]) * blk(m - 1, n);
    if (m < nmax) a -= (se * sq[m + 1]) * blk(m + 1, n);
    return a;
  };

  const int nb = side * side;
#pragma omp parallel for schedule(static) if (nb * d * d >= 256)
  for (int b = 0; b < nb; ++b) {
    const int m = b / side;
    const int n = b % side;
    const auto rho = blk(m, n);
    Mat r = heff * rho + rho * heffd + L * rho * Ld;
    if (coupled) {
      const Mat a = A(m, n);
      Mat bm = Mat::Zero(d, d);
      if (n > 0) bm += (ch * sq[n]) * blk(m, n - 1);
      if (n < nmax) bm -= (sec * sq[n + 1]) * blk(m, n + 1);
      const Mat sa = s_id ? a : Mat(S * a);
      const Mat bs_ = s_id ? bm : Mat(bm * Sd);
      r += xi * (sa * Ld - Ld * sa) + std::conj(xi) * (L * bs_ - bs_ * L);
      if (!s_id) {
        Mat x = Mat::Zero(d, d);
        if (n > 0) x += (ch * sq[n]) * A(m, n - 1);
        if (n < nmax) x -= (sec * sq[n + 1]) * A(m, n + 1);
        r += xi2 * (S * x * Sd - 0.5 * (SdS * x + x * SdS));
      }
    }
    Eigen::Map<Mat>(dst + static_cast<Eigen::Index>(b) * bs, d, d) = r;
  }
}

void check_out(const StateTensor& st, StateTensor& out) {
  if (out.n_max() != st.n_max() || out.dim() != st.dim()) out = StateTensor(st.n_max(), st.dim());
}

}  // namespace

void squeezed_rhs(double t, const StateTensor& st, const HierarchyModel& model, StateTensor& out) {
  check_out(st, out);
  if (st.dim() == 2) {
    squeezed_kernel<2>(t, st, model, out);
  } else {
    squeezed_kernel<Eigen::Dynamic>(t, st, model, out);
  }
}

StateTensor squeezed_rhs(double t, const StateTensor& st, const SLHTriple& slh,
                         const WavePacket& wp, const SqueezeParams& sq) {
  HierarchyModel model(slh, wp, sq, st.n_max());
  StateTensor out(st.n_max(), st.dim());
  squeezed_rhs(t, st, model, out);
  return out;
}

void squeezed_rhs_reference(double t, const StateTensor& st, const HierarchyModel& model,
                            StateTensor& out) {
  check_out(st, out);
  const int d = st.dim();
  const int nmax = st.n_max();
  const CMatrix zero = CMatrix::Zero(d, d);
  auto get = [&](int m, int n) -> CMatrix {
    if (m < 0 || n < 0 || m > nmax || n > nmax) return zero;
    return st.block(m, n);
  };
  const auto& slh = model.slh();
  const CMatrix Ld = slh.L.adjoint();
  const CMatrix Sd = slh.S.adjoint();
  auto DS = [&](const CMatrix& x) -> CMatrix {
    const CMatrix sds = Sd * slh.S;
    return slh.S * x * Sd - 0.5 * (sds * x + x * sds);
  };
  const cd xi = model.packet().sample(t);
  const cd xic = std::conj(xi);
  const double xi2 = std::norm(xi);
  const double ch = model.squeeze().coshr();
  const double sh = model.squeeze().sinhr();
  const cd e2 = model.squeeze().e2iphi();
  const cd e2c = std::conj(e2);

  for (int m = 0; m <= nmax; ++m) {
    for (int n = 0; n <= nmax; ++n) {
      const double dm = m, dn = n;
      const CMatrix rho = get(m, n);
      CMatrix r = -I_UNIT * commutator(slh.H, rho) + dissipator(slh.L, rho);
      r += xi * ch * std::sqrt(dm) * commutator(slh.S * get(m - 1, n), Ld);
      r += xic * ch * std::sqrt(dn) * commutator(slh.L, get(m, n - 1) * Sd);
      r -= xi * sh * e2 * std::sqrt(dm + 1) * commutator(slh.S * get(m + 1, n), Ld);
      r -= xic * sh * e2c * std::sqrt(dn + 1) * commutator(slh.L, get(m, n + 1) * Sd);
      r += xi2 * ch * ch * std::sqrt(dm * dn) * DS(get(m - 1, n - 1));
      r -= xi2 * ch * sh * e2c * std::sqrt(dm * (dn + 1)) * DS(get(m - 1, n + 1));
      r -= xi2 * ch * sh * e2 * std::sqrt((dm + 1) * dn) * DS(get(m + 1, n - 1));
      r += xi2 * sh * sh * std::sqrt((dm + 1) * (dn + 1)) * DS(get(m + 1, n + 1));
      out.block(m, n) = r;
    }
  }
}

void fock_rhs(double t, const StateTensor& st, const HierarchyModel& model, StateTensor& out) {
  check_out(st, out);
  const auto& slh = model.slh();
  const CMatrix Ld = slh.L.adjoint();
  const CMatrix Sd = slh.S.adjoint();
  const CMatrix SdS = Sd * slh.S;
  const cd xi = model.packet().sample(t);
  const int side = st.side();
  for (int m = 0; m < side; ++m) {
    for (int n = 0; n < side; ++n) {
      const CMatrix rho = st.block(m, n);
      CMatrix r = -I_UNIT * (slh.H * rho - rho * slh.H) + dissipator(slh.L, rho);
      if (m > 0) {
        const CMatrix s_rho = slh.S * st.block(m - 1, n);
        r += xi * std::sqrt(double(m)) * (s_rho * Ld - Ld * s_rho);
      }
      if (n > 0) {
        const CMatrix rho_s = st.block(m, n - 1) * Sd;
        r += std::conj(xi) * std::sqrt(double(n)) * (slh.L * rho_s - rho_s * slh.L);
      }
      if (m > 0 && n > 0) {
        const CMatrix x = st.block(m - 1, n - 1);
        r += std::norm(xi) * std::sqrt(double(m) * n) *
             (slh.S * x * Sd - 0.5 * (SdS * x + x * SdS));
      }
      out.block(m, n) = r;
    }
  }
}

CMatrix reduce_state(const StateTensor& st, const FieldState& field) {
  CMatrix rho = CMatrix::Zero(st.dim(), st.dim());
  for (const auto& [mn, c] : field.coeffs) {
    if (mn.first > st.n_max() || mn.second > st.n_max()) {
      throw std::invalid_argument("reduce_state: field index beyond n_max");
    }
    rho += c * st.block(mn.first, mn.second);
  }
  return rho;
}

CMatrix extended_state(const StateTensor& st) {
  const int d = st.dim();
  const int side = st.side();
  CMatrix e(d * side, d * side);
  for (int m = 0; m < side; ++m) {
    for (int n = 0; n < side; ++n) e.block(m * d, n * d, d, d) = st.block(m, n);
  }
  return e;
}

double output_flux(const StateTensor& st, const HierarchyModel& model, double t, int n) {
  if (n < 0 || n > st.n_max()) throw std::invalid_argument("output_flux: n out of range");
  const auto& L = model.slh().L;
  const double xi2 = std::norm(model.packet().sample(t));
  const double ch = model.squeeze().coshr();
  const double sh = model.squeeze().sinhr();
  const cd emitted = (L.adjoint() * L * st.block(n, n)).trace();
  return emitted.real() + xi2 * (ch * ch * n + sh * sh * (n + 1));
}

double output_quadrature(const StateTensor& st, const SLHTriple& slh, int n, double varphi) {
  if (n < 0 || n > st.n_max()) throw std::invalid_argument("output_quadrature: n out of range");
  const cd l = (slh.L * st.block(n, n)).trace();
  return 2.0 * (std::polar(1.0, -varphi) * l).real() / std::sqrt(2.0);
}

}  // namespace sqwp
