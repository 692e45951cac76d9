// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// State tensor rho^{(m,n)} and the squeezed wave-packet hierarchy.
//
// Layout: block (m, n) occupies entries [(m (n_max+1) + n) d^2, ... + d^2) of
// one flat vector, each block column-major d x d. Blocks with an index < 0 or
// > n_max read as zero (hard-zero truncation).

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "sqwp/linalg.hpp"
#include "sqwp/squeezing.hpp"

namespace sqwp {

class StateTensor {
 public:
  StateTensor() = default;
  StateTensor(int n_max, int dim);

  int n_max() const { return n_max_; }
  int dim() const { return dim_; }
  int side() const { return n_max_ + 1; }
  Eigen::Index block_size() const { return static_cast<Eigen::Index>(dim_) * dim_; }
  Eigen::Index offset(int m, int n) const { return (static_cast<Eigen::Index>(m) * side() + n) * block_size(); }

  Eigen::Map<CMatrix> block(int m, int n);
  Eigen::Map<const CMatrix> block(int m, int n) const;

  CVector& data() { return data_; }
  const CVector& data() const { return data_; }

  // Largest |block(n,m) - block(m,n)^dag| entry.
  double dagger_pairing_residual() const;

 private:
  int n_max_ = 0;
  int dim_ = 0;
  CVector data_;
};

// Field-state matrix in the (squeezed-)Fock basis: rho_sys = sum c_{mn} rho^{(m,n)}.
struct FieldState {
  std::map<std::pair<int, int>, cd> coeffs;

  static FieldState squeezed_vacuum() { return FieldState{{{{0, 0}, cd(1.0, 0.0)}}}; }
  static FieldState number(int n) { return FieldState{{{{n, n}, cd(1.0, 0.0)}}}; }
  // c_{mn} = a_m a_n^* for pure amplitudes a.
  static FieldState pure(const std::vector<cd>& amplitudes);
  // Fock-hierarchy input for squeezed vacuum truncated at n_max, renormalized.
  static FieldState truncated_squeezed_vacuum(const SqueezeParams& p, int n_max,
                                              double* residual = nullptr);
  // Vacuum written in the squeezed-Fock basis, truncated and renormalized.
  static FieldState vacuum_in_squeezed_basis(const SqueezeParams& p, int n_max,
                                             double* residual = nullptr);

  int max_index() const;
  // Throws std::invalid_argument when trace != 1 or c is not Hermitian.
  void validate(double tol = 1e-10) const;
};

enum class TruncationPolicy { hard_zero };

// Everything the right-hand side needs, with derived operators cached.
class HierarchyModel {
 public:
  HierarchyModel(SLHTriple slh, WavePacket wp, SqueezeParams sq, int n_max,
                 TruncationPolicy policy = TruncationPolicy::hard_zero);

  const SLHTriple& slh() const { return slh_; }
  const WavePacket& packet() const { return wp_; }
  const SqueezeParams& squeeze() const { return sq_; }
  int n_max() const { return n_max_; }
  int dim() const { return slh_.dim(); }
  TruncationPolicy policy() const { return policy_; }

  // H_eff = -i H - L^dag L / 2, so the vacuum part is H_eff rho + rho H_eff^dag + L rho L^dag.
  const CMatrix& heff() const { return heff_; }
  const CMatrix& sds() const { return sds_; }
  bool s_is_identity() const { return s_identity_; }

  // max |xi| * n_max * cosh r * h; values >= 0.1 call for a smaller step.
  double step_gate(double h) const;

 private:
  SLHTriple slh_;
  WavePacket wp_;
  SqueezeParams sq_;
  int n_max_;
  TruncationPolicy policy_;
  CMatrix heff_;
  CMatrix sds_;
  bool s_identity_ = false;
};

StateTensor init_tensor(const CMatrix& rho0, int n_max);
// Same layout as init_tensor without the density-matrix checks; used to probe
// the hierarchy with matrix units.
StateTensor init_tensor_unchecked(const CMatrix& x, int n_max);

// Squeezed hierarchy derivative. OpenMP over blocks.
void squeezed_rhs(double t, const StateTensor& st, const HierarchyModel& model, StateTensor& out);
StateTensor squeezed_rhs(double t, const StateTensor& st, const SLHTriple& slh,
                         const WavePacket& wp, const SqueezeParams& sq);
// Serial, term-by-term transcription of the same equations; test oracle.
void squeezed_rhs_reference(double t, const StateTensor& st, const HierarchyModel& model,
                            StateTensor& out);
// Fock hierarchy (r = 0, downward coupling only), written independently.
void fock_rhs(double t, const StateTensor& st, const HierarchyModel& model, StateTensor& out);

CMatrix reduce_state(const StateTensor& st, const FieldState& field);
// The output operator sum_{mn} rho^{(m,n)} kron |m><n| on system x hierarchy,
// index (m d + i).
CMatrix extended_state(const StateTensor& st);

double output_flux(const StateTensor& st, const HierarchyModel& model, double t, int n);
double output_quadrature(const StateTensor& st, const SLHTriple& slh, int n, double varphi);

}  // namespace sqwp
