// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Squeezing parameters, wave-packet envelopes, broadband (N, M) moments and
// truncation-error estimators.

#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace sqwp {

using cd = std::complex<double>;

// gamma = r e^{2 i phi}. A negative r is folded into r >= 0 by phi += pi/2.
class SqueezeParams {
 public:
  SqueezeParams() = default;
  SqueezeParams(double r, double phi);

  double r() const { return r_; }
  double phi() const { return phi_; }
  double coshr() const;
  double sinhr() const;
  double tanhr() const;
  cd e2iphi() const;  // e^{2 i phi}

 private:
  double r_ = 0.0;
  double phi_ = 0.0;
};

struct BroadbandParams {
  double N = 0.0;
  cd M{0.0, 0.0};
};

enum class PacketShape { square, gaussian, custom };

// Square-normalized envelope xi_t (units 1/sqrt(time)), optionally detuned by
// xi_t -> exp(-i delta_c t) xi_t.
class WavePacket {
 public:
  // xi = 1/sqrt(T) on [0, T), 0 elsewhere.
  static WavePacket square(double T, double detuning = 0.0);
  // |xi|^2 is a normal density (mean center, std sigma) truncated at
  // +-5 sigma and renormalized.
  static WavePacket gaussian(double center, double sigma, double detuning = 0.0);
  // Linear interpolation of complex samples, renormalized by trapezoid rule.
  static WavePacket custom(std::vector<double> times, std::vector<cd> values,
                           double detuning = 0.0);
  // Parses "t re im" lines; '#' starts a comment.
  static WavePacket load_custom(const std::string& path, double detuning = 0.0);
  // xi_t = 0 everywhere.
  static WavePacket none();

  cd sample(double t) const;
  double max_abs() const;
  PacketShape shape() const { return shape_; }
  double duration() const { return T_; }
  double detuning() const { return detuning_; }
  double support_begin() const { return t_begin_; }
  double support_end() const { return t_end_; }
  // Trapezoid estimate of the integral of |xi|^2 over [t0, t1].
  double norm_on_grid(double t0, double t1, int steps) const;

 private:
  cd envelope(double t) const;

  PacketShape shape_ = PacketShape::square;
  double T_ = 0.0;
  double detuning_ = 0.0;
  double sigma_ = 0.0;
  double scale_ = 0.0;
  double t_begin_ = 0.0;
  double t_end_ = 0.0;
  std::vector<double> times_;
  std::vector<cd> values_;
};

double r_to_db(double r);
double db_to_r(double db);

// N = sinh^2 r, M = -e^{2 i phi} sinh r cosh r.
BroadbandParams broadband_nm(const SqueezeParams& p);

// Squeezed-vacuum population outside the Fock levels 0..n_max.
double discarded_population_fock(int n_max, double r);
// ((cosh r - 1)/(cosh r + 1))^{n_max + 1}.
double discarded_population_squeezed(int n_max, double r);
// Smallest n_max with discarded_population_squeezed(n_max, r) <= eps.
int nmax_for_tolerance(double eps, double r);

// Main spectral lobe of a detuned square packet.
std::pair<double, double> wavepacket_bandwidth_note(const WavePacket& wp);

// <n|S(gamma)|0> for the squeeze operator S = exp((gamma* a^2 - gamma a^dag^2)/2)
// in the Fock basis, n = 0..n_max: nonzero only for even n = 2k with value
// (-e^{2 i phi} tanh r)^k sqrt((2k)!) / (2^k k!) / sqrt(cosh r).
std::vector<cd> squeezed_vacuum_fock_amplitudes(const SqueezeParams& p, int n_max);
// <m|S^dag(gamma)|0>: the field vacuum expressed in the squeezed-Fock basis.
// Same magnitudes as above with the sign of tanh r flipped.
std::vector<cd> vacuum_in_squeezed_basis_amplitudes(const SqueezeParams& p, int n_max);

}  // namespace sqwp
