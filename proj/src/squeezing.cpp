// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/squeezing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sqwp {

SqueezeParams::SqueezeParams(double r, double phi) : r_(r), phi_(phi) {
  if (r_ < 0.0) {
    r_ = -r_;
    phi_ += std::numbers::pi / 2.0;
  }
}

double SqueezeParams::coshr() const { return std::cosh(r_); }
double SqueezeParams::sinhr() const { return std::sinh(r_); }
double SqueezeParams::tanhr() const { return std::tanh(r_); }
cd SqueezeParams::e2iphi() const { return std::polar(1.0, 2.0 * phi_); }

WavePacket WavePacket::square(double T, double detuning) {
  if (!(T > 0.0)) throw std::invalid_argument("square packet: T must be > 0");
  WavePacket w;
  w.shape_ = PacketShape::square;
  w.T_ = T;
  w.detuning_ = detuning;
  w.scale_ = 1.0 / std::sqrt(T);
  w.t_begin_ = 0.0;
  w.t_end_ = T;
  return w;
}

WavePacket WavePacket::gaussian(double center, double sigma, double detuning) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian packet: sigma must be > 0");
  WavePacket w;
  w.shape_ = PacketShape::gaussian;
  w.sigma_ = sigma;
  w.detuning_ = detuning;
  w.t_begin_ = center - 5.0 * sigma;
  w.t_end_ = center + 5.0 * sigma;
  w.T_ = 10.0 * sigma;
  // |xi|^2 = exp(-(t-c)^2 / (2 s^2)) / (sqrt(2 pi) s erf(5/sqrt 2)).
  const double mass = std::erf(5.0 / std::numbers::sqrt2);
  w.scale_ = 1.0 / std::sqrt(std::sqrt(2.0 * std::numbers::pi) * sigma * mass);
  return w;
}

WavePacket WavePacket::custom(std::vector<double> times, std::vector<cd> values,
                              double detuning) {
  if (times.size() < 2 || times.size() != values.size()) {
    throw std::invalid_argument("custom packet: need >= 2 matching samples");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("custom packet: times must increase");
    }
  }
  double norm = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    norm += 0.5 * (times[i] - times[i - 1]) *
            (std::norm(values[i]) + std::norm(values[i - 1]));
  }
  if (!(norm > 0.0)) throw std::invalid_argument("custom packet: zero norm");
  const double s = 1.0 / std::sqrt(norm);
  for (auto& v : values) v *= s;
  WavePacket w;
  w.shape_ = PacketShape::custom;
  w.detuning_ = detuning;
  w.t_begin_ = times.front();
  w.t_end_ = times.back();
  w.T_ = w.t_end_ - w.t_begin_;
  w.times_ = std::move(times);
  w.values_ = std::move(values);
  return w;
}

WavePacket WavePacket::load_custom(const std::string& path, double detuning) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("custom packet: cannot open " + path);
  std::vector<double> ts;
  std::vector<cd> vs;
  std::string line;
  while (std::getline(in, line)) {
    if (auto p = line.find('#'); p != std::string::npos) line.erase(p);
    std::istringstream ss(line);
    double t, re, im;
    if (!(ss >> t)) continue;
    if (!(ss >> re >> im)) {
      throw std::invalid_argument("custom packet: malformed line in " + path);
    }
    ts.push_back(t);
    vs.emplace_back(re, im);
  }
  return custom(std::move(ts), std::move(vs), detuning);
}

WavePacket WavePacket::none() {
  WavePacket w;
  w.shape_ = PacketShape::square;
  w.scale_ = 0.0;
  return w;
}

cd WavePacket::envelope(double t) const {
  switch (shape_) {
    case PacketShape::square:
      return (t >= 0.0 && t < T_) ? cd(scale_, 0.0) : cd(0.0, 0.0);
    case PacketShape::gaussian: {
      if (t < t_begin_ || t > t_end_) return 0.0;
      const double c = 0.5 * (t_begin_ + t_end_);
      const double z = (t - c) / sigma_;
      return scale_ * std::exp(-0.25 * z * z);
    }
    case PacketShape::custom: {
      if (t < times_.front() || t > times_.back()) return 0.0;
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      if (it == times_.end()) return values_.back();
      const auto i = static_cast<std::size_t>(it - times_.begin());
      const double a = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
      return (1.0 - a) * values_[i - 1] + a * values_[i];
    }
  }
  return 0.0;
}

cd WavePacket::sample(double t) const {
  const cd e = envelope(t);
  if (detuning_ == 0.0 || e == cd(0.0, 0.0)) return e;
  return e * std::polar(1.0, -detuning_ * t);
}

double WavePacket::max_abs() const {
  switch (shape_) {
    case PacketShape::square:
    case PacketShape::gaussian:
      return scale_;
    case PacketShape::custom: {
      double m = 0.0;
      for (const auto& v : values_) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

double WavePacket::norm_on_grid(double t0, double t1, int steps) const {
  // Midpoint samples keep square-packet edges off the nodes.
  const double h = (t1 - t0) / steps;
  double s = 0.0;
  for (int k = 0; k < steps; ++k) s += std::norm(sample(t0 + (k + 0.5) * h));
  return s * h;
}

double r_to_db(double r) {
  if (r < 0.0) throw std::invalid_argument("r_to_db: r must be >= 0");
  return 20.0 * r / std::numbers::ln10;
}

double db_to_r(double db) {
  if (db < 0.0) throw std::invalid_argument("db_to_r: dB must be >= 0");
  return db * std::numbers::ln10 / 20.0;
}

BroadbandParams broadband_nm(const SqueezeParams& p) {
  const double sh = p.sinhr();
  return {sh * sh, -p.e2iphi() * sh * p.coshr()};
}

double discarded_population_fock(int n_max, double r) {
  if (n_max < 0) throw std::invalid_argument("discarded_population_fock: n_max < 0");
  if (r == 0.0) return 0.0;
  const double t2 = std::tanh(r) * std::tanh(r);
  // term_k = (t2/4)^k (2k)!/(k!)^2, built by recurrence.
  const int k0 = n_max / 2 + 1;
  double term = 1.0;
  for (int k = 1; k <= k0; ++k) term *= 0.25 * t2 * (2.0 * k) * (2.0 * k - 1.0) / (double(k) * k);
  double sum = 0.0;
  for (int k = k0; k < 100000000; ++k) {
    sum += term;
    if (term < 1e-16 * sum) break;
    const int kn = k + 1;
    term *= 0.25 * t2 * (2.0 * kn) * (2.0 * kn - 1.0) / (double(kn) * kn);
  }
  return std::clamp(sum / std::cosh(r), 0.0, 1.0);
}

double discarded_population_squeezed(int n_max, double r) {
  if (n_max < 0) throw std::invalid_argument("discarded_population_squeezed: n_max < 0");
  const double c = std::cosh(r);
  return std::pow((c - 1.0) / (c + 1.0), n_max + 1);
}

int nmax_for_tolerance(double eps, double r) {
  if (!(eps > 0.0)) throw std::invalid_argument("nmax_for_tolerance: eps must be > 0");
  if (r == 0.0 || eps >= 1.0) return 0;
  const double c = std::cosh(r);
  const double n = -std::log(eps) / (std::log(c + 1.0) - std::log(c - 1.0)) - 1.0;
  int k = std::max(0, static_cast<int>(std::ceil(n - 1e-12)));
  while (k > 0 && discarded_population_squeezed(k - 1, r) <= eps) --k;
  while (discarded_population_squeezed(k, r) > eps) ++k;
  return k;
}

std::pair<double, double> wavepacket_bandwidth_note(const WavePacket& wp) {
  if (wp.shape() != PacketShape::square) {
    throw std::invalid_argument("wavepacket_bandwidth_note: square packets only");
  }
  const double w = 2.0 * std::numbers::pi / wp.duration();
  return {wp.detuning() - w, wp.detuning() + w};
}

namespace {

std::vector<cd> even_amplitudes(double r, cd ratio, int n_max) {
  std::vector<cd> a(n_max + 1, cd(0.0, 0.0));
  // coefficient_k = sqrt((2k)!)/(2^k k!); coefficient_k / coefficient_{k-1}
  // = sqrt((2k)(2k-1)) / (2k).
  cd c = 1.0 / std::sqrt(std::cosh(r));
  for (int k = 0; 2 * k <= n_max; ++k) {
    if (k > 0) c *= ratio * std::sqrt((2.0 * k) * (2.0 * k - 1.0)) / (2.0 * k);
    a[2 * k] = c;
  }
  return a;
}

}  // namespace

std::vector<cd> squeezed_vacuum_fock_amplitudes(const SqueezeParams& p, int n_max) {
  return even_amplitudes(p.r(), -p.e2iphi() * p.tanhr(), n_max);
}

std::vector<cd> vacuum_in_squeezed_basis_amplitudes(const SqueezeParams& p, int n_max) {
  return even_amplitudes(p.r(), p.e2iphi() * p.tanhr(), n_max);
}

}  // namespace sqwp
