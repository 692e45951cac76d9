// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/fitting.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sqwp {

FitResult minimize_scalar(const std::function<double(double)>& objective,
                          std::pair<double, double> bracket, double tol) {
  auto [lo, hi] = bracket;
  if (!(hi > lo)) throw std::invalid_argument("minimize_scalar: bracket must satisfy lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("minimize_scalar: tol must be > 0");
  FitResult res;
  res.bracket = bracket;
  auto f = [&](double x) {
    ++res.n_evals;
    return objective(x);
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  res.r_M = 0.5 * (a + b);
  res.objective_value = f(res.r_M);
  const double flo = f(lo), fhi = f(hi);
  if (std::min(flo, fhi) <= res.objective_value) {
    res.interior = false;
    res.flag = "no interior decrease; returned best endpoint";
    res.r_M = flo <= fhi ? lo : hi;
    res.objective_value = std::min(flo, fhi);
  }
  return res;
}

std::vector<double> uniform_nodes(double t0, double t1, int count) {
  if (count < 2 || !(t1 > t0)) throw std::invalid_argument("uniform_nodes: need t1 > t0, count >= 2");
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = t0 + (t1 - t0) * i / (count - 1);
  return t;
}

SampledSolution sample_solution(const RhsFn& f, const CMatrix& rho0, const std::vector<double>& nodes,
                                double h_max) {
  const int d = static_cast<int>(rho0.rows());
  SampledSolution out;
  CVector y = vec(rho0);
  double t = 0.0;
  for (double tn : nodes) {
    if (tn < t) throw std::invalid_argument("sample_solution: nodes must be increasing and >= 0");
    if (tn > t) y = propagate(f, y, TimeGrid::with_max_step(t, tn, h_max));
    t = tn;
    out.t.push_back(tn);
    out.rho.push_back(unvec(y, d));
  }
  return out;
}

SampledSolution sample_hierarchy(const HierarchyModel& model, const FieldState& field,
                                 const CMatrix& rho0, const std::vector<double>& nodes,
                                 double h_max, HierarchyKind kind) {
  const RhsFn f = kind == HierarchyKind::fock ? fock_hierarchy_rhs(model) : hierarchy_rhs(model);
  StateTensor st = init_tensor(rho0, model.n_max());
  SampledSolution out;
  double t = 0.0;
  for (double tn : nodes) {
    if (tn < t) throw std::invalid_argument("sample_hierarchy: nodes must be increasing and >= 0");
    if (tn > t) st.data() = propagate(f, st.data(), TimeGrid::with_max_step(t, tn, h_max));
    t = tn;
    out.t.push_back(tn);
    out.rho.push_back(reduce_state(st, field));
  }
  return out;
}

SampledSolution sample_broadband(double r, double phi, const SLHTriple& slh, const CMatrix& rho0,
                                 const std::vector<double>& nodes, double h_max) {
  return sample_solution(broadband_fn(slh, broadband_nm(SqueezeParams(r, phi))), rho0, nodes, h_max);
}

namespace {

void check_r(double r_M) {
  if (r_M < 0.0) throw std::invalid_argument("objective: r_M must be >= 0");
}

}  // namespace

double bloch_objective(double r_M, const SampledSolution& wp, const CMatrix& rho0,
                       const SLHTriple& slh) {
  check_r(r_M);
  const auto& b = two_level_basis();
  const SampledSolution m = sample_broadband(r_M, 0.0, slh, rho0, wp.t);
  double acc = 0.0;
  for (std::size_t i = 0; i < wp.t.size(); ++i) {
    const double dx = (b.sx * (wp.rho[i] - m.rho[i])).trace().real();
    const double dy = (b.sy * (wp.rho[i] - m.rho[i])).trace().real();
    acc += dx * dx + dy * dy;
  }
  return acc;
}

double excitation_objective(double r_M, const SampledSolution& wp, const CMatrix& rho0,
                            const SLHTriple& slh) {
  check_r(r_M);
  const SampledSolution m = sample_broadband(r_M, 0.0, slh, rho0, wp.t);
  double acc = 0.0;
  for (std::size_t i = 0; i < wp.t.size(); ++i) {
    const double dp = wp.rho[i](1, 1).real() - m.rho[i](1, 1).real();
    acc += dp * dp;
  }
  return acc;
}

double r_from_steady_excitation(double pe) {
  if (!(pe >= 0.0 && pe < 0.5)) throw std::invalid_argument("steady excitation must lie in [0, 1/2)");
  return std::asinh(std::sqrt(pe / (1.0 - 2.0 * pe)));
}

double log_slope_rate(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  if (n < 2 || v.size() != n) throw std::invalid_argument("log_slope_rate: need >= 2 samples");
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::log(std::abs(v[i]));
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  return -(n * sty - st * sy) / (n * stt - st * st);
}

namespace {

struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const Model* model;
  const std::vector<double>* x;
  const std::vector<double>* y;
  int n_params;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(x->size()); }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    const std::vector<double> pv(p.data(), p.data() + p.size());
    for (std::size_t i = 0; i < x->size(); ++i) f(i) = (*model)(pv, (*x)[i]) - (*y)[i];
    return 0;
  }
};

}  // namespace

CurveFit least_squares(const Model& model, const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<std::vector<double>>& starts) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("least_squares: bad data");
  CurveFit best;
  best.rss = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    if (s.size() > x.size()) throw std::invalid_argument("least_squares: more parameters than data");
    Residuals r{&model, &x, &y, static_cast<int>(s.size())};
    Eigen::NumericalDiff<Residuals> nd(r);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>> lm(nd);
    lm.parameters.maxfev = 4000;
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
    const auto status = lm.minimize(p);
    Eigen::VectorXd f(x.size());
    r(p, f);
    const double rss = f.squaredNorm();
    if (std::isfinite(rss) && rss < best.rss) {
      best.params.assign(p.data(), p.data() + p.size());
      best.rss = rss;
      best.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                       status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
    }
  }
  return best;
}

CurveFit fit_single_exponential(const std::vector<double>& t, const std::vector<double>& y) {
  const Model m = [](const std::vector<double>& p, double x) { return p[0] * std::exp(-p[1] * x) + p[2]; };
  const double c = y.back(), a = y.front() - y.back();
  std::vector<std::vector<double>> starts;
  for (double k : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) starts.push_back({a, k, c});
  return least_squares(m, t, y, starts);
}

CurveFit fit_double_exponential(const std::vector<double>& t, const std::vector<double>& y) {
  const Model m = [](const std::vector<double>& p, double x) {
    return p[0] * std::exp(-p[1] * x) + p[2] * std::exp(-p[3] * x) + p[4];
  };
  const double c = y.back(), a = y.front() - y.back();
  std::vector<std::vector<double>> starts;
  for (double k : {0.5, 1.0, 2.0, 5.0}) {
    for (double q : {0.02, 0.1, 0.3}) {
      for (double frac : {0.2, 0.5, 0.8}) starts.push_back({frac * a, k, (1.0 - frac) * a, q, c});
    }
  }
  return least_squares(m, t, y, starts);
}

CurveFit fit_single_lorentzian(const std::vector<double>& w, const std::vector<double>& s) {
  const Model m = [](const std::vector<double>& p, double x) {
    return p[0] * p[1] * p[1] / (x * x + p[1] * p[1]) + p[2];
  };
  const double top = *std::max_element(s.begin(), s.end());
  const double floor = *std::min_element(s.begin(), s.end());
  std::vector<std::vector<double>> starts;
  for (double g : {0.1, 0.3, 0.5, 1.0, 3.0}) starts.push_back({top - floor, g, floor});
  return least_squares(m, w, s, starts);
}

CurveFit fit_double_lorentzian(const std::vector<double>& w, const std::vector<double>& s) {
  const Model m = [](const std::vector<double>& p, double x) {
    return p[0] * p[1] * p[1] / (x * x + p[1] * p[1]) + p[2] * p[3] * p[3] / (x * x + p[3] * p[3]) + p[4];
  };
  const double top = *std::max_element(s.begin(), s.end());
  const double floor = *std::min_element(s.begin(), s.end());
  const double a = top - floor;
  std::vector<std::vector<double>> starts;
  for (double g : {0.1, 0.3, 0.5}) {
    for (double q : {0.8, 1.5, 3.0}) {
      for (double frac : {0.3, 0.7}) starts.push_back({frac * a, g, (1.0 - frac) * a, q, floor});
    }
  }
  return least_squares(m, w, s, starts);
}

}  // namespace sqwp
