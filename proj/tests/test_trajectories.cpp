#include <cmath>
#include <set>

#include "doctest.h"
#include "sqwp/trajectories.hpp"

using namespace sqwp;
using doctest::Approx;

namespace {

const TwoLevelBasis& B() { return two_level_basis(); }
double maxabs(const CVector& v) { return v.cwiseAbs().maxCoeff(); }

CMatrix bloch45() { return 0.5 * (B().id + (B().sx + B().sy) / std::sqrt(2.0)); }

SLHTriple atom(double gamma, double omega = 0.0) {
  return {B().id, std::sqrt(gamma) * B().sm, 0.5 * omega * B().sx};
}

}  // namespace

TEST_CASE("counter RNG is a pure function of its counters") {
  const CounterRng a(42, 7), b(42, 7), c(43, 7), d(42, 8);
  std::set<double> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double u = a.uniform(k);
    CHECK(u == b.uniform(k));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    seen.insert(u);
    CHECK(u != c.uniform(k));
    CHECK(u != d.uniform(k));
    CHECK(u != a.uniform(k, 1));
  }
  CHECK(seen.size() == 1000);
  double mean = 0.0;
  for (std::uint64_t k = 0; k < 100000; ++k) mean += a.uniform(k, 3);
  CHECK(mean / 1e5 == Approx(0.5).epsilon(0.01));
}

TEST_CASE("jump probability examples") {
  const double h = 1e-3;
  // L = 0: clicks only come from the squeezed field, h |xi|^2 sinh^2 r.
  const SLHTriple dark{B().id, CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)};
  const HierarchyModel field_only(dark, WavePacket::square(4.0), SqueezeParams(0.7, 0.2), 2);
  CHECK(jump_probability(init_tensor(bloch45(), 2), field_only, 1.0, h) ==
        Approx(h * 0.25 * std::sinh(0.7) * std::sinh(0.7)).epsilon(1e-12));
  // r = 0: only atomic emission, h Gamma Pe.
  const HierarchyModel vac(atom(1.5), WavePacket::square(4.0), SqueezeParams(), 2);
  CHECK(jump_probability(init_tensor(bloch45(), 2), vac, 1.0, h) == Approx(h * 1.5 * 0.5).epsilon(1e-12));
  const HierarchyModel off(atom(1.0), WavePacket::none(), SqueezeParams(0.5, 0.0), 2);
  CHECK(jump_probability(init_tensor(B().pg, 2), off, 1.0, h) == 0.0);
}

TEST_CASE("averaged counting outcomes give the Euler step") {
  const HierarchyModel model(atom(1.0, 1.2), WavePacket::square(3.0), SqueezeParams(0.5181, 0.4), 3);
  const FieldState field = FieldState::squeezed_vacuum();
  ConditionalStepper s(model, field);
  const double h = 2e-3, t = 0.7;
  StateTensor st = init_tensor(bloch45(), 3);
  // Move off the initial product form first.
  for (int k = 0; k < 50; ++k) s.counting_step(st, k * h, h, 1.0);
  StateTensor click = st, none = st, drift;
  double p = 0.0;
  CHECK(s.counting_step(click, t, h, 0.0, &p) == 1);
  CHECK(s.counting_step(none, t, h, 1.0) == 0);
  CHECK(p > 0.0);
  CHECK(s.physical_trace(click) == Approx(1.0).epsilon(1e-14));
  CHECK(s.physical_trace(none) == Approx(1.0).epsilon(1e-14));
  squeezed_rhs(t + 0.5 * h, st, model, drift);
  const CVector euler = st.data() + h * drift.data();
  const CVector avg = p * click.data() + (1.0 - p) * none.data();
  CHECK(maxabs(CVector(avg - euler)) < 1e-12);
  CHECK(click.dagger_pairing_residual() < 1e-12);
  CHECK(none.dagger_pairing_residual() < 1e-12);
}

TEST_CASE("averaged homodyne outcomes give the Euler step") {
  const HierarchyModel model(atom(1.0, 0.8), WavePacket::square(3.0), SqueezeParams(0.5181, 0.1), 3);
  ConditionalStepper s(model, FieldState::squeezed_vacuum());
  const double h = 2e-3, t = 0.4;
  for (double phase : {0.0, 0.9}) {
    const StateTensor st = init_tensor(bloch45(), 3);
    StateTensor up = st, down = st, drift;
    double sig_up = 0.0, sig_down = 0.0;
    CHECK(s.homodyne_step(up, t, h, phase, 0.0, &sig_up) == 1);
    CHECK(s.homodyne_step(down, t, h, phase, 1.0, &sig_down) == -1);
    CHECK(sig_up == sig_down);
    const double p_plus = 0.5 * (1.0 + sig_up / std::sqrt(h));
    squeezed_rhs(t + 0.5 * h, st, model, drift);
    const CVector euler = st.data() + h * drift.data();
    const CVector avg = p_plus * up.data() + (1.0 - p_plus) * down.data();
    CHECK(maxabs(CVector(avg - euler)) < 1e-12);
    CHECK(s.physical_trace(up) == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("homodyne with nothing to detect is a fair coin") {
  const SLHTriple dark{B().id, CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)};
  const HierarchyModel model(dark, WavePacket::none(), SqueezeParams(0.3, 0.0), 1);
  ConditionalStepper s(model, FieldState::squeezed_vacuum());
  const StateTensor st = init_tensor(bloch45(), 1);
  StateTensor a = st;
  double sig = 1.0;
  s.homodyne_step(a, 0.0, 1e-3, 0.0, 0.3, &sig);
  CHECK(sig == 0.0);
  CHECK(maxabs(CVector(a.data() - st.data())) < 1e-15);
}

TEST_CASE("vacuum counting of an excited atom") {
  const HierarchyModel model(atom(1.0), WavePacket::none(), SqueezeParams(), 0);
  EnsembleConfig cfg;
  cfg.t_end = 1.0;
  cfg.h = 1e-3;
  cfg.record_every = 100;
  cfg.base_seed = 99;
  const EnsembleResult r = simulate_ensemble(model, FieldState::squeezed_vacuum(), B().pe, cfg, 4000);
  CHECK(r.n_ok == 4000);
  CHECK(r.n_degenerate == 0);
  double mean = 0.0;
  for (int j : r.jump_counts) {
    CHECK((j == 0 || j == 1));
    mean += j;
  }
  mean /= 4000;
  const double want = 1.0 - std::exp(-1.0);
  CHECK(std::abs(mean - want) < 4.0 * std::sqrt(want * (1 - want) / 4000));
  REQUIRE(r.times.size() == 11);
  CHECK(r.times.back() == Approx(1.0));
  CHECK(std::abs(r.pe_mean.back() - std::exp(-1.0)) < 4.0 * r.pe_stderr.back() + 1e-3);
  for (double p : r.purity_mean) CHECK(p == Approx(1.0).epsilon(1e-12));
  const Chi2Result c = martingale_chi2(r);
  CHECK(c.dof == 10);
  CHECK(c.p_value > 1e-4);
}

TEST_CASE("heterodyne quadratures are split evenly") {
  const HierarchyModel model(atom(1.0), WavePacket::square(2.0), SqueezeParams(0.4, 0.0), 2);
  EnsembleConfig cfg;
  cfg.kind = RecordKind::heterodyne;
  cfg.t_end = 2.0;
  cfg.h = 1e-3;
  cfg.keep_records = true;
  const EnsembleResult r = simulate_ensemble(model, FieldState::squeezed_vacuum(), B().pe, cfg, 5);
  REQUIRE(r.records.size() == 5);
  int zeros = 0, total = 0;
  for (const auto& rec : r.records) {
    CHECK(rec.quadrature.size() == 2000);
    CHECK(rec.dW.size() == 2000);
    for (int q : rec.quadrature) {
      CHECK((q == 0 || q == 1));
      zeros += q == 0;
      ++total;
    }
    for (int o : rec.outcomes) CHECK((o == 1 || o == -1));
  }
  CHECK(std::abs(zeros - 0.5 * total) < 4.0 * std::sqrt(0.25 * total));
}

TEST_CASE("ensembles are reproducible") {
  const HierarchyModel model(atom(1.0), WavePacket::square(1.0), SqueezeParams(0.5181, 0.0), 3);
  EnsembleConfig cfg;
  cfg.t_end = 1.0;
  cfg.h = 2e-3;
  cfg.record_every = 50;
  cfg.base_seed = 20261016;
  cfg.keep_records = true;
  for (RecordKind kind : {RecordKind::counting, RecordKind::homodyne}) {
    cfg.kind = kind;
    const EnsembleResult a = simulate_ensemble(model, FieldState::squeezed_vacuum(), B().pe, cfg, 1);
    const EnsembleResult b = simulate_ensemble(model, FieldState::squeezed_vacuum(), B().pe, cfg, 1);
    CHECK(a.pe_mean == b.pe_mean);
    CHECK(a.records[0].outcomes == b.records[0].outcomes);
    // Trajectory i of a larger ensemble is the same trajectory.
    const EnsembleResult c = simulate_ensemble(model, FieldState::squeezed_vacuum(), B().pe, cfg, 8);
    CHECK(c.records[0].outcomes == a.records[0].outcomes);
    CHECK(c.records[0].expected == a.records[0].expected);
  }
  CHECK_THROWS_AS(simulate_ensemble(model, FieldState::squeezed_vacuum(), B().pe, cfg, 0), std::invalid_argument);
}

TEST_CASE("property: conditional states stay dagger paired with unit trace") {
  const HierarchyModel model(atom(1.0, 2.0), WavePacket::square(2.0), SqueezeParams(0.6, 0.3), 3);
  ConditionalStepper s(model, FieldState::squeezed_vacuum());
  const CounterRng rng(5, 0);
  StateTensor st = init_tensor(bloch45(), 3);
  int clicks = 0;
  for (int k = 0; k < 2000; ++k) {
    if (k % 2) clicks += s.counting_step(st, k * 1e-3, 1e-3, rng.uniform(k));
    else s.homodyne_step(st, k * 1e-3, 1e-3, 0.3 * k, rng.uniform(k));
    if (k % 100 == 0) {
      CHECK(st.dagger_pairing_residual() < 1e-10);
      CHECK(s.physical_trace(st) == Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(s.clamp_warnings() == 0);
  const CMatrix rho = reduce_state(st, FieldState::squeezed_vacuum());
  CHECK(hermitian_eigenvalues(rho).front() > -1e-6);
}
