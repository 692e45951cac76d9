#include <cmath>
#include <limits>

#include "doctest.h"
#include "sqwp/integrator.hpp"

using namespace sqwp;
using doctest::Approx;

namespace {

const TwoLevelBasis& B() { return two_level_basis(); }

SLHTriple driven_atom(double omega) { return {B().id, B().sm, 0.5 * omega * B().sx}; }

RhsFn decay() {
  return [](double, const CVector& y, CVector& dy) { dy = -y; };
}

double rk4_error(int steps) {
  CVector y0(1);
  y0(0) = 1.0;
  const CVector y = propagate(decay(), y0, TimeGrid{0.0, 1.0, steps});
  return std::abs(y(0) - std::exp(-1.0));
}

}  // namespace

TEST_CASE("rk4 on exponential decay") {
  CVector y0(1);
  y0(0) = 1.0;
  // One step reproduces the fourth-order Taylor polynomial.
  const CVector y = rk4_step(decay(), y0, 0.0, 0.1);
  const double h = 0.1;
  CHECK(y(0).real() == Approx(1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24).epsilon(1e-15));
  CHECK(rk4_error(100) < 1e-9);
  CHECK(rk4_error(20) / rk4_error(40) >= 12.0);
  CHECK(rk4_error(40) / rk4_error(80) >= 12.0);
}

TEST_CASE("observer sees every node") {
  CVector y0(1);
  y0(0) = 2.0;
  std::vector<double> ts;
  propagate(decay(), y0, TimeGrid{1.0, 2.0, 5}, [&](double t, const CVector&) { ts.push_back(t); });
  REQUIRE(ts.size() == 6);
  CHECK(ts.front() == 1.0);
  CHECK(ts.back() == Approx(2.0));
}

TEST_CASE("blowup and grid validation") {
  const RhsFn bad = [](double, const CVector& y, CVector& dy) {
    dy = y;
    dy(0) = std::numeric_limits<double>::quiet_NaN();
  };
  CVector y0 = CVector::Ones(2);
  CHECK_THROWS_AS(propagate(bad, y0, TimeGrid{0.0, 1.0, 3}), NumericalBlowup);
  CHECK_THROWS_AS(propagate(decay(), y0, TimeGrid{1.0, 1.0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(propagate(decay(), y0, TimeGrid{0.0, 1.0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(rk4_step(decay(), y0, 0.0, 0.0), std::invalid_argument);
  const TimeGrid g = TimeGrid::with_max_step(0.0, 1.0, 0.3);
  CHECK(g.steps == 4);
  CHECK(g.h() <= 0.3);
  CHECK(TimeGrid::with_max_step(0.0, 1.0, 0.25).steps == 4);
}

TEST_CASE("default step") {
  const HierarchyModel none(driven_atom(1.0), WavePacket::none(), SqueezeParams(), 3);
  CHECK(default_step(none) == 1e-3);
  const HierarchyModel big(driven_atom(1.0), WavePacket::square(0.01), SqueezeParams(1.0, 0.0), 9);
  CHECK(default_step(big) == Approx(0.05 / (10.0 * 10.0 * std::cosh(1.0))));
}

TEST_CASE("Fock channel for a number-state packet is CPTP") {
  for (int n : {1, 2}) {
    const HierarchyModel model(driven_atom(0.7), WavePacket::square(2.0), SqueezeParams(), n);
    const ChannelReport rep =
        hierarchy_channel(model, FieldState::number(n), TimeGrid{0.0, 2.5, 1000}, HierarchyKind::fock);
    CHECK(rep.is_cp);
    CHECK(rep.trace_preserving_residual < 1e-10);
    CHECK(rep.eigenvalues.size() == 4);
  }
}

TEST_CASE("uncoupled channel is CP") {
  const HierarchyModel model(driven_atom(1.3), WavePacket::none(), SqueezeParams(0.9, 0.2), 3);
  const ChannelReport rep =
      hierarchy_channel(model, FieldState::squeezed_vacuum(), TimeGrid{0.0, 1.0, 500});
  CHECK(rep.min_eigenvalue > -1e-12);
  CHECK(rep.trace_preserving_residual < 1e-12);
  const ChannelReport ext = hierarchy_extended_channel(model, TimeGrid{0.0, 1.0, 500});
  CHECK(ext.trace_preserving_residual < 1e-12);
}

TEST_CASE("field mismatch is rejected") {
  const HierarchyModel model(driven_atom(1.0), WavePacket::square(1.0), SqueezeParams(), 1);
  CHECK_THROWS_AS(hierarchy_channel(model, FieldState::number(2), TimeGrid{0.0, 1.0, 10}),
                  std::invalid_argument);
}

TEST_CASE("vacuum through the squeezed basis") {
  const TimeGrid grid{0.0, 3.0, 3000};
  const VacuumDiffResult zero = vacuum_in_squeezed_basis_diff(0.0, 2.0, 3, grid, B().pe);
  CHECK(zero.sup <= 1e-8);
  CHECK(zero.warning.empty());
  CHECK(zero.times.size() == 3001);
  for (int n_max : {2, 4}) {
    const VacuumDiffResult even = vacuum_in_squeezed_basis_diff(0.3, 2.0, n_max, grid, B().pe);
    CHECK(even.sup <= 1e-8);
  }
  const VacuumDiffResult odd = vacuum_in_squeezed_basis_diff(std::log(2.0), 2.0, 1, grid, B().pe);
  CHECK(odd.sup > 1e-4);
  CHECK_FALSE(odd.warning.empty());
}
