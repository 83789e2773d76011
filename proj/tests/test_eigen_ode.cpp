#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "pinchlab/eigen_ode.hpp"
#include "pinchlab/errors.hpp"

using namespace pinchlab;

namespace {
void check_rhs(const EigenTriple& s, double rho, double l, double m, double n) {
    const EigenDerivative d = rhs(s, FlowParams::make(rho));
    CHECK(d.dlambda == doctest::Approx(l).epsilon(1e-15));
    CHECK(d.dmu == doctest::Approx(m).epsilon(1e-15));
    CHECK(d.dnu == doctest::Approx(n).epsilon(1e-15));
}
}  // namespace

TEST_CASE("eigen triple construction") {
    const auto s = EigenTriple::ordered(3, -1, -2);
    CHECK(s.lambda() == 3);
    CHECK(s.mu() == -1);
    CHECK(s.nu() == -2);
    CHECK(s.trace() == 0);
    CHECK(s.ricci_min() == -3);
    CHECK(s.sup_norm() == 3);
    CHECK_FALSE(s.reordered());
    CHECK_THROWS_AS(EigenTriple::ordered(1, 2, 0), OrderingError);
    CHECK_THROWS_AS(EigenTriple::ordered(std::nan(""), 0, 0), DomainError);
    CHECK_THROWS_AS(EigenTriple::ordered(std::numeric_limits<double>::infinity(), 0, 0),
                    DomainError);

    const auto t = EigenTriple::sorted(-2, 3, -1);
    CHECK(t == s);
    CHECK(t.reordered());
    CHECK_FALSE(EigenTriple::sorted(3, 2, 1).reordered());
    CHECK(EigenTriple::ordered(1, 0, 0) < EigenTriple::ordered(1, 0.5, 0));
    CHECK(s.scaled(2.0) == EigenTriple::ordered(6, -2, -4));
    CHECK_THROWS_AS(s.scaled(-1.0), DomainError);
}

TEST_CASE("flow parameter validation") {
    CHECK_NOTHROW(FlowParams::make(0.2));
    CHECK_NOTHROW(FlowParams::make(-10, 3, 0.5));
    CHECK_THROWS_AS(FlowParams::make(0.25), DomainError);
    CHECK_THROWS_AS(FlowParams::make(0.0, -4, 0.0), DomainError);
    CHECK_THROWS_AS(FlowParams::make(std::nan("")), DomainError);
    CHECK(FlowParams::make(-0.5, 1.0).eta_factor() == 0.5);
    CHECK_THROWS_AS(FlowParams::make(0.5 - 0.3, -10.0).require_eta_factor(), DomainError);
}

TEST_CASE("reaction field values") {
    check_rhs(EigenTriple::ordered(1, 1, 1), 0.0, 4, 4, 4);
    check_rhs(EigenTriple::ordered(1, 1, 1), -1.0, 16, 16, 16);
    check_rhs(EigenTriple::ordered(1, 0, -1), 0.0, 2, -2, 2);
    // (3, -1, -2), rho = 0.1: T = 0 so only the quadratic part is left.
    check_rhs(EigenTriple::ordered(3, -1, -2), 0.1, 2 * 9 + 2 * 2, 2 * 1 - 2 * 6, 2 * 4 - 2 * 3);
}

TEST_CASE("reaction field agrees with the raw-component oracle") {
    for (double rho : {-3.0, -0.5, 0.0, 0.2}) {
        for (const auto& v : {oracle::V3{2.5, 0.1, -1.7}, oracle::V3{-0.2, -0.3, -4.0},
                              oracle::V3{7.0, 7.0, -7.0}}) {
            const Vec3 lib = rhs(Vec3{v[0], v[1], v[2]}, rho);
            const auto ref = oracle::field(v, rho);
            for (int i = 0; i < 3; ++i) CHECK(lib[i] == doctest::Approx(ref[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("reaction field is homogeneous of degree two") {
    const auto s = EigenTriple::ordered(1.3, -0.4, -2.2);
    const auto p = FlowParams::make(-0.7);
    const auto d1 = rhs(s, p);
    const auto d3 = rhs(s.scaled(3.0), p);
    CHECK(d3.dlambda == doctest::Approx(9 * d1.dlambda).epsilon(1e-14));
    CHECK(d3.dmu == doctest::Approx(9 * d1.dmu).epsilon(1e-14));
    CHECK(d3.dnu == doctest::Approx(9 * d1.dnu).epsilon(1e-14));
}

TEST_CASE("derived curvatures") {
    auto dc = derived_curvatures(EigenTriple::ordered(1, 1, 1));
    CHECK(dc.ricci_eigs == Vec3{2, 2, 2});
    CHECK(dc.scalar == 6);
    dc = derived_curvatures(EigenTriple::ordered(1, 0, -1));
    CHECK(dc.ricci_eigs == Vec3{1, 0, -1});
    CHECK(dc.scalar == 0);
    dc = derived_curvatures(EigenTriple::ordered(3, -1, -2));
    CHECK(dc.ricci_eigs == Vec3{2, 1, -3});
    CHECK(dc.scalar == 0);
    CHECK(dc.trace == 0);
}

TEST_CASE("isotropic closed form") {
    const auto p0 = FlowParams::make(0.0);
    CHECK(isotropic_solution(1.0, p0, 0.2) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(isotropic_solution(1.0, p0, 0.0) == 1.0);
    const auto pm = FlowParams::make(-1.0);
    for (double t : {0.0, 0.3, 2.0, 100.0}) {
        CHECK(isotropic_solution(-1.0, pm, t) == doctest::Approx(-1.0 / (1.0 + 16.0 * t)));
        CHECK(isotropic_solution(-1.0, pm, t) ==
              doctest::Approx(oracle::isotropic(-1.0, -1.0, t)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(isotropic_solution(1.0, p0, 0.25), BlowUpReached);
    CHECK_THROWS_AS(isotropic_solution(1.0, p0, 0.3), BlowUpReached);
    CHECK(isotropic_blowup_time(1.0, p0) == 0.25);
    CHECK(isotropic_blowup_time(1.0, pm) == 0.0625);
    CHECK(std::isinf(isotropic_blowup_time(-1.0, p0)));
}

TEST_CASE("trace inequality margin") {
    // The margin is sum(lambda^2) - T^2/3, independent of rho.
    const auto s = EigenTriple::ordered(2, 0.5, -1);
    const double expected = 4 + 0.25 + 1 - 1.5 * 1.5 / 3;
    for (double rho : {-5.0, 0.0, 0.2})
        CHECK(trace_bound_margin(s, FlowParams::make(rho)) ==
              doctest::Approx(expected).epsilon(1e-13));
    CHECK(std::abs(trace_bound_margin(EigenTriple::ordered(0.7, 0.7, 0.7), FlowParams::make(-1))) <
          1e-14);
}
