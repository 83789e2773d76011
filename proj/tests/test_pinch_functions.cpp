#include <cmath>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pinchlab/errors.hpp"
#include "pinchlab/pinch_functions.hpp"

using namespace pinchlab;

namespace {
const double kE = std::exp(1.0);
}  // namespace

TEST_CASE("f at its domain start and zero") {
    for (double rho : {-10.0, -1.0, -0.1, 0.0, 0.2}) {
        const auto p = FlowParams::make(rho);
        const double x0 = std::exp(1 - 4 * rho);
        CHECK(f_domain_start(p) == doctest::Approx(x0).epsilon(1e-15));
        CHECK(f_pinch(x0, p) == doctest::Approx(-x0 / (2 * (1 - 2 * rho))).epsilon(1e-14));
        CHECK(f_range_start(p) == doctest::Approx(f_pinch(x0, p)).epsilon(1e-14));
        CHECK_THROWS_AS(f_pinch(x0 * (1 - 1e-12), p), DomainError);
    }
    CHECK(f_pinch(kE * kE, FlowParams::make(0.0)) == doctest::Approx(0.0));
    CHECK(f_pinch(std::exp(5.0), FlowParams::make(-1.0)) ==
          doctest::Approx(-std::exp(5.0) / 6).epsilon(1e-14));
    CHECK(f_pinch(std::exp(5.0), FlowParams::make(-1.0)) == doctest::Approx(-24.7355).epsilon(1e-5));
}

TEST_CASE("f is increasing and convex on its domain") {
    for (double rho : {-1.0, 0.0, 0.2}) {
        const auto p = FlowParams::make(rho);
        const double x0 = f_domain_start(p);
        std::vector<double> v;
        for (int i = 0; i <= 400; ++i) v.push_back(f_pinch(x0 * std::pow(1.01, i), p));
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] - v[i - 1] >= -1e-12);
        // Second differences on a uniform grid.
        std::vector<double> u;
        for (int i = 0; i <= 400; ++i) u.push_back(f_pinch(x0 + 0.05 * i * x0, p));
        for (std::size_t i = 2; i < u.size(); ++i) CHECK(u[i] - 2 * u[i - 1] + u[i - 2] >= -1e-12);
    }
}

TEST_CASE("f inverse examples") {
    for (double rho : {-1.0, 0.0, 0.2}) {
        const auto p = FlowParams::make(rho);
        CHECK(f_inverse(f_range_start(p), p) == doctest::Approx(f_domain_start(p)).epsilon(1e-14));
    }
    CHECK(f_inverse(0.0, FlowParams::make(0.0)) == doctest::Approx(7.389056).epsilon(1e-7));
    // f(x) = 3 at rho = -1 means x (log x - 6) = 18.
    const double ref = oracle::bisect([](double x) { return x * (std::log(x) - 6) - 18; },
                                      std::exp(5.0), std::exp(7.0));
    const double x = f_inverse(3.0, FlowParams::make(-1.0));
    CHECK(x == doctest::Approx(ref).epsilon(1e-13));
    CHECK(x * (std::log(x) - 6) == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(x >= std::exp(5.0));
    CHECK_THROWS_AS(f_inverse(f_range_start(FlowParams::make(0.0)) - 1e-3, FlowParams::make(0.0)),
                    DomainError);
    CHECK_THROWS_AS(f_inverse(std::nan(""), FlowParams::make(0.0)), DomainError);
}

TEST_CASE("f inverse agrees with the bisection oracle") {
    for (double rho : {-10.0, -1.0, -0.1, 0.0, 0.2}) {
        const auto p = FlowParams::make(rho);
        for (double y : {0.0, 0.5, 1.0, 37.0, 1e4, 1e9}) {
            const double yy = f_range_start(p) + std::abs(f_range_start(p)) * 1e-3 + y;
            CHECK(f_inverse(yy, p) == doctest::Approx(oracle::f_inverse(yy, rho)).epsilon(1e-12));
        }
    }
}

TEST_CASE("f inverse round trips") {
    for (double rho : {-10.0, -1.0, -0.1, 0.0, 0.2}) {
        const auto p = FlowParams::make(rho);
        const double x0 = f_domain_start(p);
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double x = x0 * std::pow(10.0, 8.0 * i / 499);
            worst = std::max(worst, std::abs(f_inverse(f_pinch(x, p), p) - x) / x);
        }
        CHECK(worst <= 1e-10);
        // f is flat on the scale of x near its zero, so the error of f(f^-1(y))
        // is measured against the size of f on the range, |f(x0)|.
        const double scale = std::abs(f_range_start(p));
        for (double y : {f_range_start(p) / 2, 0.0, 5.0, 1e6}) {
            const double back = f_pinch(f_inverse(y, p), p);
            CHECK(std::abs(back - y) <= 1e-10 * std::max(scale, std::abs(y)));
        }
    }
}

TEST_CASE("Lambda values") {
    const auto p0 = FlowParams::make(0.0);
    CHECK(lambda_pinch(EigenTriple::ordered(kE / 2, -kE / 2, -kE / 2), p0) ==
          doctest::Approx(0.0).scale(1.0));
    for (double rho : {-2.0, 0.1})
        for (double l : {-0.5, 0.5, 4.0})
            CHECK(lambda_pinch(EigenTriple::ordered(l, -0.5, -0.5), FlowParams::make(rho)) ==
                  doctest::Approx(l));
    CHECK(lambda_pinch(EigenTriple::ordered(2, -1, -1), FlowParams::make(-1.0)) ==
          doctest::Approx(1 - std::log(2.0) / 6).epsilon(1e-14));
    CHECK_THROWS_AS(lambda_pinch(EigenTriple::ordered(1, 0, 0), p0), DomainError);
    CHECK_THROWS_AS(lambda_pinch_rate(EigenTriple::ordered(1, 1, -1), p0), DomainError);
}

TEST_CASE("J polynomial values") {
    const auto pm = FlowParams::make(-1.0);
    CHECK(j_polynomial(EigenTriple::ordered(-1, -1, -1), pm) == doctest::Approx(16.0 / 3));
    CHECK(j_polynomial(EigenTriple{}, pm) == 0.0);
    // The chain-rule oracle gives 16/3 at (1, -1, -1) as well.
    CHECK(oracle::j_chain({1, -1, -1}, -1.0) == doctest::Approx(16.0 / 3));
    CHECK(j_polynomial(EigenTriple::ordered(1, -1, -1), pm) == doctest::Approx(16.0 / 3));
}

TEST_CASE("J matches Lambda' from the chain rule") {
    for (double rho : {-10.0, -1.0, -0.1, 0.0, 0.2})
        for (const auto& v : {oracle::V3{2, -1, -1}, oracle::V3{0.3, -0.2, -5},
                              oracle::V3{-1, -2, -3}, oracle::V3{7, 1, -4}}) {
            const auto s = EigenTriple::ordered(v[0], v[1], v[2]);
            const auto p = FlowParams::make(rho);
            CHECK(j_polynomial(s, p) ==
                  doctest::Approx(oracle::j_chain(v, rho)).epsilon(1e-12).scale(1.0));
            CHECK(lambda_pinch_rate(s, p) ==
                  doctest::Approx(oracle::lambda_rate_chain(v, rho)).epsilon(1e-12).scale(1.0));
        }
}

TEST_CASE("I polynomial values") {
    CHECK(i_polynomial(EigenTriple::ordered(-1, -1, -1), FlowParams::make(0.0)) ==
          doctest::Approx(2.0));
    CHECK(i_polynomial(EigenTriple::ordered(-1, -1, -1), FlowParams::make(0.2)) ==
          doctest::Approx(1.2));
    CHECK(i_polynomial(EigenTriple{}, FlowParams::make(0.1)) == 0.0);
}

TEST_CASE("J and I are homogeneous of degree three") {
    const auto s = EigenTriple::ordered(1.7, -0.4, -2.9);
    for (double rho : {-1.0, 0.0, 0.2}) {
        const auto p = FlowParams::make(rho);
        for (double c : {0.5, 3.0, 1e3}) {
            CHECK(j_polynomial(s.scaled(c), p) ==
                  doctest::Approx(c * c * c * j_polynomial(s, p)).epsilon(1e-13));
            CHECK(i_polynomial(s.scaled(c), p) ==
                  doctest::Approx(c * c * c * i_polynomial(s, p)).epsilon(1e-13));
        }
    }
}

TEST_CASE("xi values") {
    const auto p = FlowParams::make(0.0, -4.0, 1.0);
    CHECK(xi_pinch(EigenTriple::ordered(-1, -1, -1), p, 0.0) == doctest::Approx(-3.0));
    for (const auto& q : {p, FlowParams::make(-0.5, 1.0, 1.0), FlowParams::make(0.1, 2.0, 1.0)})
        CHECK(xi_pinch(EigenTriple::ordered(2, 1, -1), q, 0.0) == doctest::Approx(2.0));
    CHECK(xi_pinch(EigenTriple::ordered(2, 1, -1), p, (kE - 1) / 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(xi_pinch(EigenTriple::ordered(2, 1, 0), p, 0.0), DomainError);
    // k(t) = 1 + 2 (1 + eta rho) t vanishes at t = -1/2 for rho = 0.
    CHECK_THROWS_AS(xi_pinch(EigenTriple::ordered(2, 1, -1), p, -0.5), DomainError);
}

TEST_CASE("xi rate matches the chain-rule oracle") {
    for (const auto& [rho, eta, theta] :
         {std::tuple{0.0, -4.0, 1.0}, std::tuple{-0.5, 1.0, 1.0}, std::tuple{-0.05, 10.0, 10.0},
          std::tuple{0.2, -2.0, 0.3}})
        for (double t : {0.0, 0.7})
            for (const auto& v : {oracle::V3{2, 1, -1}, oracle::V3{-1, -1, -1}, oracle::V3{5, -2, -3}}) {
                const auto s = EigenTriple::ordered(v[0], v[1], v[2]);
                CHECK(xi_pinch_rate(s, FlowParams::make(rho, eta, theta), t) ==
                      doctest::Approx(oracle::xi_rate_chain(v, rho, eta, theta, t))
                          .epsilon(1e-12)
                          .scale(1.0));
            }
}

TEST_CASE("estimate right-hand sides") {
    const auto pm = FlowParams::make(-1.0);
    CHECK(estimate_rhs(EstimateVariant::NegRhoScalar, -std::exp(6.0), pm, 0.0) ==
          doctest::Approx(0.0).scale(1.0));
    CHECK(estimate_rhs(EstimateVariant::NonnegRho, -1.0, FlowParams::make(0.0), 0.0) == -6.0);
    CHECK(estimate_rhs(EstimateVariant::NegRhoSectional, -1.0, FlowParams::make(-0.5, 1.0), 0.0) ==
          doctest::Approx(-6.0));
    // Time factors enter through their logarithms.
    const auto p2 = FlowParams::make(0.2);
    const double t = 0.4;
    CHECK(estimate_rhs(EstimateVariant::NonnegRho, -3.0, p2, t) ==
          doctest::Approx(6.0 * (std::log(3.0) + std::log(1 + 2 * 0.2 * t) - 3)));
    CHECK_THROWS_AS(estimate_rhs(EstimateVariant::NegRhoScalar, -1.0, FlowParams::make(0.1), 0.0),
                    DomainError);
    CHECK_THROWS_AS(estimate_rhs(EstimateVariant::NonnegRho, 0.5, FlowParams::make(0.0), 0.0),
                    DomainError);
    CHECK_THROWS_AS(
        estimate_rhs(EstimateVariant::NegRhoSectional, -1.0, FlowParams::make(-2.0, 1.0), 0.0),
        DomainError);
}

TEST_CASE("variant names") {
    for (auto v : {EstimateVariant::NegRhoScalar, EstimateVariant::NegRhoSectional,
                   EstimateVariant::NonnegRho})
        CHECK(estimate_variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(estimate_variant_from_string("bogus"), ConfigError);
}
