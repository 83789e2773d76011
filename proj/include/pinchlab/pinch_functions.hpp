/// @file pinch_functions.hpp
/// @brief Scalar pinching quantities: the convex function f and its inverse,
///        Lambda, the cubics J and I, xi, and the right-hand sides of the
///        three Hamilton-Ivey type estimates.
///
/// All logarithms are natural logarithms.
#pragma once

#include <string_view>

#include "pinchlab/eigen_ode.hpp"

namespace pinchlab {

/// Which scalar-curvature lower bound is meant.
///  - NegRhoScalar:    rho < 0, R0 >= 0; trigger mu + nu < 0.
///  - NegRhoSectional: eta > 0, rho in (-1/eta, 0), Ric0 >= 0, nu0 >= -1;
///                     trigger nu < 0.
///  - NonnegRho:       rho in [0, 1/4), nu0 >= -1; trigger nu < 0.
enum class EstimateVariant { NegRhoScalar, NegRhoSectional, NonnegRho };

std::string_view to_string(EstimateVariant v);
/// Accepts "neg-rho-scalar", "neg-rho-sectional", "nonneg-rho".
EstimateVariant estimate_variant_from_string(std::string_view name);

/// Left end e^{1-4 rho} of the domain of f.
double f_domain_start(const FlowParams& params);
/// Minimum value -e^{1-4 rho} / (2 (1 - 2 rho)) of f, attained at the
/// left end of its domain.
double f_range_start(const FlowParams& params);

/// f(x) = x (log x - 2 (1 - 2 rho)) / (2 (1 - 2 rho)) for x >= e^{1-4 rho}.
double f_pinch(double x, const FlowParams& params);

/// Unique x >= e^{1-4 rho} with f(x) = y.
///
/// The root is bracketed by doubling from the left end of the domain,
/// narrowed by bisection and polished by Newton steps taken from the upper
/// end of the bracket (f is convex increasing, so those iterates decrease
/// monotonically onto the root). Values of y within a few ulps below the
/// range minimum are treated as the minimum itself.
double f_inverse(double y, const FlowParams& params);

/// Lambda = -lambda / (mu + nu) - log(-mu - nu) / (2 (1 - 2 rho)).
/// Requires mu + nu < 0.
double lambda_pinch(const EigenTriple& state, const FlowParams& params);

/// Cubic J with Lambda' = 2 (mu + nu)^{-2} J along the reaction ODE.
double j_polynomial(const EigenTriple& state, const FlowParams& params);

/// Closed-form time derivative 2 J / (mu + nu)^2 of Lambda.
double lambda_pinch_rate(const EigenTriple& state, const FlowParams& params);

/// Cubic I = -2 nu (lambda^2 + mu^2) + 2 mu lambda (mu + lambda)
///           - 2 nu mu lambda + 4 rho nu^2 (lambda + mu) - 4 rho nu^3.
double i_polynomial(const EigenTriple& state, const FlowParams& params);

/// Time factor 1 + 2 (1 + eta rho) t shared by (P1), (P2) and xi.
double k_time_factor(const FlowParams& params, double t);
/// Time factor 1 - 4 rho t of (P3).
double w_time_factor(const FlowParams& params, double t);

/// xi(t) = (lambda + mu + nu) / (-nu) - theta log(-nu)
///         - theta log(1 + 2 (1 + eta rho) t).
double xi_pinch(const EigenTriple& state, const FlowParams& params, double t);

/// Exact time derivative of xi along the reaction ODE, assembled from rhs
/// and the explicit time term.
double xi_pinch_rate(const EigenTriple& state, const FlowParams& params, double t);

/// Right-hand side of the estimate R >= estimate_rhs(...). `smallest` is
/// mu + nu for NegRhoScalar and nu otherwise; it must be negative.
/// NegRhoSectional is the (P2) bound of K with theta = -1/(2 rho), where
/// -3/theta = 6 rho.
double estimate_rhs(EstimateVariant variant, double smallest, const FlowParams& params, double t);

/// Throws DomainError unless `params` satisfy the parameter range of the
/// variant.
void require_variant_params(EstimateVariant variant, const FlowParams& params);

}  // namespace pinchlab
