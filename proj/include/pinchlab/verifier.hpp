/// @file verifier.hpp
/// @brief Numerical checks of the pinching inequalities and invariance claims.
///
/// Four families of checks:
///  - sign scans of the homogeneous polynomials J, I, the xi' numerator and
///    the trace inequality over cone regions;
///  - invariance of X, K, Y, W under the reaction ODE, probed from seeded
///    near-boundary samples;
///  - the scalar-curvature estimates along trajectories;
///  - agreement of finite-difference derivatives of Lambda and xi with their
///    closed forms.
///
/// Parallel loops merge with order-independent reductions (min with a
/// lexicographic tie-break, sums), so reports do not depend on the thread
/// count.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pinchlab/cone_sets.hpp"
#include "pinchlab/eigen_ode.hpp"
#include "pinchlab/integrator.hpp"
#include "pinchlab/pinch_functions.hpp"

namespace pinchlab {

/// Claims checked by scans. Regions (all with lambda >= mu >= nu):
///  - JCaseNegTrace:    T <= 0, mu + nu <= -e^{1-4 rho};  J >= 0            (rho < 0)
///  - JCaseNonnegTrace: T >= 0, mu + nu < 0;  J >= rho/(1-2 rho) (mu+nu)^3  (rho < 0)
///  - IPoly:            nu < 0;  I >= 0                                     (0 <= rho < 1/4)
///  - XiPrime:          mu + nu >= 0, nu <= -1/k(t);  nu^2 xi' >= 0
///                      (eta > 0, -1/eta < rho < 0, theta = -1/(2 rho))
///  - TraceBound:       everywhere;  T' >= 4/3 (1 - 3 rho) T^2
enum class InequalityKind { JCaseNegTrace, JCaseNonnegTrace, IPoly, XiPrime, TraceBound };

std::string_view to_string(InequalityKind kind);
/// Accepts "j-neg-trace", "j-nonneg-trace", "i-poly", "xi-prime", "trace-bound".
InequalityKind inequality_kind_from_string(std::string_view name);

/// Parameters actually used by a scan of `kind`: validates the admissible
/// range and, for XiPrime, sets theta = -1/(2 rho).
FlowParams scan_params(InequalityKind kind, const FlowParams& params);

/// Claim margin (>= 0 means the claim holds) at a direction with unit
/// sup-norm, or nullopt when the direction's ray misses the region. For
/// XiPrime the margin is nu^2 xi'(t) at the first triggered point of the ray,
/// divided by the cube of its scale; along the triggered part of the ray
/// this normalized value is smallest there.
std::optional<double> claim_margin(InequalityKind kind, const FlowParams& scan_params,
                                   const EigenTriple& direction, double t = 0.0);

struct ScanReport {
    InequalityKind kind = InequalityKind::TraceBound;
    FlowParams params;
    /// "grid" or "random".
    std::string sampling = "grid";
    int resolution = 0;
    std::uint64_t seed = 0;
    std::int64_t points_checked = 0;
    double min_margin = 0.0;
    EigenTriple argmin_state;
    double argmin_time = 0.0;
    std::int64_t violations = 0;
    /// Violations within a few grid spacings of the region boundary.
    std::int64_t near_boundary_violations = 0;
    double tol = 0.0;
    std::vector<double> times{0.0};
    std::int64_t isotropic_injected = 0;
    /// Injected isotropic states whose margin is below the equality tolerance.
    std::int64_t isotropic_equalities = 0;
    double equality_tol = 1e-12;

    bool passed() const { return violations == 0 && isotropic_equalities == isotropic_injected; }
    friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

/// Grid scan: a resolution^3 grid on [-1, 1]^3, each ordered grid point
/// projected radially onto the unit sup-norm sphere. The homogeneous claims
/// are scale-free, so regions reduce to the cones they generate. `times`
/// only matters for XiPrime. Throws EmptyRegion if no grid point lies in
/// the region.
ScanReport scan_inequality(InequalityKind kind, const FlowParams& params, int resolution,
                           double tol, const std::vector<double>& times = {0.0});

/// Random scan over `count` seeded ordered states in [-1, 1]^3 (normalized
/// to unit sup-norm). For TraceBound every `isotropic_every`-th state is
/// replaced by an isotropic state c(1, 1, 1), where the inequality is an
/// equality; those are counted in isotropic_equalities when their margin is
/// below equality_tol in absolute value.
ScanReport random_scan(InequalityKind kind, const FlowParams& params, std::int64_t count,
                       std::uint64_t seed, double tol, std::int64_t isotropic_every = 1000,
                       double equality_tol = 1e-12);

struct InvarianceOptions {
    /// Interior dense-output checkpoints per accepted step.
    int checkpoints_per_step = 3;
    /// Sampling band is band_factor * tol.
    double band_factor = 100.0;
    SamplerConfig sampler;
    /// Re-check membership against this set instead of the sampled one.
    /// The result is then an observation, not a pass/fail verdict.
    std::optional<SetSpec> recheck;
};

struct InvarianceReport {
    SetSpec spec;
    SetSpec recheck_spec;
    bool observation_only = false;
    int samples = 0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    double tol = 0.0;
    double band = 0.0;
    /// Most negative membership margin seen along any trajectory.
    double worst_drift = 0.0;
    double worst_time = 0.0;
    int worst_sample = -1;
    EigenTriple worst_initial_state;
    /// Index of the offending sample and its stream seed when
    /// worst_drift < -tol.
    std::optional<int> violating_sample;
    std::optional<std::uint64_t> violating_seed;
    int blowups = 0;
    int step_limits = 0;
    std::int64_t checkpoints = 0;

    bool passed() const { return observation_only || worst_drift >= -tol; }
};

/// Samples near-boundary members of `spec` at t = 0, integrates each one to
/// min(horizon, blow-up) and records the worst membership margin at dense
/// checkpoints (the set's time argument follows the trajectory).
InvarianceReport check_invariance(const SetSpec& spec, int samples, double horizon,
                                  std::uint64_t seed, const IntegratorConfig& config, double tol,
                                  const InvarianceOptions& options = {});

struct EstimateReport {
    EstimateVariant variant = EstimateVariant::NonnegRho;
    FlowParams params;
    std::string trajectory_id;
    EigenTriple initial_state;
    /// min of R - estimate_rhs over triggered checkpoints; +inf when the
    /// trigger never holds.
    double worst_slack = 0.0;
    double worst_time = 0.0;
    /// Maximal runs of consecutive triggered checkpoints, as [start, end].
    std::vector<std::pair<double, double>> trigger_times;
    std::int64_t checkpoints = 0;
    std::int64_t triggered_checkpoints = 0;
    std::int64_t violations = 0;
    double tol = 0.0;
    Terminal terminal = Terminal::ReachedEnd;
    double t_last = 0.0;

    bool passed() const { return violations == 0; }
};

/// True iff `state` satisfies the initial hypothesis of the variant
/// (R >= 0; Ric >= 0 and nu >= -1; nu >= -1 respectively).
bool satisfies_hypothesis(EstimateVariant variant, const EigenTriple& state);

/// Checks R >= estimate_rhs - tol at every triggered dense checkpoint.
/// Throws HypothesisViolated if the initial state fails the hypothesis.
EstimateReport check_estimate(const Trajectory& traj, EstimateVariant variant,
                              const FlowParams& params, double tol, std::string trajectory_id = {},
                              int checkpoints_per_step = 3);

/// Seeded initial states satisfying the variant's hypothesis, drawn from
/// [-box, box]^3. Every odd-indexed state is pushed onto the hypothesis
/// boundary when that keeps it ordered.
std::vector<EigenTriple> sample_hypothesis_states(EstimateVariant variant, int count,
                                                  std::uint64_t seed, double box = 10.0);

struct EstimateBatchReport {
    EstimateVariant variant = EstimateVariant::NonnegRho;
    FlowParams params;
    std::uint64_t seed = 0;
    double t_end = 0.0;
    double tol = 0.0;
    std::vector<EstimateReport> runs;
    double worst_slack = 0.0;
    int worst_run = -1;
    /// Runs that stopped because of blow-up / reached t_end / hit the step limit.
    int blowups = 0;
    int reached_end = 0;
    int step_limits = 0;

    bool passed() const;
};

/// Integrates `count` seeded hypothesis states to min(t_end, blow-up) and
/// checks the estimate on each.
EstimateBatchReport check_estimates_seeded(EstimateVariant variant, const FlowParams& params,
                                           int count, std::uint64_t seed, double t_end,
                                           const IntegratorConfig& config, double tol);

enum class DerivQuantity { Lambda, Xi };

std::string_view to_string(DerivQuantity q);
DerivQuantity deriv_quantity_from_string(std::string_view name);

struct DerivativeReport {
    DerivQuantity quantity = DerivQuantity::Lambda;
    FlowParams params;
    double h = 0.0;
    int points = 0;
    double window_begin = 0.0;
    double window_end = 0.0;
    /// max |central difference - closed form| over the sample points.
    double max_abs_discrepancy = 0.0;
    /// Same, divided by max(1, |closed form|).
    double max_rel_discrepancy = 0.0;
    double worst_time = 0.0;
};

/// Compares (Q(t+h) - Q(t-h)) / (2h), with states from dense output, against
/// the closed forms 2 J / (mu + nu)^2 (Lambda) and the rhs-assembled xi' (Xi)
/// at `points` evenly spaced times of [window_begin + h, window_end - h].
/// An empty window means the whole trajectory. Throws DomainError if the
/// quantity is undefined anywhere it is evaluated.
DerivativeReport derivative_consistency(const Trajectory& traj, DerivQuantity quantity,
                                        const FlowParams& params, double h, int points = 50,
                                        std::optional<std::pair<double, double>> window = {});

struct DerivBatchEntry {
    std::string trajectory_id;
    EigenTriple initial_state;
    FlowParams params;
    /// Max absolute discrepancy at step h and at step h/2.
    double discrepancy = 0.0;
    double discrepancy_half = 0.0;
    double worst_time = 0.0;
};

struct DerivBatchReport {
    DerivQuantity quantity = DerivQuantity::Lambda;
    std::uint64_t seed = 0;
    double h = 0.0;
    double horizon = 0.0;
    int points = 0;
    /// Bound on the discrepancy at step h.
    double tol = 0.0;
    /// Smallest accepted ratio d(h) / d(h/2) for runs above the floor.
    double min_decay = 0.0;
    /// Runs with d(h) below this are at the integrator floor and skip the
    /// decay check.
    double floor = 0.0;
    std::vector<DerivBatchEntry> runs;
    double max_discrepancy = 0.0;
    int worst_run = -1;
    double observed_min_decay = 0.0;

    bool passed() const;
};

struct DerivBatchOptions {
    double h = 1e-4;
    double horizon = 0.05;
    int points = 50;
    double tol = 1e-6;
    double min_decay = 3.5;
    double floor = 1e-9;
    /// Use these parameters for every run instead of drawing rho.
    std::optional<FlowParams> params;
};

/// Seeded unit-scale starting points for derivative checks: nu = -1,
/// mu uniform in [-1, -0.1], lambda uniform in [mu, 1]; when no parameters
/// are fixed, rho is uniform in [-0.25, 0.2] with eta = theta = 1.
std::vector<std::pair<EigenTriple, FlowParams>> sample_deriv_starts(
    int count, std::uint64_t seed, const std::optional<FlowParams>& fixed = {});

/// Integrates each start over [0, horizon] and runs derivative_consistency at
/// h and h/2.
DerivBatchReport check_derivatives_seeded(DerivQuantity quantity, int count, std::uint64_t seed,
                                          const IntegratorConfig& config,
                                          const DerivBatchOptions& options = {});

}  // namespace pinchlab
