/// @file integrator.hpp
/// @brief Adaptive integration of the eigenvalue reaction ODE.
///
/// The stepper is the Dormand-Prince 5(4) pair (FSAL, local extrapolation)
/// with PI step-size control and the fourth-order continuous extension of
/// Hairer's DOPRI5. Every accepted step keeps its interpolation
/// coefficients, so the trajectory can be evaluated anywhere in its range.
///
/// The integrator knows nothing about the preserved sets: steps are never
/// rejected or modified because of membership, and eigenvalues are never
/// clamped. Blow-up is reported, not suppressed.
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "pinchlab/eigen_ode.hpp"

namespace pinchlab {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    /// Upper bound on the step size (+inf: only the interval length).
    double max_step = std::numeric_limits<double>::infinity();
    /// Sup-norm of the state above which integration stops with BlowUp.
    double blowup_norm = 1e12;
    std::int64_t max_steps = 1'000'000;
    /// Record crossings of the (P2)/(P3) trigger curves.
    bool detect_events = true;

    void validate() const;
};

enum class Terminal { ReachedEnd, BlowUp, StepLimit };
enum class BlowUpCause { None, NormThreshold, StepCollapse };

std::string_view to_string(Terminal t);
std::string_view to_string(BlowUpCause c);

/// Trigger curves watched during integration:
///  - NuTrigger:    nu = -1 / (1 + 2 (1 + eta rho) t)   (needs 1 + eta rho > 0)
///  - RicciTrigger: mu + nu = -1 / (1 - 4 rho t)         (needs rho < 0)
enum class EventKind { NuTrigger, RicciTrigger };

std::string_view to_string(EventKind k);

struct TriggerEvent {
    EventKind kind = EventKind::NuTrigger;
    double t = 0.0;
    /// +1 when the watched quantity rises through the curve (leaving the
    /// triggered region), -1 when it falls through it.
    int direction = 0;
};

/// Dense numerical solution of the reaction ODE.
class Trajectory {
public:
    Trajectory() = default;

    bool empty() const { return times_.empty(); }
    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<EigenTriple>& states() const { return states_; }
    const FlowParams& params() const { return params_; }

    double t_begin() const;
    double t_last() const;

    Terminal terminal() const { return terminal_; }
    /// Last accepted time when terminal() == BlowUp, NaN otherwise.
    double blowup_time() const { return blowup_time_; }
    BlowUpCause blowup_cause() const { return cause_; }

    const std::vector<TriggerEvent>& events() const { return events_; }

    /// Smallest raw gap min(lambda - mu, mu - nu) seen at accepted steps
    /// (negative if the numerical solution ever crossed).
    double min_ordering_gap() const { return min_gap_; }
    /// Number of stored states whose raw components needed reordering.
    std::size_t reorder_count() const { return reorder_count_; }
    std::size_t rejected_steps() const { return rejected_; }

    /// Dense output. Returns the stored state exactly at a node; throws
    /// OutOfRange outside [t_begin, t_last].
    EigenTriple eval_at(double t) const;

    /// Stored nodes plus `interior_per_step` evenly spaced points inside
    /// every step, in increasing order.
    std::vector<double> checkpoints(int interior_per_step) const;

private:
    friend Trajectory integrate(const EigenTriple&, const FlowParams&, double, double,
                                const IntegratorConfig&);

    struct Segment {
        double t0 = 0.0;
        double h = 0.0;
        std::array<Vec3, 5> coeffs{};  // y0, ydiff, bspl, r4, r5
        Vec3 at(double t) const;
    };

    std::vector<double> times_;
    std::vector<EigenTriple> states_;
    std::vector<Segment> segments_;  // segments_[i] spans times_[i]..times_[i+1]
    std::vector<TriggerEvent> events_;
    FlowParams params_;
    Terminal terminal_ = Terminal::ReachedEnd;
    BlowUpCause cause_ = BlowUpCause::None;
    double blowup_time_ = std::numeric_limits<double>::quiet_NaN();
    double min_gap_ = std::numeric_limits<double>::infinity();
    std::size_t reorder_count_ = 0;
    std::size_t rejected_ = 0;
};

/// Integrates from (t0, state0) towards t_end > t0.
///
/// Stops early with terminal BlowUp when the sup-norm exceeds
/// config.blowup_norm (or the step size collapses below rounding level), and
/// with terminal StepLimit after config.max_steps accepted steps.
Trajectory integrate(const EigenTriple& state0, const FlowParams& params, double t0, double t_end,
                     const IntegratorConfig& config = {});

/// Free-function form of Trajectory::eval_at.
inline EigenTriple eval_at(const Trajectory& traj, double t) { return traj.eval_at(t); }

}  // namespace pinchlab
