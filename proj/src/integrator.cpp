#include "pinchlab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "pinchlab/errors.hpp"
#include "pinchlab/pinch_functions.hpp"

namespace pinchlab {

namespace {

// Dormand-Prince 5(4) tableau and DOPRI5 dense-output weights.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants (Hairer & Wanner defaults).
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;  // h_new / h stays in [kFacMin, kFacMax]
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;

double sup_norm(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

bool all_finite(const Vec3& v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

Vec3 axpy(const Vec3& y, double h, std::initializer_list<std::pair<double, const Vec3*>> terms) {
    Vec3 out = y;
    for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (const auto& [w, k] : terms) acc += w * (*k)[i];
        out[i] += h * acc;
    }
    return out;
}

double initial_step(const Vec3& y0, const Vec3& f0, double rho, double hmax,
                    const IntegratorConfig& cfg) {
    double dnf = 0.0, dny = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y0[i] / sk) * (y0[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, hmax);
    Vec3 y1;
    for (int i = 0; i < 3; ++i) y1[i] = y0[i] + h * f0[i];
    const Vec3 f1 = rhs(y1, rho);
    double der2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, hmax});
}

// Watched quantity minus trigger curve; negative inside the triggered region.
std::optional<double> event_value(EventKind kind, const FlowParams& p, double t, const Vec3& raw) {
    const EigenTriple s = EigenTriple::sorted(raw);
    if (kind == EventKind::NuTrigger) {
        if (!(p.eta_factor() > 0.0)) return std::nullopt;
        return s.nu() + 1.0 / k_time_factor(p, t);
    }
    if (!(p.rho < 0.0)) return std::nullopt;
    return s.ricci_min() + 1.0 / w_time_factor(p, t);
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("tolerances must be positive");
    if (!(blowup_norm > 0.0)) throw DomainError("blowup_norm must be positive");
    if (!(max_step > 0.0)) throw DomainError("max_step must be positive");
    if (max_steps <= 0) throw DomainError("max_steps must be positive");
}

std::string_view to_string(Terminal t) {
    switch (t) {
        case Terminal::ReachedEnd: return "reached_end";
        case Terminal::BlowUp: return "blow_up";
        case Terminal::StepLimit: return "step_limit";
    }
    return "?";
}

std::string_view to_string(BlowUpCause c) {
    switch (c) {
        case BlowUpCause::None: return "none";
        case BlowUpCause::NormThreshold: return "norm_threshold";
        case BlowUpCause::StepCollapse: return "step_collapse";
    }
    return "?";
}

std::string_view to_string(EventKind k) {
    return k == EventKind::NuTrigger ? "nu_trigger" : "ricci_trigger";
}

Vec3 Trajectory::Segment::at(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
        out[i] = coeffs[0][i] +
                 th * (coeffs[1][i] +
                       th1 * (coeffs[2][i] + th * (coeffs[3][i] + th1 * coeffs[4][i])));
    }
    return out;
}

double Trajectory::t_begin() const {
    if (empty()) throw OutOfRange("empty trajectory");
    return times_.front();
}

double Trajectory::t_last() const {
    if (empty()) throw OutOfRange("empty trajectory");
    return times_.back();
}

EigenTriple Trajectory::eval_at(double t) const {
    if (empty() || !(t >= times_.front() && t <= times_.back())) {
        std::ostringstream os;
        os.precision(17);
        os << "t=" << t << " outside the trajectory range";
        if (!empty()) os << " [" << times_.front() << ", " << times_.back() << "]";
        throw OutOfRange(os.str());
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (times_[i] == t) return states_[i];
    return EigenTriple::sorted(segments_[i].at(t));
}

std::vector<double> Trajectory::checkpoints(int interior_per_step) const {
    std::vector<double> out;
    if (empty()) return out;
    const int inner = std::max(0, interior_per_step);
    out.reserve(times_.size() * static_cast<std::size_t>(inner + 1));
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        out.push_back(times_[i]);
        const double h = times_[i + 1] - times_[i];
        for (int j = 1; j <= inner; ++j) {
            const double t = times_[i] + h * j / (inner + 1);
            if (t > times_[i] && t < times_[i + 1]) out.push_back(t);
        }
    }
    out.push_back(times_.back());
    return out;
}

Trajectory integrate(const EigenTriple& state0, const FlowParams& params, double t0, double t_end,
                     const IntegratorConfig& config) {
    validate(params);
    config.validate();
    if (!std::isfinite(t0) || !std::isfinite(t_end) || !(t_end > t0))
        throw DomainError("integrate requires finite t0 < t_end");

    Trajectory traj;
    traj.params_ = params;
    const double rho = params.rho;

    auto record_state = [&](double t, const Vec3& raw) {
        const EigenTriple s = EigenTriple::sorted(raw);
        if (s.reordered()) ++traj.reorder_count_;
        traj.min_gap_ = std::min({traj.min_gap_, raw[0] - raw[1], raw[1] - raw[2]});
        traj.times_.push_back(t);
        traj.states_.push_back(s);
    };

    Vec3 y = state0.values();
    double t = t0;
    record_state(t, y);
    if (sup_norm(y) > config.blowup_norm) {
        traj.terminal_ = Terminal::BlowUp;
        traj.cause_ = BlowUpCause::NormThreshold;
        traj.blowup_time_ = t;
        return traj;
    }

    const double hmax = std::min(config.max_step, t_end - t0);
    Vec3 k1 = rhs(y, rho);
    double h = initial_step(y, k1, rho, hmax, config);
    double facold = 1e-4;
    bool last_rejected = false;
    std::int64_t accepted = 0;

    const std::array<EventKind, 2> watched{EventKind::NuTrigger, EventKind::RicciTrigger};
    std::array<std::optional<double>, 2> g_prev{};
    if (config.detect_events)
        for (std::size_t e = 0; e < watched.size(); ++e) g_prev[e] = event_value(watched[e], params, t, y);

    while (true) {
        if (accepted >= config.max_steps) {
            traj.terminal_ = Terminal::StepLimit;
            return traj;
        }
        bool last = false;
        if (t + 1.01 * h >= t_end) {
            h = t_end - t;
            last = true;
        }
        if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            traj.terminal_ = Terminal::BlowUp;
            traj.cause_ = BlowUpCause::StepCollapse;
            traj.blowup_time_ = t;
            return traj;
        }

        const Vec3 y2 = axpy(y, h, {{a21, &k1}});
        const Vec3 k2 = rhs(y2, rho);
        const Vec3 y3 = axpy(y, h, {{a31, &k1}, {a32, &k2}});
        const Vec3 k3 = rhs(y3, rho);
        const Vec3 y4 = axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        const Vec3 k4 = rhs(y4, rho);
        const Vec3 y5 = axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        const Vec3 k5 = rhs(y5, rho);
        const Vec3 y6 = axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        const Vec3 k6 = rhs(y6, rho);
        const Vec3 y_new =
            axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        const Vec3 k7 = rhs(y_new, rho);

        double err = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sk =
                config.abs_tol + config.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err += (e / sk) * (e / sk);
        }
        err = std::sqrt(err / 3.0);

        if (!std::isfinite(err) || !all_finite(y_new)) {
            ++traj.rejected_;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        const double fac11 = std::pow(err, kExpo);
        if (err <= 1.0) {
            double fac = fac11 / std::pow(facold, kBeta);
            fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
            double h_new = h / fac;
            facold = std::max(err, 1e-4);

            Trajectory::Segment seg;
            seg.t0 = t;
            seg.h = h;
            for (int i = 0; i < 3; ++i) {
                const double ydiff = y_new[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                seg.coeffs[0][i] = y[i];
                seg.coeffs[1][i] = ydiff;
                seg.coeffs[2][i] = bspl;
                seg.coeffs[3][i] = ydiff - h * k7[i] - bspl;
                seg.coeffs[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                        d6 * k6[i] + d7 * k7[i]);
            }
            const double t_new = last ? t_end : t + h;
            traj.segments_.push_back(seg);
            record_state(t_new, y_new);
            ++accepted;

            if (config.detect_events) {
                for (std::size_t e = 0; e < watched.size(); ++e) {
                    const auto g_new = event_value(watched[e], params, t_new, y_new);
                    if (g_prev[e] && g_new && ((*g_prev[e] < 0.0) != (*g_new < 0.0))) {
                        double lo = t, hi = t_new;
                        const bool lo_negative = *g_prev[e] < 0.0;
                        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
                            const double mid = 0.5 * (lo + hi);
                            const auto gm = event_value(watched[e], params, mid, seg.at(mid));
                            ((*gm < 0.0) == lo_negative ? lo : hi) = mid;
                        }
                        traj.events_.push_back({watched[e], 0.5 * (lo + hi), lo_negative ? 1 : -1});
                    }
                    g_prev[e] = g_new;
                }
            }

            y = y_new;
            k1 = k7;
            t = t_new;

            if (sup_norm(y) > config.blowup_norm) {
                traj.terminal_ = Terminal::BlowUp;
                traj.cause_ = BlowUpCause::NormThreshold;
                traj.blowup_time_ = t;
                return traj;
            }
            if (last) {
                traj.terminal_ = Terminal::ReachedEnd;
                return traj;
            }
            h_new = std::min(h_new, hmax);
            if (last_rejected) h_new = std::min(h_new, h);
            last_rejected = false;
            h = h_new;
        } else {
            ++traj.rejected_;
            h /= std::min(1.0 / kFacMin, fac11 / kSafety);
            last_rejected = true;
        }
    }
}

}  // namespace pinchlab
