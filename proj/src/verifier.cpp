#include "pinchlab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "pinchlab/errors.hpp"
#include "pinchlab/parallel.hpp"
#include "pinchlab/random.hpp"

namespace pinchlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Running minimum with lexicographic tie-break on the state, so merges are
// independent of evaluation order.
struct MinTracker {
    double margin = kInf;
    EigenTriple state;
    double time = 0.0;
    bool set = false;

    void offer(double m, const EigenTriple& s, double t) {
        if (!set || m < margin || (m == margin && (s < state || (s == state && t < time)))) {
            margin = m;
            state = s;
            time = t;
            set = true;
        }
    }
    void merge(const MinTracker& o) {
        if (o.set) offer(o.margin, o.state, o.time);
    }
};

struct ScanAccumulator {
    MinTracker min;
    std::int64_t points = 0;
    std::int64_t violations = 0;
    std::int64_t near_violations = 0;
    std::int64_t iso_injected = 0;
    std::int64_t iso_equal = 0;

    void merge(const ScanAccumulator& o) {
        min.merge(o.min);
        points += o.points;
        violations += o.violations;
        near_violations += o.near_violations;
        iso_injected += o.iso_injected;
        iso_equal += o.iso_equal;
    }
};

// Distance (in the linear forms defining the region) to the region boundary.
double region_boundary_distance(InequalityKind kind, const EigenTriple& d) {
    double dist = std::min(d.lambda() - d.mu(), d.mu() - d.nu());
    switch (kind) {
        case InequalityKind::JCaseNegTrace:
        case InequalityKind::JCaseNonnegTrace:
            dist = std::min({dist, std::abs(d.trace()), std::abs(d.ricci_min())});
            break;
        case InequalityKind::IPoly: dist = std::min(dist, std::abs(d.nu())); break;
        case InequalityKind::XiPrime:
            dist = std::min({dist, std::abs(d.ricci_min()), std::abs(d.nu())});
            break;
        case InequalityKind::TraceBound: break;
    }
    return dist;
}

void scan_point(InequalityKind kind, const FlowParams& p, const EigenTriple& raw,
                const std::vector<double>& times, double tol, double near_width,
                ScanAccumulator& acc) {
    const double norm = raw.sup_norm();
    if (norm == 0.0) return;
    const EigenTriple d = raw.scaled(1.0 / norm);
    bool inside = false;
    for (double t : times) {
        const auto m = claim_margin(kind, p, d, t);
        if (!m) continue;
        inside = true;
        acc.min.offer(*m, d, t);
        if (*m < -tol) {
            ++acc.violations;
            if (region_boundary_distance(kind, d) <= near_width) ++acc.near_violations;
        }
    }
    if (inside) ++acc.points;
}

ScanReport make_report(InequalityKind kind, const FlowParams& p, double tol,
                       const std::vector<double>& times, const ScanAccumulator& acc) {
    ScanReport r;
    r.kind = kind;
    r.params = p;
    r.tol = tol;
    r.times = times;
    r.points_checked = acc.points;
    r.min_margin = acc.min.margin;
    r.argmin_state = acc.min.state;
    r.argmin_time = acc.min.time;
    r.violations = acc.violations;
    r.near_boundary_violations = acc.near_violations;
    r.isotropic_injected = acc.iso_injected;
    r.isotropic_equalities = acc.iso_equal;
    return r;
}

}  // namespace

std::string_view to_string(InequalityKind kind) {
    switch (kind) {
        case InequalityKind::JCaseNegTrace: return "j-neg-trace";
        case InequalityKind::JCaseNonnegTrace: return "j-nonneg-trace";
        case InequalityKind::IPoly: return "i-poly";
        case InequalityKind::XiPrime: return "xi-prime";
        case InequalityKind::TraceBound: return "trace-bound";
    }
    return "?";
}

InequalityKind inequality_kind_from_string(std::string_view name) {
    for (auto k : {InequalityKind::JCaseNegTrace, InequalityKind::JCaseNonnegTrace,
                   InequalityKind::IPoly, InequalityKind::XiPrime, InequalityKind::TraceBound})
        if (name == to_string(k)) return k;
    throw ConfigError("unknown inequality kind '" + std::string(name) + "'");
}

FlowParams scan_params(InequalityKind kind, const FlowParams& params) {
    FlowParams p = params;
    switch (kind) {
        case InequalityKind::JCaseNegTrace:
        case InequalityKind::JCaseNonnegTrace:
            validate(p);
            if (!(p.rho < 0.0)) throw DomainError("J scans require rho < 0");
            break;
        case InequalityKind::IPoly:
            validate(p);
            if (!(p.rho >= 0.0)) throw DomainError("I scan requires rho in [0, 1/4)");
            break;
        case InequalityKind::XiPrime:
            if (!(p.eta > 0.0 && p.rho < 0.0 && p.rho > -1.0 / p.eta))
                throw DomainError("xi' scan requires eta > 0 and rho in (-1/eta, 0)");
            p.theta = -1.0 / (2.0 * p.rho);
            validate(p);
            break;
        case InequalityKind::TraceBound: validate(p); break;
    }
    return p;
}

std::optional<double> claim_margin(InequalityKind kind, const FlowParams& p, const EigenTriple& d,
                                   double t) {
    const double tr = d.trace();
    const double ric = d.ricci_min();
    switch (kind) {
        case InequalityKind::JCaseNegTrace:
            // mu + nu <= -e^{1-4 rho} is reachable along the ray iff mu + nu < 0.
            if (!(tr <= 0.0 && ric < 0.0)) return std::nullopt;
            return j_polynomial(d, p);
        case InequalityKind::JCaseNonnegTrace:
            if (!(tr >= 0.0 && ric < 0.0)) return std::nullopt;
            return j_polynomial(d, p) - p.rho / (1.0 - 2.0 * p.rho) * ric * ric * ric;
        case InequalityKind::IPoly:
            if (!(d.nu() < 0.0)) return std::nullopt;
            return i_polynomial(d, p);
        case InequalityKind::XiPrime: {
            if (!(ric >= 0.0 && d.nu() < 0.0)) return std::nullopt;
            // First point r d of the ray with nu <= -1/k(t).
            const double r = 1.0 / (k_time_factor(p, t) * -d.nu());
            const EigenTriple s = d.scaled(r);
            return s.nu() * s.nu() * xi_pinch_rate(s, p, t) / (r * r * r);
        }
        case InequalityKind::TraceBound: return trace_bound_margin(d, p);
    }
    return std::nullopt;
}

ScanReport scan_inequality(InequalityKind kind, const FlowParams& params, int resolution,
                           double tol, const std::vector<double>& times) {
    if (resolution < 2) throw DomainError("scan resolution must be >= 2");
    if (times.empty()) throw DomainError("scan needs at least one time");
    for (double t : times)
        if (!(t >= 0.0)) throw DomainError("scan times must be >= 0");
    const FlowParams p = scan_params(kind, params);
    const std::vector<double> eval_times =
        kind == InequalityKind::XiPrime ? times : std::vector<double>{0.0};

    const int n = resolution;
    const double denom = n - 1;
    auto coord = [&](int i) { return (2.0 * i - denom) / denom; };
    const double near_width = 3.0 * 2.0 / denom;

    std::vector<ScanAccumulator> rows(static_cast<std::size_t>(n));
    parallel_for(rows.size(), [&](std::size_t i) {
        ScanAccumulator& acc = rows[i];
        const double l = coord(static_cast<int>(i));
        for (int j = 0; j < n; ++j) {
            const double m = coord(j);
            if (m > l) break;
            for (int k = 0; k < n; ++k) {
                const double nu = coord(k);
                if (nu > m) break;
                scan_point(kind, p, EigenTriple::ordered(l, m, nu), eval_times, tol, near_width,
                           acc);
            }
        }
    });
    ScanAccumulator total;
    for (const auto& r : rows) total.merge(r);
    if (total.points == 0) {
        std::ostringstream os;
        os << "no grid point of resolution " << n << " lies in the region of " << to_string(kind);
        throw EmptyRegion(os.str());
    }
    ScanReport r = make_report(kind, p, tol, eval_times, total);
    r.sampling = "grid";
    r.resolution = n;
    return r;
}

ScanReport random_scan(InequalityKind kind, const FlowParams& params, std::int64_t count,
                       std::uint64_t seed, double tol, std::int64_t isotropic_every,
                       double equality_tol) {
    if (count <= 0) throw DomainError("random scan count must be positive");
    const FlowParams p = scan_params(kind, params);
    const std::vector<double> eval_times{0.0};
    const bool inject = kind == InequalityKind::TraceBound && isotropic_every > 0;

    constexpr std::int64_t kBlock = 4096;
    const std::int64_t blocks = (count + kBlock - 1) / kBlock;
    std::vector<ScanAccumulator> parts(static_cast<std::size_t>(blocks));
    parallel_for(parts.size(), [&](std::size_t b) {
        ScanAccumulator& acc = parts[b];
        StreamRng rng(derive_stream_seed(seed, b));
        const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
        const std::int64_t end = std::min(count, begin + kBlock);
        for (std::int64_t i = begin; i < end; ++i) {
            const double a = rng.uniform(-1.0, 1.0);
            const double c = rng.uniform(-1.0, 1.0);
            const double e = rng.uniform(-1.0, 1.0);
            if (inject && i % isotropic_every == 0) {
                EigenTriple iso = EigenTriple::ordered(a, a, a);
                if (a == 0.0) iso = EigenTriple::ordered(1.0, 1.0, 1.0);
                const double m = trace_bound_margin(iso, p);
                ++acc.iso_injected;
                if (std::abs(m) < equality_tol) ++acc.iso_equal;
                ++acc.points;
                acc.min.offer(m, iso, 0.0);
                if (m < -tol) ++acc.violations;
                continue;
            }
            scan_point(kind, p, EigenTriple::sorted(a, c, e), eval_times, tol, 0.0, acc);
        }
    });
    ScanAccumulator total;
    for (const auto& part : parts) total.merge(part);
    if (total.points == 0) throw EmptyRegion("no random sample fell in the region");
    ScanReport r = make_report(kind, p, tol, eval_times, total);
    r.sampling = "random";
    r.resolution = 0;
    r.seed = seed;
    r.equality_tol = equality_tol;
    return r;
}

InvarianceReport check_invariance(const SetSpec& spec, int samples, double horizon,
                                  std::uint64_t seed, const IntegratorConfig& config, double tol,
                                  const InvarianceOptions& options) {
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    if (samples <= 0) throw DomainError("sample count must be positive");
    if (!(tol >= 0.0)) throw DomainError("tolerance must be >= 0");
    spec.validate();
    const SetSpec recheck = options.recheck.value_or(spec);
    recheck.validate();

    InvarianceReport rep;
    rep.spec = spec;
    rep.recheck_spec = recheck;
    rep.observation_only = options.recheck.has_value();
    rep.samples = samples;
    rep.horizon = horizon;
    rep.seed = seed;
    rep.tol = tol;
    rep.band = options.band_factor * tol;

    const std::vector<EigenTriple> starts =
        sample_set(spec, 0.0, samples, seed, rep.band, options.sampler);

    struct SampleResult {
        double worst = kInf;
        double time = 0.0;
        std::int64_t checkpoints = 0;
        Terminal terminal = Terminal::ReachedEnd;
    };
    std::vector<SampleResult> results(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        const Trajectory traj = integrate(starts[i], spec.params, 0.0, horizon, config);
        SampleResult& res = results[i];
        res.terminal = traj.terminal();
        for (double t : traj.checkpoints(options.checkpoints_per_step)) {
            const double m = membership(recheck, traj.eval_at(t), t).margin;
            ++res.checkpoints;
            if (m < res.worst) {
                res.worst = m;
                res.time = t;
            }
        }
    });

    rep.worst_drift = kInf;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        rep.checkpoints += res.checkpoints;
        if (res.terminal == Terminal::BlowUp) ++rep.blowups;
        if (res.terminal == Terminal::StepLimit) ++rep.step_limits;
        if (res.worst < rep.worst_drift) {
            rep.worst_drift = res.worst;
            rep.worst_time = res.time;
            rep.worst_sample = static_cast<int>(i);
            rep.worst_initial_state = starts[i];
        }
    }
    if (rep.worst_drift < -tol) {
        rep.violating_sample = rep.worst_sample;
        rep.violating_seed = derive_stream_seed(seed, static_cast<std::uint64_t>(rep.worst_sample));
    }
    return rep;
}

bool satisfies_hypothesis(EstimateVariant variant, const EigenTriple& s) {
    switch (variant) {
        case EstimateVariant::NegRhoScalar: return s.trace() >= 0.0;
        case EstimateVariant::NegRhoSectional: return s.ricci_min() >= 0.0 && s.nu() >= -1.0;
        case EstimateVariant::NonnegRho: return s.nu() >= -1.0;
    }
    return false;
}

EstimateReport check_estimate(const Trajectory& traj, EstimateVariant variant,
                              const FlowParams& params, double tol, std::string trajectory_id,
                              int checkpoints_per_step) {
    require_variant_params(variant, params);
    if (traj.empty()) throw DomainError("cannot check an estimate on an empty trajectory");
    const EigenTriple& s0 = traj.states().front();
    if (!satisfies_hypothesis(variant, s0)) {
        std::ostringstream os;
        os.precision(17);
        os << "initial state (" << s0.lambda() << ", " << s0.mu() << ", " << s0.nu()
           << ") violates the hypothesis of the " << to_string(variant) << " estimate";
        throw HypothesisViolated(os.str());
    }

    EstimateReport rep;
    rep.variant = variant;
    rep.params = params;
    rep.trajectory_id = std::move(trajectory_id);
    rep.initial_state = s0;
    rep.tol = tol;
    rep.terminal = traj.terminal();
    rep.t_last = traj.t_last();
    rep.worst_slack = kInf;

    const double t0 = traj.t_begin();
    bool in_run = false;
    double run_start = 0.0, run_last = 0.0;
    for (double t : traj.checkpoints(checkpoints_per_step)) {
        const EigenTriple s = traj.eval_at(t);
        ++rep.checkpoints;
        const double smallest =
            variant == EstimateVariant::NegRhoScalar ? s.ricci_min() : s.nu();
        const bool triggered = smallest < 0.0;
        if (triggered) {
            ++rep.triggered_checkpoints;
            // Estimates are stated for flow time measured from the initial metric.
            const double slack = 2.0 * s.trace() - estimate_rhs(variant, smallest, params, t - t0);
            if (slack < rep.worst_slack) {
                rep.worst_slack = slack;
                rep.worst_time = t;
            }
            if (slack < -tol) ++rep.violations;
            if (!in_run) run_start = t;
            run_last = t;
            in_run = true;
        } else if (in_run) {
            rep.trigger_times.emplace_back(run_start, run_last);
            in_run = false;
        }
    }
    if (in_run) rep.trigger_times.emplace_back(run_start, run_last);
    return rep;
}

std::vector<EigenTriple> sample_hypothesis_states(EstimateVariant variant, int count,
                                                  std::uint64_t seed, double box) {
    if (count <= 0) throw DomainError("sample count must be positive");
    std::vector<EigenTriple> out;
    out.reserve(static_cast<std::size_t>(count));
    constexpr int kAttempts = 100000;
    for (int i = 0; i < count; ++i) {
        StreamRng rng(derive_stream_seed(seed, static_cast<std::uint64_t>(i)));
        bool found = false;
        for (int a = 0; a < kAttempts && !found; ++a) {
            EigenTriple s = EigenTriple::sorted(rng.uniform(-box, box), rng.uniform(-box, box),
                                                rng.uniform(-box, box));
            if (!satisfies_hypothesis(variant, s)) continue;
            if (i % 2 == 1) {
                // Push onto the hypothesis boundary where the ordering allows it.
                switch (variant) {
                    case EstimateVariant::NegRhoScalar:
                        if (-s.ricci_min() >= s.mu())
                            s = EigenTriple::ordered(-s.ricci_min(), s.mu(), s.nu());
                        break;
                    case EstimateVariant::NegRhoSectional:
                        if (s.mu() >= 1.0) s = EigenTriple::ordered(s.lambda(), s.mu(), -1.0);
                        break;
                    case EstimateVariant::NonnegRho:
                        s = EigenTriple::ordered(s.lambda(), s.mu(), -1.0);
                        break;
                }
            }
            out.push_back(s);
            found = true;
        }
        if (!found) throw SamplingExhausted("could not draw a state satisfying the hypothesis");
    }
    return out;
}

bool EstimateBatchReport::passed() const {
    return step_limits == 0 &&
           std::all_of(runs.begin(), runs.end(), [](const EstimateReport& r) { return r.passed(); });
}

EstimateBatchReport check_estimates_seeded(EstimateVariant variant, const FlowParams& params,
                                           int count, std::uint64_t seed, double t_end,
                                           const IntegratorConfig& config, double tol) {
    require_variant_params(variant, params);
    if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
    const auto starts = sample_hypothesis_states(variant, count, seed);

    EstimateBatchReport batch;
    batch.variant = variant;
    batch.params = params;
    batch.seed = seed;
    batch.t_end = t_end;
    batch.tol = tol;
    batch.runs.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        const Trajectory traj = integrate(starts[i], params, 0.0, t_end, config);
        batch.runs[i] = check_estimate(traj, variant, params, tol, "sample-" + std::to_string(i));
    });
    batch.worst_slack = kInf;
    for (std::size_t i = 0; i < batch.runs.size(); ++i) {
        const auto& r = batch.runs[i];
        switch (r.terminal) {
            case Terminal::BlowUp: ++batch.blowups; break;
            case Terminal::ReachedEnd: ++batch.reached_end; break;
            case Terminal::StepLimit: ++batch.step_limits; break;
        }
        if (r.worst_slack < batch.worst_slack || batch.worst_run < 0) {
            batch.worst_slack = r.worst_slack;
            batch.worst_run = static_cast<int>(i);
        }
    }
    return batch;
}

std::string_view to_string(DerivQuantity q) { return q == DerivQuantity::Lambda ? "lambda" : "xi"; }

DerivQuantity deriv_quantity_from_string(std::string_view name) {
    if (name == "lambda" || name == "Lambda") return DerivQuantity::Lambda;
    if (name == "xi" || name == "Xi") return DerivQuantity::Xi;
    throw ConfigError("unknown derivative quantity '" + std::string(name) + "'");
}

DerivativeReport derivative_consistency(const Trajectory& traj, DerivQuantity quantity,
                                        const FlowParams& params, double h, int points,
                                        std::optional<std::pair<double, double>> window) {
    validate(params);
    if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
    if (points < 1) throw DomainError("need at least one sample point");
    if (traj.empty()) throw DomainError("empty trajectory");
    if (quantity == DerivQuantity::Xi) params.require_eta_factor();

    const auto [wa, wb] = window.value_or(std::pair{traj.t_begin(), traj.t_last()});
    const double a = std::max(wa, traj.t_begin()) + h;
    const double b = std::min(wb, traj.t_last()) - h;
    if (!(b >= a)) throw DomainError("window too short for the finite-difference step");

    auto value = [&](double t) {
        const EigenTriple s = traj.eval_at(t);
        return quantity == DerivQuantity::Lambda ? lambda_pinch(s, params) : xi_pinch(s, params, t);
    };
    auto closed_form = [&](double t) {
        const EigenTriple s = traj.eval_at(t);
        return quantity == DerivQuantity::Lambda ? lambda_pinch_rate(s, params)
                                                 : xi_pinch_rate(s, params, t);
    };

    DerivativeReport rep;
    rep.quantity = quantity;
    rep.params = params;
    rep.h = h;
    rep.points = points;
    rep.window_begin = a - h;
    rep.window_end = b + h;
    for (int i = 0; i < points; ++i) {
        const double t = points == 1 ? a : a + (b - a) * i / (points - 1);
        const double fd = (value(t + h) - value(t - h)) / (2.0 * h);
        const double exact = closed_form(t);
        const double diff = std::abs(fd - exact);
        if (diff > rep.max_abs_discrepancy) {
            rep.max_abs_discrepancy = diff;
            rep.worst_time = t;
        }
        rep.max_rel_discrepancy =
            std::max(rep.max_rel_discrepancy, diff / std::max(1.0, std::abs(exact)));
    }
    return rep;
}

std::vector<std::pair<EigenTriple, FlowParams>> sample_deriv_starts(
    int count, std::uint64_t seed, const std::optional<FlowParams>& fixed) {
    if (count <= 0) throw DomainError("trajectory count must be positive");
    if (fixed) validate(*fixed);
    std::vector<std::pair<EigenTriple, FlowParams>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        StreamRng rng(derive_stream_seed(seed, static_cast<std::uint64_t>(i)));
        const double mu = rng.uniform(-1.0, -0.1);
        const double lambda = rng.uniform(mu, 1.0);
        const double rho = rng.uniform(-0.25, 0.2);
        out.emplace_back(EigenTriple::ordered(lambda, mu, -1.0),
                         fixed ? *fixed : FlowParams::make(rho, 1.0, 1.0));
    }
    return out;
}

bool DerivBatchReport::passed() const {
    if (runs.empty() || !(max_discrepancy <= tol)) return false;
    for (const auto& r : runs) {
        if (r.discrepancy < floor) continue;
        if (!(r.discrepancy >= min_decay * r.discrepancy_half)) return false;
    }
    return true;
}

DerivBatchReport check_derivatives_seeded(DerivQuantity quantity, int count, std::uint64_t seed,
                                          const IntegratorConfig& config,
                                          const DerivBatchOptions& options) {
    config.validate();
    if (!(options.horizon > 4.0 * options.h)) throw DomainError("horizon too short for h");
    const auto starts = sample_deriv_starts(count, seed, options.params);

    DerivBatchReport batch;
    batch.quantity = quantity;
    batch.seed = seed;
    batch.h = options.h;
    batch.horizon = options.horizon;
    batch.points = options.points;
    batch.tol = options.tol;
    batch.min_decay = options.min_decay;
    batch.floor = options.floor;
    batch.runs.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        const auto& [state, params] = starts[i];
        const Trajectory traj = integrate(state, params, 0.0, options.horizon, config);
        if (traj.terminal() != Terminal::ReachedEnd)
            throw DomainError("derivative-check trajectory stopped before the horizon");
        const auto full = derivative_consistency(traj, quantity, params, options.h, options.points);
        const auto half =
            derivative_consistency(traj, quantity, params, 0.5 * options.h, options.points,
                                   std::pair{full.window_begin + 0.5 * options.h,
                                             full.window_end - 0.5 * options.h});
        auto& e = batch.runs[i];
        e.trajectory_id = "sample-" + std::to_string(i);
        e.initial_state = state;
        e.params = params;
        e.discrepancy = full.max_abs_discrepancy;
        e.discrepancy_half = half.max_abs_discrepancy;
        e.worst_time = full.worst_time;
    });
    batch.observed_min_decay = kInf;
    for (std::size_t i = 0; i < batch.runs.size(); ++i) {
        const auto& r = batch.runs[i];
        if (r.discrepancy > batch.max_discrepancy || batch.worst_run < 0) {
            batch.max_discrepancy = r.discrepancy;
            batch.worst_run = static_cast<int>(i);
        }
        if (r.discrepancy >= batch.floor)
            batch.observed_min_decay =
                std::min(batch.observed_min_decay, r.discrepancy / r.discrepancy_half);
    }
    return batch;
}

}  // namespace pinchlab
