/// @file acceptance.cpp
/// @brief Runs the ten acceptance criteria through the command-line front end
/// and prints one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pinchlab/pinch_functions.hpp"
#include "pinchlab/report_io.hpp"

using namespace pinchlab;

namespace {

struct Outcome {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail << " [failed: " << what << "]";
        }
    }
};

/// A command that was run once, with the path it wrote; re-run for criterion 10.
struct Recorded {
    std::vector<std::string> args;
    std::vector<std::string> outputs;
};

class Harness {
public:
    explicit Harness(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Runs the tool; `outputs` are the files the command writes.
    int run(std::vector<std::string> args, std::vector<std::string> outputs, bool record = true) {
        std::vector<std::string> store{"pinchlab"};
        store.insert(store.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& s : store) argv.push_back(s.c_str());
        std::ostringstream err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), err);
        if (!err.str().empty()) std::cerr << err.str();
        if (record) recorded_.push_back({std::move(args), std::move(outputs)});
        return code;
    }

    const std::vector<Recorded>& recorded() const { return recorded_; }

private:
    std::filesystem::path dir_;
    std::vector<Recorded> recorded_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g(double x) { return format_double(x); }

/// Short form for the summary lines.
std::string brief(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

/// Scans one kind at one parameter set and checks violations and runtime.
void scan_case(Harness& h, Outcome& out, const std::string& name, std::vector<std::string> args,
               double max_seconds) {
    const std::string file = h.path(name + ".json");
    args.insert(args.begin(), "scan");
    args.insert(args.end(), {"--out", file});
    const auto t0 = std::chrono::steady_clock::now();
    const int code = h.run(args, {file});
    const double secs = seconds_since(t0);
    if (code != cli::kExitOk && code != cli::kExitFailed) {
        out.require(false, name + " exited with " + std::to_string(code));
        return;
    }
    const Json r = Json::parse(read_file(file)).at("report");
    const auto violations = r.at("violations").get<std::int64_t>();
    out.detail << ' ' << name << ": violations=" << violations
               << " points=" << r.at("points_checked").get<std::int64_t>() << " min_margin="
               << brief(number_from_json(r.at("min_margin"))) << " (" << brief(secs)
               << " s);";
    out.require(code == cli::kExitOk && violations == 0, name + " violations");
    out.require(secs < max_seconds, name + " runtime");
}

Outcome criterion1(Harness& h) {
    Outcome out;
    for (const char* rho : {"-0.1", "-1", "-10"})
        for (const char* kind : {"j-neg-trace", "j-nonneg-trace"})
            scan_case(h, out, std::string(kind) + "@rho=" + rho,
                      {"--kind", kind, "--rho", rho, "--resolution", "200", "--tol", "1e-12"}, 30.0);
    return out;
}

Outcome criterion2(Harness& h) {
    Outcome out;
    for (const char* rho : {"0", "0.1", "0.24"})
        scan_case(h, out, std::string("i-poly@rho=") + rho,
                  {"--kind", "i-poly", "--rho", rho, "--resolution", "200", "--tol", "1e-12"}, 30.0);
    return out;
}

Outcome criterion3(Harness& h) {
    Outcome out;
    struct Case {
        const char* eta;
        const char* rho;
        double rho_value;
    };
    for (const Case& c : {Case{"1", "-0.5", -0.5}, Case{"2", "-0.4", -0.4}, Case{"10", "-0.05", -0.05}}) {
        const std::string theta = g(-1.0 / (2.0 * c.rho_value));
        scan_case(h, out, std::string("xi-prime@eta=") + c.eta + ",rho=" + c.rho,
                  {"--kind", "xi-prime", "--eta", c.eta, "--rho", c.rho, "--theta", theta,
                   "--times", "0", "--resolution", "200", "--tol", "1e-12"},
                  30.0);
    }
    return out;
}

Outcome criterion4(Harness& h) {
    Outcome out;
    for (const char* rho : {"-1", "0", "0.2"}) {
        const std::string file = h.path(std::string("trace-bound@") + rho + ".json");
        const int code = h.run({"scan", "--kind", "trace-bound", "--rho", rho, "--random", "1000000",
                                "--seed", "42", "--tol", "1e-12", "--equality-tol", "1e-12", "--out",
                                file},
                               {file});
        const Json r = Json::parse(read_file(file)).at("report");
        const auto violations = r.at("violations").get<std::int64_t>();
        const auto injected = r.at("isotropic_injected").get<std::int64_t>();
        const auto equalities = r.at("isotropic_equalities").get<std::int64_t>();
        out.detail << " rho=" << rho << ": violations=" << violations
                   << " points=" << r.at("points_checked").get<std::int64_t>()
                   << " isotropic equalities=" << equalities << '/' << injected << ';';
        out.require(code == cli::kExitOk && violations == 0, std::string("violations at rho=") + rho);
        out.require(r.at("points_checked").get<std::int64_t>() == 1000000, "sample count");
        out.require(injected > 0 && equalities == injected, "isotropic equality detection");
    }
    return out;
}

Outcome criterion5(Harness& h) {
    Outcome out;
    struct Case {
        double c0, rho;
    };
    for (const Case& c : {Case{1, 0}, Case{-1, 0}, Case{1, -1}}) {
        const double rate = 4.0 * (1.0 - 3.0 * c.rho);
        const double t_blow = 1.0 / (rate * c.c0);
        const std::string state = g(c.c0) + "," + g(c.c0) + "," + g(c.c0);
        const std::string tag = "c0=" + brief(c.c0) + ",rho=" + brief(c.rho);

        // Closed form along the whole trajectory, up to 90% of the blow-up time.
        const double t_end = c.c0 > 0 ? 0.9 * t_blow : 10.0;
        const std::string csv_file = h.path("iso@" + tag + ".csv");
        const int code = h.run({"simulate", "--state", state, "--rho", g(c.rho), "--t-end", g(t_end),
                                "--out", csv_file},
                               {csv_file});
        out.require(code == cli::kExitOk, "simulate " + tag);
        std::istringstream is(read_file(csv_file));
        double worst = 0.0;
        double t_last = -1.0;
        int rows = 0;
        bool header = false;
        for (std::string line; std::getline(is, line);) {
            if (line.empty() || line[0] == '#') continue;
            if (!header) {
                header = true;
                continue;
            }
            std::vector<double> v;
            std::istringstream ls(line);
            for (std::string cell; std::getline(ls, cell, ',');) v.push_back(parse_double(cell));
            const double exact = c.c0 / (1.0 - rate * c.c0 * v[0]);
            for (int k = 1; k <= 3; ++k) worst = std::max(worst, std::abs(v[k] - exact));
            t_last = v[0];
            ++rows;
        }
        out.detail << ' ' << tag << ": max |error|=" << brief(worst) << " over " << rows << " rows;";
        out.require(rows > 1 && t_last == t_end, "trajectory reaches t_end for " + tag);
        out.require(worst <= 1e-8, "closed form for " + tag);

        if (c.c0 > 0) {
            const std::string csv2 = h.path("blow@" + tag + ".csv");
            const std::string rep = h.path("blow@" + tag + ".json");
            h.run({"simulate", "--state", state, "--rho", g(c.rho), "--t-end", g(2.0 * t_blow),
                   "--out", csv2, "--report", rep},
                  {csv2, rep});
            const Json s = Json::parse(read_file(rep)).at("report");
            const double tb = number_from_json(s.at("blowup_time"));
            out.detail << " blow-up at " << brief(tb) << " vs " << brief(t_blow) << ';';
            out.require(s.at("terminal") == "blow_up", "blow-up detected for " + tag);
            out.require(std::abs(tb - t_blow) <= 1e-4, "blow-up time for " + tag);
        }
    }
    return out;
}

Outcome criterion6(Harness& h) {
    Outcome out;
    struct Case {
        const char* set;
        std::vector<std::string> params;
    };
    const std::vector<Case> cases = {
        {"X", {"--rho", "-1"}},
        {"W", {"--rho", "-1"}},
        {"Y", {"--eta", "1", "--rho", "-0.5", "--theta", "1"}},
        {"K", {"--eta", "-4", "--rho", "0.1", "--theta", "1"}},
    };
    for (const auto& c : cases) {
        const std::string file = h.path(std::string("set@") + c.set + ".json");
        std::vector<std::string> args{"verify-set", "--set", c.set, "--samples", "1000",
                                      "--horizon", "0.05", "--seed", "42", "--tol", "1e-8"};
        args.insert(args.end(), c.params.begin(), c.params.end());
        args.insert(args.end(), {"--out", file});
        const auto t0 = std::chrono::steady_clock::now();
        const int code = h.run(args, {file});
        const double secs = seconds_since(t0);
        const Json r = Json::parse(read_file(file)).at("report");
        const double drift = number_from_json(r.at("worst_drift"));
        out.detail << ' ' << c.set << ": worst_drift=" << brief(drift)
                   << " samples=" << r.at("samples").get<std::int64_t>()
                   << " step_limits=" << r.at("step_limits").get<std::int64_t>() << " ("
                   << brief(secs) << " s);";
        out.require(code == cli::kExitOk && drift >= -1e-8, std::string("drift for ") + c.set);
        out.require(r.at("samples").get<std::int64_t>() == 1000, "sample count");
        out.require(r.at("step_limits").get<std::int64_t>() == 0, "step limits");
        out.require(secs < 120.0, std::string("runtime for ") + c.set);
    }
    return out;
}

Outcome criterion7(Harness& h) {
    Outcome out;
    struct Case {
        const char* variant;
        std::vector<std::string> params;
        std::string tag;
    };
    const std::vector<Case> cases = {
        {"neg-rho-scalar", {"--rho", "-1"}, "NegRhoScalar(rho=-1)"},
        {"neg-rho-sectional", {"--eta", "1", "--rho", "-0.5"}, "NegRhoSectional(eta=1,rho=-0.5)"},
        {"nonneg-rho", {"--rho", "0"}, "NonnegRho(rho=0)"},
        {"nonneg-rho", {"--rho", "0.2"}, "NonnegRho(rho=0.2)"},
    };
    int k = 0;
    for (const auto& c : cases) {
        const std::string file = h.path("estimate" + std::to_string(k++) + ".json");
        std::vector<std::string> args{"verify-estimate", "--variant", c.variant, "--samples", "100",
                                      "--seed", "42", "--t-end", "10", "--tol", "1e-8"};
        args.insert(args.end(), c.params.begin(), c.params.end());
        args.insert(args.end(), {"--out", file});
        const int code = h.run(args, {file});
        const Json r = Json::parse(read_file(file)).at("report");
        const double slack = number_from_json(r.at("worst_slack"));
        std::int64_t triggered = 0;
        bool reached_blowup = true;
        for (const auto& run : r.at("runs")) {
            triggered += run.at("triggered_checkpoints").get<std::int64_t>();
            reached_blowup = reached_blowup && run.at("terminal") == "blow_up";
        }
        out.detail << ' ' << c.tag << ": worst_slack=" << brief(slack)
                   << " blow-ups=" << r.at("blowups").get<std::int64_t>() << "/"
                   << r.at("samples").get<std::int64_t>() << " triggered checkpoints=" << triggered
                   << ';';
        out.require(code == cli::kExitOk && slack >= -1e-8, "slack for " + c.tag);
        out.require(r.at("runs").size() == 100, "sample count for " + c.tag);
        out.require(r.at("step_limits").get<std::int64_t>() == 0, "step limits for " + c.tag);
        out.require(reached_blowup, "every horizon reaches blow-up for " + c.tag);
        out.require(triggered > 0, "the estimate is exercised for " + c.tag);
    }
    return out;
}

Outcome criterion8(Harness& h) {
    Outcome out;
    const std::string file = h.path("deriv.json");
    const int code = h.run({"deriv-check", "--quantity", "both", "--trajectories", "20", "--seed",
                            "42", "--h", "1e-4", "--tol", "1e-6", "--out", file},
                           {file});
    const Json r = Json::parse(read_file(file)).at("report");
    for (const auto& b : r.at("batches")) {
        const double worst = number_from_json(b.at("max_discrepancy"));
        const double decay = number_from_json(b.at("observed_min_decay"));
        out.detail << ' ' << b.at("quantity").get<std::string>() << ": trajectories="
                   << b.at("runs").size() << " max discrepancy=" << brief(worst)
                   << " min decay on halving h=" << brief(decay) << ';';
        out.require(b.at("runs").size() == 20, "trajectory count");
        out.require(worst <= 1e-6, "discrepancy");
        out.require(b.at("passed").get<bool>(), "O(h^2) decay");
    }
    out.require(code == cli::kExitOk, "deriv-check exit code");
    return out;
}

Outcome criterion9() {
    Outcome out;
    constexpr int kPoints = 10000;
    constexpr double kDecades = 12.0;
    for (double rho : {-10.0, -1.0, -0.1, 0.0, 0.2}) {
        const auto p = FlowParams::make(rho);
        const double x0 = std::exp(1.0 - 4.0 * rho);
        double worst = 0.0;
        for (int i = 0; i < kPoints; ++i) {
            const double x = x0 * std::pow(10.0, kDecades * i / (kPoints - 1));
            worst = std::max(worst, std::abs(f_inverse(f_pinch(x, p), p) - x) / x);
        }
        out.detail << " rho=" << brief(rho) << ": max relative error=" << brief(worst) << ';';
        out.require(worst <= 1e-10, "inverse at rho=" + brief(rho));
    }
    return out;
}

Outcome criterion10(Harness& h) {
    Outcome out;
    int compared = 0;
    int mismatched = 0;
    for (const auto& rec : h.recorded()) {
        std::vector<std::string> first;
        for (const auto& f : rec.outputs) first.push_back(read_file(f));
        // A different worker count must not change a byte.
        setenv("PINCHLAB_THREADS", "3", 1);
        h.run(rec.args, rec.outputs, false);
        unsetenv("PINCHLAB_THREADS");
        for (std::size_t i = 0; i < rec.outputs.size(); ++i) {
            ++compared;
            if (read_file(rec.outputs[i]) != first[i]) {
                ++mismatched;
                out.detail << " differs: " << rec.outputs[i] << ';';
            }
        }
    }
    out.detail << " re-ran " << h.recorded().size() << " commands, compared " << compared
               << " outputs, " << mismatched << " differ;";
    out.require(compared > 0 && mismatched == 0, "byte-identical reruns");
    return out;
}

}  // namespace

int main() {
    const auto dir = std::filesystem::temp_directory_path() / "pinchlab_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    Harness h(dir);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"inequality scans for J", [&] { return criterion1(h); }},
        {"I-polynomial scans", [&] { return criterion2(h); }},
        {"xi' scans", [&] { return criterion3(h); }},
        {"trace bound", [&] { return criterion4(h); }},
        {"integrator against the isotropic solution", [&] { return criterion5(h); }},
        {"set invariance", [&] { return criterion6(h); }},
        {"pinching estimates", [&] { return criterion7(h); }},
        {"derivative identities", [&] { return criterion8(h); }},
        {"function inverses", [] { return criterion9(); }},
        {"reproducibility", [&] { return criterion10(h); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << " exception: " << e.what();
        }
        if (!o.passed) ++failures;
        std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << i + 1 << " ("
                  << criteria[i].first << "):" << o.detail.str() << std::endl;
    }
    std::filesystem::remove_all(dir);
    return failures == 0 ? 0 : 1;
}
