// SPDX-License-Identifier: Apache-2.0
//
// starcov: coverage analysis and passive beamforming for STAR-RIS massive MIMO
// Copyright (C) 2026 The starcov Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

#include "starcov/experiments.hpp"
#include "starcov/montecarlo.hpp"
#include "starcov/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#ifndef STARCOV_CLI
#define STARCOV_CLI "starcov"
#endif

using namespace starcov;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int hw_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

PhaseState<double> random_state(const SideProblem<double>& p, std::uint64_t seed) {
    auto rng = make_engine(seed, Stream::InitPhases, p.side == Side::Transmit ? 0 : 1);
    return random_phase_state(p.amplitudes, p.side, rng);
}

void set_threshold_at(SideProblem<double>& p, const PhaseState<double>& s, int L) {
    const double g = evaluate(p, s.s).snr.gamma;
    p.params = CoverageParams<double>::make(g > 0 ? g : 1.0, L);
}

// ------------------------------------------------------------------------------------------

Outcome snr_closed_form_vs_monte_carlo() {
    const int Ms[] = {4, 8, 12, 16, 16};
    const char* Ns[] = {"2x2", "4x2", "3x3", "4x3", "4x4"};
    std::vector<mc::ValidationCase> cases;
    for (int i = 0; i < 5; ++i) {
        SystemConfig c = config_from_json_text("");
        c.seed = 101 + i;
        c.M = Ms[i];
        c = apply_axis_value(c, SweepAxis::N, Ns[i]);
        c.phase_family = PhaseErrorFamily::None;
        const Scenario sc = build_scenario(c);
        const SideProblem<double>& p = i % 2 == 0 ? sc.t : sc.r;
        mc::SnrScenario s;
        s.G = sc.los.G;
        s.R = sc.correlation.R;
        s.R_half = sc.correlation.R_half;
        s.pbm = random_state(p, c.seed).s;
        s.beta_k = p.beta_k;
        s.sigma0 = p.sigma0;
        s.phase_errors = PhaseErrorModel<double>::none();
        cases.push_back({"case" + std::to_string(i), s});
    }
    mc::McOptions opt;
    opt.trials = 100000;
    opt.seed = 2024;
    opt.threads = hw_threads();
    const auto rows = mc::validate_closed_form(cases, opt);
    double tr = 0, fourth = 0, snr = 0;
    for (const auto& r : rows) {
        if (r.quantity == "second_moment")
            tr = std::max(tr, r.rel_error);
        else if (r.quantity == "fourth_moment")
            fourth = std::max(fourth, r.rel_error);
        else if (r.quantity == "snr")
            snr = std::max(snr, r.rel_error);
    }
    return {tr <= 0.01 && fourth <= 0.02 && snr <= 0.02,
            "max rel err E|h|^2 " + fmt(tr) + " (<=0.01), E|h|^4 " + fmt(fourth) + " (<=0.02), SNR " + fmt(snr) +
                " (<=0.02), 5 scenarios x 1e5 trials"};
}

Outcome phase_error_deflation() {
    const double lambda = 0.12;
    const auto c = build_ris_correlation(4, 4, lambda / 8, lambda / 8, lambda);
    const auto model = PhaseErrorModel<double>::von_mises_from_cf(0.5);
    const CMatrixXd est = mc::estimate_deflated_correlation(c.R, model, 100000, 7);
    MatrixXd expect = 0.25 * c.R;
    expect.diagonal().array() += 0.75;
    const double err = (est - expect.cast<std::complex<double>>()).cwiseAbs().maxCoeff();
    return {err <= 0.01, "max entrywise abs err " + fmt(err) + " (<=0.01), N=16, 1e5 draws"};
}

Outcome gradient_audit() {
    const char* Ns[] = {"2x2", "4x2", "2x3", "8x1"};
    int checks = 0, scenarios = 0;
    double worst = 0;
    for (ProtocolKind protocol : {ProtocolKind::EnergySplitting, ProtocolKind::ModeSwitching})
        for (double m : {0.3, 0.5, 0.9})
            for (int k = 0; k < 4; ++k) {
                SystemConfig c = config_from_json_text("");
                c.seed = 300 + 10 * scenarios;
                c.M = 2 + (scenarios * 5) % 7;
                c = apply_axis_value(c, SweepAxis::N, Ns[k]);
                c.protocol = protocol;
                c.phase_m = m;
                Scenario sc = build_scenario(c);
                ++scenarios;
                for (SideProblem<double>* p : {&sc.t, &sc.r}) {
                    const auto s = random_state(*p, c.seed);
                    set_threshold_at(*p, s, c.L);
                    const VectorXd a = phase_gradient(s.s, coverage_wirtinger_gradient(*p, s.s));
                    const VectorXd fd = mc::finite_difference_gradient(*p, s.phases(), 1e-6);
                    const double scale = a.cwiseAbs().maxCoeff();
                    if (scale == 0)
                        continue;
                    worst = std::max(worst, (a - fd).cwiseAbs().maxCoeff() / scale);
                    ++checks;
                }
            }
    return {worst <= 1e-5 && scenarios >= 20,
            "max rel err " + fmt(worst) + " (<=1e-5) over " + std::to_string(scenarios) + " scenarios, " +
                std::to_string(checks) + " side checks, ES+MS, m in {0.3,0.5,0.9}"};
}

Outcome optimizer_oracle() {
    const int K = 720;
    const double pi = std::acos(-1.0);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        SystemConfig c = config_from_json_text("");
        c.seed = 400 + i;
        c.M = 1 + i % 4;
        c = apply_axis_value(c, SweepAxis::N, "2x1");
        c.phase_m = 0.8;
        Scenario sc = build_scenario(c);
        SideProblem<double>& p = i % 2 == 0 ? sc.t : sc.r;
        const auto init = random_state(p, c.seed);
        set_threshold_at(p, init, c.L);
        const auto res = pga_optimize_side(p, init, c.optimizer);
        double best = 0;
        VectorXd ph(2);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) {
                ph << 2 * pi * a / K, 2 * pi * b / K;
                best = std::max(best, coverage_at_phases(p, ph));
            }
        worst = std::max(worst, std::abs(res.objective() - best));
    }
    return {worst <= 1e-4, "max |PGA - grid max| " + fmt(worst) + " (<=1e-4) over 10 instances, 720x720 grid"};
}

// Pointwise comparison of optimized curves, both sides; returns the most negative gap.
double min_gap(const PointResult& hi, const PointResult& lo) {
    double gap = 1;
    for (Side side : {Side::Transmit, Side::Reflect}) {
        const auto& a = hi[side].curve_optimized.values;
        const auto& b = lo[side].curve_optimized.values;
        for (std::size_t i = 0; i < a.size(); ++i)
            gap = std::min(gap, a[i] - b[i]);
    }
    return gap;
}

Outcome monotone_orderings(std::vector<PointResult>& all_points) {
    SystemConfig c = config_from_json_text("");
    c.M = 16;
    c.L = 8;
    const int threads = hw_threads();
    std::vector<std::pair<std::string, double>> checks;
    auto keep = [&](const ResultTable& t) {
        all_points.insert(all_points.end(), t.points.begin(), t.points.end());
        return t;
    };

    const auto n = keep(run_coverage_sweep(c, SweepAxis::N, {"16", "64"}, threads));
    checks.emplace_back("N64>=N16", min_gap(n.points[1], n.points[0]));

    const SystemConfig c16 = apply_axis_value(c, SweepAxis::N, "16");
    const auto m = keep(run_coverage_sweep(c16, SweepAxis::M, {"8", "32"}, threads));
    checks.emplace_back("M32>=M8", min_gap(m.points[1], m.points[0]));

    const auto pr = keep(run_coverage_sweep(c16, SweepAxis::Protocol, {"ES", "MS"}, threads));
    checks.emplace_back("ES>=MS", min_gap(pr.points[0], pr.points[1]));

    const auto arch = keep(conventional_baseline(apply_axis_value(c, SweepAxis::N, "32"), threads));
    checks.emplace_back("STAR>=conv", min_gap(arch.points[0], arch.points[1]));

    const auto ms = keep(run_coverage_sweep(c16, SweepAxis::m, {"0.5", "0.7"}, threads));
    checks.emplace_back("m0.7>=m0.5(STAR)", min_gap(ms.points[1], ms.points[0]));
    SystemConfig conv = c16;
    conv.architecture = Architecture::ConventionalDual;
    const auto mc_ = keep(run_coverage_sweep(conv, SweepAxis::m, {"0.5", "0.7"}, threads));
    checks.emplace_back("m0.7>=m0.5(conv)", min_gap(mc_.points[1], mc_.points[0]));

    bool pass = true;
    std::string detail;
    for (const auto& [name, gap] : checks) {
        const bool ok = gap >= 0;
        pass = pass && ok;
        detail += (detail.empty() ? "" : ", ") + name + (ok ? " ok" : " VIOLATED (min gap " + fmt(gap) + ")");
    }
    return {pass, detail};
}

Outcome degeneracy_invariants(const std::vector<PointResult>& curves) {
    std::vector<std::string> failures;
    double spread_m0 = 0, spread_iid = 0;
    for (int variant = 0; variant < 2; ++variant) {
        SystemConfig c = config_from_json_text("");
        c.M = 8;
        c = apply_axis_value(c, SweepAxis::N, "16");
        if (variant == 0)
            c.phase_m = 0.0;
        else
            c.independent_fading = true;
        Scenario sc = build_scenario(c);
        for (SideProblem<double>* p : {&sc.t, &sc.r}) {
            set_threshold_at(*p, random_state(*p, 1), c.L);
            double lo = 2, hi = -1;
            for (std::uint64_t k = 0; k < 50; ++k) {
                const double v = evaluate(*p, random_state(*p, 1000 + k).s).coverage;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            (variant == 0 ? spread_m0 : spread_iid) = std::max(variant == 0 ? spread_m0 : spread_iid, hi - lo);
        }
        const PointResult pt = run_point(c);
        if (!pt.flat())
            failures.push_back(variant == 0 ? "m=0 sweep not flat" : "R=I sweep not flat");
        for (Side side : {Side::Transmit, Side::Reflect}) {
            const auto& a = pt[side].curve_initial.values;
            const auto& b = pt[side].curve_optimized.values;
            for (std::size_t i = 0; i < a.size(); ++i)
                spread_m0 = variant == 0 ? std::max(spread_m0, std::abs(a[i] - b[i])) : spread_m0;
        }
    }
    if (spread_m0 > 1e-10)
        failures.push_back("m=0 spread " + fmt(spread_m0));
    if (spread_iid > 1e-10)
        failures.push_back("R=I spread " + fmt(spread_iid));

    for (double g : {0.0, 1e-3, 1.0, 50.0, 1e6})
        for (int L : {1, 8, 30})
            if (coverage_probability(g, CoverageParams<double>::make(0.0, L)) != 1.0)
                failures.push_back("T=0 coverage not exactly 1");
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 60; ++i)
        grid.push_back(std::pow(10.0, -2 + 7.0 * i / 60));
    std::size_t points = 0;
    bool shape_ok = true;
    auto check_curve = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            ++points;
            if (!(v[i] >= 0 && v[i] <= 1) || (i > 0 && v[i] > v[i - 1]))
                shape_ok = false;
        }
    };
    for (const auto& p : curves)
        for (Side side : {Side::Transmit, Side::Reflect}) {
            check_curve(p[side].curve_initial.values);
            check_curve(p[side].curve_optimized.values);
            check_curve(coverage_curve(p[side].gamma_optimized, grid, 8).values);
        }
    if (coverage_curve(5.0, grid, 8).values.front() != 1.0)
        failures.push_back("T=0 curve point not exactly 1");
    if (!shape_ok)
        failures.push_back("curve not monotone or outside [0,1]");

    std::string detail = "m=0 spread " + fmt(spread_m0) + ", R=I spread " + fmt(spread_iid) +
                         " (<=1e-10), T=0 -> 1 exactly, " + std::to_string(points) + " curve points checked";
    for (const auto& f : failures)
        detail += "; " + f;
    return {failures.empty(), detail};
}

Outcome alzer_machinery() {
    double worst = 0;
    for (int L = 1; L <= 30; ++L) {
        const double eta = alzer_eta(L);
        for (int i = 0; i < 1000; ++i) {
            const double x = i / 999.0;
            const auto p = CoverageParams<double>::make(x / eta, L);
            worst = std::max(worst, std::abs(coverage_probability(1.0, p) - coverage_probability_binomial(1.0, p)));
        }
    }
    const double e1 = std::abs(alzer_eta(1) - 1.0);
    const double e2 = std::abs(alzer_eta(2) - std::sqrt(2.0));
    return {worst <= 1e-10 && e1 <= 1e-12 && e2 <= 1e-12,
            "max |product - binomial| " + fmt(worst) + " (<=1e-10, L<=30, 1000 x points), |eta(1)-1| " + fmt(e1) +
                ", |eta(2)-sqrt2| " + fmt(e2)};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Outcome sweep_determinism() {
    const fs::path root = fs::temp_directory_path() / "starcov_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "config.json";
    std::ofstream(cfg) << R"({"geometry": {"M": 8}, "coverage": {"threshold_count": 25}, "optimizer": {"max_iters": 150}})";
    const std::string cli = STARCOV_CLI;
    const std::pair<const char*, int> runs[] = {{"a", 1}, {"b", 1}, {"c", 4}};
    for (const auto& [name, threads] : runs) {
        const std::string cmd = "\"" + cli + "\" sweep --config \"" + cfg.string() +
                                "\" --seed 7 --axis N --values 16,8x2,36 --threads " + std::to_string(threads) +
                                " --out \"" + (root / name).string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0)
            return {false, "sweep command failed: " + cmd};
    }
    int compared = 0;
    std::string mismatch;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        const auto file = entry.path().filename();
        if (file == "timings.json")
            continue;
        const std::string ref = slurp(entry.path());
        for (const char* other : {"b", "c"}) {
            ++compared;
            if (!fs::exists(root / other / file) || slurp(root / other / file) != ref)
                mismatch += " " + std::string(other) + "/" + file.string();
        }
    }
    fs::remove_all(root);
    return {mismatch.empty() && compared >= 8,
            std::to_string(compared) + " file comparisons across runs with 1, 1 and 4 threads" +
                (mismatch.empty() ? ", all byte-identical" : "; differing:" + mismatch)};
}

} // namespace

int main() {
    int failed = 0;
    auto run = [&](int id, const char* name, const std::function<Outcome()>& check) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s [%d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
        return secs;
    };

    std::vector<PointResult> curves;
    const double t1 = run(1, "closed-form SNR vs Monte Carlo", snr_closed_form_vs_monte_carlo);
    run(2, "phase-error deflation", phase_error_deflation);
    const double t3 = run(3, "gradient audit", gradient_audit);
    run(4, "optimizer vs exhaustive grid (N=2)", optimizer_oracle);
    const double t5 = run(5, "monotone orderings at desk scale", [&] { return monotone_orderings(curves); });
    run(6, "degeneracy invariants", [&] { return degeneracy_invariants(curves); });
    run(7, "Alzer machinery", alzer_machinery);
    run(8, "sweep determinism", sweep_determinism);

    std::printf("runtime budgets: [1] %.2f s (<=60), [3] %.2f s (<=30), [5] %.2f s (<=300)\n", t1, t3, t5);
    if (t1 > 60 || t3 > 30 || t5 > 300) {
        std::printf("FAIL runtime budget exceeded\n");
        ++failed;
    }
    std::printf("%d of 8 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
