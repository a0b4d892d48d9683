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

// Command-line front end: sweep, baseline, validate, gradcheck, optimize.

#include "starcov/csv.hpp"
#include "starcov/experiments.hpp"
#include "starcov/montecarlo.hpp"
#include "starcov/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace starcov;
using json = nlohmann::json;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::uint64_t trials = 100000;
    int threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON config file (absent fields take defaults)");
    cmd->add_option("--seed", c.seed, "override the config seed");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--trials", c.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

SystemConfig resolve_config(const Common& c) {
    SystemConfig config = c.config_path.empty() ? config_from_json_text("") : load_config(c.config_path);
    if (c.seed)
        config.seed = *c.seed;
    return config;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << text;
    if (!os)
        throw std::runtime_error("failed writing " + path.string());
}

fs::path out_dir(const Common& c, const char* fallback) { return c.out.empty() ? fs::path(fallback) : fs::path(c.out); }

void print_written(const std::vector<fs::path>& files) {
    for (const auto& f : files)
        std::cout << f.string() << '\n';
}

std::vector<std::string> split_values(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        std::string v;
        while (std::getline(ss, v, ','))
            if (!v.empty())
                out.push_back(v);
    }
    return out;
}

// ------------------------------------------------------------------------------------------

int cmd_sweep(const Common& c, const std::string& axis_name, const std::vector<std::string>& raw_values) {
    const SystemConfig config = resolve_config(c);
    const SweepAxis axis = parse_axis(axis_name);
    const auto table = run_coverage_sweep(config, axis, split_values(raw_values), c.threads);
    print_written(emit_figure_data(table, config, out_dir(c, "sweep_out")));
    return 0;
}

int cmd_baseline(const Common& c) {
    const SystemConfig config = resolve_config(c);
    const auto table = conventional_baseline(config, c.threads);
    print_written(emit_figure_data(table, config, out_dir(c, "baseline_out")));
    return 0;
}

mc::SnrScenario side_scenario(const Scenario& sc, const SideProblem<double>& problem, const PhaseState<double>& state,
                              const PhaseErrorModel<double>& errors) {
    mc::SnrScenario s;
    s.G = sc.los.G;
    s.R = sc.correlation.R;
    s.R_half = sc.correlation.R_half;
    s.pbm = state.s;
    s.beta_k = problem.beta_k;
    s.sigma0 = problem.sigma0;
    s.phase_errors = errors;
    return s;
}

int cmd_validate(const Common& c) {
    const SystemConfig config = resolve_config(c);
    const Scenario sc = build_scenario(config);
    std::vector<mc::ValidationCase> cases;
    for (const SideProblem<double>* p : {&sc.t, &sc.r}) {
        auto rng = make_engine(config.seed, Stream::InitPhases, p->side == Side::Transmit ? 0 : 1);
        const auto state = random_phase_state(p->amplitudes, p->side, rng);
        const std::string side = to_string(p->side);
        cases.push_back({side + "_no_errors", side_scenario(sc, *p, state, PhaseErrorModel<double>::none())});
        cases.push_back({side + "_config_errors", side_scenario(sc, *p, state, sc.phase_errors)});
    }
    mc::McOptions opts;
    opts.trials = c.trials;
    opts.seed = config.seed;
    opts.threads = c.threads;
    const auto rows = mc::validate_closed_form(cases, opts);
    std::ostringstream os;
    mc::write_validation_csv(rows, os);
    if (c.out.empty()) {
        std::cout << os.str();
    } else {
        const fs::path path = fs::path(c.out) / "validation.csv";
        write_text(path, os.str());
        std::cout << path.string() << '\n';
    }
    return 0;
}

int cmd_gradcheck(const Common& c, double step, double tol) {
    const SystemConfig config = resolve_config(c);
    Scenario sc = build_scenario(config);
    std::ostringstream os;
    csv::Writer w(os);
    w.row("side", "element", "analytic", "finite_difference", "abs_error");
    double worst = 0;
    for (SideProblem<double>* p : {&sc.t, &sc.r}) {
        auto rng = make_engine(config.seed, Stream::InitPhases, p->side == Side::Transmit ? 0 : 1);
        const auto state = random_phase_state(p->amplitudes, p->side, rng);
        const double g0 = evaluate(*p, state.s).snr.gamma;
        p->params = CoverageParams<double>::make(g0 > 0 ? g0 : 1.0, config.L);
        const VectorXd analytic = phase_gradient(state.s, coverage_wirtinger_gradient(*p, state.s));
        const VectorXd numeric = mc::finite_difference_gradient(*p, state.phases(), step);
        const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-300);
        for (Eigen::Index n = 0; n < analytic.size(); ++n) {
            const double err = std::abs(analytic(n) - numeric(n));
            worst = std::max(worst, err / scale);
            w.row(to_string(p->side), n, analytic(n), numeric(n), err);
        }
    }
    if (c.out.empty())
        std::cout << os.str();
    else
        write_text(fs::path(c.out) / "gradcheck.csv", os.str());
    std::cout << json{{"max_rel_error", worst}, {"tolerance", tol}, {"pass", worst <= tol}}.dump() << '\n';
    if (worst > tol)
        throw NumericalError("gradient audit failed: relative error " + csv::format(worst) + " exceeds " +
                             csv::format(tol));
    return 0;
}

int cmd_optimize(const Common& c) {
    const SystemConfig config = resolve_config(c);
    const PointResult p = run_point(config, "single");
    const fs::path dir = out_dir(c, "optimize_out");

    std::ostringstream trace, phases;
    csv::Writer tw(trace), pw(phases);
    tw.row("side", "iteration", "coverage");
    pw.row("side", "element", "phase");
    json sides = json::object();
    for (Side side : {Side::Transmit, Side::Reflect}) {
        const SideOutcome& o = p[side];
        for (std::size_t i = 0; i < o.trace.size(); ++i)
            tw.row(to_string(side), i, o.trace[i]);
        for (Eigen::Index n = 0; n < o.phases.size(); ++n)
            pw.row(to_string(side), n, o.phases(n));
        sides[to_string(side)] = {{"dimension", o.dimension},
                                  {"design_threshold", o.design_threshold},
                                  {"gamma_initial", o.gamma_initial},
                                  {"gamma_optimized", o.gamma_optimized},
                                  {"coverage_initial", o.coverage_design_initial},
                                  {"coverage_optimized", o.coverage_design_optimized},
                                  {"iterations", o.iterations},
                                  {"stop", to_string(o.stop)}};
    }
    const json result = {{"version", version_string()}, {"config_hash", config_hash(config)}, {"seed", config.seed},
                         {"rounds", p.rounds},          {"flat", p.flat()},                  {"sides", sides}};
    write_text(dir / "trace.csv", trace.str());
    write_text(dir / "phases.csv", phases.str());
    write_text(dir / "result.json", result.dump(2) + "\n");
    std::cout << result.dump() << '\n';
    return 0;
}

int fail(const char* kind, const std::string& message, int code, const std::string& field = "") {
    json err{{"error", kind}, {"message", message}};
    if (!field.empty())
        err["field"] = field;
    std::cerr << err.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"starcov: coverage analysis and passive beamforming for STAR-RIS massive MIMO"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    Common common;
    std::string axis;
    std::vector<std::string> values;
    double step = 1e-6, tol = 1e-5;

    auto* sweep = app.add_subcommand("sweep", "coverage curves along one axis");
    add_common(sweep, common);
    sweep->add_option("--axis", axis, "N, M, m, correlation, protocol or architecture")->required();
    sweep->add_option("--values", values, "comma-separated axis values")->required();

    auto* baseline = app.add_subcommand("baseline", "STAR-RIS against two conventional half-size surfaces");
    add_common(baseline, common);

    auto* validate = app.add_subcommand("validate", "Monte Carlo check of the closed-form SNR");
    add_common(validate, common);

    auto* gradcheck = app.add_subcommand("gradcheck", "analytic vs finite-difference phase gradient");
    add_common(gradcheck, common);
    gradcheck->add_option("--step", step, "central difference step (rad)")->check(CLI::PositiveNumber);
    gradcheck->add_option("--tol", tol, "relative error tolerance")->check(CLI::PositiveNumber);

    auto* optimize = app.add_subcommand("optimize", "alternating optimization of one scenario with trace output");
    add_common(optimize, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 64);
    }

    try {
        if (*sweep)
            return cmd_sweep(common, axis, values);
        if (*baseline)
            return cmd_baseline(common);
        if (*validate)
            return cmd_validate(common);
        if (*gradcheck)
            return cmd_gradcheck(common, step, tol);
        if (*optimize)
            return cmd_optimize(common);
    } catch (const ConfigError& e) {
        return fail("config", e.what(), 2, e.field());
    } catch (const DomainError& e) {
        return fail("domain", e.what(), 3);
    } catch (const DimensionError& e) {
        return fail("dimension", e.what(), 3);
    } catch (const NumericalError& e) {
        return fail("numerical", e.what(), 4);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), 1);
    }
    return fail("usage", "no subcommand", 64);
}
