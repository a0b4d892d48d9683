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

#include "starcov/experiments.hpp"

#include "starcov/csv.hpp"
#include "starcov/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#ifndef STARCOV_VERSION
#define STARCOV_VERSION "0.0.0-unknown"
#endif

namespace starcov {

using json = nlohmann::json;

namespace {

constexpr double kSpeedOfLight = 299792458.0;

// ------------------------------------------------------------------------------------------
// JSON reading with field paths and unknown-key rejection
// ------------------------------------------------------------------------------------------

class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions() > 0)
            return;
        for (const auto& item : node_.items())
            if (!seen_.count(item.key()))
                throw ConfigError(field(item.key()), "unknown key");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = node_.find(key);
        if (it == node_.end() || it->is_null())
            return nullptr;
        return &*it;
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (const json* v = find(key))
            out = convert<T>(*v, field(key));
    }

    template <typename T>
    void get(const std::string& key, std::optional<T>& out) {
        seen_.insert(key);
        auto it = node_.find(key);
        if (it == node_.end())
            return;
        if (it->is_null()) {
            out.reset();
            return;
        }
        out = convert<T>(*it, field(key));
    }

    template <typename T>
    static T convert(const json& v, const std::string& f) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                throw ConfigError(f, "expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer())
                throw ConfigError(f, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned())
                    return v.get<T>();
                if (v.get<long long>() < 0)
                    throw ConfigError(f, "expected a non-negative integer");
            }
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number())
                throw ConfigError(f, "expected a number");
            return v.get<T>();
        } else {
            if (!v.is_string())
                throw ConfigError(f, "expected a string");
            return v.get<std::string>();
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_link(Reader& parent, const std::string& key, LinkConfig& link) {
    if (const json* node = parent.find(key)) {
        Reader r(*node, parent.field(key));
        r.get("C_db", link.C_db);
        r.get("nu", link.nu);
        r.get("distance_m", link.distance_m);
    }
}

json link_to_json(const LinkConfig& l) { return {{"C_db", l.C_db}, {"nu", l.nu}, {"distance_m", l.distance_m}}; }

template <typename T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

const char* family_name(PhaseErrorFamily f) {
    switch (f) {
    case PhaseErrorFamily::None: return "none";
    case PhaseErrorFamily::Uniform: return "uniform";
    case PhaseErrorFamily::VonMises: return "von_mises";
    }
    return "none";
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(what, "cannot parse '" + text + "' as a number");
    }
    if (used != text.size())
        throw ConfigError(what, "cannot parse '" + text + "' as a number");
    return v;
}

int parse_int(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(what, "cannot parse '" + text + "' as an integer");
    }
    if (used != text.size())
        throw ConfigError(what, "cannot parse '" + text + "' as an integer");
    return v;
}

std::string sanitize(const std::string& value) {
    std::string out;
    for (char c : value)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
    return out.empty() ? "default" : out;
}

PhaseState<double> initial_state(const SystemConfig& config, const SideProblem<double>& problem) {
    if (config.optimizer.init == PhaseInit::Zero)
        return make_phase_state(problem.amplitudes, VectorXd::Zero(problem.N()).eval(), problem.side);
    auto rng = make_engine(config.seed, Stream::InitPhases, problem.side == Side::Transmit ? 0 : 1);
    return random_phase_state(problem.amplitudes, problem.side, rng);
}

void set_design_threshold(const SystemConfig& config, SideProblem<double>& problem, const PhaseState<double>& init) {
    double T = 1.0;
    if (config.design_threshold_db) {
        T = std::pow(10.0, *config.design_threshold_db / 10.0);
    } else {
        const double g0 = evaluate(problem, project_phases(init.s, problem.amplitudes)).snr.gamma;
        if (g0 > 0)
            T = g0;
    }
    problem.params = CoverageParams<double>::make(T, config.L);
}

SideOutcome summarize(const SystemConfig& config, const SideProblem<double>& problem, const PhaseState<double>& init,
                      const PgaResult<double>& result, int iterations) {
    SideOutcome o;
    o.side = problem.side;
    o.dimension = static_cast<int>(problem.N());
    o.design_threshold = problem.params.T;
    const auto ev0 = evaluate(problem, project_phases(init.s, problem.amplitudes));
    o.gamma_initial = ev0.snr.gamma;
    o.coverage_design_initial = ev0.coverage;
    const auto ev1 = evaluate(problem, result.state.s);
    o.gamma_optimized = ev1.snr.gamma;
    o.coverage_design_optimized = ev1.coverage;
    o.iterations = iterations;
    o.stop = result.reason;
    o.trace = result.trace;
    o.phases = result.state.phases();
    const auto grid = config.thresholds();
    o.curve_initial = coverage_curve(o.gamma_initial, grid, config.L, problem.side);
    o.curve_optimized = coverage_curve(o.gamma_optimized, grid, config.L, problem.side);
    return o;
}

template <typename Job>
void parallel_for(std::size_t count, int threads, Job&& job) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(count);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
    os.close();
    if (!os)
        throw std::runtime_error("failed writing " + path.string());
}

} // namespace

// ------------------------------------------------------------------------------------------
// SystemConfig
// ------------------------------------------------------------------------------------------

double noise_floor_dbm(double bandwidth_hz) {
    if (!(bandwidth_hz > 0))
        throw DomainError("noise_floor_dbm: bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

double SystemConfig::wavelength() const { return kSpeedOfLight / carrier_hz; }

double SystemConfig::sigma0() const {
    const double noise_dbm = noise_density_dbm_hz + 10.0 * std::log10(bandwidth_hz);
    return std::pow(10.0, (noise_dbm - tx_power_dbm) / 10.0);
}

std::vector<double> SystemConfig::thresholds() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(threshold_count));
    for (int i = 0; i < threshold_count; ++i) {
        const double db = threshold_count == 1
                              ? threshold_db_min
                              : threshold_db_min + (threshold_db_max - threshold_db_min) * i / (threshold_count - 1);
        out.push_back(std::pow(10.0, db / 10.0));
    }
    return out;
}

PhaseErrorModel<double> SystemConfig::phase_error_model() const {
    switch (phase_family) {
    case PhaseErrorFamily::None: return PhaseErrorModel<double>::none();
    case PhaseErrorFamily::Uniform: return PhaseErrorModel<double>::uniform();
    case PhaseErrorFamily::VonMises:
        if (phase_kappa)
            return PhaseErrorModel<double>::von_mises(*phase_kappa);
        return PhaseErrorModel<double>::von_mises_from_cf(phase_m.value_or(0.5));
    }
    return PhaseErrorModel<double>::none();
}

VectorXd SystemConfig::transmit_amplitudes() const {
    const int n = N();
    if (protocol == ProtocolKind::ModeSwitching) {
        const int n_t = ms_transmit_elements.value_or(n / 2);
        const Protocol p = ms_partition == MsPartition::Block ? Protocol::mode_switching_block(n, n_t)
                                                              : Protocol::mode_switching_interleaved(n, n_t);
        return starcov::transmit_amplitudes<double>(p, VectorXd());
    }
    if (amplitude_t.size() == 1)
        return VectorXd::Constant(n, amplitude_t.front());
    return Eigen::Map<const VectorXd>(amplitude_t.data(), static_cast<Eigen::Index>(amplitude_t.size()));
}

void SystemConfig::validate() const {
    auto require = [](bool ok, const char* field, const std::string& msg) {
        if (!ok)
            throw ConfigError(field, msg);
    };
    require(M >= 1, "geometry.M", "must be >= 1");
    require(N_H >= 1, "geometry.N_H", "must be >= 1");
    require(N_V >= 1, "geometry.N_V", "must be >= 1");
    require(bs_spacing_wl > 0, "geometry.bs_spacing_wavelengths", "must be > 0");
    require(element_width_wl > 0, "geometry.element_width_wavelengths", "must be > 0");
    require(element_height_wl > 0, "geometry.element_height_wavelengths", "must be > 0");
    require(!ris_spacing_wl || *ris_spacing_wl > 0, "geometry.ris_spacing_wavelengths", "must be > 0");
    require(carrier_hz > 0, "carrier_hz", "must be > 0");
    for (auto [name, link] : {std::pair{"links.g", &link_g}, {"links.t", &link_t}, {"links.r", &link_r}}) {
        if (!(link->distance_m > 0))
            throw ConfigError(std::string(name) + ".distance_m", "must be > 0");
        if (!std::isfinite(link->C_db) || !std::isfinite(link->nu))
            throw ConfigError(name, "C_db and nu must be finite");
    }
    require(bandwidth_hz > 0, "bandwidth_hz", "must be > 0");
    require(std::isfinite(tx_power_dbm), "tx_power_dbm", "must be finite");
    require(std::isfinite(noise_density_dbm_hz), "noise_density_dbm_per_hz", "must be finite");
    require(amplitude_t.size() == 1 || amplitude_t.size() == static_cast<std::size_t>(N()), "amplitude_t",
            "must be a scalar or have N = " + std::to_string(N()) + " entries");
    for (double a : amplitude_t)
        require(a >= 0.0 && a <= 1.0, "amplitude_t", "values must lie in [0, 1]");
    if (ms_transmit_elements)
        require(*ms_transmit_elements >= 0 && *ms_transmit_elements <= N(), "protocol.ms_transmit_elements",
                "must lie in [0, N]");
    if (phase_family == PhaseErrorFamily::VonMises) {
        require(!phase_m || (*phase_m >= 0.0 && *phase_m < 1.0), "phase_error.m", "must lie in [0, 1)");
        require(!phase_kappa || *phase_kappa >= 0.0, "phase_error.kappa", "must be >= 0");
    }
    require(L >= 1, "coverage.L", "must be >= 1");
    require(threshold_count >= 1, "coverage.threshold_count", "must be >= 1");
    require(std::isfinite(threshold_db_min) && std::isfinite(threshold_db_max) && threshold_db_min <= threshold_db_max,
            "coverage.threshold_db_max", "threshold grid must be finite and ascending");
    try {
        optimizer.validate();
    } catch (const std::exception& e) {
        throw ConfigError("optimizer", e.what());
    }
}

SystemConfig config_from_json_text(const std::string& text) {
    SystemConfig c;
    const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); });
    if (blank) {
        c.validate();
        return c;
    }
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<parse>", e.what());
    }
    {
        Reader r(root, "");
        r.get("seed", c.seed);
        if (const json* g = r.find("geometry")) {
            Reader gr(*g, "geometry");
            gr.get("M", c.M);
            gr.get("N_H", c.N_H);
            gr.get("N_V", c.N_V);
            std::optional<int> declared;
            gr.get("N", declared);
            gr.get("bs_spacing_wavelengths", c.bs_spacing_wl);
            gr.get("element_width_wavelengths", c.element_width_wl);
            gr.get("element_height_wavelengths", c.element_height_wl);
            gr.get("ris_spacing_wavelengths", c.ris_spacing_wl);
            gr.get("common_arrival_angle", c.common_arrival_angle);
            if (declared && *declared != c.N_H * c.N_V)
                throw ConfigError("geometry.N", "declared N = " + std::to_string(*declared) + " but N_H * N_V = " +
                                                    std::to_string(c.N_H * c.N_V));
        }
        r.get("carrier_hz", c.carrier_hz);
        if (const json* links = r.find("links")) {
            Reader lr(*links, "links");
            read_link(lr, "g", c.link_g);
            read_link(lr, "t", c.link_t);
            read_link(lr, "r", c.link_r);
        }
        r.get("bandwidth_hz", c.bandwidth_hz);
        r.get("tx_power_dbm", c.tx_power_dbm);
        r.get("noise_density_dbm_per_hz", c.noise_density_dbm_hz);
        if (const json* p = r.find("protocol")) {
            Reader pr(*p, "protocol");
            std::string kind = "ES";
            pr.get("kind", kind);
            if (lower(kind) == "es")
                c.protocol = ProtocolKind::EnergySplitting;
            else if (lower(kind) == "ms")
                c.protocol = ProtocolKind::ModeSwitching;
            else
                throw ConfigError("protocol.kind", "expected ES or MS, got '" + kind + "'");
            std::string partition = "block";
            pr.get("ms_partition", partition);
            if (lower(partition) == "block")
                c.ms_partition = MsPartition::Block;
            else if (lower(partition) == "interleaved")
                c.ms_partition = MsPartition::Interleaved;
            else
                throw ConfigError("protocol.ms_partition", "expected block or interleaved");
            pr.get("ms_transmit_elements", c.ms_transmit_elements);
        }
        if (const json* a = r.find("amplitude_t")) {
            if (a->is_array()) {
                c.amplitude_t.clear();
                for (const auto& v : *a)
                    c.amplitude_t.push_back(Reader::convert<double>(v, "amplitude_t"));
            } else {
                c.amplitude_t = {Reader::convert<double>(*a, "amplitude_t")};
            }
        }
        if (const json* pe = r.find("phase_error")) {
            Reader er(*pe, "phase_error");
            std::string family = "von_mises";
            er.get("family", family);
            family = lower(family);
            if (family == "none")
                c.phase_family = PhaseErrorFamily::None;
            else if (family == "uniform")
                c.phase_family = PhaseErrorFamily::Uniform;
            else if (family == "von_mises" || family == "vonmises")
                c.phase_family = PhaseErrorFamily::VonMises;
            else
                throw ConfigError("phase_error.family", "expected none, uniform or von_mises");
            std::optional<double> m, kappa;
            er.get("m", m);
            er.get("kappa", kappa);
            if (m && kappa)
                throw ConfigError("phase_error", "give either m or kappa, not both");
            if (kappa) {
                c.phase_kappa = kappa;
                c.phase_m.reset();
            } else if (m) {
                c.phase_m = m;
            }
        }
        if (const json* cov = r.find("coverage")) {
            Reader cr(*cov, "coverage");
            cr.get("L", c.L);
            cr.get("threshold_db_min", c.threshold_db_min);
            cr.get("threshold_db_max", c.threshold_db_max);
            cr.get("threshold_count", c.threshold_count);
            cr.get("design_threshold_db", c.design_threshold_db);
        }
        if (const json* a = r.find("architecture")) {
            const std::string arch = lower(Reader::convert<std::string>(*a, "architecture"));
            if (arch == "star")
                c.architecture = Architecture::Star;
            else if (arch == "conventional")
                c.architecture = Architecture::ConventionalDual;
            else
                throw ConfigError("architecture", "expected star or conventional");
        }
        r.get("independent_fading", c.independent_fading);
        if (const json* conv = r.find("conventional")) {
            Reader vr(*conv, "conventional");
            std::string split = "halve_nv";
            vr.get("split", split);
            if (split == "halve_nv")
                c.conventional_split = ConventionalSplit::HalveVertical;
            else if (split == "halve_nh")
                c.conventional_split = ConventionalSplit::HalveHorizontal;
            else
                throw ConfigError("conventional.split", "expected halve_nv or halve_nh");
        }
        if (const json* o = r.find("optimizer")) {
            Reader orr(*o, "optimizer");
            PgaConfig& p = c.optimizer;
            orr.get("max_iters", p.max_iters);
            orr.get("grad_tol", p.grad_tol);
            orr.get("step0", p.step0);
            orr.get("shrink", p.shrink);
            orr.get("c_ls", p.c_ls);
            orr.get("max_shrinks", p.max_shrinks);
            orr.get("step_growth", p.step_growth);
            orr.get("alt_rounds", p.alt_rounds);
            orr.get("objective_tol", p.objective_tol);
            std::string init = "random";
            orr.get("init", init);
            if (init == "random")
                p.init = PhaseInit::Random;
            else if (init == "zero")
                p.init = PhaseInit::Zero;
            else
                throw ConfigError("optimizer.init", "expected random or zero");
        }
    }
    c.validate();
    return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("<file>", "cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json(const SystemConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["geometry"] = {{"M", c.M},
                     {"N_H", c.N_H},
                     {"N_V", c.N_V},
                     {"N", c.N()},
                     {"bs_spacing_wavelengths", c.bs_spacing_wl},
                     {"element_width_wavelengths", c.element_width_wl},
                     {"element_height_wavelengths", c.element_height_wl},
                     {"ris_spacing_wavelengths", opt_json(c.ris_spacing_wl)},
                     {"common_arrival_angle", c.common_arrival_angle}};
    j["carrier_hz"] = c.carrier_hz;
    j["links"] = {{"g", link_to_json(c.link_g)}, {"t", link_to_json(c.link_t)}, {"r", link_to_json(c.link_r)}};
    j["bandwidth_hz"] = c.bandwidth_hz;
    j["tx_power_dbm"] = c.tx_power_dbm;
    j["noise_density_dbm_per_hz"] = c.noise_density_dbm_hz;
    j["protocol"] = {{"kind", c.protocol == ProtocolKind::EnergySplitting ? "ES" : "MS"},
                     {"ms_partition", c.ms_partition == MsPartition::Block ? "block" : "interleaved"},
                     {"ms_transmit_elements", opt_json(c.ms_transmit_elements)}};
    j["amplitude_t"] = c.amplitude_t.size() == 1 ? json(c.amplitude_t.front()) : json(c.amplitude_t);
    j["phase_error"] = {{"family", family_name(c.phase_family)}};
    if (c.phase_family == PhaseErrorFamily::VonMises) {
        if (c.phase_kappa)
            j["phase_error"]["kappa"] = *c.phase_kappa;
        else
            j["phase_error"]["m"] = c.phase_m.value_or(0.5);
    }
    j["coverage"] = {{"L", c.L},
                     {"threshold_db_min", c.threshold_db_min},
                     {"threshold_db_max", c.threshold_db_max},
                     {"threshold_count", c.threshold_count},
                     {"design_threshold_db", opt_json(c.design_threshold_db)}};
    j["architecture"] = c.architecture == Architecture::Star ? "star" : "conventional";
    j["independent_fading"] = c.independent_fading;
    j["conventional"] = {{"split", c.conventional_split == ConventionalSplit::HalveVertical ? "halve_nv" : "halve_nh"}};
    const PgaConfig& p = c.optimizer;
    j["optimizer"] = {{"max_iters", p.max_iters},     {"grad_tol", p.grad_tol},
                      {"step0", p.step0},             {"shrink", p.shrink},
                      {"c_ls", p.c_ls},               {"max_shrinks", p.max_shrinks},
                      {"step_growth", p.step_growth}, {"alt_rounds", p.alt_rounds},
                      {"objective_tol", p.objective_tol}, {"init", p.init == PhaseInit::Random ? "random" : "zero"}};
    return j.dump(2);
}

std::string config_hash(const SystemConfig& config) {
    const std::string text = config_to_json(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------------------------------------------------------------------
// Scenario construction
// ------------------------------------------------------------------------------------------

Geometry<double> make_geometry(const SystemConfig& c, int N_H, int N_V, int surface) {
    Geometry<double> g;
    const double lambda = c.wavelength();
    g.M = c.M;
    g.N_H = N_H;
    g.N_V = N_V;
    g.lambda = lambda;
    g.d_bs = c.bs_spacing_wl * lambda;
    g.d_h = c.element_width_wl * lambda;
    g.d_v = c.element_height_wl * lambda;
    g.d_ris = c.ris_spacing_wl.value_or(c.element_width_wl) * lambda;

    const int N = N_H * N_V;
    const int n_arrival = c.common_arrival_angle ? 1 : N;
    auto rng = make_engine(c.seed, Stream::Angles, static_cast<std::uint64_t>(surface));
    auto elevation = [&](int n) {
        VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v(i) = kPi<double> * (uniform01(rng) - 0.5);
        return v;
    };
    auto azimuth = [&](int n) {
        VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v(i) = kPi<double> * (2.0 * uniform01(rng) - 1.0);
        return v;
    };
    g.departure_elevation = elevation(N);
    g.departure_azimuth = azimuth(N);
    g.arrival_elevation = elevation(n_arrival);
    g.arrival_azimuth = azimuth(n_arrival);
    return g;
}

namespace {

Scenario build_surface(const SystemConfig& c, int N_H, int N_V, int surface, const VectorXd& beta_t) {
    Scenario sc;
    sc.geometry = make_geometry(c, N_H, N_V, surface);
    sc.los = build_los_channel(sc.geometry, c.link_g.gain());
    const int N = N_H * N_V;
    sc.correlation = c.independent_fading
                         ? make_correlation<double>(MatrixXd::Identity(N, N))
                         : build_ris_correlation(N_H, N_V, sc.geometry.d_h, sc.geometry.d_v, sc.geometry.lambda);
    sc.phase_errors = c.phase_error_model();
    sc.sigma0 = c.sigma0();
    const MatrixXd R_tilde = effective_ris_correlation(sc.correlation.R, sc.phase_errors.m);
    const auto placeholder = CoverageParams<double>::make(1.0, c.L);
    sc.t = {Side::Transmit, sc.los.G, R_tilde, beta_t, c.link_t.gain(), sc.sigma0, placeholder};
    sc.r = {Side::Reflect, sc.los.G, R_tilde, (VectorXd::Ones(N) - beta_t).eval(), c.link_r.gain(), sc.sigma0,
            placeholder};
    return sc;
}

} // namespace

Scenario build_scenario(const SystemConfig& config) {
    config.validate();
    return build_surface(config, config.N_H, config.N_V, 0, config.transmit_amplitudes());
}

ConventionalScenario build_conventional_scenario(const SystemConfig& config) {
    config.validate();
    if (config.N() % 2 != 0)
        throw DomainError("conventional baseline requires an even number of elements, got N = " +
                          std::to_string(config.N()));
    int nh = config.N_H, nv = config.N_V;
    if (config.conventional_split == ConventionalSplit::HalveVertical) {
        if (nv % 2 != 0)
            throw DomainError("conventional baseline: N_V = " + std::to_string(nv) + " cannot be halved");
        nv /= 2;
    } else {
        if (nh % 2 != 0)
            throw DomainError("conventional baseline: N_H = " + std::to_string(nh) + " cannot be halved");
        nh /= 2;
    }
    const int half = nh * nv;
    ConventionalScenario out;
    out.transmit_surface = build_surface(config, nh, nv, 1, VectorXd::Ones(half));
    out.reflect_surface = build_surface(config, nh, nv, 2, VectorXd::Zero(half));
    return out;
}

// ------------------------------------------------------------------------------------------
// Experiment drivers
// ------------------------------------------------------------------------------------------

bool PointResult::flat() const {
    auto same = [](const SideOutcome& o) {
        return std::abs(o.gamma_optimized - o.gamma_initial) <= 1e-10 * std::max(std::abs(o.gamma_initial), 1e-300);
    };
    return same(t) && same(r);
}

PointResult run_point(const SystemConfig& config, const std::string& axis_value) {
    const auto start = std::chrono::steady_clock::now();
    SideProblem<double> t_problem, r_problem;
    if (config.architecture == Architecture::Star) {
        Scenario sc = build_scenario(config);
        t_problem = std::move(sc.t);
        r_problem = std::move(sc.r);
    } else {
        ConventionalScenario cs = build_conventional_scenario(config);
        t_problem = std::move(cs.transmit_surface.t);
        r_problem = std::move(cs.reflect_surface.r);
    }
    const PhaseState<double> t_init = initial_state(config, t_problem);
    const PhaseState<double> r_init = initial_state(config, r_problem);
    set_design_threshold(config, t_problem, t_init);
    set_design_threshold(config, r_problem, r_init);

    const auto res = alternating_optimize(t_problem, r_problem, t_init, r_init, config.optimizer);

    PointResult out;
    out.axis_value = axis_value;
    out.architecture = config.architecture;
    out.t = summarize(config, t_problem, t_init, res.t, res.t_iterations);
    out.r = summarize(config, r_problem, r_init, res.r, res.r_iterations);
    out.rounds = res.rounds;
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

SweepAxis parse_axis(const std::string& name) {
    const std::string n = lower(name);
    if (n == "n")
        return SweepAxis::N;
    if (n == "m" && name == "M")
        return SweepAxis::M;
    if (n == "m")
        return SweepAxis::m;
    if (n == "correlation")
        return SweepAxis::Correlation;
    if (n == "protocol")
        return SweepAxis::Protocol;
    if (n == "architecture")
        return SweepAxis::Architecture;
    throw ConfigError("axis", "unknown sweep axis '" + name + "' (expected N, M, m, correlation, protocol)");
}

const char* to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::N: return "N";
    case SweepAxis::M: return "M";
    case SweepAxis::m: return "m";
    case SweepAxis::Correlation: return "correlation";
    case SweepAxis::Protocol: return "protocol";
    case SweepAxis::Architecture: return "architecture";
    }
    return "?";
}

SystemConfig apply_axis_value(SystemConfig c, SweepAxis axis, const std::string& value) {
    switch (axis) {
    case SweepAxis::N: {
        const auto x = value.find_first_of("xX");
        if (x != std::string::npos) {
            c.N_H = parse_int(value.substr(0, x), "axis.N");
            c.N_V = parse_int(value.substr(x + 1), "axis.N");
        } else {
            const int n = parse_int(value, "axis.N");
            if (n < 1)
                throw ConfigError("axis.N", "must be >= 1");
            int nh = n;
            for (int d = 1; d <= n; ++d)
                if (n % d == 0 && static_cast<double>(d) * d >= n) {
                    nh = d;
                    break;
                }
            c.N_H = nh;
            c.N_V = n / nh;
        }
        break;
    }
    case SweepAxis::M:
        c.M = parse_int(value, "axis.M");
        break;
    case SweepAxis::m:
        c.phase_family = PhaseErrorFamily::VonMises;
        c.phase_m = parse_double(value, "axis.m");
        c.phase_kappa.reset();
        break;
    case SweepAxis::Correlation:
        if (lower(value) == "iid") {
            c.independent_fading = true;
        } else {
            const double spacing = parse_double(value, "axis.correlation");
            c.element_width_wl = spacing;
            c.element_height_wl = spacing;
            c.independent_fading = false;
        }
        break;
    case SweepAxis::Protocol:
        if (lower(value) == "es")
            c.protocol = ProtocolKind::EnergySplitting;
        else if (lower(value) == "ms")
            c.protocol = ProtocolKind::ModeSwitching;
        else
            throw ConfigError("axis.protocol", "expected ES or MS, got '" + value + "'");
        break;
    case SweepAxis::Architecture:
        if (lower(value) == "star")
            c.architecture = Architecture::Star;
        else if (lower(value) == "conventional")
            c.architecture = Architecture::ConventionalDual;
        else
            throw ConfigError("axis.architecture", "expected star or conventional");
        break;
    }
    c.validate();
    return c;
}

ResultTable run_coverage_sweep(const SystemConfig& config, SweepAxis axis, const std::vector<std::string>& values,
                               int threads) {
    if (values.empty())
        throw DomainError("run_coverage_sweep: empty sweep axis");
    std::vector<SystemConfig> configs;
    configs.reserve(values.size());
    for (const auto& v : values)
        configs.push_back(apply_axis_value(config, axis, v));
    ResultTable table;
    table.axis = axis;
    table.points.resize(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) { table.points[i] = run_point(configs[i], values[i]); });
    return table;
}

ResultTable conventional_baseline(const SystemConfig& config, int threads) {
    if (config.N() % 2 != 0)
        throw DomainError("conventional baseline requires an even number of elements, got N = " +
                          std::to_string(config.N()));
    SystemConfig star = config;
    star.architecture = Architecture::Star;
    return run_coverage_sweep(star, SweepAxis::Architecture, {"star", "conventional"}, threads);
}

const char* version_string() { return STARCOV_VERSION; }

std::vector<std::filesystem::path> emit_figure_data(const ResultTable& table, const SystemConfig& config,
                                                    const std::filesystem::path& out_dir) {
    if (table.points.empty())
        throw DomainError("emit_figure_data: empty result table");
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    json manifest;
    manifest["tool"] = "starcov";
    manifest["version"] = version_string();
    manifest["axis"] = to_string(table.axis);
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = config.seed;
    manifest["points"] = json::array();
    json timings;
    timings["points"] = json::array();

    for (const PointResult& p : table.points) {
        const std::string name = std::string("coverage_") + to_string(table.axis) + "_" + sanitize(p.axis_value) + ".csv";
        std::ostringstream os;
        csv::Writer w(os);
        w.row("axis", "axis_value", "architecture", "side", "threshold_db", "threshold", "coverage", "gamma",
              "coverage_unoptimized", "gamma_unoptimized", "iterations", "dimension");
        for (Side side : {Side::Transmit, Side::Reflect}) {
            const SideOutcome& o = p[side];
            for (std::size_t i = 0; i < o.curve_optimized.thresholds.size(); ++i) {
                const double T = o.curve_optimized.thresholds[i];
                w.row(to_string(table.axis), p.axis_value,
                      p.architecture == Architecture::Star ? "star" : "conventional", to_string(side),
                      10.0 * std::log10(T), T, o.curve_optimized.values[i], o.gamma_optimized,
                      o.curve_initial.values[i], o.gamma_initial, o.iterations, o.dimension);
            }
        }
        files.emplace_back(out_dir / name, os.str());
        manifest["points"].push_back({{"axis_value", p.axis_value},
                                      {"file", name},
                                      {"flat", p.flat()},
                                      {"rounds", p.rounds},
                                      {"gamma_t", p.t.gamma_optimized},
                                      {"gamma_r", p.r.gamma_optimized},
                                      {"stop_t", to_string(p.t.stop)},
                                      {"stop_r", to_string(p.r.stop)}});
        timings["points"].push_back({{"axis_value", p.axis_value}, {"wall_seconds", p.wall_seconds}});
    }
    manifest["config"] = json::parse(config_to_json(config));
    files.emplace_back(out_dir / "manifest.json", manifest.dump(2) + "\n");
    files.emplace_back(out_dir / "timings.json", timings.dump(2) + "\n");

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& [path, content] : files) {
        auto tmp = path;
        tmp += ".tmp";
        write_file(tmp, content);
    }
    for (const auto& [path, content] : files) {
        auto tmp = path;
        tmp += ".tmp";
        std::filesystem::rename(tmp, path);
        written.push_back(path);
    }
    return written;
}

} // namespace starcov
