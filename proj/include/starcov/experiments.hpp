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

#pragma once

#include "starcov/channel.hpp"
#include "starcov/metrics.hpp"
#include "starcov/optimizer.hpp"
#include "starcov/star_ris.hpp"
#include "starcov/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace starcov {

/// Invalid configuration; `field()` names the offending key path (e.g. "geometry.M").
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct LinkConfig {
    double C_db = 26;
    double nu = 2.1;
    double distance_m = 30;

    double gain() const { return path_loss_linear(C_db, distance_m, nu); }
};

enum class Architecture { Star, ConventionalDual };

enum class MsPartition { Block, Interleaved };

enum class ConventionalSplit { HalveVertical, HalveHorizontal };

/// One scenario. Defaults reproduce the reference numerical setup: M = 40, a 10 x 6 surface with
/// lambda/8 elements, UMi-style path loss, ES with a 0.4/0.6 split and Von Mises errors at m = 0.5.
struct SystemConfig {
    std::uint64_t seed = 1;

    int M = 40;
    int N_H = 10;
    int N_V = 6;
    double bs_spacing_wl = 0.5;
    double element_width_wl = 0.125;
    double element_height_wl = 0.125;
    std::optional<double> ris_spacing_wl; // defaults to the element width
    bool common_arrival_angle = false;

    double carrier_hz = 2.5e9;
    LinkConfig link_g{26.0, 2.1, 30.0};
    LinkConfig link_t{26.0, 2.5, 20.0};
    LinkConfig link_r{28.0, 2.2, 20.0};
    double bandwidth_hz = 200e3;
    double tx_power_dbm = 6.0;
    double noise_density_dbm_hz = -174.0;

    ProtocolKind protocol = ProtocolKind::EnergySplitting;
    MsPartition ms_partition = MsPartition::Block;
    std::optional<int> ms_transmit_elements; // defaults to floor(N / 2)
    std::vector<double> amplitude_t{0.4};     // one value for all elements, or N values

    PhaseErrorFamily phase_family = PhaseErrorFamily::VonMises;
    std::optional<double> phase_m = 0.5;
    std::optional<double> phase_kappa;

    int L = 8;
    double threshold_db_min = -10.0;
    double threshold_db_max = 30.0;
    int threshold_count = 40;
    std::optional<double> design_threshold_db; // unset: the SNR at the initial phases

    Architecture architecture = Architecture::Star;
    bool independent_fading = false;
    ConventionalSplit conventional_split = ConventionalSplit::HalveVertical;

    PgaConfig optimizer;

    int N() const { return N_H * N_V; }
    double wavelength() const;
    double sigma0() const;
    std::vector<double> thresholds() const;
    PhaseErrorModel<double> phase_error_model() const;
    VectorXd transmit_amplitudes() const;

    /// Throws ConfigError naming the first violated field.
    void validate() const;
};

/// Thermal noise power -174 + 10 log10(B) in dBm.
double noise_floor_dbm(double bandwidth_hz);

SystemConfig config_from_json_text(const std::string& text);
SystemConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const SystemConfig& config);
/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const SystemConfig& config);

/// Surface, channels and the two per-side optimization problems derived from a config.
struct Scenario {
    Geometry<double> geometry;
    LoSChannel<double> los;
    CorrelationMatrix<double> correlation;
    PhaseErrorModel<double> phase_errors;
    SideProblem<double> t;
    SideProblem<double> r;
    double sigma0 = 0;
};

/// Geometry for `config` with angles drawn from the seed. `surface` selects an independent angle
/// stream (0 for the STAR surface, 1/2 for the two halves of the conventional baseline).
Geometry<double> make_geometry(const SystemConfig& config, int N_H, int N_V, int surface = 0);

/// Builds the STAR scenario. Coverage thresholds in the problems are placeholders until
/// initial phases are known (see prepare_design_thresholds).
Scenario build_scenario(const SystemConfig& config);

/// Conventional baseline: a transmit-only and a reflect-only surface of N/2 elements each.
struct ConventionalScenario {
    Scenario transmit_surface; // only .t is meaningful
    Scenario reflect_surface;  // only .r is meaningful
};

ConventionalScenario build_conventional_scenario(const SystemConfig& config);

struct SideOutcome {
    Side side = Side::Transmit;
    int dimension = 0; // number of optimized phases
    double design_threshold = 0;
    double gamma_initial = 0;
    double gamma_optimized = 0;
    double coverage_design_initial = 0;
    double coverage_design_optimized = 0;
    int iterations = 0;
    StopReason stop = StopReason::MaxIterations;
    std::vector<double> trace;
    VectorXd phases;
    CoverageCurve<double> curve_initial;
    CoverageCurve<double> curve_optimized;
};

struct PointResult {
    std::string axis_value;
    Architecture architecture = Architecture::Star;
    SideOutcome t;
    SideOutcome r;
    int rounds = 0;
    double wall_seconds = 0;

    const SideOutcome& operator[](Side side) const { return side == Side::Transmit ? t : r; }
    /// True when optimization could not change either side's SNR (within 1e-10 relative).
    bool flat() const;
};

/// Builds, optimizes (alternating PGA) and evaluates one config.
PointResult run_point(const SystemConfig& config, const std::string& axis_value = "");

enum class SweepAxis { N, M, m, Correlation, Protocol, Architecture };

SweepAxis parse_axis(const std::string& name);
const char* to_string(SweepAxis axis);

/// Config with one axis value applied ("64" or "8x8" for N; "iid" or a spacing in wavelengths for
/// correlation; "ES"/"MS" for protocol; "star"/"conventional" for architecture).
SystemConfig apply_axis_value(SystemConfig config, SweepAxis axis, const std::string& value);

struct ResultTable {
    SweepAxis axis = SweepAxis::N;
    std::vector<PointResult> points; // ordered as the axis values were given
};

/// Every axis value is an independent job; up to `threads` run concurrently.
ResultTable run_coverage_sweep(const SystemConfig& config, SweepAxis axis, const std::vector<std::string>& values,
                               int threads = 1);

/// STAR (as configured) next to the conventional two-surface baseline, same seeds.
ResultTable conventional_baseline(const SystemConfig& config, int threads = 1);

/// Writes coverage_<axis>_<value>.csv per series, manifest.json, and timings.json. Files are first
/// written under temporary names and renamed once all succeeded.
std::vector<std::filesystem::path> emit_figure_data(const ResultTable& table, const SystemConfig& config,
                                                    const std::filesystem::path& out_dir);

/// Version string recorded in manifests.
const char* version_string();

} // namespace starcov
