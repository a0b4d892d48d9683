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

#include "starcov/optimizer.hpp"
#include "starcov/star_ris.hpp"
#include "starcov/types.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace starcov::mc {

/// Inputs of one Monte Carlo SNR experiment for a single side.
struct SnrScenario {
    CMatrixXd G;            // M x N
    MatrixXd R;             // N x N surface correlation (unit diagonal)
    MatrixXd R_half;        // R_half R_half^T = R
    CVectorXd pbm;          // diagonal of Phi_k
    double beta_k = 1;
    double sigma0 = 0;
    PhaseErrorModel<double> phase_errors = PhaseErrorModel<double>::none();
};

/// Closed-form cascaded covariance for the scenario, beta_k G Phi (m^2 R + (1-m^2) I) Phi^H G^H.
CMatrixXd closed_form_covariance(const SnrScenario& scenario);

struct McOptions {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    bool estimate_covariance = false;
};

/// Monte Carlo estimates of the expectations in the use-and-then-forget SNR with MRT precoding,
/// next to their closed-form counterparts.
struct McReport {
    std::uint64_t trials = 0;
    double est_tr = 0;     // E||hbar||^2
    double est_fourth = 0; // E||hbar||^4
    double cf_tr = 0;      // tr(Rbar)
    double cf_fourth = 0;  // tr^2(Rbar) + tr(Rbar^2)
    double snr_mc = 0;
    double snr_cf = 0;
    double rel_err_tr = 0;
    double rel_err_fourth = 0;
    double rel_err_snr = 0;
    double se_tr = 0;
    double se_fourth = 0;
    double se_snr = 0; // batch-means standard error over fixed trial blocks
    bool degenerate = false; // closed-form trace is zero
    CMatrixXd est_covariance; // E[hbar hbar^H], only when requested
    CMatrixXd cf_covariance;
};

/// Trial blocks have a fixed size so that merging is independent of the thread count.
inline constexpr std::uint64_t kBlockSize = 2048;

McReport estimate_snr_terms(const SnrScenario& scenario, const McOptions& options);

/// E[Phi_e R Phi_e^H] over phase-error draws Phi_e = diag(exp(j e)).
CMatrixXd estimate_deflated_correlation(const MatrixXd& R, const PhaseErrorModel<double>& model,
                                        std::uint64_t draws, std::uint64_t seed);

struct ValidationCase {
    std::string id;
    SnrScenario scenario;
};

struct ValidationRow {
    std::string scenario_id;
    std::string quantity;
    double estimate = 0;
    double closed_form = 0;
    double rel_error = 0;
    double std_error = 0;
    std::uint64_t trials = 0;
};

/// Runs estimate_snr_terms per case; case i uses seed `options.seed + i`.
std::vector<ValidationRow> validate_closed_form(const std::vector<ValidationCase>& cases, const McOptions& options);

/// Columns: scenario_id,quantity,estimate,closed_form,rel_error,std_error,trials.
void write_validation_csv(const std::vector<ValidationRow>& rows, std::ostream& os);

/// Central differences (P(phi_n + h) - P(phi_n - h)) / 2h of the coverage objective.
VectorXd finite_difference_gradient(const SideProblem<double>& problem, const VectorXd& phases, double step);

} // namespace starcov::mc
