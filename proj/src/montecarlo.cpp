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

#include "starcov/montecarlo.hpp"

#include "starcov/channel.hpp"
#include "starcov/csv.hpp"
#include "starcov/metrics.hpp"
#include "starcov/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace starcov::mc {

namespace {

// Running mean / centered second moment; merged with Chan et al.'s pairwise update.
struct Moments {
    double n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x) {
        n += 1;
        const double delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.n == 0)
            return;
        const double total = n + o.n;
        const double delta = o.mean - mean;
        mean += delta * o.n / total;
        m2 += o.m2 + delta * delta * n * o.n / total;
        n = total;
    }

    double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
};

struct Block {
    Moments power;  // ||hbar||^2
    Moments fourth; // ||hbar||^4
    CMatrixXd covariance;
};

double relative_error(double estimate, double reference) {
    if (reference == 0.0)
        return estimate == 0.0 ? 0.0 : std::abs(estimate);
    return std::abs(estimate - reference) / std::abs(reference);
}

double mc_snr(double e2, double var, double sigma0) {
    if (!(e2 > 0))
        return 0.0;
    // |E[h^H f]|^2 = E||h||^2 and E|h^H f|^2 - |E h^H f|^2 = Var(||h||^2) / E||h||^2.
    return e2 / (var / e2 + sigma0);
}

template <typename Job>
void run_blocks(std::size_t blocks, int threads, Job&& job) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(blocks)));
    if (threads == 1) {
        for (std::size_t b = 0; b < blocks; ++b)
            job(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t b = next++; b < blocks; b = next++)
                job(b);
        });
    for (auto& th : pool)
        th.join();
}

} // namespace

CMatrixXd closed_form_covariance(const SnrScenario& sc) {
    const MatrixXd R_tilde = effective_ris_correlation(sc.R, sc.phase_errors.m);
    return cascaded_covariance_matrix(sc.G, sc.pbm, R_tilde, sc.beta_k);
}

McReport estimate_snr_terms(const SnrScenario& sc, const McOptions& options) {
    if (options.trials == 0)
        throw DomainError("estimate_snr_terms: trials must be >= 1");
    const Eigen::Index N = sc.G.cols();
    const Eigen::Index M = sc.G.rows();
    if (sc.R_half.rows() != N || sc.R_half.cols() != N || sc.pbm.size() != N || sc.R.rows() != N)
        throw DimensionError("estimate_snr_terms: scenario dimensions are not conformable");

    const std::uint64_t n_blocks = (options.trials + kBlockSize - 1) / kBlockSize;
    std::vector<Block> blocks(n_blocks);
    run_blocks(n_blocks, options.threads, [&](std::size_t b) {
        Block& blk = blocks[b];
        if (options.estimate_covariance)
            blk.covariance = CMatrixXd::Zero(M, M);
        const std::uint64_t begin = b * kBlockSize;
        const std::uint64_t end = std::min(options.trials, begin + kBlockSize);
        CVectorXd cascade(N);
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            std::mt19937_64 rng = make_engine(options.seed, Stream::MonteCarlo, trial);
            NormalSource normal;
            const CVectorXd h = sample_ue_channel(sc.R_half, sc.beta_k, rng, normal);
            const VectorXd err = sample_phase_errors(sc.phase_errors, N, rng);
            for (Eigen::Index n = 0; n < N; ++n)
                cascade(n) = sc.pbm(n) * std::polar(1.0, err(n)) * h(n);
            const CVectorXd hbar = sc.G * cascade;
            const double p = hbar.squaredNorm();
            blk.power.add(p);
            blk.fourth.add(p * p);
            if (options.estimate_covariance)
                blk.covariance.noalias() += hbar * hbar.adjoint();
        }
    });

    Moments power, fourth;
    Moments block_snr;
    CMatrixXd cov_sum = options.estimate_covariance ? CMatrixXd::Zero(M, M) : CMatrixXd();
    for (const Block& blk : blocks) {
        power.merge(blk.power);
        fourth.merge(blk.fourth);
        const double var_b = blk.power.n > 0 ? blk.power.m2 / blk.power.n : 0.0;
        block_snr.add(mc_snr(blk.power.mean, var_b, sc.sigma0));
        if (options.estimate_covariance)
            cov_sum += blk.covariance;
    }

    McReport rep;
    rep.trials = options.trials;
    rep.est_tr = power.mean;
    rep.est_fourth = fourth.mean;
    rep.se_tr = std::sqrt(power.variance() / power.n);
    rep.se_fourth = std::sqrt(fourth.variance() / fourth.n);
    rep.snr_mc = mc_snr(power.mean, power.m2 / power.n, sc.sigma0);
    rep.se_snr = n_blocks > 1 ? std::sqrt(block_snr.variance() / block_snr.n) : 0.0;

    rep.cf_covariance = closed_form_covariance(sc);
    const auto snr = closed_form_snr(rep.cf_covariance, sc.sigma0);
    rep.cf_tr = snr.trace;
    rep.cf_fourth = snr.trace * snr.trace + snr.trace_sq;
    rep.snr_cf = snr.gamma;
    rep.degenerate = !(snr.trace > 0);
    rep.rel_err_tr = relative_error(rep.est_tr, rep.cf_tr);
    rep.rel_err_fourth = relative_error(rep.est_fourth, rep.cf_fourth);
    rep.rel_err_snr = relative_error(rep.snr_mc, rep.snr_cf);
    if (options.estimate_covariance)
        rep.est_covariance = cov_sum / static_cast<double>(options.trials);
    return rep;
}

CMatrixXd estimate_deflated_correlation(const MatrixXd& R, const PhaseErrorModel<double>& model, std::uint64_t draws,
                                        std::uint64_t seed) {
    if (draws == 0)
        throw DomainError("estimate_deflated_correlation: draws must be >= 1");
    const Eigen::Index N = R.rows();
    CMatrixXd acc = CMatrixXd::Zero(N, N);
    CVectorXd phasor(N);
    for (std::uint64_t d = 0; d < draws; ++d) {
        std::mt19937_64 rng = make_engine(seed, Stream::MonteCarlo, d);
        const VectorXd e = sample_phase_errors(model, N, rng);
        for (Eigen::Index n = 0; n < N; ++n)
            phasor(n) = std::polar(1.0, e(n));
        acc.noalias() += phasor.asDiagonal() * R.cast<Complex<double>>() * phasor.conjugate().asDiagonal();
    }
    return acc / static_cast<double>(draws);
}

std::vector<ValidationRow> validate_closed_form(const std::vector<ValidationCase>& cases, const McOptions& options) {
    if (cases.empty())
        throw DomainError("validate_closed_form: empty sweep");
    std::vector<ValidationRow> rows;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        McOptions opt = options;
        opt.seed = options.seed + i;
        const McReport rep = estimate_snr_terms(cases[i].scenario, opt);
        const std::string& id = cases[i].id;
        rows.push_back({id, "second_moment", rep.est_tr, rep.cf_tr, rep.rel_err_tr, rep.se_tr, rep.trials});
        rows.push_back({id, "fourth_moment", rep.est_fourth, rep.cf_fourth, rep.rel_err_fourth, rep.se_fourth, rep.trials});
        rows.push_back({id, "snr", rep.snr_mc, rep.snr_cf, rep.rel_err_snr, rep.se_snr, rep.trials});
        if (rep.degenerate)
            rows.push_back({id, "degenerate", 1.0, 1.0, 0.0, 0.0, rep.trials});
    }
    return rows;
}

void write_validation_csv(const std::vector<ValidationRow>& rows, std::ostream& os) {
    csv::Writer w(os);
    w.row("scenario_id", "quantity", "estimate", "closed_form", "rel_error", "std_error", "trials");
    for (const auto& r : rows)
        w.row(r.scenario_id, r.quantity, r.estimate, r.closed_form, r.rel_error, r.std_error,
              static_cast<long long>(r.trials));
}

VectorXd finite_difference_gradient(const SideProblem<double>& problem, const VectorXd& phases, double step) {
    if (!(step > 0))
        throw DomainError("finite_difference_gradient: step must be > 0");
    VectorXd grad(phases.size());
    VectorXd probe = phases;
    for (Eigen::Index n = 0; n < phases.size(); ++n) {
        probe(n) = phases(n) + step;
        const double up = coverage_at_phases(problem, probe);
        probe(n) = phases(n) - step;
        const double down = coverage_at_phases(problem, probe);
        probe(n) = phases(n);
        if (!std::isfinite(up) || !std::isfinite(down))
            throw NumericalError("finite_difference_gradient: non-finite objective");
        grad(n) = (up - down) / (2.0 * step);
    }
    return grad;
}

} // namespace starcov::mc
