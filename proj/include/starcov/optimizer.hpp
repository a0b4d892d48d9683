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

#include "starcov/metrics.hpp"
#include "starcov/random.hpp"
#include "starcov/star_ris.hpp"
#include "starcov/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace starcov {

/// Diagonal of the PBM for one side, s_n = sqrt(beta_n) exp(j phi_n).
template <typename Scalar>
struct PhaseState {
    CVectorX<Scalar> s;
    Side side = Side::Transmit;

    VectorX<Scalar> phases() const {
        VectorX<Scalar> phi(s.size());
        for (Eigen::Index n = 0; n < s.size(); ++n)
            phi(n) = std::arg(s(n));
        return phi;
    }
};

/// Everything the coverage objective of one side depends on, apart from the phases.
template <typename Scalar>
struct SideProblem {
    Side side = Side::Transmit;
    CMatrixX<Scalar> G;        // M x N
    MatrixX<Scalar> R_tilde;   // N x N, phase-error deflated correlation
    VectorX<Scalar> amplitudes; // beta_n^k
    Scalar beta_k = 1;
    Scalar sigma0 = 0;
    CoverageParams<Scalar> params;

    Eigen::Index N() const { return G.cols(); }
    Eigen::Index M() const { return G.rows(); }

    void validate() const {
        if (R_tilde.rows() != N() || R_tilde.cols() != N() || amplitudes.size() != N())
            throw DimensionError("SideProblem: G, R_tilde and amplitudes are not conformable");
        for (Eigen::Index n = 0; n < amplitudes.size(); ++n)
            if (!(amplitudes(n) >= Scalar(0) && amplitudes(n) <= Scalar(1)))
                throw DomainError("SideProblem: amplitudes must lie in [0, 1]");
    }
};

template <typename Scalar>
struct Evaluation {
    CMatrixX<Scalar> Rbar;
    SnrBreakdown<Scalar> snr;
    Scalar coverage = 0;
};

template <typename Scalar>
Evaluation<Scalar> evaluate(const SideProblem<Scalar>& problem, const CVectorX<Scalar>& s) {
    Evaluation<Scalar> ev;
    ev.Rbar = cascaded_covariance_matrix(problem.G, s, problem.R_tilde, problem.beta_k);
    ev.snr = closed_form_snr(ev.Rbar, problem.sigma0);
    ev.coverage = coverage_probability(ev.snr.gamma, problem.params);
    return ev;
}

/// Coverage as a function of the real phases (amplitudes from the problem).
template <typename Scalar>
Scalar coverage_at_phases(const SideProblem<Scalar>& problem, const VectorX<Scalar>& phases) {
    PassiveBeamforming<Scalar> pbm{problem.side, problem.amplitudes, phases};
    return evaluate(problem, pbm.diagonal()).coverage;
}

/// dP/ds^* by the chain rule dP/dgamma * dgamma/ds^*, with
///   dS/ds^* = 2 beta tr(Rbar) diag(G^H G Phi R_tilde)
///   dI/ds^* = 2 beta diag(G^H Rbar G Phi R_tilde) + sigma0 beta diag(G^H G Phi R_tilde).
/// diag(X Phi R_tilde) is evaluated as (X .* R_tilde^T) s.
template <typename Scalar>
CVectorX<Scalar> coverage_wirtinger_gradient(const SideProblem<Scalar>& problem, const CVectorX<Scalar>& s) {
    using C = Complex<Scalar>;
    if (s.size() != problem.N())
        throw DimensionError("coverage_wirtinger_gradient: state has wrong length");
    const Evaluation<Scalar> ev = evaluate(problem, s);
    const SnrBreakdown<Scalar>& snr = ev.snr;
    if (!(snr.gamma > Scalar(0)))
        return CVectorX<Scalar>::Zero(s.size());

    const CMatrixX<Scalar> Rt = problem.R_tilde.transpose().template cast<C>();
    const CMatrixX<Scalar> A = problem.G.adjoint() * problem.G;
    const CMatrixX<Scalar> K = problem.G.adjoint() * ev.Rbar * problem.G;
    const CVectorX<Scalar> d_trace = (A.array() * Rt.array()).matrix() * s;
    const CVectorX<Scalar> d_quad = (K.array() * Rt.array()).matrix() * s;

    const Scalar beta = problem.beta_k;
    const CVectorX<Scalar> dS = Scalar(2) * beta * snr.trace * d_trace;
    const CVectorX<Scalar> dI = Scalar(2) * beta * d_quad + problem.sigma0 * beta * d_trace;
    const CVectorX<Scalar> dgamma = (dS * snr.I - snr.S * dI) / (snr.I * snr.I);
    return coverage_derivative(snr.gamma, problem.params) * dgamma;
}

/// dP/dphi_n = 2 Re(j s_n conj(g_n)) for g = dP/ds^*.
template <typename Scalar>
VectorX<Scalar> phase_gradient(const CVectorX<Scalar>& s, const CVectorX<Scalar>& g) {
    if (s.size() != g.size())
        throw DimensionError("phase_gradient: state and gradient lengths differ");
    VectorX<Scalar> out(s.size());
    for (Eigen::Index n = 0; n < s.size(); ++n)
        out(n) = Scalar(-2) * std::imag(s(n) * std::conj(g(n)));
    return out;
}

/// Closest point with |s_n| = sqrt(beta_n); a zero entry takes phase 0.
template <typename Scalar>
CVectorX<Scalar> project_phases(const CVectorX<Scalar>& raw, const VectorX<Scalar>& amplitudes) {
    if (raw.size() != amplitudes.size())
        throw DimensionError("project_phases: raw and amplitude lengths differ");
    CVectorX<Scalar> out(raw.size());
    for (Eigen::Index n = 0; n < raw.size(); ++n) {
        const Scalar phase = raw(n) == Complex<Scalar>(0) ? Scalar(0) : std::arg(raw(n));
        out(n) = std::polar(std::sqrt(amplitudes(n)), phase);
    }
    return out;
}

template <typename Scalar>
PhaseState<Scalar> make_phase_state(const VectorX<Scalar>& amplitudes, const VectorX<Scalar>& phases, Side side) {
    PassiveBeamforming<Scalar> pbm{side, amplitudes, phases};
    return {pbm.diagonal(), side};
}

/// Phases uniform on [0, 2 pi).
template <typename Scalar>
PhaseState<Scalar> random_phase_state(const VectorX<Scalar>& amplitudes, Side side, std::mt19937_64& rng) {
    VectorX<Scalar> phases(amplitudes.size());
    for (Eigen::Index n = 0; n < phases.size(); ++n)
        phases(n) = Scalar(2.0 * kPi<double> * uniform01(rng));
    return make_phase_state(amplitudes, phases, side);
}

enum class PhaseInit { Random, Zero };

struct PgaConfig {
    int max_iters = 500;
    double grad_tol = 1e-8;      // infinity norm of the phase gradient
    double step0 = 1.0;
    double shrink = 0.5;
    double c_ls = 1e-4;
    int max_shrinks = 40;
    double step_growth = 2.0;    // next trial step = accepted step * growth
    int alt_rounds = 5;
    double objective_tol = 1e-10; // relative
    PhaseInit init = PhaseInit::Random;

    void validate() const {
        if (max_iters < 1 || max_shrinks < 1 || alt_rounds < 1)
            throw DomainError("PgaConfig: iteration counts must be positive");
        if (!(grad_tol > 0) || !(step0 > 0) || !(objective_tol > 0) || !(step_growth >= 1))
            throw DomainError("PgaConfig: tolerances and steps must be positive, growth >= 1");
        if (!(shrink > 0 && shrink < 1) || !(c_ls > 0 && c_ls < 1))
            throw DomainError("PgaConfig: shrink and c_ls must lie in (0, 1)");
    }
};

enum class StopReason { Stationary, ObjectiveTolerance, MaxIterations, LineSearchExhausted };

inline const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::Stationary: return "stationary";
    case StopReason::ObjectiveTolerance: return "objective_tol";
    case StopReason::MaxIterations: return "max_iters";
    case StopReason::LineSearchExhausted: return "line_search";
    }
    return "?";
}

template <typename Scalar>
struct PgaResult {
    PhaseState<Scalar> state;
    std::vector<Scalar> trace; // objective at the start and after every accepted step
    int iterations = 0;        // gradient evaluations
    StopReason reason = StopReason::MaxIterations;
    Scalar gamma = 0;

    Scalar objective() const { return trace.back(); }
};

/// Infinity norm of the phase gradient after removing the flat global-phase direction.
template <typename Scalar>
Scalar stationarity(const VectorX<Scalar>& phase_grad) {
    if (phase_grad.size() == 0)
        return Scalar(0);
    return (phase_grad.array() - phase_grad.mean()).abs().maxCoeff();
}

/// Projected gradient ascent on the phases of one side with backtracking.
///
/// A trial step mu is accepted when P(s+) >= P(s) + (c_ls / mu) ||s+ - s||^2, i.e. the Armijo
/// condition on the projected step, which reduces to c_ls mu ||g||^2 without projection.
template <typename Scalar>
PgaResult<Scalar> pga_optimize_side(const SideProblem<Scalar>& problem, const PhaseState<Scalar>& initial,
                                    const PgaConfig& config) {
    problem.validate();
    config.validate();
    PgaResult<Scalar> result;
    result.state = {project_phases(initial.s, problem.amplitudes), problem.side};
    Evaluation<Scalar> current = evaluate(problem, result.state.s);
    if (!std::isfinite(current.coverage))
        throw NumericalError("pga_optimize_side: non-finite objective at the initial point");
    result.trace.push_back(current.coverage);

    Scalar step = Scalar(config.step0);
    for (int it = 0; it < config.max_iters; ++it) {
        ++result.iterations;
        const CVectorX<Scalar> g = coverage_wirtinger_gradient(problem, result.state.s);
        if (stationarity(phase_gradient(result.state.s, g)) <= Scalar(config.grad_tol)) {
            result.reason = StopReason::Stationary;
            break;
        }

        bool accepted = false;
        CVectorX<Scalar> candidate;
        Evaluation<Scalar> next;
        for (int k = 0; k <= config.max_shrinks; ++k) {
            candidate = project_phases((result.state.s + step * g).eval(), problem.amplitudes);
            next = evaluate(problem, candidate);
            if (!std::isfinite(next.coverage))
                throw NumericalError("pga_optimize_side: non-finite objective during line search (step " +
                                     std::to_string(double(step)) + ")");
            const Scalar moved = (candidate - result.state.s).squaredNorm();
            if (moved > Scalar(0) && next.coverage >= current.coverage + Scalar(config.c_ls) / step * moved) {
                accepted = true;
                break;
            }
            step *= Scalar(config.shrink);
        }
        if (!accepted) {
            result.reason = StopReason::LineSearchExhausted;
            break;
        }

        const Scalar previous = current.coverage;
        result.state.s = std::move(candidate);
        current = std::move(next);
        result.trace.push_back(current.coverage);
        step *= Scalar(config.step_growth);
        const Scalar floor = std::numeric_limits<Scalar>::min();
        if (current.coverage - previous <= Scalar(config.objective_tol) * std::max(std::abs(previous), floor)) {
            result.reason = StopReason::ObjectiveTolerance;
            break;
        }
        if (it + 1 == config.max_iters)
            result.reason = StopReason::MaxIterations;
    }
    result.gamma = current.snr.gamma;
    return result;
}

template <typename Scalar>
struct AlternatingResult {
    PgaResult<Scalar> t;
    PgaResult<Scalar> r;
    std::vector<Scalar> total_trace; // P_t + P_r at the start and after every round
    int rounds = 0;

    Scalar coverage_t() const { return t.objective(); }
    Scalar coverage_r() const { return r.objective(); }
    Scalar total() const { return total_trace.back(); }
    int total_iterations() const { return t_iterations + r_iterations; }

    int t_iterations = 0;
    int r_iterations = 0;
};

/// Optimizes the t side with r fixed, then r with t fixed, for up to `alt_rounds` rounds or until
/// the total coverage improves by less than `objective_tol` (relative).
template <typename Scalar>
AlternatingResult<Scalar> alternating_optimize(const SideProblem<Scalar>& t_problem,
                                               const SideProblem<Scalar>& r_problem,
                                               const PhaseState<Scalar>& t_init, const PhaseState<Scalar>& r_init,
                                               const PgaConfig& config) {
    config.validate();
    AlternatingResult<Scalar> out;
    PhaseState<Scalar> t_state{project_phases(t_init.s, t_problem.amplitudes), t_problem.side};
    PhaseState<Scalar> r_state{project_phases(r_init.s, r_problem.amplitudes), r_problem.side};
    Scalar total = evaluate(t_problem, t_state.s).coverage + evaluate(r_problem, r_state.s).coverage;
    out.total_trace.push_back(total);

    for (int round = 0; round < config.alt_rounds; ++round) {
        out.t = pga_optimize_side(t_problem, t_state, config);
        t_state = out.t.state;
        out.t_iterations += out.t.iterations;
        out.r = pga_optimize_side(r_problem, r_state, config);
        r_state = out.r.state;
        out.r_iterations += out.r.iterations;
        ++out.rounds;

        const Scalar next = out.t.objective() + out.r.objective();
        out.total_trace.push_back(next);
        const Scalar gain = next - total;
        total = next;
        if (gain < Scalar(config.objective_tol) * std::max(std::abs(total), std::numeric_limits<Scalar>::min()))
            break;
    }
    return out;
}

} // namespace starcov
