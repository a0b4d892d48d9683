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

#include "starcov/random.hpp"
#include "starcov/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace starcov {

// ---------------------------------------------------------------------------------------------
// Operating protocol and passive beamforming state
// ---------------------------------------------------------------------------------------------

enum class ProtocolKind { EnergySplitting, ModeSwitching };

/// ES: every element splits its energy. MS: each element serves exactly one side; `serves_t[n]`
/// is the assignment (ignored for ES).
struct Protocol {
    ProtocolKind kind = ProtocolKind::EnergySplitting;
    std::vector<bool> serves_t;

    static Protocol energy_splitting() { return {}; }

    static Protocol mode_switching(std::vector<bool> mask) {
        return {ProtocolKind::ModeSwitching, std::move(mask)};
    }

    /// First `n_t` elements (row-major) serve t, the rest r.
    static Protocol mode_switching_block(int N, int n_t) {
        if (n_t < 0 || n_t > N)
            throw DomainError("mode_switching_block: need 0 <= N_t <= N");
        std::vector<bool> mask(static_cast<std::size_t>(N), false);
        for (int n = 0; n < n_t; ++n)
            mask[static_cast<std::size_t>(n)] = true;
        return mode_switching(std::move(mask));
    }

    /// Alternating t/r assignment, `n_t` elements in total spread as evenly as possible.
    static Protocol mode_switching_interleaved(int N, int n_t) {
        if (n_t < 0 || n_t > N)
            throw DomainError("mode_switching_interleaved: need 0 <= N_t <= N");
        std::vector<bool> mask(static_cast<std::size_t>(N), false);
        // Bresenham-style spreading.
        for (int n = 0; n < N; ++n) {
            const long long before = static_cast<long long>(n) * n_t / N;
            const long long after = static_cast<long long>(n + 1) * n_t / N;
            mask[static_cast<std::size_t>(n)] = after > before;
        }
        return mode_switching(std::move(mask));
    }

    int count_t() const {
        int c = 0;
        for (bool b : serves_t)
            c += b ? 1 : 0;
        return c;
    }
};

/// Amplitude/phase response of the surface toward one side. The diagonal of the PBM is
/// sqrt(amplitudes) .* exp(j phases).
template <typename Scalar>
struct PassiveBeamforming {
    Side side = Side::Transmit;
    VectorX<Scalar> amplitudes;
    VectorX<Scalar> phases;

    Eigen::Index size() const { return amplitudes.size(); }

    CVectorX<Scalar> diagonal() const {
        CVectorX<Scalar> s(amplitudes.size());
        for (Eigen::Index n = 0; n < s.size(); ++n)
            s(n) = std::polar(std::sqrt(amplitudes(n)), phases(n));
        return s;
    }
};

template <typename Scalar>
struct PassiveBeamformingPair {
    PassiveBeamforming<Scalar> t;
    PassiveBeamforming<Scalar> r;

    const PassiveBeamforming<Scalar>& operator[](Side side) const { return side == Side::Transmit ? t : r; }
    PassiveBeamforming<Scalar>& operator[](Side side) { return side == Side::Transmit ? t : r; }
};

/// Per-element t amplitudes implied by the protocol; r amplitudes are 1 - t so every pair
/// conserves energy.
template <typename Scalar>
VectorX<Scalar> transmit_amplitudes(const Protocol& protocol, const VectorX<Scalar>& es_split) {
    if (protocol.kind == ProtocolKind::EnergySplitting) {
        for (Eigen::Index n = 0; n < es_split.size(); ++n)
            if (!(es_split(n) >= Scalar(0) && es_split(n) <= Scalar(1)))
                throw DomainError("ES amplitude must lie in [0, 1]");
        return es_split;
    }
    VectorX<Scalar> beta(static_cast<Eigen::Index>(protocol.serves_t.size()));
    for (Eigen::Index n = 0; n < beta.size(); ++n)
        beta(n) = protocol.serves_t[static_cast<std::size_t>(n)] ? Scalar(1) : Scalar(0);
    return beta;
}

template <typename Scalar>
PassiveBeamformingPair<Scalar> make_beamforming_pair(const VectorX<Scalar>& beta_t, const VectorX<Scalar>& phases_t,
                                                     const VectorX<Scalar>& phases_r) {
    if (beta_t.size() != phases_t.size() || beta_t.size() != phases_r.size())
        throw DimensionError("make_beamforming_pair: amplitude and phase vectors must match");
    PassiveBeamformingPair<Scalar> pair;
    pair.t = {Side::Transmit, beta_t, phases_t};
    pair.r = {Side::Reflect, (VectorX<Scalar>::Ones(beta_t.size()) - beta_t).eval(), phases_r};
    return pair;
}

// ---------------------------------------------------------------------------------------------
// Phase-shift errors
// ---------------------------------------------------------------------------------------------

namespace detail {

// Large-argument expansion of I_nu(x) * sqrt(2 pi x) * exp(-x).
inline double bessel_i_scaled_asymptotic(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 12; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (k * 8.0 * x);
        sum += term;
    }
    return sum;
}

} // namespace detail

/// Characteristic function E[exp(j e)] of a zero-mean Von Mises error, I_1(kappa) / I_0(kappa).
template <typename Scalar>
Scalar von_mises_cf(Scalar kappa) {
    if (!(kappa >= Scalar(0)))
        throw DomainError("von_mises_cf: kappa must be >= 0");
    const double x = static_cast<double>(kappa);
    if (x == 0.0)
        return Scalar(0);
    if (x <= 500.0)
        return Scalar(std::cyl_bessel_i(1.0, x) / std::cyl_bessel_i(0.0, x));
    return Scalar(detail::bessel_i_scaled_asymptotic(1, x) / detail::bessel_i_scaled_asymptotic(0, x));
}

/// Inverse of von_mises_cf by bisection; m in [0, 1).
template <typename Scalar>
Scalar von_mises_kappa(Scalar m) {
    if (!(m >= Scalar(0) && m < Scalar(1)))
        throw DomainError("von_mises_kappa: characteristic function must lie in [0, 1)");
    if (m == Scalar(0))
        return Scalar(0);
    Scalar lo = 0, hi = 1;
    while (von_mises_cf(hi) < m)
        hi *= Scalar(2);
    for (int it = 0; it < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon() * hi; ++it) {
        const Scalar mid = Scalar(0.5) * (lo + hi);
        (von_mises_cf(mid) < m ? lo : hi) = mid;
    }
    return Scalar(0.5) * (lo + hi);
}

enum class PhaseErrorFamily { None, Uniform, VonMises };

template <typename Scalar>
struct PhaseErrorModel {
    PhaseErrorFamily family = PhaseErrorFamily::None;
    Scalar kappa = 0;
    Scalar m = 1;

    static PhaseErrorModel none() { return {PhaseErrorFamily::None, 0, 1}; }
    static PhaseErrorModel uniform() { return {PhaseErrorFamily::Uniform, 0, 0}; }

    static PhaseErrorModel von_mises(Scalar kappa) {
        return {PhaseErrorFamily::VonMises, kappa, von_mises_cf(kappa)};
    }

    /// Parameterized by the characteristic function; kappa is recovered for sampling.
    static PhaseErrorModel von_mises_from_cf(Scalar m) {
        return {PhaseErrorFamily::VonMises, von_mises_kappa(m), m};
    }
};

/// Draw from Von Mises(0, kappa) with the Best-Fisher wrapped-Cauchy envelope.
template <typename Scalar>
Scalar sample_von_mises(Scalar kappa, std::mt19937_64& rng) {
    const double k = static_cast<double>(kappa);
    if (k < 1e-8)
        return Scalar(kPi<double> * (2.0 * uniform01(rng) - 1.0));
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * k * k);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * k);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    for (;;) {
        const double u1 = uniform01(rng);
        const double u2 = uniform01(rng);
        const double u3 = uniform01(rng);
        const double z = std::cos(kPi<double> * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = k * (r - f);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double theta = std::acos(std::clamp(f, -1.0, 1.0));
            return Scalar(u3 > 0.5 ? theta : -theta);
        }
    }
}

template <typename Scalar>
VectorX<Scalar> sample_phase_errors(const PhaseErrorModel<Scalar>& model, Eigen::Index N, std::mt19937_64& rng) {
    VectorX<Scalar> e = VectorX<Scalar>::Zero(N);
    switch (model.family) {
    case PhaseErrorFamily::None:
        break;
    case PhaseErrorFamily::Uniform:
        for (Eigen::Index n = 0; n < N; ++n)
            e(n) = Scalar(kPi<double> * (2.0 * uniform01(rng) - 1.0));
        break;
    case PhaseErrorFamily::VonMises:
        for (Eigen::Index n = 0; n < N; ++n)
            e(n) = sample_von_mises(model.kappa, rng);
        break;
    }
    return e;
}

// ---------------------------------------------------------------------------------------------
// Effective covariances
// ---------------------------------------------------------------------------------------------

/// m^2 R + (1 - m^2) I: the surface correlation seen through i.i.d. phase errors with CF m.
template <typename Derived>
MatrixX<typename Derived::Scalar> effective_ris_correlation(const Eigen::MatrixBase<Derived>& R,
                                                            typename Derived::Scalar m) {
    using Scalar = typename Derived::Scalar;
    if (R.rows() != R.cols())
        throw DimensionError("effective_ris_correlation: R must be square");
    const Scalar m2 = m * m;
    MatrixX<Scalar> out = m2 * R;
    out.diagonal().array() += Scalar(1) - m2;
    return out;
}

/// Covariance of the cascaded BS-surface-UE channel for one side.
template <typename Scalar>
struct EffectiveCovariance {
    CMatrixX<Scalar> Rbar;
    Side side = Side::Transmit;

    Scalar trace() const { return Rbar.diagonal().real().sum(); }
};

/// beta_k * G diag(s) R_tilde diag(s)^H G^H, Hermitian-symmetrized.
template <typename Scalar>
CMatrixX<Scalar> cascaded_covariance_matrix(const CMatrixX<Scalar>& G, const CVectorX<Scalar>& s,
                                            const MatrixX<Scalar>& R_tilde, Scalar beta_k) {
    if (G.cols() != s.size() || R_tilde.rows() != s.size() || R_tilde.cols() != s.size())
        throw DimensionError("cascaded_covariance: G is " + std::to_string(G.rows()) + "x" +
                             std::to_string(G.cols()) + ", PBM has " + std::to_string(s.size()) +
                             " entries, R_tilde is " + std::to_string(R_tilde.rows()) + "x" +
                             std::to_string(R_tilde.cols()));
    const CMatrixX<Scalar> B = G * s.asDiagonal();
    CMatrixX<Scalar> Rbar = beta_k * (B * R_tilde.template cast<Complex<Scalar>>() * B.adjoint());
    return Scalar(0.5) * (Rbar + Rbar.adjoint()).eval();
}

template <typename Scalar>
EffectiveCovariance<Scalar> cascaded_covariance(const CMatrixX<Scalar>& G, const PassiveBeamforming<Scalar>& pbm,
                                                const MatrixX<Scalar>& R_tilde, Scalar beta_k) {
    return {cascaded_covariance_matrix(G, pbm.diagonal(), R_tilde, beta_k), pbm.side};
}

} // namespace starcov
