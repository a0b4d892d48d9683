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

#include "starcov/types.hpp"

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

namespace starcov {

/// Terms of the deterministic SNR tr^2(Rbar) / (tr(Rbar^2) + sigma0 tr(Rbar)).
template <typename Scalar>
struct SnrBreakdown {
    Scalar trace = 0;    // tr(Rbar)
    Scalar trace_sq = 0; // tr(Rbar^2)
    Scalar S = 0;        // tr^2(Rbar)
    Scalar I = 0;        // tr(Rbar^2) + sigma0 tr(Rbar)
    Scalar gamma = 0;
    Scalar sigma0 = 0;
};

template <typename Derived>
SnrBreakdown<typename Eigen::NumTraits<typename Derived::Scalar>::Real>
closed_form_snr(const Eigen::MatrixBase<Derived>& Rbar, typename Eigen::NumTraits<typename Derived::Scalar>::Real sigma0) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (!(sigma0 >= Real(0)))
        throw DomainError("closed_form_snr: sigma0 must be >= 0");
    if (Rbar.rows() != Rbar.cols())
        throw DimensionError("closed_form_snr: covariance must be square");
    SnrBreakdown<Real> out;
    out.sigma0 = sigma0;
    out.trace = std::real(Rbar.trace());
    // For Hermitian Rbar, tr(Rbar^2) = ||Rbar||_F^2.
    out.trace_sq = Rbar.squaredNorm();
    out.S = out.trace * out.trace;
    out.I = out.trace_sq + sigma0 * out.trace;
    out.gamma = out.trace > Real(0) ? out.S / out.I : Real(0);
    return out;
}

/// Alzer constant L (L!)^(-1/L), evaluated in log space.
template <typename Scalar = double>
Scalar alzer_eta(int L) {
    if (L < 1)
        throw DomainError("alzer_eta: order L must be >= 1, got " + std::to_string(L));
    using std::exp;
    using std::log;
    Scalar log_factorial = 0;
    for (int i = 2; i <= L; ++i)
        log_factorial += log(Scalar(i));
    return exp(log(Scalar(L)) - log_factorial / Scalar(L));
}

template <typename Scalar>
struct CoverageParams {
    Scalar T = 0; // linear SNR threshold
    int L = 1;
    Scalar eta = 1;

    static CoverageParams make(Scalar T, int L) {
        if (!(T >= Scalar(0)))
            throw DomainError("coverage threshold must be >= 0");
        return {T, L, alzer_eta<Scalar>(L)};
    }
};

namespace detail {

// The alternating sums cancel terms as large as C(L, L/2); extended precision keeps L <= 30 exact
// to about 1e-11.
template <typename Scalar>
using wide_t = std::conditional_t<(sizeof(Scalar) < sizeof(long double)), long double, Scalar>;

template <typename Scalar>
Scalar binomial(int n, int k) {
    Scalar c = 1;
    for (int i = 1; i <= k; ++i)
        c = c * Scalar(n - k + i) / Scalar(i);
    return c;
}

} // namespace detail

/// 1 - (1 - exp(-eta T / gamma))^L, computed as -expm1(L log1p(-exp(-x))).
template <typename Scalar>
Scalar coverage_probability(Scalar gamma, const CoverageParams<Scalar>& p) {
    if (p.T == Scalar(0))
        return Scalar(1);
    if (!(gamma > Scalar(0)))
        return Scalar(0);
    const Scalar x = p.eta * p.T / gamma;
    const Scalar e = std::exp(-x);
    if (e == Scalar(1))
        return Scalar(1);
    return -std::expm1(Scalar(p.L) * std::log1p(-e));
}

/// Same quantity as the alternating binomial sum sum_n C(L,n) (-1)^(n+1) exp(-n x), evaluated in
/// extended precision. Kept as a cross-check of the product form.
template <typename Scalar>
Scalar coverage_probability_binomial(Scalar gamma, const CoverageParams<Scalar>& p) {
    if (p.T == Scalar(0))
        return Scalar(1);
    if (!(gamma > Scalar(0)))
        return Scalar(0);
    using Wide = detail::wide_t<Scalar>;
    const Wide x = Wide(p.eta) * Wide(p.T) / Wide(gamma);
    Wide sum = 0;
    for (int n = 1; n <= p.L; ++n)
        sum += detail::binomial<Wide>(p.L, n) * ((n % 2 == 1) ? Wide(1) : Wide(-1)) * std::exp(-Wide(n) * x);
    return Scalar(sum);
}

/// dP/dgamma = L (1 - e^-x)^(L-1) e^-x eta T / gamma^2 with x = eta T / gamma.
template <typename Scalar>
Scalar coverage_derivative(Scalar gamma, const CoverageParams<Scalar>& p) {
    if (p.T == Scalar(0) || !(gamma > Scalar(0)))
        return Scalar(0);
    const Scalar x = p.eta * p.T / gamma;
    const Scalar e = std::exp(-x);
    if (e == Scalar(1))
        return Scalar(0);
    const Scalar log_term = Scalar(p.L - 1) * std::log1p(-e) - x;
    return Scalar(p.L) * std::exp(log_term) * p.eta * p.T / (gamma * gamma);
}

/// Term-by-term derivative of the binomial sum.
template <typename Scalar>
Scalar coverage_derivative_binomial(Scalar gamma, const CoverageParams<Scalar>& p) {
    if (p.T == Scalar(0) || !(gamma > Scalar(0)))
        return Scalar(0);
    using Wide = detail::wide_t<Scalar>;
    const Wide x = Wide(p.eta) * Wide(p.T) / Wide(gamma);
    Wide sum = 0;
    for (int n = 1; n <= p.L; ++n)
        sum += detail::binomial<Wide>(p.L, n) * ((n % 2 == 1) ? Wide(1) : Wide(-1)) * Wide(n) * std::exp(-Wide(n) * x);
    return Scalar(sum * Wide(p.eta) * Wide(p.T) / (Wide(gamma) * Wide(gamma)));
}

template <typename Scalar>
struct CoverageCurve {
    std::vector<Scalar> thresholds;
    std::vector<Scalar> values;
    Side side = Side::Transmit;
};

template <typename Scalar>
CoverageCurve<Scalar> coverage_curve(Scalar gamma, const std::vector<Scalar>& thresholds, int L,
                                     Side side = Side::Transmit) {
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i] >= thresholds[i - 1]))
            throw DomainError("coverage_curve: thresholds must be ascending");
    CoverageCurve<Scalar> curve;
    curve.side = side;
    curve.thresholds = thresholds;
    curve.values.reserve(thresholds.size());
    const Scalar eta = alzer_eta<Scalar>(L);
    for (Scalar T : thresholds) {
        if (!(T >= Scalar(0)))
            throw DomainError("coverage_curve: thresholds must be >= 0");
        curve.values.push_back(coverage_probability(gamma, CoverageParams<Scalar>{T, L, eta}));
    }
    return curve;
}

} // namespace starcov
