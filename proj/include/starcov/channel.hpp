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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace starcov {

/// Array geometry of the BS (ULA, M antennas) and the surface (UPA, N_H x N_V elements).
///
/// Angle vectors are indexed by surface element n. Arrival angles may also hold a single entry,
/// in which case every element shares it.
template <typename Scalar>
struct Geometry {
    int M = 1;
    int N_H = 1;
    int N_V = 1;
    Scalar d_bs = 0;   // BS inter-antenna spacing [m]
    Scalar d_ris = 0;  // surface inter-element spacing [m]
    Scalar d_h = 0;    // element width [m]
    Scalar d_v = 0;    // element height [m]
    Scalar lambda = 0; // carrier wavelength [m]
    VectorX<Scalar> departure_elevation;
    VectorX<Scalar> departure_azimuth;
    VectorX<Scalar> arrival_elevation;
    VectorX<Scalar> arrival_azimuth;

    int N() const { return N_H * N_V; }

    void validate() const {
        if (M < 1 || N_H < 1 || N_V < 1)
            throw DomainError("geometry: M, N_H and N_V must be >= 1");
        if (!(d_bs > 0) || !(d_ris > 0) || !(d_h > 0) || !(d_v > 0) || !(lambda > 0))
            throw DomainError("geometry: all lengths must be strictly positive");
        const auto n = static_cast<Eigen::Index>(N());
        if (departure_elevation.size() != n || departure_azimuth.size() != n)
            throw DimensionError("geometry: departure angle vectors must have N entries");
        const auto na = arrival_elevation.size();
        if (na != arrival_azimuth.size() || (na != n && na != 1))
            throw DimensionError("geometry: arrival angle vectors must have N entries or a single common entry");
    }
};

/// Log-distance path loss beta = 10^(-C/10) * d^(-nu).
template <typename Scalar>
struct PathLoss {
    Scalar C_db = 0;
    Scalar nu = 0;
    Scalar d = 1;

    Scalar linear() const;
};

template <typename Scalar>
Scalar path_loss_linear(Scalar C_db, Scalar d, Scalar nu) {
    if (!(d > 0))
        throw DomainError("path_loss_linear: distance must be positive, got " + std::to_string(double(d)));
    using std::pow;
    return pow(Scalar(10), -C_db / Scalar(10)) * pow(d, -nu);
}

template <typename Scalar>
Scalar PathLoss<Scalar>::linear() const {
    return path_loss_linear(C_db, d, nu);
}

/// Deterministic BS-to-surface LoS channel; every entry has modulus sqrt(beta_g).
template <typename Scalar>
struct LoSChannel {
    CMatrixX<Scalar> G;
    Scalar beta_g = 0;
};

template <typename Scalar>
LoSChannel<Scalar> build_los_channel(const Geometry<Scalar>& geometry, Scalar beta_g) {
    geometry.validate();
    const int M = geometry.M;
    const int N = geometry.N();
    const bool common_arrival = geometry.arrival_elevation.size() == 1;
    const Scalar k = Scalar(2) * kPi<Scalar> / geometry.lambda;
    const Scalar amplitude = std::sqrt(beta_g);

    LoSChannel<Scalar> out;
    out.beta_g = beta_g;
    out.G.resize(M, N);
    for (int n = 0; n < N; ++n) {
        const Scalar dep = std::sin(geometry.departure_elevation(n)) * std::sin(geometry.departure_azimuth(n));
        const int a = common_arrival ? 0 : n;
        const Scalar arr = std::sin(geometry.arrival_elevation(a)) * std::sin(geometry.arrival_azimuth(a));
        for (int m = 0; m < M; ++m) {
            const Scalar phase = k * (Scalar(m) * geometry.d_bs * dep + Scalar(n) * geometry.d_ris * arr);
            out.G(m, n) = std::polar(amplitude, phase);
        }
    }
    return out;
}

/// Normalized sinc, sin(pi x) / (pi x).
template <typename Scalar>
Scalar sinc(Scalar x) {
    if (x == Scalar(0))
        return Scalar(1);
    const Scalar px = kPi<Scalar> * x;
    return std::sin(px) / px;
}

/// Real symmetric PSD spatial correlation of the surface with unit diagonal, and a square root
/// R_half with R_half * R_half^H = R.
template <typename Scalar>
struct CorrelationMatrix {
    MatrixX<Scalar> R;
    MatrixX<Scalar> R_half;

    Eigen::Index size() const { return R.rows(); }
};

/// Relative tolerance below which negative eigenvalues are treated as round-off.
template <typename Scalar>
inline constexpr Scalar kPsdTolerance = Scalar(1e-10);

/// Symmetric square root through eigendecomposition, clipping round-off negative eigenvalues.
template <typename Scalar>
MatrixX<Scalar> psd_sqrt(const MatrixX<Scalar>& R) {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(R);
    if (eig.info() != Eigen::Success)
        throw NumericalError("psd_sqrt: eigendecomposition failed");
    VectorX<Scalar> ev = eig.eigenvalues();
    const Scalar lmax = ev.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < Scalar(0)) {
            if (ev(i) < -kPsdTolerance<Scalar> * lmax)
                throw DomainError("psd_sqrt: matrix is not positive semi-definite (eigenvalue " +
                                  std::to_string(double(ev(i))) + ")");
            ev(i) = Scalar(0);
        }
    }
    const MatrixX<Scalar>& V = eig.eigenvectors();
    return V * ev.cwiseSqrt().asDiagonal() * V.transpose();
}

/// Wraps an externally supplied correlation (e.g. identity for independent fading).
template <typename Scalar>
CorrelationMatrix<Scalar> make_correlation(MatrixX<Scalar> R) {
    if (R.rows() != R.cols())
        throw DimensionError("make_correlation: matrix must be square");
    R = Scalar(0.5) * (R + R.transpose()).eval();
    CorrelationMatrix<Scalar> out;
    out.R_half = psd_sqrt(R);
    out.R = std::move(R);
    return out;
}

/// Sinc-kernel correlation of a planar array with elements on an N_H x N_V grid of pitch
/// (d_h, d_v), normalized to unit diagonal.
template <typename Scalar>
CorrelationMatrix<Scalar> build_ris_correlation(int N_H, int N_V, Scalar d_h, Scalar d_v, Scalar lambda) {
    if (N_H < 1 || N_V < 1)
        throw DomainError("build_ris_correlation: element counts must be >= 1");
    if (!(d_h > 0) || !(d_v > 0) || !(lambda > 0))
        throw DomainError("build_ris_correlation: lengths must be positive");
    const int N = N_H * N_V;
    MatrixX<Scalar> R(N, N);
    for (int i = 0; i < N; ++i) {
        const Scalar yi = Scalar(i % N_H) * d_h;
        const Scalar zi = Scalar(i / N_H) * d_v;
        R(i, i) = Scalar(1);
        for (int j = 0; j < i; ++j) {
            const Scalar dy = yi - Scalar(j % N_H) * d_h;
            const Scalar dz = zi - Scalar(j / N_H) * d_v;
            const Scalar r = sinc(Scalar(2) * std::hypot(dy, dz) / lambda);
            R(i, j) = r;
            R(j, i) = r;
        }
    }
    CorrelationMatrix<Scalar> out;
    out.R_half = psd_sqrt(R);
    out.R = std::move(R);
    return out;
}

/// One realization h = sqrt(beta_k) R_half z, z ~ CN(0, I).
template <typename Scalar>
CVectorX<Scalar> sample_ue_channel(const MatrixX<Scalar>& R_half, Scalar beta_k, std::mt19937_64& rng,
                                   NormalSource& normal) {
    const Eigen::Index N = R_half.rows();
    VectorX<Scalar> re(N), im(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        re(i) = Scalar(normal(rng));
        im(i) = Scalar(normal(rng));
    }
    const Scalar scale = std::sqrt(beta_k / Scalar(2));
    CVectorX<Scalar> h(N);
    h.real() = scale * (R_half * re);
    h.imag() = scale * (R_half * im);
    return h;
}

} // namespace starcov
