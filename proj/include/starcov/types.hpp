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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace starcov {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using CMatrixX = MatrixX<Complex<Scalar>>;

template <typename Scalar>
using CVectorX = VectorX<Complex<Scalar>>;

using MatrixXd = MatrixX<double>;
using VectorXd = VectorX<double>;
using CMatrixXd = CMatrixX<double>;
using CVectorXd = CVectorX<double>;

/// Precondition violation on a numeric argument (negative distance, kappa < 0, L = 0, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Conformability failure between matrices or vectors.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Iterative routine produced NaN/Inf.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Transmission (t, behind the surface) or reflection (r, same side as the BS).
enum class Side { Transmit, Reflect };

inline const char* to_string(Side side) { return side == Side::Transmit ? "t" : "r"; }

inline Side opposite(Side side) { return side == Side::Transmit ? Side::Reflect : Side::Transmit; }

template <typename Scalar>
inline constexpr Scalar kPi = Scalar(3.141592653589793238462643383279502884L);

} // namespace starcov
