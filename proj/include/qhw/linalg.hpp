// Copyright 2026 The qhwsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "qhw/circuits.hpp"

namespace qhw {

using cplx = std::complex<double>;

/// Row-major 2x2 complex matrix.
using Mat2 = std::array<cplx, 4>;

/// Superoperator acting on the vectorised 2x2 block of a density matrix,
/// ordered (row bit, column bit) = 00, 01, 10, 11. Row-major 4x4.
using Mat4 = std::array<cplx, 16>;

Mat2 mat2_identity();
Mat2 mat2_mul(const Mat2 &a, const Mat2 &b);
Mat2 mat2_adjoint(const Mat2 &a);

Mat4 mat4_identity();
Mat4 mat4_mul(const Mat4 &a, const Mat4 &b);
Mat4 mat4_adjoint(const Mat4 &a);

/// Unitary of a single-qubit gate. Throws for two-qubit gates and reset.
Mat2 gate_matrix(Gate g, std::span<const double> params);

/// Channel rho -> sum_k K rho K^dagger as a superoperator.
Mat4 kraus_superop(std::span<const Mat2> kraus);
Mat4 unitary_superop(const Mat2 &u);

/// Euler angles with u = e^{i gamma} RZ(phi) RY(theta) RZ(lambda), which is
/// u3(theta, phi, lambda) up to global phase.
struct EulerZYZ {
    double theta = 0;
    double phi = 0;
    double lambda = 0;
    double global_phase = 0;
};
EulerZYZ euler_zyz(const Mat2 &u);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Max |a_ij - e^{i phase} b_ij| minimised over the phase (via the largest
/// element of b). Used to compare unitaries up to global phase.
double phase_distance(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace qhw
