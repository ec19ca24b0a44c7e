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

#include "qhw/linalg.hpp"

#include <cmath>
#include <numbers>

#include "qhw/errors.hpp"

namespace qhw {

using std::numbers::pi;

Mat2 mat2_identity() { return {1.0, 0.0, 0.0, 1.0}; }

Mat2 mat2_mul(const Mat2 &a, const Mat2 &b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

Mat2 mat2_adjoint(const Mat2 &a) { return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])}; }

Mat4 mat4_identity() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) {
        m[i * 5] = 1.0;
    }
    return m;
}

Mat4 mat4_mul(const Mat4 &a, const Mat4 &b) {
    Mat4 out{};
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
            const cplx aik = a[i * 4 + k];
            if (aik == 0.0) {
                continue;
            }
            for (int j = 0; j < 4; ++j) {
                out[i * 4 + j] += aik * b[k * 4 + j];
            }
        }
    }
    return out;
}

Mat4 mat4_adjoint(const Mat4 &a) {
    Mat4 out{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            out[j * 4 + i] = std::conj(a[i * 4 + j]);
        }
    }
    return out;
}

Mat2 gate_matrix(Gate g, std::span<const double> p) {
    const cplx i1{0.0, 1.0};
    switch (g) {
        case Gate::H: {
            const double s = 1.0 / std::sqrt(2.0);
            return {s, s, s, -s};
        }
        case Gate::X:
            return {0.0, 1.0, 1.0, 0.0};
        case Gate::SX:
            return {cplx{0.5, 0.5}, cplx{0.5, -0.5}, cplx{0.5, -0.5}, cplx{0.5, 0.5}};
        case Gate::RX: {
            const double c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
            return {c, -i1 * s, -i1 * s, c};
        }
        case Gate::RY: {
            const double c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
            return {c, -s, s, c};
        }
        case Gate::RZ:
            return {std::polar(1.0, -p[0] / 2), 0.0, 0.0, std::polar(1.0, p[0] / 2)};
        case Gate::U1:
            return {1.0, 0.0, 0.0, std::polar(1.0, p[0])};
        case Gate::U2: {
            const double s = 1.0 / std::sqrt(2.0);
            return {s, -s * std::polar(1.0, p[1]), s * std::polar(1.0, p[0]), s * std::polar(1.0, p[0] + p[1])};
        }
        case Gate::U3: {
            const double c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
            return {c, -s * std::polar(1.0, p[2]), s * std::polar(1.0, p[1]), c * std::polar(1.0, p[1] + p[2])};
        }
        case Gate::ID:
            return mat2_identity();
        case Gate::CX:
        case Gate::SWAP:
        case Gate::RESET:
            break;
    }
    throw ValidationError("no 2x2 unitary for gate " + std::string(gate_name(g)));
}

Mat4 kraus_superop(std::span<const Mat2> kraus) {
    Mat4 s{};
    for (const auto &k : kraus) {
        for (int rp = 0; rp < 2; ++rp) {
            for (int cp = 0; cp < 2; ++cp) {
                for (int r = 0; r < 2; ++r) {
                    for (int c = 0; c < 2; ++c) {
                        s[(rp * 2 + cp) * 4 + (r * 2 + c)] += k[rp * 2 + r] * std::conj(k[cp * 2 + c]);
                    }
                }
            }
        }
    }
    return s;
}

Mat4 unitary_superop(const Mat2 &u) { return kraus_superop(std::span<const Mat2>(&u, 1)); }

double wrap_angle(double a) {
    double w = std::remainder(a, 2 * pi);
    if (w <= -pi) {
        w += 2 * pi;
    }
    return w;
}

EulerZYZ euler_zyz(const Mat2 &u) {
    const cplx det = u[0] * u[3] - u[1] * u[2];
    const cplx inv_root = 1.0 / std::sqrt(det);
    const Mat2 v{u[0] * inv_root, u[1] * inv_root, u[2] * inv_root, u[3] * inv_root};
    EulerZYZ e;
    e.theta = 2.0 * std::atan2(std::abs(v[2]), std::abs(v[0]));
    constexpr double kTiny = 1e-14;
    const double sum = std::abs(v[3]) > kTiny ? 2.0 * std::arg(v[3]) : 0.0;   // phi + lambda
    const double diff = std::abs(v[2]) > kTiny ? 2.0 * std::arg(v[2]) : 0.0;  // phi - lambda
    e.phi = (sum + diff) / 2;
    e.lambda = (sum - diff) / 2;
    // Recover the phase from the largest entry of u against RZ·RY·RZ.
    const double c = std::cos(e.theta / 2), s = std::sin(e.theta / 2);
    const Mat2 ref{c * std::polar(1.0, -(e.phi + e.lambda) / 2), -s * std::polar(1.0, -(e.phi - e.lambda) / 2),
                   s * std::polar(1.0, (e.phi - e.lambda) / 2), c * std::polar(1.0, (e.phi + e.lambda) / 2)};
    std::size_t best = 0;
    for (std::size_t i = 1; i < 4; ++i) {
        if (std::abs(ref[i]) > std::abs(ref[best])) {
            best = i;
        }
    }
    e.global_phase = std::arg(u[best] / ref[best]);
    return e;
}

double phase_distance(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) {
        throw ValidationError("phase_distance on mismatched sizes");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < b.size(); ++i) {
        if (std::abs(b[i]) > std::abs(b[best])) {
            best = i;
        }
    }
    if (std::abs(b[best]) == 0.0 || std::abs(a[best]) == 0.0) {
        double m = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            m = std::max(m, std::abs(a[i] - b[i]));
        }
        return m;
    }
    const cplx phase = (a[best] / b[best]) / std::abs(a[best] / b[best]);
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - phase * b[i]));
    }
    return m;
}

}  // namespace qhw
