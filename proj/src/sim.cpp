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

#include "qhw/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <random>

#include "qhw/errors.hpp"

namespace qhw {

namespace {

constexpr double kTraceTolerance = 1e-9;
constexpr double kKrausTolerance = 1e-9;

std::atomic<std::uint64_t> g_trace_checks{0};
std::atomic<double> g_max_trace_dev{0.0};

void check_width(std::size_t n) {
    if (n > kMaxSimQubits) {
        throw ValidationError("simulator supports at most 8 qubits, got " + std::to_string(n));
    }
}

void record_trace(double tr) {
    g_trace_checks.fetch_add(1, std::memory_order_relaxed);
    const double dev = std::abs(tr - 1.0);
    double prev = g_max_trace_dev.load(std::memory_order_relaxed);
    while (dev > prev && !g_max_trace_dev.compare_exchange_weak(prev, dev)) {
    }
    if (dev > kTraceTolerance) {
        throw NumericalError("trace drifted to " + std::to_string(tr) + " during simulation");
    }
}

void apply_superop_1q(cplx *rho, std::size_t n, std::size_t q, const Mat4 &s) {
    const std::size_t d = std::size_t{1} << n, m = std::size_t{1} << q;
    // Real/imaginary parts of the 16 coefficients, hoisted for the compiler.
    double sr[16], si[16];
    for (int i = 0; i < 16; ++i) {
        sr[i] = s[i].real();
        si[i] = s[i].imag();
    }
    for (std::size_t rb = 0; rb < d; rb += 2 * m) {
        for (std::size_t r = rb; r < rb + m; ++r) {
            double *__restrict row0 = reinterpret_cast<double *>(rho + r * d);
            double *__restrict row1 = reinterpret_cast<double *>(rho + (r | m) * d);
            for (std::size_t cb = 0; cb < d; cb += 2 * m) {
#pragma GCC ivdep
                for (std::size_t c = cb; c < cb + m; ++c) {
                    const std::size_t c0 = 2 * c, c1 = 2 * (c | m);
                    const double ar = row0[c0], ai = row0[c0 + 1], br = row0[c1], bi = row0[c1 + 1];
                    const double er = row1[c0], ei = row1[c0 + 1], fr = row1[c1], fi = row1[c1 + 1];
                    double out[8];
                    for (int k = 0; k < 4; ++k) {
                        const double *xr = sr + 4 * k, *xi = si + 4 * k;
                        out[2 * k] = xr[0] * ar - xi[0] * ai + xr[1] * br - xi[1] * bi + xr[2] * er - xi[2] * ei +
                                     xr[3] * fr - xi[3] * fi;
                        out[2 * k + 1] = xr[0] * ai + xi[0] * ar + xr[1] * bi + xi[1] * br + xr[2] * ei +
                                         xi[2] * er + xr[3] * fi + xi[3] * fr;
                    }
                    row0[c0] = out[0], row0[c0 + 1] = out[1];
                    row0[c1] = out[2], row0[c1 + 1] = out[3];
                    row1[c0] = out[4], row1[c0 + 1] = out[5];
                    row1[c1] = out[6], row1[c1 + 1] = out[7];
                }
            }
        }
    }
}

void apply_phase_1q(cplx *rho, std::size_t n, std::size_t q, double angle) {
    const std::size_t d = std::size_t{1} << n, m = std::size_t{1} << q;
    const cplx up = std::polar(1.0, angle), down = std::conj(up);
    for (std::size_t r = 0; r < d; ++r) {
        cplx *row = rho + r * d;
        const bool rbit = r & m;
        const cplx f = rbit ? up : down;
        // Columns whose bit q differs from the row's.
        for (std::size_t cb = rbit ? 0 : m; cb < d; cb += 2 * m) {
            for (std::size_t c = cb; c < cb + m; ++c) {
                row[c] *= f;
            }
        }
    }
}

using Relaxation = NoiseModel::Relaxation;

// Amplitude damping plus dephasing on one wire, with an overall factor
// `scale`. The coefficients are real, so each row is a streaming loop.
void relax_1q(cplx *rho, std::size_t n, std::size_t q, const Relaxation &r, double scale, bool adjoint) {
    const std::size_t d = std::size_t{1} << n, m = std::size_t{1} << q;
    const double g = scale * r.gamma, k = scale * r.keep, h = scale * (1.0 - r.gamma);
    for (std::size_t rb = 0; rb < d; rb += 2 * m) {
        for (std::size_t row = rb; row < rb + m; ++row) {
            cplx *__restrict row0 = rho + row * d;
            cplx *__restrict row1 = rho + (row | m) * d;
            for (std::size_t cb = 0; cb < d; cb += 2 * m) {
#pragma GCC ivdep
                for (std::size_t c = cb; c < cb + m; ++c) {
                    if (!adjoint) {
                        row0[c] = scale * row0[c] + g * row1[c | m];
                        row1[c | m] *= h;
                    } else {
                        row1[c | m] = g * row0[c] + h * row1[c | m];
                        row0[c] *= scale;
                    }
                    row0[c | m] *= k;
                    row1[c] *= k;
                }
            }
        }
    }
}

// Adds w * Tr_ab(rho) (x) I. With w = p / (4 (1 - p)) and a later overall
// factor (1 - p) this is two-qubit depolarizing.
void add_partial_trace(cplx *rho, std::size_t n, std::size_t ma, std::size_t mb, double w) {
    const std::size_t d = std::size_t{1} << n, mask = ma | mb;
    const std::size_t off[4] = {0, ma, mb, ma | mb};
    for (std::size_t r = 0; r < d; ++r) {
        if (r & mask) {
            continue;
        }
        cplx *rows[4];
        for (int i = 0; i < 4; ++i) {
            rows[i] = rho + (r | off[i]) * d;
        }
        for (std::size_t c = 0; c < d; ++c) {
            if (c & mask) {
                continue;
            }
            const cplx tr = w * (rows[0][c] + rows[1][c | ma] + rows[2][c | mb] + rows[3][c | ma | mb]);
            rows[0][c] += tr;
            rows[1][c | ma] += tr;
            rows[2][c | mb] += tr;
            rows[3][c | ma | mb] += tr;
        }
    }
}

// CX(a->b) exchanges |a=1,b=0> with |a=1,b=1>; SWAP exchanges |10> with |01>.
// Both are involutions, so the same row and column swap serves the adjoint.
void permute_2q(cplx *rho, std::size_t n, const Step &step) {
    const std::size_t d = std::size_t{1} << n;
    const std::size_t ma = std::size_t{1} << step.q0, mb = std::size_t{1} << step.q1;
    const std::size_t mask = ma | mb;
    const bool cx = step.kind == Step::Kind::CX;
    const std::size_t x = ma, y = cx ? (ma | mb) : mb;
    for (std::size_t r = 0; r < d; ++r) {
        if (!(r & mask)) {
            std::swap_ranges(rho + (r | x) * d, rho + (r | x) * d + d, rho + (r | y) * d);
        }
    }
    for (std::size_t r = 0; r < d; ++r) {
        cplx *row = rho + r * d;
        for (std::size_t c = 0; c < d; ++c) {
            if (!(c & mask)) {
                std::swap(row[c | x], row[c | y]);
            }
        }
    }
}

void apply_two_qubit(cplx *rho, std::size_t n, const Step &step, bool adjoint) {
    const std::size_t ma = std::size_t{1} << step.q0, mb = std::size_t{1} << step.q1;
    if (!adjoint) {
        permute_2q(rho, n, step);
    }
    if (const auto *nz = step.noise) {
        const double p = nz->depolarizing;
        if (!adjoint) {
            if (p != 0.0) {
                add_partial_trace(rho, n, ma, mb, p / (4.0 * (1.0 - p)));
            }
            relax_1q(rho, n, step.q0, nz->relax_a, 1.0, false);
            relax_1q(rho, n, step.q1, nz->relax_b, 1.0 - p, false);
        } else {
            relax_1q(rho, n, step.q1, nz->relax_b, 1.0 - p, true);
            relax_1q(rho, n, step.q0, nz->relax_a, 1.0, true);
            if (p != 0.0) {
                add_partial_trace(rho, n, ma, mb, p / (4.0 * (1.0 - p)));
            }
        }
    }
    if (adjoint) {
        permute_2q(rho, n, step);
    }
}

Mat2 pauli(int k) {
    switch (k) {
        case 1:
            return {0.0, 1.0, 1.0, 0.0};
        case 2:
            return {0.0, cplx{0, -1}, cplx{0, 1}, 0.0};
        case 3:
            return {1.0, 0.0, 0.0, -1.0};
        default:
            return mat2_identity();
    }
}

bool is_phase_gate(Gate g) { return g == Gate::RZ || g == Gate::U1; }

}  // namespace

// ---------------------------------------------------------------- states

DensityState::DensityState(std::size_t n_qubits) : n_(n_qubits) {
    check_width(n_qubits);
    data_.assign(dim() * dim(), 0.0);
    data_[0] = 1.0;
}

DensityState::DensityState(std::size_t n_qubits, std::vector<cplx> matrix) : n_(n_qubits), data_(std::move(matrix)) {
    check_width(n_qubits);
    if (data_.size() != dim() * dim()) {
        throw ValidationError("density matrix has " + std::to_string(data_.size()) + " entries, expected " +
                              std::to_string(dim() * dim()));
    }
}

DensityState DensityState::from_amplitudes(std::span<const cplx> amplitudes) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < amplitudes.size()) {
        ++n;
    }
    if ((std::size_t{1} << n) != amplitudes.size()) {
        throw ValidationError("amplitude vector length is not a power of two");
    }
    std::vector<cplx> m(amplitudes.size() * amplitudes.size());
    for (std::size_t r = 0; r < amplitudes.size(); ++r) {
        for (std::size_t c = 0; c < amplitudes.size(); ++c) {
            m[r * amplitudes.size() + c] = amplitudes[r] * std::conj(amplitudes[c]);
        }
    }
    return DensityState(n, std::move(m));
}

DensityState DensityState::zeros(std::size_t n_qubits) {
    DensityState s(n_qubits);
    s.data_[0] = 0.0;
    return s;
}

double DensityState::trace() const {
    double t = 0;
    for (std::size_t i = 0; i < dim(); ++i) {
        t += data_[i * dim() + i].real();
    }
    return t;
}

std::vector<double> DensityState::diagonal() const {
    std::vector<double> out(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        out[i] = data_[i * dim() + i].real();
    }
    return out;
}

double DensityState::hermiticity_error() const {
    double m = 0;
    for (std::size_t r = 0; r < dim(); ++r) {
        for (std::size_t c = r; c < dim(); ++c) {
            m = std::max(m, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
        }
    }
    return m;
}

void DensityState::add_scaled(const DensityState &other, double w) {
    if (other.n_ != n_) {
        throw ValidationError("add_scaled on states of different width");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += w * other.data_[i];
    }
}

StateVector::StateVector(std::size_t n_qubits) : n_(n_qubits) {
    check_width(n_qubits);
    amps_.assign(std::size_t{1} << n_qubits, 0.0);
    amps_[0] = 1.0;
}

void StateVector::apply_1q(std::size_t q, const Mat2 &u) {
    const std::size_t m = std::size_t{1} << q, d = dim();
    for (std::size_t b = 0; b < d; b += 2 * m) {
        for (std::size_t i = b; i < b + m; ++i) {
            const cplx a0 = amps_[i], a1 = amps_[i | m];
            amps_[i] = u[0] * a0 + u[1] * a1;
            amps_[i | m] = u[2] * a0 + u[3] * a1;
        }
    }
}

void StateVector::apply_cx(std::size_t control, std::size_t target) {
    const std::size_t mc = std::size_t{1} << control, mt = std::size_t{1} << target;
    for (std::size_t i = 0; i < dim(); ++i) {
        if ((i & mc) && !(i & mt)) {
            std::swap(amps_[i], amps_[i | mt]);
        }
    }
}

void StateVector::apply_swap(std::size_t a, std::size_t b) {
    const std::size_t ma = std::size_t{1} << a, mb = std::size_t{1} << b;
    for (std::size_t i = 0; i < dim(); ++i) {
        if ((i & ma) && !(i & mb)) {
            std::swap(amps_[i], amps_[(i & ~ma) | mb]);
        }
    }
}

void StateVector::apply(const GateOp &op) {
    for (auto q : op.qubits) {
        if (q >= n_) {
            throw ValidationError("gate touches qubit " + std::to_string(q) + " outside the register");
        }
    }
    switch (op.gate) {
        case Gate::CX:
            apply_cx(op.qubits[0], op.qubits[1]);
            return;
        case Gate::SWAP:
            apply_swap(op.qubits[0], op.qubits[1]);
            return;
        case Gate::RESET:
            throw ValidationError("reset is not unitary; use the density-matrix engine");
        case Gate::ID:
            return;
        default:
            apply_1q(op.qubits[0], gate_matrix(op.gate, op.params));
    }
}

void StateVector::apply(const CircuitIR &circuit) {
    if (circuit.n_qubits() > n_) {
        throw ValidationError("circuit is wider than the state vector");
    }
    for (const auto &op : circuit.ops()) {
        apply(op);
    }
}

double StateVector::expectation_z(std::size_t q) const {
    if (q >= n_) {
        throw ValidationError("qubit index " + std::to_string(q) + " out of range");
    }
    const std::size_t m = std::size_t{1} << q;
    double z = 0;
    for (std::size_t i = 0; i < dim(); ++i) {
        z += (i & m ? -1.0 : 1.0) * std::norm(amps_[i]);
    }
    return z;
}

// ---------------------------------------------------------------- channels

std::vector<Mat2> depolarizing_kraus(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("depolarizing probability out of [0,1]");
    }
    std::vector<Mat2> k;
    for (int i = 0; i < 4; ++i) {
        const double w = std::sqrt(i == 0 ? 1.0 - 3.0 * p / 4.0 : p / 4.0);
        Mat2 m = pauli(i);
        for (auto &x : m) {
            x *= w;
        }
        k.push_back(m);
    }
    return k;
}

std::vector<Mat2> thermal_relaxation_kraus(double t1_ns, double t2_ns, double duration_ns) {
    if (!(t1_ns > 0) || !(t2_ns > 0) || t2_ns > 2 * t1_ns * (1 + 1e-12) || duration_ns < 0) {
        throw ValidationError("thermal relaxation needs t1 > 0, 0 < t2 <= 2 t1, duration >= 0");
    }
    const double gamma = 1.0 - std::exp(-duration_ns / t1_ns);
    const double lambda = std::clamp(1.0 - std::exp(-2.0 * duration_ns / t2_ns + duration_ns / t1_ns), 0.0, 1.0);
    const double keep = std::sqrt((1.0 - gamma) * (1.0 - lambda));
    // Amplitude damping followed by phase damping, multiplied out.
    return {
        Mat2{1.0, 0.0, 0.0, keep},
        Mat2{0.0, std::sqrt(gamma), 0.0, 0.0},
        Mat2{0.0, 0.0, 0.0, std::sqrt((1.0 - gamma) * lambda)},
    };
}

double kraus_completeness_error(std::span<const Mat2> kraus) {
    Mat2 sum{};
    for (const auto &k : kraus) {
        const Mat2 kk = mat2_mul(mat2_adjoint(k), k);
        for (int i = 0; i < 4; ++i) {
            sum[i] += kk[i];
        }
    }
    const Mat2 id = mat2_identity();
    double m = 0;
    for (int i = 0; i < 4; ++i) {
        m = std::max(m, std::abs(sum[i] - id[i]));
    }
    return m;
}

std::size_t pulse_count(Gate g) {
    switch (g) {
        case Gate::RZ:
        case Gate::U1:
        case Gate::RESET:
            return 0;
        case Gate::U3:
            return 2;
        case Gate::CX:
            return 1;
        case Gate::SWAP:
            return 3;
        default:
            return 1;
    }
}

// ---------------------------------------------------------------- noise model

NoiseModel::NoiseModel(const Configuration &config) : NoiseModel(config.hardware(), config.physical_qubits()) {}

NoiseModel::NoiseModel(const HardwareSnapshot &snapshot, std::vector<std::size_t> physical)
    : physical_(std::move(physical)) {
    check_width(physical_.size());
    for (auto p : physical_) {
        if (p >= snapshot.num_qubits()) {
            throw ValidationError("no calibration for physical qubit " + std::to_string(p) + " on " +
                                  snapshot.name());
        }
    }
    auto checked = [](const std::vector<Mat2> &k, const char *what) {
        if (kraus_completeness_error(k) > kKrausTolerance) {
            throw NumericalError(std::string(what) + " Kraus operators are not trace preserving");
        }
        return kraus_superop(k);
    };
    for (auto p : physical_) {
        const auto &cal = snapshot.qubit(p);
        Wire w;
        w.err_1q = cal.err_1q;
        w.p01 = cal.readout_p01;
        w.p10 = cal.readout_p10;
        w.cal = cal;
        for (std::size_t gi = 0; gi < w.noise.size(); ++gi) {
            const Gate g = static_cast<Gate>(gi);
            w.noise[gi] = mat4_identity();
            if (gate_arity(g) != 1 || g == Gate::RESET) {
                continue;
            }
            const std::size_t pulses = pulse_count(g);
            if (pulses == 0) {
                continue;
            }
            const double p = 1.0 - std::pow(1.0 - cal.err_1q, static_cast<double>(pulses));
            const double t = static_cast<double>(pulses) * cal.duration_ns(gate_name(g));
            const Mat4 depol = checked(depolarizing_kraus(p), "depolarizing");
            const Mat4 relax = checked(thermal_relaxation_kraus(cal.t1_us * 1e3, cal.t2_us * 1e3, t), "relaxation");
            w.noise[gi] = mat4_mul(relax, depol);
            w.noisy[gi] = true;
        }
        wires_.push_back(std::move(w));
    }
    for (std::size_t a = 0; a < physical_.size(); ++a) {
        for (std::size_t b = 0; b < physical_.size(); ++b) {
            if (a == b) {
                continue;
            }
            const auto err = snapshot.edge_error(physical_[a], physical_[b]);
            if (!err) {
                continue;
            }
            TwoQubitNoise tq;
            tq.depolarizing = *err;
            if (!(*err >= 0.0 && *err <= 1.0)) {
                throw ValidationError("two-qubit error out of [0,1]");
            }
            const double t = wires_[a].cal.duration_ns("cx");
            for (auto [wire, dst] : {std::pair{a, &tq.relax_a}, std::pair{b, &tq.relax_b}}) {
                const auto &cal = wires_[wire].cal;
                const auto k = thermal_relaxation_kraus(cal.t1_us * 1e3, cal.t2_us * 1e3, t);
                const Mat4 sup = checked(k, "relaxation");
                dst->gamma = sup[3].real();
                dst->keep = sup[5].real();
            }
            pairs_[{a, b}] = tq;
        }
    }
}

double NoiseModel::gate_error(Gate g, std::size_t wire) const {
    const std::size_t pulses = pulse_count(g);
    return 1.0 - std::pow(1.0 - wires_.at(wire).err_1q, static_cast<double>(pulses));
}

double NoiseModel::gate_duration_ns(Gate g, std::size_t wire) const {
    const auto &cal = wires_.at(wire).cal;
    if (g == Gate::CX) {
        return cal.duration_ns("cx");
    }
    return static_cast<double>(pulse_count(g)) * cal.duration_ns(gate_name(g));
}

const Mat4 &NoiseModel::noise_superop(Gate g, std::size_t wire) const {
    return wires_.at(wire).noise.at(static_cast<std::size_t>(g));
}

const NoiseModel::TwoQubitNoise &NoiseModel::cx_noise(std::size_t a, std::size_t b) const {
    const auto it = pairs_.find({a, b});
    if (it == pairs_.end()) {
        throw ValidationError("wires " + std::to_string(a) + " and " + std::to_string(b) +
                              " are not coupled on this configuration");
    }
    return it->second;
}

double NoiseModel::readout_expectation(double z, std::size_t wire) const {
    const auto &w = wires_.at(wire);
    return (1.0 - w.p01 - w.p10) * z + (w.p10 - w.p01);
}

double NoiseModel::readout_scale(std::size_t wire) const {
    const auto &w = wires_.at(wire);
    return 1.0 - w.p01 - w.p10;
}

// ---------------------------------------------------------------- programs

namespace {

Mat4 step_superop(const Step &s) {
    if (s.kind == Step::Kind::Phase) {
        Mat4 m{};
        m[0] = 1.0;
        m[5] = std::polar(1.0, -s.angle);
        m[10] = std::polar(1.0, s.angle);
        m[15] = 1.0;
        return m;
    }
    return s.superop;
}

Step as_step(std::uint8_t q, const Mat4 &m) {
    Step s;
    s.q0 = q;
    const bool diagonal = std::abs(m[1]) + std::abs(m[2]) + std::abs(m[3]) + std::abs(m[4]) + std::abs(m[6]) +
                              std::abs(m[7]) + std::abs(m[8]) + std::abs(m[9]) + std::abs(m[11]) +
                              std::abs(m[12]) + std::abs(m[13]) + std::abs(m[14]) ==
                          0.0;
    if (diagonal && m[0] == 1.0 && m[15] == 1.0 && std::abs(m[10] - std::conj(m[5])) < 1e-15 &&
        std::abs(std::abs(m[10]) - 1.0) < 1e-15) {
        s.kind = Step::Kind::Phase;
        s.angle = std::arg(m[10]);
    } else {
        s.superop = m;
    }
    return s;
}

Program fuse_single_qubit(const Program &in) {
    Program out;
    out.n_qubits = in.n_qubits;
    std::vector<std::optional<Mat4>> pending(in.n_qubits);
    auto flush = [&](std::size_t q) {
        if (pending[q]) {
            out.steps.push_back(as_step(static_cast<std::uint8_t>(q), *pending[q]));
            pending[q].reset();
        }
    };
    for (const auto &s : in.steps) {
        if (s.kind == Step::Kind::Superop || s.kind == Step::Kind::Phase) {
            const Mat4 m = step_superop(s);
            pending[s.q0] = pending[s.q0] ? mat4_mul(m, *pending[s.q0]) : m;
            continue;
        }
        flush(s.q0);
        flush(s.q1);
        out.steps.push_back(s);
    }
    for (std::size_t q = 0; q < in.n_qubits; ++q) {
        flush(q);
    }
    return out;
}

}  // namespace

Program compile(const CircuitIR &circuit, const NoiseModel *noise, bool fuse) {
    check_width(circuit.n_qubits());
    if (noise && circuit.n_qubits() > noise->size()) {
        throw ValidationError("circuit touches wires without calibration (" + std::to_string(circuit.n_qubits()) +
                              " > " + std::to_string(noise->size()) + ")");
    }
    Program prog;
    prog.n_qubits = circuit.n_qubits();
    const auto &ops = circuit.ops();
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const auto &op = ops[i];
        const auto q0 = static_cast<std::uint8_t>(op.qubits[0]);
        if (op.gate == Gate::CX || op.gate == Gate::SWAP) {
            const auto q1 = static_cast<std::uint8_t>(op.qubits[1]);
            if (op.gate == Gate::SWAP && noise) {
                for (auto [a, b] : {std::pair{q0, q1}, std::pair{q1, q0}, std::pair{q0, q1}}) {
                    Step s;
                    s.kind = Step::Kind::CX;
                    s.q0 = a, s.q1 = b;
                    s.noise = &noise->cx_noise(a, b);
                    prog.steps.push_back(s);
                }
                continue;
            }
            Step s;
            s.kind = op.gate == Gate::CX ? Step::Kind::CX : Step::Kind::Swap;
            s.q0 = q0, s.q1 = q1;
            if (noise) {
                s.noise = &noise->cx_noise(q0, q1);
            }
            prog.steps.push_back(s);
            continue;
        }
        if (op.gate == Gate::RESET) {
            const std::array<Mat2, 2> k{Mat2{1.0, 0.0, 0.0, 0.0}, Mat2{0.0, 1.0, 0.0, 0.0}};
            Step s;
            s.q0 = q0;
            s.superop = kraus_superop(k);
            prog.steps.push_back(s);
            continue;
        }
        const bool noisy = noise && pulse_count(op.gate) > 0;
        const bool tagged = !op.tags.empty();
        Step s;
        s.q0 = q0;
        if (tagged) {
            s.tagged_op = static_cast<std::int32_t>(i);
        }
        if (is_phase_gate(op.gate) && (tagged || !noisy)) {
            s.kind = Step::Kind::Phase;
            s.angle = op.params[0];
            prog.steps.push_back(s);
        } else if (op.gate == Gate::ID && !noisy) {
            continue;
        } else {
            s.superop = unitary_superop(gate_matrix(op.gate, op.params));
            if (noisy && !tagged) {
                s.superop = mat4_mul(noise->noise_superop(op.gate, op.qubits[0]), s.superop);
                prog.steps.push_back(s);
                continue;
            }
            prog.steps.push_back(s);
        }
        if (noisy) {
            Step n;
            n.q0 = q0;
            n.superop = noise->noise_superop(op.gate, op.qubits[0]);
            prog.steps.push_back(n);
        }
    }
    return fuse ? fuse_single_qubit(prog) : prog;
}

void apply_step(DensityState &state, const Step &step, bool adjoint) {
    cplx *rho = state.data().data();
    const std::size_t n = state.n_qubits();
    switch (step.kind) {
        case Step::Kind::Superop:
            apply_superop_1q(rho, n, step.q0, adjoint ? mat4_adjoint(step.superop) : step.superop);
            break;
        case Step::Kind::Phase:
            apply_phase_1q(rho, n, step.q0, adjoint ? -step.angle : step.angle);
            break;
        case Step::Kind::CX:
        case Step::Kind::Swap:
            apply_two_qubit(rho, n, step, adjoint);
            break;
    }
}

void apply_program(DensityState &state, const Program &program, bool check_trace) {
    if (program.n_qubits != state.n_qubits()) {
        throw ValidationError("program and state widths differ");
    }
    for (const auto &step : program.steps) {
        apply_step(state, step, false);
        if (check_trace) {
            record_trace(state.trace());
        }
    }
}

void apply_program_adjoint(DensityState &state, const Program &program) {
    if (program.n_qubits != state.n_qubits()) {
        throw ValidationError("program and state widths differ");
    }
    for (auto it = program.steps.rbegin(); it != program.steps.rend(); ++it) {
        apply_step(state, *it, true);
    }
}

double trace_product(const DensityState &a, const DensityState &b) {
    const auto x = a.data(), y = b.data();
    double t = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        t += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    }
    return t;
}

double trace_product_after(const DensityState &b, const DensityState &f, std::size_t q, const Mat4 &s) {
    const std::size_t d = f.dim(), m = std::size_t{1} << q;
    const cplx *rho = f.data().data();
    const cplx *obs = b.data().data();
    double t = 0;
    auto acc = [&t](cplx o, cplx v) { t += o.real() * v.real() + o.imag() * v.imag(); };
    for (std::size_t rb = 0; rb < d; rb += 2 * m) {
        for (std::size_t r = rb; r < rb + m; ++r) {
            const cplx *row0 = rho + r * d, *row1 = rho + (r | m) * d;
            const cplx *o0 = obs + r * d, *o1 = obs + (r | m) * d;
            for (std::size_t cb = 0; cb < d; cb += 2 * m) {
                for (std::size_t c = cb; c < cb + m; ++c) {
                    const cplx a = row0[c], bb = row0[c | m], e = row1[c], ff = row1[c | m];
                    acc(o0[c], s[0] * a + s[1] * bb + s[2] * e + s[3] * ff);
                    acc(o0[c | m], s[4] * a + s[5] * bb + s[6] * e + s[7] * ff);
                    acc(o1[c], s[8] * a + s[9] * bb + s[10] * e + s[11] * ff);
                    acc(o1[c | m], s[12] * a + s[13] * bb + s[14] * e + s[15] * ff);
                }
            }
        }
    }
    return t;
}

DensityState z_observable(std::size_t n_qubits, std::size_t q) {
    if (q >= n_qubits) {
        throw ValidationError("qubit index " + std::to_string(q) + " out of range");
    }
    DensityState z = DensityState::zeros(n_qubits);
    for (std::size_t i = 0; i < z.dim(); ++i) {
        z(i, i) = (i >> q) & 1 ? -1.0 : 1.0;
    }
    return z;
}

DensityState run(const CircuitIR &circuit, const NoiseModel *noise) {
    return run(circuit, DensityState(circuit.n_qubits()), noise);
}

DensityState run(const CircuitIR &circuit, DensityState initial, const NoiseModel *noise) {
    if (initial.n_qubits() != circuit.n_qubits()) {
        throw ValidationError("initial state width does not match the circuit");
    }
    const Program prog = compile(circuit, noise, true);
    apply_program(initial, prog, true);
    return initial;
}

double expectation_z(const DensityState &state, std::size_t qubit) {
    if (qubit >= state.n_qubits()) {
        throw ValidationError("qubit index " + std::to_string(qubit) + " out of range for " +
                              std::to_string(state.n_qubits()) + "-qubit state");
    }
    double z = 0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        z += ((i >> qubit) & 1 ? -1.0 : 1.0) * state(i, i).real();
    }
    return z;
}

std::map<std::string, std::size_t> sample_counts(const DensityState &state, std::size_t shots,
                                                 const NoiseModel *noise, std::uint64_t seed) {
    if (shots == 0) {
        throw ValidationError("shots must be >= 1");
    }
    const std::size_t n = state.n_qubits();
    if (noise && noise->size() < n) {
        throw ValidationError("noise model covers fewer wires than the state");
    }
    std::vector<double> probs = state.diagonal();
    for (auto &p : probs) {
        p = std::max(p, 0.0);
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> born(probs.begin(), probs.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> hist(state.dim(), 0);
    for (std::size_t s = 0; s < shots; ++s) {
        std::size_t outcome = born(rng);
        if (noise) {
            for (std::size_t q = 0; q < n; ++q) {
                const bool one = (outcome >> q) & 1;
                const double flip = one ? noise->readout_p10(q) : noise->readout_p01(q);
                if (unit(rng) < flip) {
                    outcome ^= std::size_t{1} << q;
                }
            }
        }
        ++hist[outcome];
    }
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (hist[i] == 0) {
            continue;
        }
        std::string key(n, '0');
        for (std::size_t q = 0; q < n; ++q) {
            if ((i >> q) & 1) {
                key[n - 1 - q] = '1';
            }
        }
        counts[key] = hist[i];
    }
    return counts;
}

double counts_expectation_z(const std::map<std::string, std::size_t> &counts, std::size_t qubit) {
    double total = 0, z = 0;
    for (const auto &[key, k] : counts) {
        if (qubit >= key.size()) {
            throw ValidationError("qubit index out of range for bitstring");
        }
        const bool one = key[key.size() - 1 - qubit] == '1';
        z += (one ? -1.0 : 1.0) * static_cast<double>(k);
        total += static_cast<double>(k);
    }
    if (total == 0) {
        throw ValidationError("empty counts");
    }
    return z / total;
}

std::uint64_t trace_check_count() { return g_trace_checks.load(); }
double max_trace_deviation() { return g_max_trace_dev.load(); }

}  // namespace qhw
