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
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhw/calibration.hpp"
#include "qhw/circuits.hpp"
#include "qhw/linalg.hpp"

namespace qhw {

inline constexpr std::size_t kMaxSimQubits = 8;

/// Row-major 2^n x 2^n density matrix; basis index bit q is qubit q.
class DensityState {
   public:
    /// |0...0><0...0|
    explicit DensityState(std::size_t n_qubits);
    DensityState(std::size_t n_qubits, std::vector<cplx> matrix);
    static DensityState from_amplitudes(std::span<const cplx> amplitudes);
    /// Zero operator; used for unnormalised Hermitian accumulators.
    static DensityState zeros(std::size_t n_qubits);

    std::size_t n_qubits() const { return n_; }
    std::size_t dim() const { return std::size_t{1} << n_; }
    cplx operator()(std::size_t r, std::size_t c) const { return data_[r * dim() + c]; }
    cplx &operator()(std::size_t r, std::size_t c) { return data_[r * dim() + c]; }
    std::span<const cplx> data() const { return data_; }
    std::span<cplx> data() { return data_; }

    double trace() const;
    std::vector<double> diagonal() const;
    /// max |rho - rho^dagger| entry.
    double hermiticity_error() const;
    /// rho += w * other
    void add_scaled(const DensityState &other, double w);

   private:
    std::size_t n_;
    std::vector<cplx> data_;
};

class StateVector {
   public:
    explicit StateVector(std::size_t n_qubits);
    std::size_t n_qubits() const { return n_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const cplx> amplitudes() const { return amps_; }
    std::span<cplx> amplitudes() { return amps_; }

    void apply_1q(std::size_t q, const Mat2 &u);
    void apply_cx(std::size_t control, std::size_t target);
    void apply_swap(std::size_t a, std::size_t b);
    /// Applies every op; reset is rejected.
    void apply(const CircuitIR &circuit);
    void apply(const GateOp &op);
    double expectation_z(std::size_t q) const;

   private:
    std::size_t n_;
    std::vector<cplx> amps_;
};

/// Kraus sets for the channels used by the noise model.
std::vector<Mat2> depolarizing_kraus(double p);
std::vector<Mat2> thermal_relaxation_kraus(double t1_ns, double t2_ns, double duration_ns);
/// max |sum K^dagger K - I| entry.
double kraus_completeness_error(std::span<const Mat2> kraus);

/// Physical pulses a basis gate costs; virtual-Z gates cost none.
std::size_t pulse_count(Gate g);

/// Calibration-derived noise for the qubits of one configuration. Wire i of a
/// transpiled circuit is physical qubit physical[i].
class NoiseModel {
   public:
    explicit NoiseModel(const Configuration &config);
    NoiseModel(const HardwareSnapshot &snapshot, std::vector<std::size_t> physical);

    std::size_t size() const { return wires_.size(); }
    const std::vector<std::size_t> &physical_qubits() const { return physical_; }

    /// Effective depolarising probability of one 1Q gate on a wire.
    double gate_error(Gate g, std::size_t wire) const;
    double gate_duration_ns(Gate g, std::size_t wire) const;
    /// Post-gate noise superoperator (depolarising then thermal relaxation).
    const Mat4 &noise_superop(Gate g, std::size_t wire) const;

    /// Amplitude + phase damping: |1><1| leaks `gamma` into |0><0| and
    /// coherences shrink by `keep`.
    struct Relaxation {
        double gamma = 0;
        double keep = 1;
    };
    struct TwoQubitNoise {
        double depolarizing = 0;
        Relaxation relax_a;
        Relaxation relax_b;
    };
    /// Throws ValidationError when the wires are not coupled.
    const TwoQubitNoise &cx_noise(std::size_t a, std::size_t b) const;

    double readout_p01(std::size_t wire) const { return wires_.at(wire).p01; }
    double readout_p10(std::size_t wire) const { return wires_.at(wire).p10; }
    /// <Z> as seen through the readout confusion matrix.
    double readout_expectation(double z, std::size_t wire) const;
    /// d(readout_expectation)/dz
    double readout_scale(std::size_t wire) const;

   private:
    struct Wire {
        double err_1q = 0;
        double p01 = 0;
        double p10 = 0;
        QubitCalibration cal;
        std::array<Mat4, 13> noise{};
        std::array<bool, 13> noisy{};
    };
    std::vector<std::size_t> physical_;
    std::vector<Wire> wires_;
    std::map<std::pair<std::size_t, std::size_t>, TwoQubitNoise> pairs_;
};

/// A circuit lowered to superoperator steps. Tagged 1Q gates keep their
/// unitary apart from their noise so that shifted evaluations can replace
/// it.
struct Step {
    enum class Kind : std::uint8_t { Superop, Phase, CX, Swap };
    Kind kind = Kind::Superop;
    std::uint8_t q0 = 0;
    std::uint8_t q1 = 0;
    /// Phase: relative phase e^{i angle} on |1>.
    double angle = 0;
    Mat4 superop{};
    /// CX/Swap noise; null when noiseless.
    const NoiseModel::TwoQubitNoise *noise = nullptr;
    /// Index of the source op when the step is a tagged unitary, else -1.
    std::int32_t tagged_op = -1;
};

struct Program {
    std::size_t n_qubits = 0;
    std::vector<Step> steps;
};

/// With `fuse`, runs of single-qubit steps on a wire collapse into one
/// superoperator and tagged steps lose their identity; use it for forward-only
/// evaluation.
Program compile(const CircuitIR &circuit, const NoiseModel *noise, bool fuse = false);

/// Applies steps[begin, end). `adjoint` walks backwards with each step's
/// adjoint map (Heisenberg picture).
void apply_step(DensityState &state, const Step &step, bool adjoint = false);
void apply_program(DensityState &state, const Program &program, bool check_trace);
void apply_program_adjoint(DensityState &state, const Program &program);

/// Tr(a b) for Hermitian a, b.
double trace_product(const DensityState &a, const DensityState &b);
/// Tr(b * S(f)) where S is a single-qubit superoperator on qubit q.
double trace_product_after(const DensityState &b, const DensityState &f, std::size_t q, const Mat4 &s);

/// Pauli Z_q as a DensityState-shaped operator.
DensityState z_observable(std::size_t n_qubits, std::size_t q);

/// Evolves |0...0>. With noise, every touched wire takes its calibration
/// from `noise` (wire i = noise->physical_qubits()[i]).
DensityState run(const CircuitIR &circuit, const NoiseModel *noise = nullptr);
/// Same, starting from `initial`.
DensityState run(const CircuitIR &circuit, DensityState initial, const NoiseModel *noise = nullptr);

double expectation_z(const DensityState &state, std::size_t qubit);

/// Bitstrings are written with qubit n-1 leftmost.
std::map<std::string, std::size_t> sample_counts(const DensityState &state, std::size_t shots,
                                                 const NoiseModel *noise, std::uint64_t seed);
/// <Z_q> estimated from counts.
double counts_expectation_z(const std::map<std::string, std::size_t> &counts, std::size_t qubit);

/// Number of trace checks performed by run() since process start.
std::uint64_t trace_check_count();
/// Largest |trace - 1| observed by those checks.
double max_trace_deviation();

}  // namespace qhw
