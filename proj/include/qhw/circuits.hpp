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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qhw {

enum class Gate : std::uint8_t { H, X, SX, RX, RY, RZ, U1, U2, U3, CX, SWAP, ID, RESET };

std::string_view gate_name(Gate g);
Gate parse_gate(std::string_view name);
std::size_t gate_arity(Gate g);
std::size_t gate_param_count(Gate g);

/// Marks a trainable parameter that enters `params[slot]` additively with
/// unit coefficient. Tags survive decomposition and routing so shifted
/// evaluations can be made on the compiled circuit.
struct ParamTag {
    std::uint16_t slot = 0;
    std::uint32_t index = 0;

    friend bool operator==(const ParamTag &, const ParamTag &) = default;
};

struct GateOp {
    Gate gate = Gate::ID;
    std::vector<std::size_t> qubits;
    std::vector<double> params;
    std::vector<ParamTag> tags;

    friend bool operator==(const GateOp &, const GateOp &) = default;
};

class CircuitIR {
   public:
    CircuitIR() = default;
    explicit CircuitIR(std::size_t n_qubits) : n_qubits_(n_qubits) {}

    std::size_t n_qubits() const { return n_qubits_; }
    const std::vector<GateOp> &ops() const { return ops_; }
    std::vector<GateOp> &mutable_ops() { return ops_; }
    std::size_t size() const { return ops_.size(); }
    bool empty() const { return ops_.empty(); }

    /// Validates arity, parameter count, qubit range and finiteness.
    void append(GateOp op);
    void append(Gate g, std::vector<std::size_t> qubits, std::vector<double> params = {},
                std::vector<ParamTag> tags = {});
    void extend(const CircuitIR &other);

    /// Inverse circuit (reversed order, each gate inverted). Reset is rejected.
    CircuitIR inverse() const;

    friend bool operator==(const CircuitIR &, const CircuitIR &) = default;

   private:
    std::size_t n_qubits_ = 0;
    std::vector<GateOp> ops_;
};

/// Line-oriented text form: a `qubits N` header, then one op per line as
/// `name q0[ q1][ (p0,p1,...)]`.
std::string to_text(const CircuitIR &circuit);
CircuitIR parse_text(std::string_view text);

enum class Embedding { Angle, Amplitude };

struct ModelSpec {
    std::size_t n_qubits = 8;
    Embedding embedding = Embedding::Angle;
    std::size_t n_features = 4;
    std::size_t n_layers = 6;
    std::size_t range_r = 1;
    std::size_t n_classes = 3;

    /// Throws ValidationError when the invariants do not hold.
    void validate() const;
    std::size_t n_params() const { return n_layers * n_qubits * 3; }
    std::vector<std::size_t> measured_qubits() const;

    static ModelSpec iris();
    static ModelSpec digits(std::size_t range_r);
};

/// Rotation angles laid out as [layer][qubit][3], row-major.
class ParameterSet {
   public:
    ParameterSet() = default;
    ParameterSet(std::size_t n_layers, std::size_t n_qubits, double fill = 0.0);
    ParameterSet(std::size_t n_layers, std::size_t n_qubits, std::vector<double> values);

    static ParameterSet zeros_like(const ModelSpec &spec) { return {spec.n_layers, spec.n_qubits}; }

    std::size_t n_layers() const { return n_layers_; }
    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t size() const { return values_.size(); }

    double &operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double &at(std::size_t layer, std::size_t qubit, std::size_t k);
    double at(std::size_t layer, std::size_t qubit, std::size_t k) const;
    static std::size_t flat_index(std::size_t n_qubits, std::size_t layer, std::size_t qubit, std::size_t k) {
        return (layer * n_qubits + qubit) * 3 + k;
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::span<const double> layer(std::size_t l) const;

    bool matches(const ModelSpec &spec) const { return n_layers_ == spec.n_layers && n_qubits_ == spec.n_qubits; }

    friend bool operator==(const ParameterSet &, const ParameterSet &) = default;

   private:
    std::size_t n_layers_ = 0;
    std::size_t n_qubits_ = 0;
    std::vector<double> values_;
};

/// One RY per feature on qubits 0..k-1 of an `n_qubits` register.
CircuitIR angle_embedding(std::span<const double> features, std::size_t n_qubits = 8);

/// Uniformly-controlled RY state preparation of a real L2-normalised vector
/// of length 2^k on qubits 0..k-1; amplitude j sits on basis index j.
CircuitIR amplitude_embedding(std::span<const double> features, std::size_t n_qubits = 8);

/// Per-qubit RZ·RY·RZ rotation followed by CNOT(i, (i+r) mod n) for
/// i = 0..n-1. Rotations are tagged with parameter indices starting at
/// `first_param`.
CircuitIR sel_layer(std::size_t n_qubits, std::size_t range_r, std::span<const double> layer_params,
                    std::size_t first_param = 0);

CircuitIR build_embedding(const ModelSpec &spec, std::span<const double> features);
CircuitIR build_pqc(const ModelSpec &spec, const ParameterSet &params);
CircuitIR build_qnn(const ModelSpec &spec, std::span<const double> features, const ParameterSet &params);

}  // namespace qhw
