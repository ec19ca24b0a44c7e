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

#include "qhw/circuits.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "qhw/errors.hpp"

namespace qhw {

namespace {

struct GateInfo {
    Gate gate;
    std::string_view name;
    std::size_t arity;
    std::size_t n_params;
};

constexpr std::array<GateInfo, 13> kGates{{
    {Gate::H, "h", 1, 0},
    {Gate::X, "x", 1, 0},
    {Gate::SX, "sx", 1, 0},
    {Gate::RX, "rx", 1, 1},
    {Gate::RY, "ry", 1, 1},
    {Gate::RZ, "rz", 1, 1},
    {Gate::U1, "u1", 1, 1},
    {Gate::U2, "u2", 1, 2},
    {Gate::U3, "u3", 1, 3},
    {Gate::CX, "cx", 2, 0},
    {Gate::SWAP, "swap", 2, 0},
    {Gate::ID, "id", 1, 0},
    {Gate::RESET, "reset", 1, 0},
}};

const GateInfo &info(Gate g) { return kGates[static_cast<std::size_t>(g)]; }

double parse_double(std::string_view token) {
    std::string s(token);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != s.size()) {
        throw ValidationError("bad number '" + s + "' in circuit text");
    }
    return v;
}

}  // namespace

std::string_view gate_name(Gate g) { return info(g).name; }

Gate parse_gate(std::string_view name) {
    for (const auto &g : kGates) {
        if (g.name == name) {
            return g.gate;
        }
    }
    throw ValidationError("unsupported gate '" + std::string(name) + "'");
}

std::size_t gate_arity(Gate g) { return info(g).arity; }
std::size_t gate_param_count(Gate g) { return info(g).n_params; }

void CircuitIR::append(GateOp op) {
    const auto &gi = info(op.gate);
    if (op.qubits.size() != gi.arity) {
        throw ValidationError(std::string(gi.name) + " expects " + std::to_string(gi.arity) + " qubit(s)");
    }
    if (op.params.size() != gi.n_params) {
        throw ValidationError(std::string(gi.name) + " expects " + std::to_string(gi.n_params) + " parameter(s)");
    }
    for (auto q : op.qubits) {
        if (q >= n_qubits_) {
            throw ValidationError(std::string(gi.name) + " on qubit " + std::to_string(q) + " outside a " +
                                  std::to_string(n_qubits_) + "-qubit circuit");
        }
    }
    if (gi.arity == 2 && op.qubits[0] == op.qubits[1]) {
        throw ValidationError(std::string(gi.name) + " needs distinct qubits");
    }
    for (double p : op.params) {
        if (!std::isfinite(p)) {
            throw ValidationError(std::string(gi.name) + " has a non-finite angle");
        }
    }
    for (const auto &t : op.tags) {
        if (t.slot >= gi.n_params) {
            throw ValidationError(std::string(gi.name) + " tag refers to a missing parameter slot");
        }
    }
    ops_.push_back(std::move(op));
}

void CircuitIR::append(Gate g, std::vector<std::size_t> qubits, std::vector<double> params,
                       std::vector<ParamTag> tags) {
    append(GateOp{g, std::move(qubits), std::move(params), std::move(tags)});
}

void CircuitIR::extend(const CircuitIR &other) {
    if (other.n_qubits_ > n_qubits_) {
        throw ValidationError("cannot extend a circuit with a wider one");
    }
    for (const auto &op : other.ops_) {
        append(op);
    }
}

CircuitIR CircuitIR::inverse() const {
    using std::numbers::pi;
    CircuitIR out(n_qubits_);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        const auto &op = *it;
        const auto &p = op.params;
        switch (op.gate) {
            case Gate::H:
            case Gate::X:
            case Gate::CX:
            case Gate::SWAP:
            case Gate::ID:
                out.append(op.gate, op.qubits);
                break;
            case Gate::SX:
                out.append(Gate::RX, op.qubits, {-pi / 2});
                break;
            case Gate::RX:
            case Gate::RY:
            case Gate::RZ:
            case Gate::U1:
                out.append(op.gate, op.qubits, {-p[0]});
                break;
            case Gate::U2:
                out.append(Gate::U3, op.qubits, {-pi / 2, -p[1], -p[0]});
                break;
            case Gate::U3:
                out.append(Gate::U3, op.qubits, {-p[0], -p[2], -p[1]});
                break;
            case Gate::RESET:
                throw ValidationError("reset has no inverse");
        }
    }
    return out;
}

std::string to_text(const CircuitIR &circuit) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "qubits " << circuit.n_qubits() << '\n';
    for (const auto &op : circuit.ops()) {
        os << gate_name(op.gate);
        for (auto q : op.qubits) {
            os << ' ' << q;
        }
        if (!op.params.empty()) {
            os << " (";
            for (std::size_t i = 0; i < op.params.size(); ++i) {
                os << (i ? "," : "") << op.params[i];
            }
            os << ')';
        }
        os << '\n';
    }
    return os.str();
}

CircuitIR parse_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("empty circuit text");
    }
    std::istringstream header(line);
    std::string word;
    std::size_t n = 0;
    if (!(header >> word >> n) || word != "qubits") {
        throw ValidationError("circuit text must start with 'qubits N'");
    }
    CircuitIR circuit(n);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::string params_part;
        if (auto open = line.find('('); open != std::string::npos) {
            auto close = line.find(')', open);
            if (close == std::string::npos) {
                throw ValidationError("unterminated parameter list: " + line);
            }
            params_part = line.substr(open + 1, close - open - 1);
            line.resize(open);
        }
        std::istringstream fields(line);
        std::string name;
        fields >> name;
        GateOp op;
        op.gate = parse_gate(name);
        std::size_t q = 0;
        while (fields >> q) {
            op.qubits.push_back(q);
        }
        std::istringstream ps(params_part);
        std::string tok;
        while (std::getline(ps, tok, ',')) {
            op.params.push_back(parse_double(tok));
        }
        circuit.append(std::move(op));
    }
    return circuit;
}

void ModelSpec::validate() const {
    if (n_qubits == 0) {
        throw ValidationError("model needs at least one qubit");
    }
    if (embedding == Embedding::Angle) {
        if (n_features > n_qubits) {
            throw ValidationError("angle embedding needs n_features <= n_qubits");
        }
    } else {
        if (n_features == 0 || !std::has_single_bit(n_features) ||
            static_cast<std::size_t>(std::countr_zero(n_features)) > n_qubits) {
            throw ValidationError("amplitude embedding needs n_features = 2^k with k <= n_qubits");
        }
    }
    if (n_layers > 0 && (range_r < 1 || range_r > n_qubits - 1)) {
        throw ValidationError("range_r must lie in [1, n_qubits-1]");
    }
    if (n_classes == 0 || n_classes > n_qubits) {
        throw ValidationError("n_classes must lie in [1, n_qubits]");
    }
}

std::vector<std::size_t> ModelSpec::measured_qubits() const {
    std::vector<std::size_t> out(n_classes);
    for (std::size_t k = 0; k < n_classes; ++k) {
        out[k] = k;
    }
    return out;
}

ModelSpec ModelSpec::iris() { return {8, Embedding::Angle, 4, 6, 1, 3}; }

ModelSpec ModelSpec::digits(std::size_t range_r) { return {8, Embedding::Amplitude, 64, 3, range_r, 2}; }

ParameterSet::ParameterSet(std::size_t n_layers, std::size_t n_qubits, double fill)
    : n_layers_(n_layers), n_qubits_(n_qubits), values_(n_layers * n_qubits * 3, fill) {}

ParameterSet::ParameterSet(std::size_t n_layers, std::size_t n_qubits, std::vector<double> values)
    : n_layers_(n_layers), n_qubits_(n_qubits), values_(std::move(values)) {
    if (values_.size() != n_layers_ * n_qubits_ * 3) {
        throw ValidationError("parameter tensor has " + std::to_string(values_.size()) + " entries, expected " +
                              std::to_string(n_layers_ * n_qubits_ * 3));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw ValidationError("parameter tensor contains a non-finite value");
        }
    }
}

double &ParameterSet::at(std::size_t layer, std::size_t qubit, std::size_t k) {
    return values_.at(flat_index(n_qubits_, layer, qubit, k));
}

double ParameterSet::at(std::size_t layer, std::size_t qubit, std::size_t k) const {
    return values_.at(flat_index(n_qubits_, layer, qubit, k));
}

std::span<const double> ParameterSet::layer(std::size_t l) const {
    return std::span<const double>(values_).subspan(l * n_qubits_ * 3, n_qubits_ * 3);
}

CircuitIR angle_embedding(std::span<const double> features, std::size_t n_qubits) {
    if (features.size() > n_qubits) {
        throw ValidationError("angle embedding got " + std::to_string(features.size()) + " features for " +
                              std::to_string(n_qubits) + " qubits");
    }
    CircuitIR circuit(n_qubits);
    for (std::size_t q = 0; q < features.size(); ++q) {
        circuit.append(Gate::RY, {q}, {features[q]});
    }
    return circuit;
}

CircuitIR amplitude_embedding(std::span<const double> features, std::size_t n_qubits) {
    const std::size_t len = features.size();
    if (len == 0 || !std::has_single_bit(len)) {
        throw ValidationError("amplitude embedding needs a power-of-two length, got " + std::to_string(len));
    }
    const auto k = static_cast<std::size_t>(std::countr_zero(len));
    if (k > n_qubits) {
        throw ValidationError("amplitude embedding of length " + std::to_string(len) + " does not fit " +
                              std::to_string(n_qubits) + " qubits");
    }
    double norm2 = 0;
    for (double v : features) {
        if (!std::isfinite(v)) {
            throw ValidationError("amplitude embedding input is not finite");
        }
        norm2 += v * v;
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) {
        throw ValidationError("amplitude embedding input is not L2-normalised");
    }

    // Subtree norms: level t holds, per prefix of the top (k - t) bits, the
    // norm of all amplitudes under that prefix.
    std::vector<std::vector<double>> sq(k + 1);
    sq[0].assign(features.begin(), features.end());
    for (auto &v : sq[0]) {
        v = v * v;
    }
    for (std::size_t t = 1; t <= k; ++t) {
        const auto &prev = sq[t - 1];
        sq[t].resize(prev.size() / 2);
        for (std::size_t i = 0; i < sq[t].size(); ++i) {
            sq[t][i] = prev[2 * i] + prev[2 * i + 1];
        }
    }

    CircuitIR circuit(n_qubits);
    // Target qubit t is prepared conditioned on qubits t+1..k-1.
    for (std::size_t step = 0; step < k; ++step) {
        const std::size_t t = k - 1 - step;
        const std::size_t m = step;
        const std::size_t n_patterns = std::size_t{1} << m;

        std::vector<double> alpha(n_patterns);
        for (std::size_t c = 0; c < n_patterns; ++c) {
            const std::size_t left = c << 1;
            const std::size_t right = left | 1;
            if (t == 0) {
                alpha[c] = 2.0 * std::atan2(features[right], features[left]);
            } else {
                alpha[c] = 2.0 * std::atan2(std::sqrt(sq[t][right]), std::sqrt(sq[t][left]));
            }
        }

        if (m == 0) {
            if (alpha[0] != 0.0) {
                circuit.append(Gate::RY, {t}, {alpha[0]});
            }
            continue;
        }
        auto gray = [](std::size_t i) { return i ^ (i >> 1); };
        const double scale = 1.0 / static_cast<double>(n_patterns);
        for (std::size_t i = 0; i < n_patterns; ++i) {
            double theta = 0;
            for (std::size_t j = 0; j < n_patterns; ++j) {
                const bool odd = std::popcount(j & gray(i)) & 1;
                theta += odd ? -alpha[j] : alpha[j];
            }
            theta *= scale;
            if (std::abs(theta) > 1e-14) {
                circuit.append(Gate::RY, {t}, {theta});
            }
            const std::size_t changed = gray(i) ^ gray((i + 1) % n_patterns);
            const auto bit = static_cast<std::size_t>(std::countr_zero(changed));
            circuit.append(Gate::CX, {t + 1 + bit, t});
        }
    }
    return circuit;
}

CircuitIR sel_layer(std::size_t n_qubits, std::size_t range_r, std::span<const double> layer_params,
                    std::size_t first_param) {
    if (n_qubits < 2 || range_r < 1 || range_r > n_qubits - 1) {
        throw ValidationError("SEL range " + std::to_string(range_r) + " outside [1, " + std::to_string(n_qubits - 1) +
                              "]");
    }
    if (layer_params.size() != 3 * n_qubits) {
        throw ValidationError("SEL layer expects " + std::to_string(3 * n_qubits) + " angles");
    }
    CircuitIR circuit(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        const std::size_t base = first_param + 3 * q;
        auto tag = [](std::size_t idx) { return std::vector<ParamTag>{{0, static_cast<std::uint32_t>(idx)}}; };
        circuit.append(Gate::RZ, {q}, {layer_params[3 * q]}, tag(base));
        circuit.append(Gate::RY, {q}, {layer_params[3 * q + 1]}, tag(base + 1));
        circuit.append(Gate::RZ, {q}, {layer_params[3 * q + 2]}, tag(base + 2));
    }
    for (std::size_t i = 0; i < n_qubits; ++i) {
        circuit.append(Gate::CX, {i, (i + range_r) % n_qubits});
    }
    return circuit;
}

CircuitIR build_embedding(const ModelSpec &spec, std::span<const double> features) {
    spec.validate();
    if (features.size() != spec.n_features) {
        throw ValidationError("expected " + std::to_string(spec.n_features) + " features, got " +
                              std::to_string(features.size()));
    }
    return spec.embedding == Embedding::Angle ? angle_embedding(features, spec.n_qubits)
                                              : amplitude_embedding(features, spec.n_qubits);
}

CircuitIR build_pqc(const ModelSpec &spec, const ParameterSet &params) {
    spec.validate();
    if (!params.matches(spec)) {
        throw ValidationError("parameter shape does not match the model");
    }
    CircuitIR circuit(spec.n_qubits);
    for (std::size_t l = 0; l < spec.n_layers; ++l) {
        circuit.extend(sel_layer(spec.n_qubits, spec.range_r, params.layer(l), l * spec.n_qubits * 3));
    }
    return circuit;
}

CircuitIR build_qnn(const ModelSpec &spec, std::span<const double> features, const ParameterSet &params) {
    CircuitIR circuit = build_embedding(spec, features);
    circuit.extend(build_pqc(spec, params));
    return circuit;
}

}  // namespace qhw
