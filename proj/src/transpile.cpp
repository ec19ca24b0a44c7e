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

#include "qhw/transpile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "qhw/errors.hpp"
#include "qhw/linalg.hpp"

namespace qhw {

using std::numbers::pi;

namespace {

constexpr double kAngleEps = 1e-12;

bool near(double a, double b) { return std::abs(wrap_angle(a - b)) < kAngleEps; }

std::vector<ParamTag> retag(const std::vector<ParamTag> &tags, std::uint16_t from, std::uint16_t to) {
    std::vector<ParamTag> out;
    for (const auto &t : tags) {
        if (t.slot == from) {
            out.push_back({to, t.index});
        }
    }
    return out;
}

/// Tagged U3(theta, phi, lambda) in ZXZXZ form. Slot 0 rides on the middle
/// rz, slot 1 on the last, slot 2 on the first. No angle elision.
void emit_u3_zxzxz(CircuitIR &out, std::size_t q, double theta, double phi, double lambda,
                   const std::vector<ParamTag> &tags) {
    out.append(Gate::RZ, {q}, {lambda}, retag(tags, 2, 0));
    out.append(Gate::SX, {q});
    out.append(Gate::RZ, {q}, {theta + pi}, retag(tags, 0, 0));
    out.append(Gate::SX, {q});
    out.append(Gate::RZ, {q}, {phi + pi}, retag(tags, 1, 0));
}

void decompose_tagged(CircuitIR &out, const GateOp &op, BasisSet basis) {
    const std::size_t q = op.qubits[0];
    const auto &p = op.params;
    double theta = 0, phi = 0, lambda = 0;
    std::vector<ParamTag> tags;  // expressed in U3 slots
    switch (op.gate) {
        case Gate::RZ:
        case Gate::U1:
            out.append(basis == BasisSet::A ? Gate::U1 : Gate::RZ, {q}, {p[0]}, op.tags);
            return;
        case Gate::RY:
            theta = p[0];
            tags = retag(op.tags, 0, 0);
            break;
        case Gate::RX:
            theta = p[0], phi = -pi / 2, lambda = pi / 2;
            tags = retag(op.tags, 0, 0);
            break;
        case Gate::U2:
            theta = pi / 2, phi = p[0], lambda = p[1];
            tags = retag(op.tags, 0, 1);
            for (const auto &t : retag(op.tags, 1, 2)) {
                tags.push_back(t);
            }
            break;
        case Gate::U3:
            theta = p[0], phi = p[1], lambda = p[2];
            tags = op.tags;
            break;
        default:
            throw ValidationError("gate " + std::string(gate_name(op.gate)) + " cannot carry a parameter tag");
    }
    if (basis == BasisSet::A) {
        out.append(Gate::U3, {q}, {theta, phi, lambda}, tags);
    } else {
        emit_u3_zxzxz(out, q, theta, phi, lambda, tags);
    }
}

void decompose_fixed(CircuitIR &out, const GateOp &op, BasisSet basis) {
    const std::size_t q = op.qubits[0];
    if (basis == BasisSet::B && op.gate == Gate::X) {
        out.append(Gate::X, {q});
        return;
    }
    if (basis == BasisSet::B && op.gate == Gate::SX) {
        out.append(Gate::SX, {q});
        return;
    }
    const auto e = euler_zyz(gate_matrix(op.gate, op.params));
    const bool flat = std::abs(e.theta) < kAngleEps;
    const bool half = std::abs(e.theta - pi / 2) < kAngleEps;
    if (basis == BasisSet::A) {
        if (flat) {
            out.append(Gate::U1, {q}, {wrap_angle(e.phi + e.lambda)});
        } else if (half) {
            out.append(Gate::U2, {q}, {wrap_angle(e.phi), wrap_angle(e.lambda)});
        } else {
            out.append(Gate::U3, {q}, {e.theta, wrap_angle(e.phi), wrap_angle(e.lambda)});
        }
        return;
    }
    if (flat) {
        out.append(Gate::RZ, {q}, {wrap_angle(e.phi + e.lambda)});
    } else if (half) {
        out.append(Gate::RZ, {q}, {wrap_angle(e.lambda - pi / 2)});
        out.append(Gate::SX, {q});
        out.append(Gate::RZ, {q}, {wrap_angle(e.phi + pi / 2)});
    } else {
        out.append(Gate::RZ, {q}, {wrap_angle(e.lambda)});
        out.append(Gate::SX, {q});
        out.append(Gate::RZ, {q}, {wrap_angle(e.theta + pi)});
        out.append(Gate::SX, {q});
        out.append(Gate::RZ, {q}, {wrap_angle(e.phi + pi)});
    }
}

/// Collapses runs of phase gates (rz in B, u1 in A) on a wire and drops
/// untagged ones whose angle is a multiple of 2*pi.
CircuitIR merge_phase_gates(const CircuitIR &in, BasisSet basis) {
    const Gate phase_gate = basis == BasisSet::A ? Gate::U1 : Gate::RZ;
    std::vector<GateOp> ops;
    std::vector<bool> dead;
    std::vector<std::optional<std::size_t>> open(in.n_qubits());
    for (const auto &op : in.ops()) {
        if (op.gate == phase_gate) {
            const std::size_t q = op.qubits[0];
            if (open[q]) {
                auto &prev = ops[*open[q]];
                const bool overlap = std::any_of(op.tags.begin(), op.tags.end(), [&](const ParamTag &t) {
                    return std::find(prev.tags.begin(), prev.tags.end(), t) != prev.tags.end();
                });
                if (!overlap) {
                    prev.params[0] += op.params[0];
                    prev.tags.insert(prev.tags.end(), op.tags.begin(), op.tags.end());
                    continue;
                }
            }
            open[q] = ops.size();
            ops.push_back(op);
            dead.push_back(false);
            continue;
        }
        for (auto q : op.qubits) {
            open[q].reset();
        }
        ops.push_back(op);
        dead.push_back(false);
    }
    CircuitIR out(in.n_qubits());
    for (std::size_t i = 0; i < ops.size(); ++i) {
        auto &op = ops[i];
        if (op.gate == phase_gate && op.tags.empty()) {
            op.params[0] = wrap_angle(op.params[0]);
            if (near(op.params[0], 0.0)) {
                continue;
            }
        }
        out.append(std::move(op));
    }
    return out;
}

struct RoutePlan {
    CircuitIR circuit;
    std::vector<std::size_t> layout;
    std::size_t swaps = 0;
};

RoutePlan route_once(const CircuitIR &circuit, const CouplingMap &coupling, std::span<const std::size_t> start,
                     std::mt19937_64 *rng) {
    const std::size_t n = coupling.size();
    RoutePlan plan{CircuitIR(n), {}, 0};
    // layout: logical -> wire; occupant: wire -> logical
    plan.layout.resize(n);
    std::vector<std::size_t> occupant(n);
    for (std::size_t q = 0; q < n; ++q) {
        plan.layout[q] = start.empty() ? q : start[q];
        occupant[plan.layout[q]] = q;
    }
    auto next_hop = [&](std::size_t from, std::size_t to) {
        const std::size_t d = coupling.distance(from, to);
        std::vector<std::size_t> candidates;
        for (auto v : coupling.neighbors(from)) {
            if (coupling.distance(v, to) + 1 == d) {
                candidates.push_back(v);
                if (!rng) {
                    break;
                }
            }
        }
        if (!rng || candidates.size() == 1) {
            return candidates.front();
        }
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        return candidates[pick(*rng)];
    };
    for (const auto &op : circuit.ops()) {
        if (op.qubits.size() == 2) {
            const std::size_t a = op.qubits[0], b = op.qubits[1];
            while (coupling.distance(plan.layout[a], plan.layout[b]) > 1) {
                const std::size_t from = plan.layout[a];
                const std::size_t hop = next_hop(from, plan.layout[b]);
                plan.circuit.append(Gate::SWAP, {from, hop});
                ++plan.swaps;
                const std::size_t other = occupant[hop];
                std::swap(occupant[from], occupant[hop]);
                plan.layout[a] = hop;
                plan.layout[other] = from;
            }
        }
        GateOp mapped = op;
        for (auto &q : mapped.qubits) {
            q = plan.layout[q];
        }
        plan.circuit.append(std::move(mapped));
    }
    return plan;
}

}  // namespace

bool in_basis(Gate g, BasisSet basis) {
    if (basis == BasisSet::A) {
        return g == Gate::ID || g == Gate::U1 || g == Gate::U2 || g == Gate::U3 || g == Gate::CX;
    }
    return g == Gate::ID || g == Gate::RZ || g == Gate::SX || g == Gate::X || g == Gate::CX || g == Gate::RESET;
}

CircuitIR decompose_to_basis(const CircuitIR &circuit, BasisSet basis) {
    CircuitIR raw(circuit.n_qubits());
    for (const auto &op : circuit.ops()) {
        switch (op.gate) {
            case Gate::CX:
                raw.append(op);
                break;
            case Gate::SWAP: {
                const std::size_t a = op.qubits[0], b = op.qubits[1];
                raw.append(Gate::CX, {a, b});
                raw.append(Gate::CX, {b, a});
                raw.append(Gate::CX, {a, b});
                break;
            }
            case Gate::ID:
                raw.append(Gate::ID, op.qubits);
                break;
            case Gate::RESET:
                if (basis == BasisSet::A) {
                    throw ValidationError("reset is not available in basis set A");
                }
                raw.append(op);
                break;
            default:
                if (!op.tags.empty()) {
                    decompose_tagged(raw, op, basis);
                } else {
                    decompose_fixed(raw, op, basis);
                }
        }
    }
    return merge_phase_gates(raw, basis);
}

TranspiledCircuit route(const CircuitIR &circuit, const CouplingMap &coupling, std::uint64_t seed,
                        const RouteOptions &options, std::span<const std::size_t> start_layout) {
    if (circuit.n_qubits() != coupling.size()) {
        throw ValidationError("circuit has " + std::to_string(circuit.n_qubits()) + " qubits but the coupling map has " +
                              std::to_string(coupling.size()));
    }
    if (!coupling.connected()) {
        throw ValidationError("cannot route on a disconnected coupling map");
    }
    if (!start_layout.empty() && start_layout.size() != coupling.size()) {
        throw ValidationError("start layout has the wrong size");
    }
    RoutePlan best = route_once(circuit, coupling, start_layout, nullptr);
    std::size_t best_depth = depth(best.circuit);
    for (std::size_t attempt = 0; attempt < options.random_restarts; ++attempt) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (attempt + 1));
        RoutePlan plan = route_once(circuit, coupling, start_layout, &rng);
        const std::size_t d = depth(plan.circuit);
        if (plan.swaps < best.swaps || (plan.swaps == best.swaps && d < best_depth)) {
            best = std::move(plan);
            best_depth = d;
        }
    }
    TranspiledCircuit out;
    out.circuit = std::move(best.circuit);
    out.final_permutation = std::move(best.layout);
    out.initial_layout.resize(coupling.size());
    for (std::size_t i = 0; i < coupling.size(); ++i) {
        out.initial_layout[i] = i;
    }
    out.swaps = best.swaps;
    out.depth = best_depth;
    return out;
}

std::size_t depth(const CircuitIR &circuit) {
    std::vector<std::size_t> level(circuit.n_qubits(), 0);
    std::size_t deepest = 0;
    for (const auto &op : circuit.ops()) {
        std::size_t l = 0;
        for (auto q : op.qubits) {
            l = std::max(l, level[q]);
        }
        ++l;
        for (auto q : op.qubits) {
            level[q] = l;
        }
        deepest = std::max(deepest, l);
    }
    return deepest;
}

std::size_t two_qubit_depth(const CircuitIR &circuit) {
    std::vector<std::size_t> level(circuit.n_qubits(), 0);
    std::size_t deepest = 0;
    for (const auto &op : circuit.ops()) {
        if (op.qubits.size() < 2) {
            continue;
        }
        const std::size_t l = std::max(level[op.qubits[0]], level[op.qubits[1]]) + 1;
        level[op.qubits[0]] = level[op.qubits[1]] = l;
        deepest = std::max(deepest, l);
    }
    return deepest;
}

TranspiledCircuit transpile(const CircuitIR &circuit, const Configuration &config, std::uint64_t seed,
                            const RouteOptions &options) {
    if (circuit.n_qubits() > config.size()) {
        throw ValidationError("circuit needs " + std::to_string(circuit.n_qubits()) + " qubits; configuration has " +
                              std::to_string(config.size()));
    }
    CircuitIR widened(config.size());
    widened.extend(circuit);
    TranspiledCircuit out = route(widened, induced_coupling(config), seed, options);
    out.circuit = decompose_to_basis(out.circuit, config.hardware().basis());
    out.depth = depth(out.circuit);
    out.initial_layout = config.physical_qubits();
    return out;
}

CircuitIR SegmentedTranspile::joined() const {
    CircuitIR out(segments.empty() ? 0 : segments.front().n_qubits());
    for (const auto &s : segments) {
        out.extend(s);
    }
    return out;
}

SegmentedTranspile transpile_segments(std::span<const CircuitIR> segments, const Configuration &config,
                                      std::uint64_t seed, const RouteOptions &options,
                                      std::span<const std::size_t> start_layout) {
    const CouplingMap coupling = induced_coupling(config);
    SegmentedTranspile out;
    out.initial_layout = config.physical_qubits();
    std::vector<std::size_t> layout(config.size());
    for (std::size_t q = 0; q < layout.size(); ++q) {
        layout[q] = start_layout.empty() ? q : start_layout[q];
    }
    out.layouts.push_back(layout);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].n_qubits() > config.size()) {
            throw ValidationError("segment is wider than the configuration");
        }
        CircuitIR widened(config.size());
        widened.extend(segments[i]);
        auto routed = route(widened, coupling, seed + i, options, layout);
        out.swaps += routed.swaps;
        out.segments.push_back(decompose_to_basis(routed.circuit, config.hardware().basis()));
        layout = routed.final_permutation;
        out.layouts.push_back(layout);
    }
    return out;
}

GateCounts count_gates(const CircuitIR &circuit) {
    GateCounts c;
    for (const auto &op : circuit.ops()) {
        (op.qubits.size() == 2 ? c.two_qubit : c.one_qubit) += 1;
    }
    c.total = c.one_qubit + c.two_qubit;
    return c;
}

}  // namespace qhw
