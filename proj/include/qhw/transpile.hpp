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
#include <span>
#include <vector>

#include "qhw/calibration.hpp"
#include "qhw/circuits.hpp"

namespace qhw {

struct RouteOptions {
    /// Extra randomised attempts (random tie-breaking among shortest
    /// paths); the plan with the fewest SWAPs wins. 0 = deterministic
    /// lowest-index greedy only.
    std::size_t random_restarts = 0;
};

struct TranspiledCircuit {
    /// Ops act on wires 0..n-1; wire i is physical qubit initial_layout[i].
    CircuitIR circuit;
    std::vector<std::size_t> initial_layout;
    /// Logical qubit q ends on wire final_permutation[q].
    std::vector<std::size_t> final_permutation;
    std::size_t depth = 0;
    std::size_t swaps = 0;
};

/// Rewrites into the basis gate set. Tagged rotations keep a fixed,
/// angle-independent structure so that parameters can be rebound later.
CircuitIR decompose_to_basis(const CircuitIR &circuit, BasisSet basis);

bool in_basis(Gate g, BasisSet basis);

/// Greedy nearest-SWAP routing. `start_layout` (logical -> wire) lets a
/// circuit continue from where a previous segment left off.
TranspiledCircuit route(const CircuitIR &circuit, const CouplingMap &coupling, std::uint64_t seed,
                        const RouteOptions &options = {}, std::span<const std::size_t> start_layout = {});

/// Longest path through the gate dependency DAG, every op weighing 1.
std::size_t depth(const CircuitIR &circuit);
/// Same, counting only two-qubit ops.
std::size_t two_qubit_depth(const CircuitIR &circuit);

/// route against induced_coupling(config), then decompose to the hardware
/// basis.
TranspiledCircuit transpile(const CircuitIR &circuit, const Configuration &config, std::uint64_t seed,
                            const RouteOptions &options = {});

/// Transpiles consecutive segments that share one routing pass. Single-qubit
/// merging never crosses a segment boundary, so a data-dependent prefix and a
/// parameter-dependent suffix stay separable.
struct SegmentedTranspile {
    std::vector<CircuitIR> segments;
    /// layouts[i] = logical -> wire map at the start of segment i; the last
    /// entry is the final permutation.
    std::vector<std::vector<std::size_t>> layouts;
    std::vector<std::size_t> initial_layout;
    std::size_t swaps = 0;

    const std::vector<std::size_t> &final_permutation() const { return layouts.back(); }
    CircuitIR joined() const;
};

SegmentedTranspile transpile_segments(std::span<const CircuitIR> segments, const Configuration &config,
                                      std::uint64_t seed, const RouteOptions &options = {},
                                      std::span<const std::size_t> start_layout = {});

struct GateCounts {
    std::size_t one_qubit = 0;
    std::size_t two_qubit = 0;
    std::size_t total = 0;
};
GateCounts count_gates(const CircuitIR &circuit);

}  // namespace qhw
