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


#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "random_circuits.hpp"
#include "qhw/errors.hpp"
#include "qhw/fleet.hpp"
#include "qhw/transpile.hpp"

namespace qhw {
namespace {

using testing::random_circuit;
using testing::random_coupling;

void expect_basis_and_coupling(const CircuitIR &c, BasisSet basis, const CouplingMap &coupling) {
    for (const auto &op : c.ops()) {
        EXPECT_TRUE(in_basis(op.gate, basis)) << gate_name(op.gate);
        if (op.qubits.size() == 2) {
            EXPECT_TRUE(coupling.coupled(op.qubits[0], op.qubits[1]));
        }
    }
}

TEST(Transpile, RandomSmallCircuitsMatchUnitaryOracle) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial) % 4;
        const auto coupling = random_coupling(n, rng);
        const auto c = random_circuit(n, 4 + rng() % 20, rng);
        const BasisSet basis = trial % 2 ? BasisSet::A : BasisSet::B;
        const auto routed = route(c, coupling, static_cast<std::uint64_t>(trial));
        const auto out = decompose_to_basis(routed.circuit, basis);
        expect_basis_and_coupling(out, basis, coupling);
        const oracle::Mat want = oracle::layout_permutation(n, routed.final_permutation) * oracle::unitary(c);
        ASSERT_LT(oracle::phase_diff(oracle::unitary(out), want), 1e-9) << "trial " << trial << '\n' << to_text(c);
    }
}

class SelOnFleet : public ::testing::Test {
   protected:
    static void SetUpTestSuite() { fleet_ = new Fleet(load_fleet(fs_path())); }
    static void TearDownTestSuite() { delete fleet_; }
    static std::filesystem::path fs_path() { return std::filesystem::path(QHW_TEST_DATA_DIR) / "fleet"; }
    static Fleet *fleet_;
};
Fleet *SelOnFleet::fleet_ = nullptr;

TEST_F(SelOnFleet, PermutedStatesMatchOnTableOneCouplings) {
    const auto configs = fleet_->configurations();
    ASSERT_EQ(configs.size(), 15u);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);
    for (int trial = 0; trial < 50; ++trial) {
        const auto &config = configs[static_cast<std::size_t>(trial) % configs.size()];
        const std::size_t r = 1 + rng() % 7;
        const std::size_t layers = 1 + rng() % 2;
        CircuitIR c(8);
        for (std::size_t q = 0; q < 4; ++q) {
            c.append(Gate::RY, {q}, {angle(rng)});
        }
        for (std::size_t l = 0; l < layers; ++l) {
            std::vector<double> p(24);
            for (auto &v : p) v = angle(rng);
            c.extend(sel_layer(8, r, p));
        }
        const auto t = transpile(c, config, static_cast<std::uint64_t>(trial));
        expect_basis_and_coupling(t.circuit, config.hardware().basis(), induced_coupling(config));
        const oracle::Vec got = oracle::apply(t.circuit, oracle::zero_state(8));
        const oracle::Vec want =
            oracle::layout_permutation(8, t.final_permutation) * oracle::apply(c, oracle::zero_state(8));
        const std::complex<double> overlap = want.dot(got);
        EXPECT_NEAR(std::abs(overlap), 1.0, 1e-9) << config.id() << " r=" << r;
        oracle::Mat a = got, b = want;
        EXPECT_LT(oracle::phase_diff(a, b), 1e-9);
    }
}

TEST_F(SelOnFleet, RingConfigurationNeedsNoSwaps) {
    // A configuration whose induced coupling contains the 8-ring.
    for (const auto &config : fleet_->configurations()) {
        const auto coupling = induced_coupling(config);
        bool ring = true;
        for (std::size_t i = 0; i < 8; ++i) ring = ring && coupling.coupled(i, (i + 1) % 8);
        if (!ring) continue;
        const auto layer = sel_layer(8, 1, std::vector<double>(24, 0.4));
        const auto t = transpile(layer, config, 0);
        EXPECT_EQ(t.swaps, 0u);
        EXPECT_EQ(t.depth, depth(decompose_to_basis(layer, config.hardware().basis())));
    }
}

TEST_F(SelOnFleet, BasisADepthBelowBasisBForAmplitudeModel) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (const auto &config : fleet_->configurations()) {
        std::vector<double> v(64);
        double norm = 0;
        for (auto &x : v) {
            x = u(rng);
            norm += x * x;
        }
        for (auto &x : v) x /= std::sqrt(norm);
        CircuitIR c = amplitude_embedding(v, 8);
        c.extend(sel_layer(8, 1, std::vector<double>(24, 0.3)));
        const auto routed = route(c, induced_coupling(config), 0);
        const auto a = decompose_to_basis(routed.circuit, BasisSet::A);
        const auto b = decompose_to_basis(routed.circuit, BasisSet::B);
        EXPECT_LT(depth(a), depth(b)) << config.id();
        EXPECT_GE(count_gates(b).one_qubit, count_gates(a).one_qubit) << config.id();
    }
}

TEST_F(SelOnFleet, DeterministicForFixedSeed) {
    const auto config = fleet_->find("127Q:II");
    const ModelSpec spec = ModelSpec::iris();
    const ParameterSet params(spec.n_layers, spec.n_qubits, 0.7);
    const auto c = build_qnn(spec, std::vector<double>{0.1, 0.2, 0.3, 0.4}, params);
    const auto a = transpile(c, config, 9), b = transpile(c, config, 9);
    EXPECT_EQ(a.circuit, b.circuit);
    EXPECT_EQ(a.final_permutation, b.final_permutation);
    EXPECT_EQ(a.initial_layout, config.physical_qubits());
}

TEST(Decompose, RyUnderBasisAIsU3) {
    CircuitIR c(1);
    c.append(Gate::RY, {0}, {0.8});
    const auto out = decompose_to_basis(c, BasisSet::A);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out.ops()[0].gate, Gate::U3);
    EXPECT_NEAR(out.ops()[0].params[0], 0.8, 1e-12);
    EXPECT_NEAR(out.ops()[0].params[1], 0.0, 1e-12);
    EXPECT_NEAR(out.ops()[0].params[2], 0.0, 1e-12);
}

TEST(Decompose, HadamardUnderBasisB) {
    CircuitIR c(1);
    c.append(Gate::H, {0});
    const auto out = decompose_to_basis(c, BasisSet::B);
    ASSERT_EQ(out.size(), 3u) << to_text(out);
    EXPECT_EQ(out.ops()[0].gate, Gate::RZ);
    EXPECT_EQ(out.ops()[1].gate, Gate::SX);
    EXPECT_EQ(out.ops()[2].gate, Gate::RZ);
    EXPECT_NEAR(out.ops()[0].params[0], M_PI / 2, 1e-12);
    EXPECT_NEAR(out.ops()[2].params[0], M_PI / 2, 1e-12);
    EXPECT_LT(oracle::phase_diff(oracle::unitary(out), oracle::unitary(c)), 1e-12);
}

TEST(Decompose, SwapBecomesThreeCx) {
    CircuitIR c(2);
    c.append(Gate::SWAP, {0, 1});
    for (auto basis : {BasisSet::A, BasisSet::B}) {
        const auto out = decompose_to_basis(c, basis);
        ASSERT_EQ(out.size(), 3u);
        EXPECT_EQ(out.ops()[0].qubits, (std::vector<std::size_t>{0, 1}));
        EXPECT_EQ(out.ops()[1].qubits, (std::vector<std::size_t>{1, 0}));
        EXPECT_EQ(out.ops()[2].qubits, (std::vector<std::size_t>{0, 1}));
        EXPECT_LT(oracle::phase_diff(oracle::unitary(out), oracle::unitary(c)), 1e-12);
    }
}

TEST(Decompose, BasisBUsesAtMostFiveGatesPerRotation) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> a(-4, 4);
    for (int i = 0; i < 200; ++i) {
        CircuitIR c(1);
        c.append(Gate::U3, {0}, {a(rng), a(rng), a(rng)});
        const auto out = decompose_to_basis(c, BasisSet::B);
        EXPECT_LE(out.size(), 5u);
        EXPECT_LT(oracle::phase_diff(oracle::unitary(out), oracle::unitary(c)), 1e-10);
        const auto outa = decompose_to_basis(c, BasisSet::A);
        EXPECT_EQ(outa.size(), 1u);
    }
}

TEST(Decompose, ResetOnlyInBasisB) {
    CircuitIR c(1);
    c.append(Gate::RESET, {0});
    EXPECT_EQ(decompose_to_basis(c, BasisSet::B).size(), 1u);
    EXPECT_THROW(decompose_to_basis(c, BasisSet::A), ValidationError);
}

TEST(Route, DistantCnotOnPath) {
    CouplingMap path(3);
    path.add_edge(0, 1, 0.01);
    path.add_edge(1, 2, 0.01);
    CircuitIR c(3);
    c.append(Gate::CX, {0, 2});
    const auto t = route(c, path, 0);
    ASSERT_EQ(t.circuit.size(), 2u);
    EXPECT_EQ(t.circuit.ops()[0].gate, Gate::SWAP);
    EXPECT_EQ(t.circuit.ops()[0].qubits, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(t.circuit.ops()[1].qubits, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(t.final_permutation, (std::vector<std::size_t>{1, 0, 2}));
    EXPECT_EQ(t.swaps, 1u);
}

TEST(Route, CompatibleCircuitUntouched) {
    CouplingMap path(3);
    path.add_edge(0, 1, 0.01);
    path.add_edge(1, 2, 0.01);
    CircuitIR c(3);
    c.append(Gate::H, {0});
    c.append(Gate::CX, {0, 1});
    c.append(Gate::CX, {2, 1});
    const auto t = route(c, path, 0);
    EXPECT_EQ(t.swaps, 0u);
    EXPECT_EQ(t.circuit, c);
    EXPECT_EQ(depth(t.circuit), depth(c));
}

TEST(Route, RangeFourRingOnPath) {
    CouplingMap path(8);
    for (std::size_t i = 0; i + 1 < 8; ++i) path.add_edge(i, i + 1, 0.01);
    std::vector<double> p(24);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.1 * static_cast<double>(i);
    CircuitIR c(8);
    c.append(Gate::H, {0});
    c.append(Gate::RY, {3}, {0.9});
    c.extend(sel_layer(8, 4, p));
    for (std::uint64_t seed : {0, 1, 2}) {
        const auto t = route(c, path, seed, RouteOptions{seed});
        const oracle::Vec got = oracle::apply(t.circuit, oracle::zero_state(8));
        const oracle::Vec want =
            oracle::layout_permutation(8, t.final_permutation) * oracle::apply(c, oracle::zero_state(8));
        EXPECT_NEAR(std::abs(want.dot(got)), 1.0, 1e-9);
        std::set<std::size_t> image(t.final_permutation.begin(), t.final_permutation.end());
        EXPECT_EQ(image.size(), 8u);
    }
}

TEST(Route, RandomRestartsNeverWorse) {
    CouplingMap path(8);
    for (std::size_t i = 0; i + 1 < 8; ++i) path.add_edge(i, i + 1, 0.01);
    const auto c = sel_layer(8, 3, std::vector<double>(24, 0.2));
    const auto plain = route(c, path, 4);
    const auto restarted = route(c, path, 4, RouteOptions{8});
    EXPECT_LE(restarted.swaps, plain.swaps);
}

TEST(Route, DisconnectedCouplingRejected) {
    CouplingMap m(3);
    m.add_edge(0, 1, 0.01);
    CircuitIR c(3);
    c.append(Gate::CX, {0, 2});
    EXPECT_THROW(route(c, m, 0), ValidationError);
}

TEST(Depth, Examples) {
    EXPECT_EQ(depth(CircuitIR(2)), 0u);
    CircuitIR par(2);
    par.append(Gate::RY, {0}, {0.3});
    par.append(Gate::RY, {1}, {0.3});
    EXPECT_EQ(depth(par), 1u);
    CircuitIR chain(3);
    chain.append(Gate::CX, {0, 1});
    chain.append(Gate::CX, {1, 2});
    chain.append(Gate::CX, {0, 1});
    EXPECT_EQ(depth(chain), 3u);
    EXPECT_EQ(two_qubit_depth(chain), 3u);
}

TEST(Depth, InsertingAGateNeverDecreasesDepth) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = random_circuit(4, 15, rng);
        const auto base = depth(c);
        const std::size_t at = rng() % (c.size() + 1);
        CircuitIR d(4);
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i == at) d.append(Gate::CX, {rng() % 2, 2 + rng() % 2});
            d.append(c.ops()[i]);
        }
        if (at == c.size()) d.append(Gate::H, {rng() % 4});
        EXPECT_GE(depth(d), base);
    }
}

}  // namespace
}  // namespace qhw
