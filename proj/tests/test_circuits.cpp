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

#include <cmath>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "qhw/circuits.hpp"
#include "qhw/errors.hpp"
#include "qhw/sim.hpp"

namespace qhw {
namespace {

using std::numbers::pi;

StateVector simulate(const CircuitIR &c) {
    StateVector sv(c.n_qubits());
    sv.apply(c);
    return sv;
}

// Largest |a_i - e^{i phi} b_i| after aligning phases on the biggest entry.
double phase_distance(std::span<const cplx> a, std::span<const cplx> b) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(b[i]) > std::abs(b[k])) k = i;
    }
    const cplx phase = a[k] / b[k] * (std::abs(b[k]) / std::abs(a[k]));
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - phase * b[i]));
    return worst;
}

TEST(Circuits, AngleEmbedding) {
    auto zero = simulate(angle_embedding(std::vector<double>{0, 0, 0, 0}));
    EXPECT_NEAR(std::abs(zero.amplitudes()[0]), 1.0, 1e-12);
    auto one = simulate(angle_embedding(std::vector<double>{pi, 0, 0, 0}));
    EXPECT_NEAR(one.expectation_z(0), -1.0, 1e-12);
    EXPECT_NEAR(one.expectation_z(1), 1.0, 1e-12);
    auto half = simulate(angle_embedding(std::vector<double>{pi / 2, pi / 2, pi / 2, pi / 2}));
    for (std::size_t q = 0; q < 4; ++q) EXPECT_NEAR(half.expectation_z(q), 0.0, 1e-12);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, pi);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> f{u(rng), u(rng), u(rng), u(rng)};
        auto sv = simulate(angle_embedding(f));
        for (std::size_t q = 0; q < 4; ++q) EXPECT_NEAR(sv.expectation_z(q), std::cos(f[q]), 1e-12);
    }
    EXPECT_THROW(angle_embedding(std::vector<double>(9, 0.1)), ValidationError);
}

TEST(Circuits, AmplitudeEmbeddingSpecialVectors) {
    std::vector<double> e0(64, 0.0);
    e0[0] = 1;
    auto a = simulate(amplitude_embedding(e0, 6));
    EXPECT_NEAR(std::abs(a.amplitudes()[0]), 1.0, 1e-12);
    auto b = simulate(amplitude_embedding(std::vector<double>(64, 1.0 / 8), 6));
    for (auto amp : b.amplitudes()) EXPECT_NEAR(std::abs(amp), 1.0 / 8, 1e-12);
    EXPECT_THROW(amplitude_embedding(std::vector<double>(64, 1.0), 6), ValidationError);
    EXPECT_THROW(amplitude_embedding(std::vector<double>(63, 0.1), 6), ValidationError);
}

TEST(Circuits, AmplitudeEmbeddingRoundTrip) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(64);
        double n = 0;
        for (auto &v : x) {
            v = g(rng);
            if (t % 2) v = std::abs(v);  // digit-like: non-negative
            if (t % 5 == 0 && v < 0.3) v = 0;  // sparse rows
            n += v * v;
        }
        for (auto &v : x) v /= std::sqrt(n);
        // Embedded onto a wider register: the spare wires must stay in |0>.
        auto sv = simulate(amplitude_embedding(x, 8));
        std::vector<cplx> want(256, 0.0);
        for (std::size_t i = 0; i < 64; ++i) want[i] = x[i];
        EXPECT_LT(phase_distance(sv.amplitudes(), want), 1e-9);
        auto oracle = oracle::apply(amplitude_embedding(x, 8), oracle::zero_state(8));
        std::vector<cplx> ov(oracle.data(), oracle.data() + oracle.size());
        EXPECT_LT(phase_distance(ov, want), 1e-9);
    }
}

TEST(Circuits, SelPairs) {
    std::vector<double> zeros(24, 0.0);
    auto pairs = [&](std::size_t r) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        const auto layer = sel_layer(8, r, zeros);
        for (const auto &op : layer.ops()) {
            if (op.gate == Gate::CX) out.emplace_back(op.qubits[0], op.qubits[1]);
        }
        return out;
    };
    auto r1 = pairs(1);
    ASSERT_EQ(r1.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(r1[i], std::make_pair(i, (i + 1) % 8));
    auto r4 = pairs(4);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(r4[i], std::make_pair(i, (i + 4) % 8));
    EXPECT_EQ(pairs(3)[6].second, 1u);
    EXPECT_THROW(sel_layer(8, 0, zeros), ValidationError);
    EXPECT_THROW(sel_layer(8, 8, zeros), ValidationError);
    EXPECT_THROW(sel_layer(8, 1, std::vector<double>(23, 0.0)), ValidationError);
}

TEST(Circuits, QnnOpCounts) {
    auto iris = ModelSpec::iris();
    std::vector<double> f{0.1, 0.2, 0.3, 0.4};
    auto c = build_qnn(iris, f, ParameterSet(iris.n_layers, iris.n_qubits, 0.3));
    EXPECT_EQ(c.size(), 4u + 6u * (24 + 8));
    std::size_t cx = 0;
    for (const auto &op : c.ops()) cx += op.gate == Gate::CX;
    EXPECT_EQ(cx, 48u);

    auto digits = ModelSpec::digits(3);
    EXPECT_EQ(digits.n_layers, 3u);
    std::vector<double> x(64, 1.0 / 8);
    auto emb = build_embedding(digits, x);
    auto qnn = build_qnn(digits, x, ParameterSet(3, 8, 0.1));
    EXPECT_EQ(qnn.size(), emb.size() + 3 * 32);

    auto empty = iris;
    empty.n_layers = 0;
    EXPECT_EQ(build_qnn(empty, f, ParameterSet(0, 8)).size(), 4u);
    EXPECT_THROW(build_qnn(iris, f, ParameterSet(5, 8)), ValidationError);
}

TEST(Circuits, SpecValidation) {
    auto s = ModelSpec::iris();
    s.n_classes = 9;
    EXPECT_THROW(s.validate(), ValidationError);
    s = ModelSpec::iris();
    s.n_features = 9;
    EXPECT_THROW(s.validate(), ValidationError);
    s = ModelSpec::digits(1);
    s.n_features = 60;
    EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Circuits, TextRoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-pi, pi);
    auto spec = ModelSpec::digits(3);
    std::vector<double> x(64);
    double n = 0;
    for (auto &v : x) n += (v = std::abs(u(rng))) * v;
    for (auto &v : x) v /= std::sqrt(n);
    std::vector<double> params(spec.n_params());
    for (auto &p : params) p = u(rng);
    auto c = build_qnn(spec, x, ParameterSet(3, 8, params));
    c.append(Gate::SWAP, {0, 5});
    c.append(Gate::U3, {2}, {0.1, 0.2, 0.3});
    c.append(Gate::RESET, {4});
    auto back = parse_text(to_text(c));
    ASSERT_EQ(back.n_qubits(), c.n_qubits());
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(back.ops()[i].gate, c.ops()[i].gate);
        EXPECT_EQ(back.ops()[i].qubits, c.ops()[i].qubits);
        for (std::size_t k = 0; k < c.ops()[i].params.size(); ++k) {
            EXPECT_DOUBLE_EQ(back.ops()[i].params[k], c.ops()[i].params[k]);
        }
    }
    EXPECT_THROW(parse_text("qubits 2\nfoo 0\n"), ValidationError);
    EXPECT_THROW(parse_text("qubits 2\ncx 0 2\n"), ValidationError);
}

TEST(Circuits, InverseUndoes) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-pi, pi);
    auto spec = ModelSpec::iris();
    std::vector<double> params(spec.n_params());
    for (auto &p : params) p = u(rng);
    auto c = build_qnn(spec, std::vector<double>{0.3, 1.1, 2.0, 0.5}, ParameterSet(6, 8, params));
    auto round = c;
    round.extend(c.inverse());
    auto sv = simulate(round);
    EXPECT_NEAR(std::abs(sv.amplitudes()[0]), 1.0, 1e-10);
}

}  // namespace
}  // namespace qhw
