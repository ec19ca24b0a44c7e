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

// Seeded random couplings and circuits for transpiler checks.
#pragma once

#include <cmath>
#include <random>

#include "qhw/calibration.hpp"
#include "qhw/circuits.hpp"

namespace qhw::testing {

inline CouplingMap random_coupling(std::size_t n, std::mt19937_64 &rng) {
    CouplingMap m(n);
    switch (rng() % 4) {
        case 0:  // line
            for (std::size_t i = 0; i + 1 < n; ++i) m.add_edge(i, i + 1, 0.01);
            break;
        case 1:  // ring
            for (std::size_t i = 0; i < n && n > 1; ++i) {
                if (n > 2 || i == 0) m.add_edge(i, (i + 1) % n, 0.01);
            }
            break;
        case 2:  // star on a random hub
        {
            const std::size_t hub = rng() % n;
            for (std::size_t i = 0; i < n; ++i) {
                if (i != hub) m.add_edge(hub, i, 0.01);
            }
            break;
        }
        default:  // random tree
            for (std::size_t i = 1; i < n; ++i) m.add_edge(rng() % i, i, 0.01);
    }
    return m;
}

inline CircuitIR random_circuit(std::size_t n, std::size_t len, std::mt19937_64 &rng) {
    const Gate gates[] = {Gate::H,  Gate::X,  Gate::SX, Gate::RX, Gate::RY,  Gate::RZ,
                          Gate::U1, Gate::U2, Gate::U3, Gate::ID, Gate::CX, Gate::SWAP};
    const std::size_t choices = n > 1 ? std::size(gates) : std::size(gates) - 2;
    std::uniform_real_distribution<double> angle(-2 * M_PI, 2 * M_PI);
    CircuitIR c(n);
    for (std::size_t i = 0; i < len; ++i) {
        const Gate g = gates[rng() % choices];
        std::vector<std::size_t> qs{rng() % n};
        if (gate_arity(g) == 2) {
            std::size_t b = rng() % n;
            while (b == qs[0]) b = rng() % n;
            qs.push_back(b);
        }
        std::vector<double> ps;
        for (std::size_t k = 0; k < gate_param_count(g); ++k) {
            // Mix in exact multiples of pi/2 so the special-case paths run.
            ps.push_back(rng() % 3 == 0 ? static_cast<double>(static_cast<int>(rng() % 8) - 4) * M_PI / 2
                                        : angle(rng));
        }
        c.append(g, qs, ps);
    }
    return c;
}

}  // namespace qhw::testing
