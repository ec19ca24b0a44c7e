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


// Small hand-built snapshots shared by the unit tests.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qhw/calibration.hpp"

namespace qhw::testing {

inline QubitCalibration qubit(double t1 = 100, double t2 = 80, double p01 = 0.02, double p10 = 0.04,
                              double err = 1e-3) {
    QubitCalibration q;
    q.t1_us = t1;
    q.t2_us = t2;
    q.readout_p01 = p01;
    q.readout_p10 = p10;
    q.err_1q = err;
    for (const char *g : {"x", "sx", "h", "rx", "ry", "u2", "u3", "id"}) {
        q.durations_ns[g] = 35;
    }
    q.durations_ns["cx"] = 300;
    q.durations_ns["measure"] = 700;
    return q;
}

// Line 0-1-...-(n-1) with per-edge error `err2`.
inline SnapshotPtr line_snapshot(std::size_t n, BasisSet basis = BasisSet::B, double err2 = 0.01,
                                 std::string name = "line") {
    std::vector<QubitCalibration> qs;
    for (std::size_t i = 0; i < n; ++i) {
        qs.push_back(qubit(80 + 5.0 * static_cast<double>(i), 60 + 3.0 * static_cast<double>(i),
                           0.01 + 0.002 * static_cast<double>(i), 0.03, 5e-4 + 1e-4 * static_cast<double>(i)));
    }
    std::vector<CouplingEdge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        edges.push_back({i, i + 1, err2 + 0.001 * static_cast<double>(i)});
    }
    return std::make_shared<const HardwareSnapshot>(std::move(name), std::move(qs), std::move(edges), basis);
}

// Fully coupled register, handy when routing should not interfere.
inline SnapshotPtr full_snapshot(std::size_t n, BasisSet basis = BasisSet::B) {
    std::vector<QubitCalibration> qs;
    for (std::size_t i = 0; i < n; ++i) {
        qs.push_back(qubit(70 + 7.0 * static_cast<double>(i), 50 + 4.0 * static_cast<double>(i), 0.015, 0.035,
                           8e-4));
    }
    std::vector<CouplingEdge> edges;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            edges.push_back({a, b, 0.012 + 0.001 * static_cast<double>(a + b)});
        }
    }
    return std::make_shared<const HardwareSnapshot>("full", std::move(qs), std::move(edges), basis);
}

}  // namespace qhw::testing
