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

// Published normalised score rows (A..E, final) and wait-time inputs, shared
// by the unit tests and the acceptance binary.
#pragma once

#include <array>
#include <string>
#include <vector>

namespace qhw::reference {

struct ScoreRow {
    std::string id;
    std::array<double, 5> norm;
    double final;
};

inline const std::vector<ScoreRow> &score_rows() {
    static const std::vector<ScoreRow> rows = {
        {"27Q:II", {90.23, 83.91, 100.00, 93.80, 10.47}, 75.06},
        {"27Q:I", {76.91, 85.59, 65.91, 100.00, 19.47}, 72.98},
        {"27Q:V", {100.00, 100.00, 100.00, 68.69, 2.08}, 71.02},
        {"27Q:III", {89.06, 89.01, 65.91, 86.23, 1.02}, 68.28},
        {"27Q:IV", {47.97, 75.94, 65.91, 76.13, 13.26}, 56.86},
        {"20Q:II", {3.69, 29.04, 9.09, 13.78, 100.00}, 31.59},
        {"127Q:V", {5.55, 64.38, 11.36, 15.28, 51.51}, 30.01},
        {"20Q:IV", {0.57, 32.71, 13.46, 8.30, 73.83}, 25.26},
        {"127Q:II", {10.11, 64.38, 11.36, 22.50, 28.72}, 28.53},
        {"127Q:I", {7.58, 56.56, 11.36, 29.71, 14.73}, 25.82},
        {"127Q:IV", {6.68, 51.70, 14.77, 19.58, 24.80}, 23.98},
        {"20Q:III", {0.00, 22.19, 7.95, 9.60, 54.73}, 19.06},
        {"20Q:I", {12.33, 0.00, 0.00, 14.77, 73.83}, 21.66},
        {"20Q:V", {7.55, 34.61, 13.46, 0.00, 48.46}, 19.47},
        {"127Q:III", {9.55, 18.99, 10.51, 20.15, 0.00}, 12.80},
    };
    return rows;
}

struct WaitRow {
    std::string hardware;
    double total_seconds, depth;
    double avg_seconds, train_iris_min, train_digits_min, infer_iris_s, infer_digits_s;
};

inline const std::vector<WaitRow> &wait_rows() {
    static const std::vector<WaitRow> rows = {
        {"20Q", 1, 1, 1.0, 17.5, 42.0, 45.0, 108.0},
        {"27Q", 8100, 183, 44.3, 775.0, 1860.0, 1993.0, 4784.0},
        {"127Q", 20400, 1447, 14.1, 247.0, 592.0, 634.0, 1522.0},
    };
    return rows;
}

}  // namespace qhw::reference
