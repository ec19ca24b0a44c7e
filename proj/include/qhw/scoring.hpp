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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qhw/calibration.hpp"
#include "qhw/circuits.hpp"

namespace qhw {

struct RawProperties {
    double decoherence = 0;  // us, higher is better
    double readout = 0;
    double err_1q = 0;
    double err_2q = 0;
    double layer_depth = 0;
};

enum class Direction { HigherBetter, LowerBetter };

struct ScoreWeights {
    std::array<double, 5> w{0.2, 0.2, 0.1, 0.3, 0.2};

    /// Non-negative and summing to 1 within 1e-9.
    void validate() const;
    /// "a,b,c,d,e"
    static ScoreWeights parse(std::string_view text);
};

struct ScoreCard {
    std::string hardware;
    std::string label;
    std::optional<Configuration> config;
    RawProperties raw;
    /// A..E normalised columns.
    std::array<double, 5> norm{};
    double final = 0;

    std::string id() const { return hardware + ":" + label; }
};

double harmonic_mean(double a, double b);

/// `seed` only feeds the router's tie-breaking.
RawProperties raw_properties(const Configuration &config, const ModelSpec &model, std::uint64_t seed = 0);

/// Lower-better values are inverted first; then min-max onto [0, 100]. A set
/// with no spread maps to all 100.
std::vector<double> normalize(std::span<const double> values, Direction direction);

double final_score(const std::array<double, 5> &normalized, const ScoreWeights &weights = {});

/// Fills `final` and sorts descending; ties go to (hardware, label).
void rank_cards(std::vector<ScoreCard> &cards, const ScoreWeights &weights = {});

/// Raw properties, normalisation over exactly these candidates, ranking.
std::vector<ScoreCard> rank_configurations(const std::vector<Configuration> &configs, const ModelSpec &model,
                                           const ScoreWeights &weights = {}, std::uint64_t seed = 0);

/// Per-hardware top-k, preserving rank order.
std::vector<ScoreCard> top_k_for(const std::vector<ScoreCard> &ranked, const std::string &hardware, std::size_t k);

}  // namespace qhw
