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

#include "qhw/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qhw/errors.hpp"
#include "qhw/transpile.hpp"

namespace qhw {

void ScoreWeights::validate() const {
    double sum = 0;
    for (double x : w) {
        if (!(x >= 0) || !std::isfinite(x)) {
            throw ValidationError("score weights must be finite and non-negative");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("score weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
}

ScoreWeights ScoreWeights::parse(std::string_view text) {
    ScoreWeights out;
    std::stringstream ss{std::string(text)};
    std::string field;
    std::size_t i = 0;
    while (std::getline(ss, field, ',')) {
        if (i >= 5) {
            throw ValidationError("expected 5 comma-separated weights");
        }
        try {
            std::size_t used = 0;
            out.w[i] = std::stod(field, &used);
            if (used != field.size()) {
                throw std::invalid_argument(field);
            }
        } catch (const std::logic_error &) {
            throw ValidationError("bad weight '" + field + "'");
        }
        ++i;
    }
    if (i != 5) {
        throw ValidationError("expected 5 comma-separated weights");
    }
    out.validate();
    return out;
}

double harmonic_mean(double a, double b) {
    if (!(a > 0 && b > 0)) {
        throw ValidationError("harmonic mean needs positive inputs");
    }
    return 2 * a * b / (a + b);
}

RawProperties raw_properties(const Configuration &config, const ModelSpec &model, std::uint64_t seed) {
    const auto &hw = config.hardware();
    RawProperties r;
    for (auto p : config.physical_qubits()) {
        const auto &q = hw.qubit(p);
        r.decoherence += harmonic_mean(q.t1_us, q.t2_us);
        r.readout += (q.readout_p01 + q.readout_p10) / 2;
        r.err_1q += q.err_1q;
    }
    const auto n = static_cast<double>(config.size());
    r.decoherence /= n;
    r.readout /= n;
    r.err_1q /= n;
    const CouplingMap induced = induced_coupling(config);
    if (induced.edges().empty()) {
        throw ValidationError(config.id() + ": configuration has no couplers");
    }
    for (const auto &e : induced.edges()) {
        r.err_2q += e.err_2q;
    }
    r.err_2q /= static_cast<double>(induced.edges().size());
    const std::vector<double> zeros(model.n_qubits * 3, 0.0);
    const CircuitIR probe = sel_layer(model.n_qubits, model.range_r, zeros);
    r.layer_depth = static_cast<double>(transpile(probe, config, seed).depth);
    return r;
}

std::vector<double> normalize(std::span<const double> values, Direction direction) {
    if (values.empty()) {
        throw ValidationError("cannot normalise an empty list");
    }
    std::vector<double> v(values.begin(), values.end());
    if (direction == Direction::LowerBetter) {
        for (auto &x : v) {
            if (!(x > 0)) {
                throw ValidationError("lower-is-better values must be positive to take reciprocals");
            }
            x = 1.0 / x;
        }
    }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double min = *lo, max = *hi;
    for (auto &x : v) {
        x = max > min ? (x - min) / (max - min) * 100.0 : 100.0;
    }
    return v;
}

double final_score(const std::array<double, 5> &normalized, const ScoreWeights &weights) {
    double s = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        s += weights.w[i] * normalized[i];
    }
    return s;
}

void rank_cards(std::vector<ScoreCard> &cards, const ScoreWeights &weights) {
    weights.validate();
    for (auto &c : cards) {
        c.final = final_score(c.norm, weights);
    }
    std::stable_sort(cards.begin(), cards.end(), [](const ScoreCard &a, const ScoreCard &b) {
        if (a.final != b.final) {
            return a.final > b.final;
        }
        if (a.hardware != b.hardware) {
            return a.hardware < b.hardware;
        }
        return a.label < b.label;
    });
}

std::vector<ScoreCard> rank_configurations(const std::vector<Configuration> &configs, const ModelSpec &model,
                                           const ScoreWeights &weights, std::uint64_t seed) {
    if (configs.size() < 2) {
        throw ValidationError("need >= 2 configurations to normalise scores");
    }
    weights.validate();
    std::vector<ScoreCard> cards;
    std::array<std::vector<double>, 5> columns;
    for (const auto &c : configs) {
        ScoreCard card;
        card.hardware = c.hardware().name();
        card.label = c.label();
        card.config = c;
        card.raw = raw_properties(c, model, seed);
        columns[0].push_back(card.raw.decoherence);
        columns[1].push_back(card.raw.readout);
        columns[2].push_back(card.raw.err_1q);
        columns[3].push_back(card.raw.err_2q);
        columns[4].push_back(card.raw.layer_depth);
        cards.push_back(std::move(card));
    }
    for (std::size_t k = 0; k < 5; ++k) {
        const auto norm = normalize(columns[k], k == 0 ? Direction::HigherBetter : Direction::LowerBetter);
        for (std::size_t i = 0; i < cards.size(); ++i) {
            cards[i].norm[k] = norm[i];
        }
    }
    rank_cards(cards, weights);
    return cards;
}

std::vector<ScoreCard> top_k_for(const std::vector<ScoreCard> &ranked, const std::string &hardware, std::size_t k) {
    std::vector<ScoreCard> out;
    for (const auto &c : ranked) {
        if (c.hardware == hardware && out.size() < k) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace qhw
