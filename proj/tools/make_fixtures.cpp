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

// Regenerates the calibration fixtures, queue traces and fleet.json under
// data/fleet. Output is deterministic for a given seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "qhw/calibration.hpp"
#include "qhw/queue.hpp"

namespace {

using Edge = std::pair<std::size_t, std::size_t>;
using Layouts = std::vector<std::pair<std::string, std::vector<std::size_t>>>;

std::vector<Edge> tokyo_like() {
    return {{0, 1},   {1, 2},   {2, 3},   {3, 4},   {0, 5},   {1, 6},   {1, 7},   {2, 6},   {3, 8},   {3, 9},
            {4, 8},   {4, 9},   {5, 6},   {6, 7},   {7, 8},   {8, 9},   {5, 10},  {5, 11},  {6, 10},  {6, 11},
            {7, 12},  {7, 13},  {8, 12},  {9, 14},  {10, 11}, {11, 12}, {12, 13}, {13, 14}, {10, 15}, {11, 16},
            {11, 17}, {12, 16}, {13, 18}, {13, 19}, {14, 18}, {14, 19}, {15, 16}, {16, 17}, {17, 18}, {18, 19}};
}

// Falcon heavy-hex with labels 20 and 21 exchanged.
std::vector<Edge> falcon_relabelled() {
    const std::vector<Edge> falcon{{0, 1},   {1, 2},   {1, 4},   {2, 3},   {3, 5},   {4, 7},   {5, 8},
                                   {6, 7},   {7, 10},  {8, 9},   {8, 11},  {10, 12}, {11, 14}, {12, 13},
                                   {12, 15}, {13, 14}, {14, 16}, {15, 18}, {16, 19}, {17, 18}, {18, 21},
                                   {19, 20}, {19, 22}, {21, 23}, {22, 25}, {23, 24}, {24, 25}, {25, 26}};
    auto relabel = [](std::size_t q) -> std::size_t { return q == 20 ? 21 : q == 21 ? 20 : q; };
    std::vector<Edge> out;
    for (auto [a, b] : falcon) {
        out.push_back({relabel(a), relabel(b)});
    }
    return out;
}

std::vector<Edge> eagle() {
    std::vector<Edge> out;
    const std::vector<std::pair<std::size_t, std::size_t>> rows{{0, 13},  {18, 32},  {37, 51},  {56, 70},
                                                                {75, 89}, {94, 108}, {113, 126}};
    for (auto [lo, hi] : rows) {
        for (std::size_t q = lo; q < hi; ++q) {
            out.push_back({q, q + 1});
        }
    }
    const std::vector<std::array<std::size_t, 3>> bridges{
        {0, 14, 18},    {4, 15, 22},    {8, 16, 26},    {12, 17, 30},   {20, 33, 39},   {24, 34, 43},
        {28, 35, 47},   {32, 36, 51},   {37, 52, 56},   {41, 53, 60},   {45, 54, 64},   {49, 55, 68},
        {58, 71, 77},   {62, 72, 81},   {66, 73, 85},   {70, 74, 89},   {75, 90, 94},   {79, 91, 98},
        {83, 92, 102},  {87, 93, 106},  {96, 109, 114}, {100, 110, 118}, {104, 111, 122}, {108, 112, 126}};
    for (const auto &b : bridges) {
        out.push_back({b[0], b[1]});
        out.push_back({b[1], b[2]});
    }
    return out;
}

struct Profile {
    std::string name;
    qhw::BasisSet basis;
    std::size_t n_qubits;
    std::vector<Edge> edges;
    Layouts layouts;
    double t1_us, t2_ratio, err_1q, readout_p01, readout_p10, mean_err_2q, cx_ns;
    std::string backend;
    double trace_mean, trace_std, reference_wait, reference_depth;
};

double lognormal(std::mt19937_64 &rng, double mean, double spread) {
    std::normal_distribution<double> n(0.0, spread);
    return mean * std::exp(n(rng) - spread * spread / 2);
}

qhw::HardwareSnapshot make_snapshot(const Profile &p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<qhw::QubitCalibration> qubits;
    for (std::size_t q = 0; q < p.n_qubits; ++q) {
        qhw::QubitCalibration c;
        c.t1_us = lognormal(rng, p.t1_us, 0.25);
        c.t2_us = std::min(2 * c.t1_us, c.t1_us * lognormal(rng, p.t2_ratio, 0.2));
        c.err_1q = lognormal(rng, p.err_1q, 0.3);
        c.readout_p01 = std::min(0.2, lognormal(rng, p.readout_p01, 0.3));
        c.readout_p10 = std::min(0.2, lognormal(rng, p.readout_p10, 0.3));
        qubits.push_back(c);
    }
    // Edges used by some configuration and the rest are each scaled to the
    // target mean, so both subsets and the whole device agree.
    std::set<Edge> used;
    for (const auto &[label, layout] : p.layouts) {
        const std::set<std::size_t> members(layout.begin(), layout.end());
        for (auto [a, b] : p.edges) {
            if (members.count(a) && members.count(b)) {
                used.insert({a, b});
            }
        }
    }
    std::vector<qhw::CouplingEdge> edges;
    double sum_used = 0, sum_rest = 0;
    std::size_t n_used = 0, n_rest = 0;
    for (auto [a, b] : p.edges) {
        const double e = lognormal(rng, p.mean_err_2q, 0.35);
        edges.push_back({a, b, e});
        (used.count({a, b}) ? sum_used : sum_rest) += e;
        ++(used.count({a, b}) ? n_used : n_rest);
    }
    for (auto &e : edges) {
        const bool u = used.count({e.q0, e.q1});
        const double mean = u ? sum_used / n_used : sum_rest / n_rest;
        e.err_2q *= p.mean_err_2q / mean;
    }
    for (auto &q : qubits) {
        q.durations_ns = {{"1q", 35.0}, {"cx", p.cx_ns}, {"measure", 700.0}};
    }
    return qhw::HardwareSnapshot(p.name, std::move(qubits), std::move(edges), p.basis);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Regenerate fleet fixtures"};
    std::filesystem::path out = "data/fleet";
    std::uint64_t seed = 2024;
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Profile> profiles{
        {"20Q", qhw::BasisSet::A, 20, tokyo_like(),
         Layouts{{"I", {0, 1, 6, 5, 10, 11, 15, 16}},
                 {"II", {5, 6, 7, 8, 9, 14, 13, 3}},
                 {"III", {6, 7, 8, 9, 14, 13, 3, 2}},
                 {"IV", {0, 1, 2, 3, 8, 9, 14, 6}},
                 {"V", {5, 6, 1, 2, 3, 4, 0, 8}}},
         90.0, 0.9, 6e-4, 0.025, 0.045, 0.0172, 350.0, "osaka", 150.0, 43.0, 1.0, 1.0},
        {"27Q", qhw::BasisSet::B, 27, falcon_relabelled(),
         Layouts{{"I", {4, 7, 10, 12, 15, 18, 20, 23}},
                 {"II", {4, 7, 10, 12, 13, 15, 18, 20}},
                 {"III", {7, 10, 12, 15, 18, 20, 13, 14}},
                 {"IV", {10, 12, 15, 18, 20, 23, 24, 13}},
                 {"V", {4, 7, 10, 12, 15, 18, 6, 13}}},
         160.0, 0.8, 2.5e-4, 0.012, 0.022, 0.0085, 300.0, "kyoto", 250.0, 74.0, 8100.0, 183.0},
        {"127Q", qhw::BasisSet::B, 127, eagle(),
         Layouts{{"I", {14, 18, 19, 20, 21, 22, 23, 24}},
                 {"II", {19, 20, 21, 22, 23, 24, 25, 15}},
                 {"III", {20, 21, 22, 23, 24, 25, 15, 4}},
                 {"IV", {14, 18, 19, 20, 21, 22, 23, 15}},
                 {"V", {19, 20, 21, 22, 23, 24, 15, 33}}},
         60.0, 0.7, 1.2e-3, 0.03, 0.07, 0.0147, 550.0, "brisbane", 300.0, 88.0, 20400.0, 1447.0},
    };

    std::filesystem::create_directories(out / "queue");
    nlohmann::json fleet{{"format", 1}, {"seed", seed}, {"hardware", nlohmann::json::array()}};
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto &p = profiles[i];
        const auto snap = make_snapshot(p, seed + 101 * (i + 1));
        auto shared = std::make_shared<const qhw::HardwareSnapshot>(snap);
        nlohmann::json layouts;
        for (const auto &[label, qubits] : p.layouts) {
            qhw::validate_configuration(shared, qubits, label);
            layouts[label] = qubits;
        }
        std::ofstream(out / (p.name + ".json")) << snapshot_to_json(snap).dump(1) << '\n';

        qhw::TraceGenerator gen;
        gen.mean = p.trace_mean;
        gen.stddev = p.trace_std;
        const auto trace = qhw::generate_trace(p.backend, gen, seed + 7 * (i + 1));
        std::ofstream tf(out / "queue" / (p.backend + ".csv"));
        qhw::write_trace(tf, trace);
        const auto stats = qhw::trace_stats(trace);
        const double service = qhw::avg_wait(p.reference_wait, p.reference_depth);

        fleet["hardware"].push_back({{"name", p.name},
                                     {"snapshot", p.name + ".json"},
                                     {"queue",
                                      {{"backend", p.backend},
                                       {"trace", "queue/" + p.backend + ".csv"},
                                       {"service_seconds", service},
                                       {"reference_wait_seconds", p.reference_wait},
                                       {"reference_depth", p.reference_depth},
                                       {"generator",
                                        {{"mean", gen.mean},
                                         {"stddev", gen.stddev},
                                         {"persistence", gen.persistence},
                                         {"n_samples", gen.n_samples},
                                         {"interval_seconds", gen.interval_seconds},
                                         {"seed", seed + 7 * (i + 1)}}}}},
                                     {"configurations", layouts}});
        std::printf("%-5s mean 2q err %.5f  trace std %.2f  last depth %ld\n", p.name.c_str(),
                    snap.mean_edge_error(), stats.stddev, trace.samples.back().depth);
    }
    std::ofstream(out / "fleet.json") << fleet.dump(1) << '\n';
    return 0;
}
