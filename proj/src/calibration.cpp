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

#include "qhw/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "qhw/errors.hpp"

namespace qhw {

namespace {

constexpr int kFormatVersion = 1;

void require_probability(double p, const std::string &field) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError(field + " must be a probability in [0,1], got " + std::to_string(p));
    }
}

std::pair<std::size_t, std::size_t> edge_key(std::size_t a, std::size_t b) { return {std::min(a, b), std::max(a, b)}; }

template <typename T>
T get_field(const nlohmann::json &obj, const char *key, const std::string &where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ValidationError(where + ": missing field '" + key + "'");
    }
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ValidationError(where + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace

std::string_view basis_name(BasisSet basis) { return basis == BasisSet::A ? "A" : "B"; }

BasisSet parse_basis(std::string_view text) {
    if (text == "A") {
        return BasisSet::A;
    }
    if (text == "B") {
        return BasisSet::B;
    }
    throw ValidationError("basis_set must be \"A\" or \"B\", got \"" + std::string(text) + "\"");
}

double QubitCalibration::duration_ns(std::string_view gate) const {
    if (auto it = durations_ns.find(gate); it != durations_ns.end()) {
        return it->second;
    }
    if (gate == "cx" || gate == "swap" || gate == "2q") {
        auto it = durations_ns.find("2q");
        return it != durations_ns.end() ? it->second : kDefault2qDurationNs;
    }
    if (gate == "measure" || gate == "readout") {
        auto it = durations_ns.find("measure");
        return it != durations_ns.end() ? it->second : kDefaultReadoutDurationNs;
    }
    auto it = durations_ns.find("1q");
    return it != durations_ns.end() ? it->second : kDefault1qDurationNs;
}

HardwareSnapshot::HardwareSnapshot(std::string name, std::vector<QubitCalibration> qubits,
                                   std::vector<CouplingEdge> edges, BasisSet basis)
    : name_(std::move(name)), qubits_(std::move(qubits)), edges_(std::move(edges)), basis_(basis) {
    if (name_.empty()) {
        throw ValidationError("name must not be empty");
    }
    if (qubits_.empty()) {
        throw ValidationError("num_qubits must be at least 1");
    }
    for (std::size_t q = 0; q < qubits_.size(); ++q) {
        const auto &c = qubits_[q];
        const std::string where = "qubits[" + std::to_string(q) + "]";
        if (!(c.t1_us > 0)) {
            throw ValidationError(where + ".t1_us must be positive");
        }
        if (!(c.t2_us > 0)) {
            throw ValidationError(where + ".t2_us must be positive");
        }
        if (c.t2_us > 2.0 * c.t1_us) {
            throw ValidationError(where + ".t2_us exceeds 2*t1_us");
        }
        require_probability(c.readout_p01, where + ".readout_p01");
        require_probability(c.readout_p10, where + ".readout_p10");
        require_probability(c.err_1q, where + ".err_1q");
        for (const auto &[gate, ns] : c.durations_ns) {
            if (!(ns >= 0)) {
                throw ValidationError(where + ".durations." + gate + " must be non-negative");
            }
        }
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto &e = edges_[i];
        const std::string where = "edges[" + std::to_string(i) + "]";
        if (e.q0 >= qubits_.size() || e.q1 >= qubits_.size()) {
            throw ValidationError(where + " endpoint out of range");
        }
        if (e.q0 == e.q1) {
            throw ValidationError(where + " endpoints must be distinct");
        }
        require_probability(e.err_2q, where + ".err_2q");
        if (!edge_index_.emplace(edge_key(e.q0, e.q1), i).second) {
            throw ValidationError(where + " duplicates an earlier edge");
        }
    }
    CouplingMap graph(qubits_.size());
    for (const auto &e : edges_) {
        graph.add_edge(e.q0, e.q1, e.err_2q);
    }
    if (!graph.connected()) {
        throw ValidationError("edges: coupling graph of the device is not connected");
    }
}

bool HardwareSnapshot::coupled(std::size_t a, std::size_t b) const { return edge_index_.contains(edge_key(a, b)); }

std::optional<double> HardwareSnapshot::edge_error(std::size_t a, std::size_t b) const {
    auto it = edge_index_.find(edge_key(a, b));
    if (it == edge_index_.end()) {
        return std::nullopt;
    }
    return edges_[it->second].err_2q;
}

double HardwareSnapshot::mean_edge_error() const {
    if (edges_.empty()) {
        return 0.0;
    }
    double sum = 0;
    for (const auto &e : edges_) {
        sum += e.err_2q;
    }
    return sum / static_cast<double>(edges_.size());
}

CouplingMap::CouplingMap(std::size_t n) : adjacency_(n) {}

void CouplingMap::add_edge(std::size_t a, std::size_t b, double err_2q) {
    if (a >= size() || b >= size() || a == b) {
        throw ValidationError("invalid coupling edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
    if (coupled(a, b)) {
        return;
    }
    auto insert_sorted = [](std::vector<std::size_t> &v, std::size_t x) {
        v.insert(std::upper_bound(v.begin(), v.end(), x), x);
    };
    insert_sorted(adjacency_[a], b);
    insert_sorted(adjacency_[b], a);
    edges_.push_back({std::min(a, b), std::max(a, b), err_2q});
    distances_.clear();
}

bool CouplingMap::coupled(std::size_t a, std::size_t b) const {
    if (a >= size() || b >= size()) {
        return false;
    }
    const auto &nb = adjacency_[a];
    return std::binary_search(nb.begin(), nb.end(), b);
}

std::optional<double> CouplingMap::edge_error(std::size_t a, std::size_t b) const {
    auto key = edge_key(a, b);
    for (const auto &e : edges_) {
        if (e.a == key.first && e.b == key.second) {
            return e.err_2q;
        }
    }
    return std::nullopt;
}

void CouplingMap::ensure_distances() const {
    if (!distances_.empty() || adjacency_.empty()) {
        return;
    }
    const std::size_t n = size();
    distances_.assign(n, std::vector<std::size_t>(n, std::numeric_limits<std::size_t>::max()));
    for (std::size_t s = 0; s < n; ++s) {
        auto &dist = distances_[s];
        std::queue<std::size_t> frontier;
        dist[s] = 0;
        frontier.push(s);
        while (!frontier.empty()) {
            auto u = frontier.front();
            frontier.pop();
            for (auto v : adjacency_[u]) {
                if (dist[v] == std::numeric_limits<std::size_t>::max()) {
                    dist[v] = dist[u] + 1;
                    frontier.push(v);
                }
            }
        }
    }
}

bool CouplingMap::connected() const {
    if (size() <= 1) {
        return true;
    }
    ensure_distances();
    const auto &row = distances_[0];
    return std::none_of(row.begin(), row.end(),
                        [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); });
}

std::size_t CouplingMap::distance(std::size_t a, std::size_t b) const {
    ensure_distances();
    return distances_.at(a).at(b);
}

std::vector<std::size_t> CouplingMap::shortest_path(std::size_t from, std::size_t to) const {
    const std::size_t d = distance(from, to);
    if (d == std::numeric_limits<std::size_t>::max()) {
        throw ValidationError("no path between positions " + std::to_string(from) + " and " + std::to_string(to));
    }
    // Walk greedily: at each hop take the lowest-index neighbour that is one
    // step closer to the target.
    std::vector<std::size_t> path{from};
    std::size_t cur = from;
    while (cur != to) {
        for (auto v : adjacency_[cur]) {
            if (distances_[v][to] + 1 == distances_[cur][to]) {
                cur = v;
                break;
            }
        }
        path.push_back(cur);
    }
    return path;
}

Configuration::Configuration(SnapshotPtr hardware, std::string label, std::vector<std::size_t> physical_qubits)
    : hardware_(std::move(hardware)), label_(std::move(label)), physical_(std::move(physical_qubits)) {}

std::string Configuration::id() const { return hardware_->name() + ":" + label_; }

std::optional<std::size_t> Configuration::logical(std::size_t physical) const {
    auto it = std::find(physical_.begin(), physical_.end(), physical);
    if (it == physical_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - physical_.begin());
}

HardwareSnapshot parse_snapshot(const nlohmann::json &doc) {
    if (!doc.is_object()) {
        throw ValidationError("calibration document must be an object");
    }
    const int format = get_field<int>(doc, "format", "document");
    if (format != kFormatVersion) {
        throw ValidationError("unsupported calibration format " + std::to_string(format));
    }
    auto name = get_field<std::string>(doc, "name", "document");
    auto num_qubits = get_field<std::size_t>(doc, "num_qubits", "document");
    auto basis = parse_basis(get_field<std::string>(doc, "basis_set", "document"));

    std::map<std::string, double, std::less<>> default_durations;
    if (auto it = doc.find("durations"); it != doc.end()) {
        default_durations = it->get<std::map<std::string, double, std::less<>>>();
    }

    const auto &jqubits = doc.at("qubits");
    if (!jqubits.is_array() || jqubits.size() != num_qubits) {
        throw ValidationError("qubits: expected an array of length num_qubits=" + std::to_string(num_qubits));
    }
    std::vector<QubitCalibration> qubits;
    qubits.reserve(num_qubits);
    for (std::size_t q = 0; q < jqubits.size(); ++q) {
        const auto &jq = jqubits[q];
        const std::string where = "qubits[" + std::to_string(q) + "]";
        QubitCalibration c;
        c.t1_us = get_field<double>(jq, "t1_us", where);
        c.t2_us = get_field<double>(jq, "t2_us", where);
        c.readout_p01 = get_field<double>(jq, "readout_p01", where);
        c.readout_p10 = get_field<double>(jq, "readout_p10", where);
        c.err_1q = get_field<double>(jq, "err_1q", where);
        c.durations_ns = default_durations;
        if (auto it = jq.find("durations"); it != jq.end()) {
            for (const auto &[gate, ns] : it->items()) {
                c.durations_ns[gate] = ns.get<double>();
            }
        }
        qubits.push_back(std::move(c));
    }

    std::vector<CouplingEdge> edges;
    for (std::size_t i = 0; i < doc.at("edges").size(); ++i) {
        const auto &je = doc.at("edges")[i];
        const std::string where = "edges[" + std::to_string(i) + "]";
        edges.push_back({get_field<std::size_t>(je, "q0", where), get_field<std::size_t>(je, "q1", where),
                         get_field<double>(je, "err_2q", where)});
    }
    return HardwareSnapshot(std::move(name), std::move(qubits), std::move(edges), basis);
}

HardwareSnapshot load_snapshot(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open calibration file " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw IoError("parse error in " + path.string() + ": " + e.what());
    }
    try {
        return parse_snapshot(doc);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(path.string() + ": " + e.what());
    } catch (const ValidationError &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

nlohmann::json snapshot_to_json(const HardwareSnapshot &snapshot) {
    nlohmann::json doc;
    doc["format"] = kFormatVersion;
    doc["name"] = snapshot.name();
    doc["num_qubits"] = snapshot.num_qubits();
    doc["basis_set"] = std::string(basis_name(snapshot.basis()));
    auto &qubits = doc["qubits"] = nlohmann::json::array();
    for (const auto &c : snapshot.qubits()) {
        nlohmann::json jq{{"t1_us", c.t1_us},
                          {"t2_us", c.t2_us},
                          {"readout_p01", c.readout_p01},
                          {"readout_p10", c.readout_p10},
                          {"err_1q", c.err_1q}};
        if (!c.durations_ns.empty()) {
            jq["durations"] = c.durations_ns;
        }
        qubits.push_back(std::move(jq));
    }
    auto &edges = doc["edges"] = nlohmann::json::array();
    for (const auto &e : snapshot.edges()) {
        edges.push_back({{"q0", e.q0}, {"q1", e.q1}, {"err_2q", e.err_2q}});
    }
    return doc;
}

Configuration validate_configuration(SnapshotPtr snapshot, std::vector<std::size_t> qubits, std::string label) {
    if (!snapshot) {
        throw ValidationError("configuration requires a hardware snapshot");
    }
    if (qubits.size() != kConfigurationSize) {
        throw ValidationError("configuration must list exactly 8 qubits, got " + std::to_string(qubits.size()));
    }
    std::set<std::size_t> seen;
    for (auto q : qubits) {
        if (q >= snapshot->num_qubits()) {
            throw ValidationError("qubit index " + std::to_string(q) + " out of range for " + snapshot->name());
        }
        if (!seen.insert(q).second) {
            throw ValidationError("duplicate qubit index " + std::to_string(q) + " in configuration");
        }
    }
    Configuration config(std::move(snapshot), std::move(label), std::move(qubits));
    if (!induced_coupling(config).connected()) {
        throw ValidationError("configuration " + config.id() + " induces a disconnected coupling subgraph");
    }
    return config;
}

CouplingMap induced_coupling(const Configuration &config) {
    const auto &phys = config.physical_qubits();
    CouplingMap map(phys.size());
    for (std::size_t i = 0; i < phys.size(); ++i) {
        for (std::size_t j = i + 1; j < phys.size(); ++j) {
            if (auto err = config.hardware().edge_error(phys[i], phys[j])) {
                map.add_edge(i, j, *err);
            }
        }
    }
    return map;
}

}  // namespace qhw
