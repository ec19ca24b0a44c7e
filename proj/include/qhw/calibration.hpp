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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace qhw {

enum class BasisSet { A, B };

std::string_view basis_name(BasisSet basis);
BasisSet parse_basis(std::string_view text);

inline constexpr double kDefault1qDurationNs = 35.0;
inline constexpr double kDefault2qDurationNs = 300.0;
inline constexpr double kDefaultReadoutDurationNs = 700.0;

struct QubitCalibration {
    double t1_us = 0;
    double t2_us = 0;
    double readout_p01 = 0;  // prepared |0>, read 1
    double readout_p10 = 0;  // prepared |1>, read 0
    double err_1q = 0;
    std::map<std::string, double, std::less<>> durations_ns;

    /// Duration of a single physical pulse of `gate`. Falls back to the
    /// file-level "1q"/"2q"/"measure" entries and then to the defaults.
    double duration_ns(std::string_view gate) const;
};

struct CouplingEdge {
    std::size_t q0 = 0;
    std::size_t q1 = 0;
    double err_2q = 0;
};

class HardwareSnapshot {
   public:
    HardwareSnapshot(std::string name, std::vector<QubitCalibration> qubits, std::vector<CouplingEdge> edges,
                     BasisSet basis);

    const std::string &name() const { return name_; }
    std::size_t num_qubits() const { return qubits_.size(); }
    const std::vector<QubitCalibration> &qubits() const { return qubits_; }
    const QubitCalibration &qubit(std::size_t q) const { return qubits_.at(q); }
    const std::vector<CouplingEdge> &edges() const { return edges_; }
    BasisSet basis() const { return basis_; }

    bool coupled(std::size_t a, std::size_t b) const;
    std::optional<double> edge_error(std::size_t a, std::size_t b) const;
    double mean_edge_error() const;

   private:
    std::string name_;
    std::vector<QubitCalibration> qubits_;
    std::vector<CouplingEdge> edges_;
    BasisSet basis_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index_;
};

using SnapshotPtr = std::shared_ptr<const HardwareSnapshot>;

/// Undirected weighted graph over positions 0..n-1. Neighbour lists are kept
/// sorted so shortest-path tie-breaking is deterministic.
class CouplingMap {
   public:
    struct Edge {
        std::size_t a;
        std::size_t b;
        double err_2q;
    };

    explicit CouplingMap(std::size_t n);
    void add_edge(std::size_t a, std::size_t b, double err_2q);

    std::size_t size() const { return adjacency_.size(); }
    const std::vector<Edge> &edges() const { return edges_; }
    const std::vector<std::size_t> &neighbors(std::size_t q) const { return adjacency_.at(q); }
    bool coupled(std::size_t a, std::size_t b) const;
    std::optional<double> edge_error(std::size_t a, std::size_t b) const;
    bool connected() const;

    /// Hop distance; SIZE_MAX when unreachable.
    std::size_t distance(std::size_t a, std::size_t b) const;
    /// BFS path from `from` to `to` inclusive. Among equal-length paths the
    /// one visiting lower indices first is returned.
    std::vector<std::size_t> shortest_path(std::size_t from, std::size_t to) const;

   private:
    void ensure_distances() const;

    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<Edge> edges_;
    mutable std::vector<std::vector<std::size_t>> distances_;
};

class Configuration {
   public:
    Configuration(SnapshotPtr hardware, std::string label, std::vector<std::size_t> physical_qubits);

    const HardwareSnapshot &hardware() const { return *hardware_; }
    const SnapshotPtr &hardware_ptr() const { return hardware_; }
    const std::string &label() const { return label_; }
    const std::vector<std::size_t> &physical_qubits() const { return physical_; }
    std::size_t size() const { return physical_.size(); }

    /// "27Q:I" style identifier.
    std::string id() const;

    std::size_t physical(std::size_t logical) const { return physical_.at(logical); }
    std::optional<std::size_t> logical(std::size_t physical) const;

   private:
    SnapshotPtr hardware_;
    std::string label_;
    std::vector<std::size_t> physical_;
};

inline constexpr std::size_t kConfigurationSize = 8;

HardwareSnapshot parse_snapshot(const nlohmann::json &doc);
HardwareSnapshot load_snapshot(const std::filesystem::path &path);
nlohmann::json snapshot_to_json(const HardwareSnapshot &snapshot);

/// Succeeds iff `qubits` holds 8 distinct valid indices whose induced
/// subgraph on the hardware is connected.
Configuration validate_configuration(SnapshotPtr snapshot, std::vector<std::size_t> qubits, std::string label = {});

/// Edges among the configuration's qubits, relabelled by list position.
CouplingMap induced_coupling(const Configuration &config);

}  // namespace qhw
