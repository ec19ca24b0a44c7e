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

#include "qhw/fleet.hpp"

#include <fstream>

#include "qhw/errors.hpp"

namespace qhw {

std::vector<Configuration> Fleet::configurations() const {
    std::vector<Configuration> out;
    for (const auto &h : hardware) {
        out.insert(out.end(), h.configurations.begin(), h.configurations.end());
    }
    return out;
}

Configuration Fleet::find(const std::string &id) const {
    for (const auto &h : hardware) {
        for (const auto &c : h.configurations) {
            if (c.id() == id) {
                return c;
            }
        }
    }
    throw ValidationError("no configuration '" + id + "' in the fleet (expected hardware:label, e.g. 27Q:I)");
}

std::map<std::string, double> Fleet::queue_estimates() const {
    std::map<std::string, double> out;
    for (const auto &h : hardware) {
        out[h.name] = estimate_wait(h.trace, h.service_seconds);
    }
    return out;
}

Fleet load_fleet(const std::filesystem::path &dir) {
    const auto path = dir / "fleet.json";
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open fleet file " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw IoError("parse error in " + path.string() + ": " + e.what());
    }
    Fleet fleet;
    fleet.dir = dir;
    try {
        if (doc.at("format").get<int>() != 1) {
            throw ValidationError("unsupported fleet format");
        }
        fleet.seed = doc.value("seed", std::uint64_t{0});
        for (const auto &jh : doc.at("hardware")) {
            FleetHardware h;
            h.name = jh.at("name").get<std::string>();
            auto snap = load_snapshot(dir / jh.at("snapshot").get<std::string>());
            if (snap.name() != h.name) {
                throw ValidationError("snapshot name '" + snap.name() + "' does not match fleet entry '" + h.name +
                                      "'");
            }
            h.snapshot = std::make_shared<const HardwareSnapshot>(std::move(snap));
            const auto &jq = jh.at("queue");
            h.backend = jq.at("backend").get<std::string>();
            h.trace = load_trace(dir / jq.at("trace").get<std::string>(), h.backend);
            h.service_seconds = jq.at("service_seconds").get<double>();
            h.reference_wait_seconds = jq.value("reference_wait_seconds", 0.0);
            h.reference_depth = jq.value("reference_depth", 0.0);
            for (const auto &[label, qubits] : jh.at("configurations").items()) {
                h.configurations.push_back(
                    validate_configuration(h.snapshot, qubits.get<std::vector<std::size_t>>(), label));
            }
            fleet.hardware.push_back(std::move(h));
        }
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (fleet.hardware.empty()) {
        throw ValidationError(path.string() + ": fleet lists no hardware");
    }
    return fleet;
}

}  // namespace qhw
