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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qhw/calibration.hpp"
#include "qhw/queue.hpp"

namespace qhw {

struct FleetHardware {
    std::string name;
    SnapshotPtr snapshot;
    /// Backend whose queue the trace describes.
    std::string backend;
    QueueTrace trace;
    double service_seconds = 0;
    /// Published wait-time inputs: total wait (s) and queue depth.
    double reference_wait_seconds = 0;
    double reference_depth = 0;
    std::vector<Configuration> configurations;
};

struct Fleet {
    std::filesystem::path dir;
    std::uint64_t seed = 0;
    std::vector<FleetHardware> hardware;

    std::vector<Configuration> configurations() const;
    /// "27Q:I"; throws ValidationError when absent.
    Configuration find(const std::string &id) const;
    /// hardware name -> estimated wait for a new job (s).
    std::map<std::string, double> queue_estimates() const;
};

/// Reads `dir`/fleet.json and everything it references (paths relative to
/// `dir`).
Fleet load_fleet(const std::filesystem::path &dir);

}  // namespace qhw
