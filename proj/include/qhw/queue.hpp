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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qhw {

struct QueueSample {
    std::string timestamp;  // RFC 3339 as read
    double unix_seconds = 0;
    long depth = 0;
};

struct QueueTrace {
    std::string hardware;
    std::vector<QueueSample> samples;

    /// Throws unless timestamps strictly increase and depths are >= 0.
    void validate() const;
};

/// Seconds since the Unix epoch. Accepts "Z" or a numeric offset and an
/// optional fractional part.
double parse_rfc3339(std::string_view text);
std::string format_rfc3339(std::int64_t unix_seconds);

/// CSV with header `timestamp,depth`.
QueueTrace read_trace(std::istream &in, std::string hardware);
QueueTrace load_trace(const std::filesystem::path &path, std::string hardware);
void write_trace(std::ostream &out, const QueueTrace &trace);

struct Summary {
    std::size_t n = 0;
    double mean = 0;
    double stddev = 0;  // population
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double max = 0;
};
/// Quartiles use linear interpolation between order statistics.
Summary summarize(std::span<const double> values);
/// Needs at least two samples.
Summary trace_stats(const QueueTrace &trace);

double avg_wait(double total_seconds, double depth);
/// Minutes.
double train_wait(double avg_seconds, double n_train, double epochs);
/// Seconds.
double inference_wait(double avg_seconds, double n_test);
double speedup(double wait_a, double wait_b);

/// One row of the wait-time table: C = A / B rounded to 0.1 s, then
/// train = C * D * epochs / 60 min and inference = C * E s.
struct WaitTableRow {
    double total_seconds = 0;
    double depth = 0;
    double avg_seconds = 0;
    double train_minutes = 0;
    double inference_seconds = 0;
};
WaitTableRow wait_table_row(double total_seconds, double depth, double n_train, double n_test, double epochs = 10);

/// Wait for a new job: depth of the most recent sample times the per-job
/// service time.
double estimate_wait(const QueueTrace &trace, double service_seconds);

/// Mean-reverting AR(1) depth process rescaled to the requested mean and
/// population standard deviation, then rounded to whole jobs.
struct TraceGenerator {
    double mean = 100;
    double stddev = 10;
    double persistence = 0.9;
    std::size_t n_samples = 336;
    std::int64_t start_unix = 1709251200;  // 2024-03-01T00:00:00Z
    std::int64_t interval_seconds = 1800;
};
QueueTrace generate_trace(const std::string &hardware, const TraceGenerator &params, std::uint64_t seed);

}  // namespace qhw
