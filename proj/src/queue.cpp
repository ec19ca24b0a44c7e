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

#include "qhw/queue.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "qhw/errors.hpp"

namespace qhw {

namespace {

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t &y, unsigned &m, unsigned &d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

int digits(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) {
        throw ValidationError("truncated timestamp '" + std::string(s) + "'");
    }
    int v = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc() || p != s.data() + pos + len) {
        throw ValidationError("bad timestamp '" + std::string(s) + "'");
    }
    return v;
}

void expect_char(std::string_view s, std::size_t pos, std::string_view allowed) {
    if (pos >= s.size() || allowed.find(s[pos]) == std::string_view::npos) {
        throw ValidationError("bad timestamp '" + std::string(s) + "'");
    }
}

double quantile(const std::vector<double> &sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double parse_rfc3339(std::string_view s) {
    const int year = digits(s, 0, 4);
    expect_char(s, 4, "-");
    const int month = digits(s, 5, 2);
    expect_char(s, 7, "-");
    const int day = digits(s, 8, 2);
    expect_char(s, 10, "Tt ");
    const int hour = digits(s, 11, 2);
    expect_char(s, 13, ":");
    const int minute = digits(s, 14, 2);
    expect_char(s, 16, ":");
    const int second = digits(s, 17, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        throw ValidationError("timestamp field out of range in '" + std::string(s) + "'");
    }
    std::size_t pos = 19;
    double frac = 0;
    if (pos < s.size() && s[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < s.size() && s[end] >= '0' && s[end] <= '9') {
            ++end;
        }
        if (end == pos + 1) {
            throw ValidationError("bad fractional seconds in '" + std::string(s) + "'");
        }
        double scale = 0.1;
        for (std::size_t i = pos + 1; i < end; ++i, scale /= 10) {
            frac += (s[i] - '0') * scale;
        }
        pos = end;
    }
    int offset = 0;
    expect_char(s, pos, "Zz+-");
    if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        const int oh = digits(s, pos + 1, 2);
        expect_char(s, pos + 3, ":");
        const int om = digits(s, pos + 4, 2);
        offset = sign * (oh * 3600 + om * 60);
        pos += 6;
    } else {
        pos += 1;
    }
    if (pos != s.size()) {
        throw ValidationError("trailing characters in timestamp '" + std::string(s) + "'");
    }
    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return static_cast<double>(days * 86400 + hour * 3600 + minute * 60 + second - offset) + frac;
}

std::string format_rfc3339(std::int64_t unix_seconds) {
    std::int64_t days = unix_seconds / 86400;
    std::int64_t rem = unix_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

void QueueTrace::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].depth < 0) {
            throw ValidationError(hardware + ": negative queue depth at sample " + std::to_string(i));
        }
        if (i > 0 && !(samples[i].unix_seconds > samples[i - 1].unix_seconds)) {
            throw ValidationError(hardware + ": timestamps not strictly increasing at sample " + std::to_string(i));
        }
    }
}

QueueTrace read_trace(std::istream &in, std::string hardware) {
    QueueTrace trace;
    trace.hardware = std::move(hardware);
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(trace.hardware + ": empty queue trace");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "timestamp,depth") {
        throw ValidationError(trace.hardware + ": queue trace header must be 'timestamp,depth'");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError(trace.hardware + ":" + std::to_string(lineno) + ": expected 'timestamp,depth'");
        }
        QueueSample s;
        s.timestamp = line.substr(0, comma);
        s.unix_seconds = parse_rfc3339(s.timestamp);
        const std::string depth = line.substr(comma + 1);
        auto [p, ec] = std::from_chars(depth.data(), depth.data() + depth.size(), s.depth);
        if (ec != std::errc() || p != depth.data() + depth.size()) {
            throw ValidationError(trace.hardware + ":" + std::to_string(lineno) + ": bad depth '" + depth + "'");
        }
        trace.samples.push_back(std::move(s));
    }
    trace.validate();
    return trace;
}

QueueTrace load_trace(const std::filesystem::path &path, std::string hardware) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open queue trace " + path.string());
    }
    try {
        return read_trace(in, std::move(hardware));
    } catch (const ValidationError &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_trace(std::ostream &out, const QueueTrace &trace) {
    out << "timestamp,depth\n";
    for (const auto &s : trace.samples) {
        out << (s.timestamp.empty() ? format_rfc3339(static_cast<std::int64_t>(s.unix_seconds)) : s.timestamp)
            << ',' << s.depth << '\n';
    }
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) {
        throw ValidationError("cannot summarise an empty sample");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    Summary s;
    s.n = v.size();
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(s.n);
    double ss = 0;
    for (double x : v) {
        ss += (x - s.mean) * (x - s.mean);
    }
    s.stddev = std::sqrt(ss / static_cast<double>(s.n));
    s.min = v.front();
    s.max = v.back();
    s.q1 = quantile(v, 0.25);
    s.median = quantile(v, 0.5);
    s.q3 = quantile(v, 0.75);
    return s;
}

Summary trace_stats(const QueueTrace &trace) {
    if (trace.samples.size() < 2) {
        throw ValidationError(trace.hardware + ": trace statistics need at least 2 samples");
    }
    std::vector<double> depths;
    for (const auto &s : trace.samples) {
        depths.push_back(static_cast<double>(s.depth));
    }
    return summarize(depths);
}

double avg_wait(double total_seconds, double depth) {
    if (!(depth >= 1)) {
        throw ValidationError("queue depth must be >= 1");
    }
    return total_seconds / depth;
}

double train_wait(double avg_seconds, double n_train, double epochs) {
    if (!(avg_seconds > 0 && n_train > 0 && epochs > 0)) {
        throw ValidationError("train_wait inputs must be positive");
    }
    return avg_seconds * n_train * epochs / 60.0;
}

double inference_wait(double avg_seconds, double n_test) {
    if (!(avg_seconds > 0 && n_test > 0)) {
        throw ValidationError("inference_wait inputs must be positive");
    }
    return avg_seconds * n_test;
}

double speedup(double wait_a, double wait_b) {
    if (wait_b == 0.0) {
        throw ValidationError("speedup against a zero wait");
    }
    return wait_a / wait_b;
}

WaitTableRow wait_table_row(double total_seconds, double depth, double n_train, double n_test, double epochs) {
    WaitTableRow row;
    row.total_seconds = total_seconds;
    row.depth = depth;
    // The table carries C at one decimal and builds the other cells from it.
    row.avg_seconds = std::round(avg_wait(total_seconds, depth) * 10.0) / 10.0;
    row.train_minutes = train_wait(row.avg_seconds, n_train, epochs);
    row.inference_seconds = inference_wait(row.avg_seconds, n_test);
    return row;
}

double estimate_wait(const QueueTrace &trace, double service_seconds) {
    if (trace.samples.empty()) {
        throw ValidationError(trace.hardware + ": empty queue trace");
    }
    if (!(service_seconds >= 0)) {
        throw ValidationError("service time must be non-negative");
    }
    return static_cast<double>(trace.samples.back().depth) * service_seconds;
}

QueueTrace generate_trace(const std::string &hardware, const TraceGenerator &params, std::uint64_t seed) {
    if (params.n_samples < 2 || !(params.stddev >= 0) || params.interval_seconds <= 0 ||
        !(params.persistence >= 0 && params.persistence < 1)) {
        throw ValidationError("invalid trace generator parameters");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x(params.n_samples);
    x[0] = noise(rng);
    const double kick = std::sqrt(1 - params.persistence * params.persistence);
    for (std::size_t i = 1; i < x.size(); ++i) {
        x[i] = params.persistence * x[i - 1] + kick * noise(rng);
    }
    const Summary raw = summarize(x);
    QueueTrace trace;
    trace.hardware = hardware;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = raw.stddev > 0 ? (x[i] - raw.mean) / raw.stddev : 0.0;
        QueueSample s;
        const std::int64_t t = params.start_unix + static_cast<std::int64_t>(i) * params.interval_seconds;
        s.unix_seconds = static_cast<double>(t);
        s.timestamp = format_rfc3339(t);
        s.depth = std::max(0L, std::lround(params.mean + params.stddev * z));
        trace.samples.push_back(std::move(s));
    }
    return trace;
}

}  // namespace qhw
