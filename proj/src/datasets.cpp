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

#include "qhw/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "qhw/errors.hpp"

#ifndef QHW_DATA_DIR
#define QHW_DATA_DIR "data"
#endif

namespace qhw {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
            field.pop_back();
        }
        out.push_back(field);
    }
    return out;
}

double parse_number(const std::string &s, const std::filesystem::path &path, std::size_t line) {
    double v = 0;
    const auto *end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ValidationError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
    }
    return v;
}

/// Rows of numeric fields after the header line.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path &path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != columns) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(columns) + " columns, got " + std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(columns);
        for (const auto &f : fields) {
            row.push_back(parse_number(f, path, lineno));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ValidationError(path.string() + ": no data rows");
    }
    return rows;
}

std::size_t as_label(double v, const std::filesystem::path &path) {
    if (v < 0 || v != std::floor(v)) {
        throw ValidationError(path.string() + ": label " + std::to_string(v) + " is not a class index");
    }
    return static_cast<std::size_t>(v);
}

std::size_t floor_share(double ratio, std::size_t n) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(n_classes, 0);
    for (auto l : labels) {
        ++counts.at(l);
    }
    return counts;
}

Dataset Dataset::subset(const std::vector<std::size_t> &indices) const {
    Dataset out;
    out.name = name;
    out.n_classes = n_classes;
    for (auto i : indices) {
        out.features.push_back(features.at(i));
        out.labels.push_back(labels.at(i));
    }
    return out;
}

void Dataset::validate() const {
    if (features.size() != labels.size()) {
        throw ValidationError("dataset " + name + ": feature and label counts differ");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (features[i].size() != n_features()) {
            throw ValidationError("dataset " + name + ": ragged feature matrix at row " + std::to_string(i));
        }
        if (labels[i] >= n_classes) {
            throw ValidationError("dataset " + name + ": label out of range at row " + std::to_string(i));
        }
    }
}

void scale_to_pi(std::vector<std::vector<double>> &features) {
    if (features.empty()) {
        return;
    }
    const std::size_t cols = features.front().size();
    for (std::size_t c = 0; c < cols; ++c) {
        double lo = features[0][c], hi = features[0][c];
        for (const auto &row : features) {
            lo = std::min(lo, row[c]);
            hi = std::max(hi, row[c]);
        }
        for (auto &row : features) {
            row[c] = hi > lo ? (row[c] - lo) / (hi - lo) * std::numbers::pi : 0.0;
        }
    }
}

Dataset load_iris(const std::filesystem::path &path) {
    auto rows = read_numeric_csv(path, 5);
    Dataset ds;
    ds.name = "iris";
    for (auto &row : rows) {
        ds.labels.push_back(as_label(row.back(), path));
        row.pop_back();
        ds.features.push_back(std::move(row));
    }
    ds.n_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    scale_to_pi(ds.features);
    ds.validate();
    return ds;
}

Dataset load_digits(const std::filesystem::path &path, std::array<int, 2> digits) {
    if (digits[0] == digits[1]) {
        throw ValidationError("load_digits needs two distinct classes");
    }
    const auto rows = read_numeric_csv(path, 65);
    Dataset ds;
    ds.name = "digits" + std::to_string(digits[0]) + std::to_string(digits[1]);
    ds.n_classes = 2;
    std::size_t lineno = 1;
    for (const auto &row : rows) {
        ++lineno;
        const auto label = static_cast<long>(as_label(row.back(), path));
        std::size_t cls;
        if (label == digits[0]) {
            cls = 0;
        } else if (label == digits[1]) {
            cls = 1;
        } else {
            continue;
        }
        std::vector<double> x(row.begin(), row.end() - 1);
        const double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        if (norm == 0.0) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": zero-norm image");
        }
        for (auto &v : x) {
            v /= norm;
        }
        ds.features.push_back(std::move(x));
        ds.labels.push_back(cls);
    }
    for (std::size_t c = 0; c < 2; ++c) {
        if (std::count(ds.labels.begin(), ds.labels.end(), c) == 0) {
            throw ValidationError(path.string() + ": no rows for digit " + std::to_string(digits[c]));
        }
    }
    return ds;
}

Split split(const Dataset &dataset, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ValidationError("split ratio must lie in (0, 1)");
    }
    dataset.validate();
    std::vector<std::vector<std::size_t>> by_class(dataset.n_classes);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        by_class[dataset.labels[i]].push_back(i);
    }
    std::vector<std::size_t> quota(dataset.n_classes);
    std::vector<double> remainder(dataset.n_classes);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < dataset.n_classes; ++c) {
        if (by_class[c].size() < 2) {
            throw ValidationError("class " + std::to_string(c) + " has fewer than 2 samples");
        }
        quota[c] = floor_share(ratio, by_class[c].size());
        remainder[c] = ratio * static_cast<double>(by_class[c].size()) - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    std::vector<std::size_t> order(dataset.n_classes);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < floor_share(ratio, dataset.size()); ++k) {
        ++quota[order[k % order.size()]];
        ++assigned;
    }
    std::mt19937_64 rng(seed);
    Split out;
    out.seed = seed;
    for (std::size_t c = 0; c < dataset.n_classes; ++c) {
        auto idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Dataset load_named(const std::string &name, const std::filesystem::path &data_dir) {
    if (name == "iris") {
        return load_iris(data_dir / "iris.csv");
    }
    if (name == "digits01") {
        return load_digits(data_dir / "digits.csv", {0, 1});
    }
    if (name == "digits89") {
        return load_digits(data_dir / "digits.csv", {8, 9});
    }
    throw ValidationError("unknown dataset '" + name + "' (expected iris, digits01 or digits89)");
}

std::filesystem::path default_data_dir() {
    if (const char *env = std::getenv("QHW_DATA_DIR"); env && *env) {
        return env;
    }
    return QHW_DATA_DIR;
}

}  // namespace qhw
