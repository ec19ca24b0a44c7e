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
#include <filesystem>
#include <string>
#include <vector>

namespace qhw {

struct Dataset {
    std::string name;
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    std::size_t n_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t n_features() const { return features.empty() ? 0 : features.front().size(); }
    std::vector<std::size_t> class_counts() const;
    /// Rows at `indices`, in that order.
    Dataset subset(const std::vector<std::size_t> &indices) const;
    /// Throws unless rectangular with labels < n_classes.
    void validate() const;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

/// Iris CSV: one header line, then 4 numeric features and an integer label.
/// Features are min-max scaled per column to [0, pi].
Dataset load_iris(const std::filesystem::path &path);

/// Digits CSV: 64 pixel columns then the label. Keeps the two requested
/// digits (relabelled 0 and 1 in the given order) and L2-normalises rows.
Dataset load_digits(const std::filesystem::path &path, std::array<int, 2> digits);

/// Per-column min-max scaling into [0, pi]; constant columns map to 0.
void scale_to_pi(std::vector<std::vector<double>> &features);

/// Stratified seeded split. The overall train size is floor(ratio * n); each
/// class gets floor(ratio * n_c) and leftover slots go to the classes with
/// the largest fractional remainders.
Split split(const Dataset &dataset, double ratio, std::uint64_t seed);

/// "iris", "digits01" or "digits89" from `data_dir`.
Dataset load_named(const std::string &name, const std::filesystem::path &data_dir);

/// $QHW_DATA_DIR if set, else the directory baked in at build time.
std::filesystem::path default_data_dir();

}  // namespace qhw
