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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "qhw/calibration.hpp"
#include "qhw/circuits.hpp"
#include "qhw/datasets.hpp"
#include "qhw/scoring.hpp"
#include "qhw/sim.hpp"
#include "qhw/transpile.hpp"

namespace qhw {

// ---------------------------------------------------------------- schedule

struct ScheduleSegment {
    /// Empty for noiseless training.
    std::optional<Configuration> config;
    std::size_t epochs = 2;

    std::string id() const { return config ? config->id() : "noiseless"; }
};

struct TrainingSchedule {
    std::vector<ScheduleSegment> segments;

    std::size_t total_epochs() const;
    /// One segment with no configuration.
    static TrainingSchedule noiseless(std::size_t epochs);
};

/// Picks one of each hardware's top-3 for the first segments, then fills the
/// rest greedily by queue wait without repeating hardware back to back.
TrainingSchedule build_schedule(const std::vector<ScoreCard> &ranked,
                                const std::map<std::string, double> &queue_estimates, std::size_t total_epochs = 10,
                                std::size_t n_segments = 5, std::uint64_t seed = 0);

/// Minutes spent queueing when every training datapoint of every epoch waits
/// for its segment's hardware estimate.
double schedule_train_wait(const TrainingSchedule &schedule, const std::map<std::string, double> &queue_estimates,
                           std::size_t n_train);
/// Empty when the schedule satisfies every invariant relative to `ranked`.
std::vector<std::string> schedule_violations(const TrainingSchedule &schedule, const std::vector<ScoreCard> &ranked,
                                             std::size_t expected_segments = 5, std::size_t expected_epochs = 10);

// ---------------------------------------------------------------- loss

/// <Z> on measured qubits 0..n_classes-1.
std::vector<double> class_logits(const ModelSpec &spec, const DensityState &state);
/// <Z> on the given wires, optionally seen through readout error.
std::vector<double> class_logits(const DensityState &state, std::span<const std::size_t> wires,
                                 const NoiseModel *readout = nullptr);

std::vector<double> softmax(std::span<const double> logits);
double loss(std::span<const double> logits, std::size_t label);
/// d loss / d logits
std::vector<double> loss_gradient(std::span<const double> logits, std::size_t label);
std::size_t argmax(std::span<const double> logits);

// ---------------------------------------------------------------- evaluators

struct BatchResult {
    double loss = 0;  // mean over the batch
    std::size_t correct = 0;
    std::vector<double> gradient;  // empty unless requested
    std::vector<std::vector<double>> logits;
};

/// Forward and gradient evaluation of one model on one execution target.
class Evaluator {
   public:
    virtual ~Evaluator() = default;
    virtual std::vector<double> logits(std::span<const double> features, const ParameterSet &params) = 0;
    /// Mean loss over the batch and, if asked, its parameter-shift gradient.
    virtual BatchResult evaluate(const Dataset &data, std::span<const std::size_t> batch, const ParameterSet &params,
                                 bool with_gradient) = 0;
};

/// Statevector simulation of the logical circuit; gradients by literally
/// re-simulating each +-pi/2 shift from a cached prefix.
class NoiselessEvaluator final : public Evaluator {
   public:
    explicit NoiselessEvaluator(ModelSpec spec);
    std::vector<double> logits(std::span<const double> features, const ParameterSet &params) override;
    BatchResult evaluate(const Dataset &data, std::span<const std::size_t> batch, const ParameterSet &params,
                         bool with_gradient) override;

   private:
    ModelSpec spec_;
};

/// Density-matrix simulation of the circuit transpiled onto a configuration.
/// With `noisy` false the same compiled circuit runs without channels.
class DeviceEvaluator final : public Evaluator {
   public:
    DeviceEvaluator(ModelSpec spec, Configuration config, bool noisy = true, RouteOptions route = {});
    std::vector<double> logits(std::span<const double> features, const ParameterSet &params) override;
    BatchResult evaluate(const Dataset &data, std::span<const std::size_t> batch, const ParameterSet &params,
                         bool with_gradient) override;

    /// Final state of the transpiled QNN and the wires holding each class.
    DensityState final_state(std::span<const double> features, const ParameterSet &params,
                             std::vector<std::size_t> *class_wires = nullptr);
    const NoiseModel *noise() const { return noisy_ ? &noise_ : nullptr; }
    /// Transpiled embedding + PQC for one sample, parameters bound.
    CircuitIR compiled_circuit(std::span<const double> features, const ParameterSet &params);

   private:
    struct Template {
        CircuitIR pqc;  // tagged, parameters at zero
        std::vector<std::size_t> class_wires;
    };
    struct Embedded {
        std::vector<double> features;
        std::vector<std::size_t> layout;
        std::shared_ptr<const DensityState> state;
    };
    const Embedded &embed(std::span<const double> features);
    const Template &pqc_for(const std::vector<std::size_t> &layout);
    CircuitIR bind(const CircuitIR &tmpl, const ParameterSet &params) const;

    ModelSpec spec_;
    Configuration config_;
    bool noisy_;
    RouteOptions route_;
    NoiseModel noise_;
    CouplingMap coupling_;
    std::map<std::vector<std::size_t>, Template> templates_;
    std::unordered_map<const double *, Embedded> embedded_;
};

/// Batch-averaged gradient; noisy on `config` when given, else noiseless.
std::vector<double> gradient(const ModelSpec &spec, const ParameterSet &params, const Dataset &data,
                             std::span<const std::size_t> batch, const Configuration *config = nullptr);

// ---------------------------------------------------------------- optimiser

struct AdamState {
    std::size_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(std::size_t n_params) : m(n_params, 0.0), v(n_params, 0.0) {}
};

void adam_step(AdamState &state, std::span<double> params, std::span<const double> grad);

// ---------------------------------------------------------------- training

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t segment = 0;
    std::string config;
    double loss = 0;
    double accuracy = 0;
};

struct TrainedModel {
    ModelSpec spec;
    ParameterSet params;
    std::vector<EpochRecord> history;
    std::uint64_t seed = 0;
};

/// Start selection used by the CLI and the acceptance runs.
inline constexpr std::size_t kDefaultInitCandidates = 1024;
inline constexpr std::size_t kDefaultRestarts = 4;

struct TrainOptions {
    std::uint64_t seed = 0;
    bool noiseless = false;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    /// Seeded uniform [0, 2pi) draws scored noiselessly on the training set
    /// (accuracy, then loss). 1 = plain random start.
    std::size_t init_candidates = 1;
    /// The best `restarts` draws are each trained in full; the run with the
    /// highest final training accuracy (then lowest loss) is kept.
    std::size_t restarts = 1;
    RouteOptions route;
};

/// `count` of max(init_candidates, count) seeded draws, taken alternately
/// from the accuracy ranking and the loss ranking; the first is the most
/// accurate.
std::vector<ParameterSet> initial_candidates(const ModelSpec &spec, const Dataset &train_set,
                                             const TrainOptions &options, std::size_t count);
ParameterSet initial_parameters(const ModelSpec &spec, const Dataset &train_set, const TrainOptions &options);

TrainedModel train(const ModelSpec &spec, const Dataset &train_set, const TrainingSchedule &schedule,
                   const TrainOptions &options);

struct InferenceResult {
    double mean_accuracy = 0;
    std::vector<double> accuracies;
};

/// Sampling seed for one (repetition, test sample) pair in shots mode.
std::uint64_t inference_subseed(std::uint64_t seed, std::size_t repetition, std::size_t sample);
/// `config` null = noiseless. `shots` 0 = exact expectations.
InferenceResult infer(const TrainedModel &model, const Dataset &test_set, const Configuration *config,
                      std::size_t repetitions = 10, std::uint64_t seed = 0, std::size_t shots = 0);
/// Same, reusing an evaluator (and its embedding cache) across models that
/// share a spec. `device` null = noiseless.
InferenceResult infer_with(const TrainedModel &model, const Dataset &test_set, DeviceEvaluator *device,
                           std::size_t repetitions = 10, std::uint64_t seed = 0, std::size_t shots = 0);

nlohmann::json spec_to_json(const ModelSpec &spec);
ModelSpec spec_from_json(const nlohmann::json &doc);
nlohmann::json model_to_json(const TrainedModel &model);
TrainedModel model_from_json(const nlohmann::json &doc);

/// Model spec used for a named dataset: iris, digits01 (r=3), digits89 (r=1).
ModelSpec model_for_dataset(const std::string &name);

}  // namespace qhw
