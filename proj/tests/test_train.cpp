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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "qhw/datasets.hpp"
#include "qhw/errors.hpp"
#include "qhw/fleet.hpp"
#include "qhw/scoring.hpp"
#include "qhw/train.hpp"

namespace qhw {
namespace {

using std::numbers::pi;

const std::filesystem::path kData = QHW_TEST_DATA_DIR;

ParameterSet random_params(const ModelSpec &spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 2 * pi);
    std::vector<double> v(spec.n_params());
    for (auto &x : v) x = u(rng);
    return {spec.n_layers, spec.n_qubits, v};
}

Dataset subset(const Dataset &d, std::span<const std::size_t> idx) {
    Dataset out;
    out.name = d.name;
    out.n_classes = d.n_classes;
    for (auto i : idx) {
        out.features.push_back(d.features[i]);
        out.labels.push_back(d.labels[i]);
    }
    return out;
}

// Central differences of the batch loss, one parameter at a time.
std::vector<double> finite_difference(Evaluator &ev, const Dataset &d, std::span<const std::size_t> batch,
                                      ParameterSet p, double h) {
    std::vector<double> out(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double keep = p[j];
        p[j] = keep + h;
        const double up = ev.evaluate(d, batch, p, false).loss;
        p[j] = keep - h;
        const double down = ev.evaluate(d, batch, p, false).loss;
        p[j] = keep;
        out[j] = (up - down) / (2 * h);
    }
    return out;
}

double relative_error(std::span<const double> g, std::span<const double> ref) {
    double scale = 0, worst = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        scale = std::max(scale, std::abs(ref[j]));
        worst = std::max(worst, std::abs(g[j] - ref[j]));
    }
    return worst / scale;
}

TEST(Loss, Examples) {
    EXPECT_NEAR(loss(std::vector<double>{10, -10}, 0), 0.0, 1e-8);
    EXPECT_NEAR(loss(std::vector<double>{0, 0}, 0), std::log(2.0), 1e-12);
    // -ln(e^0 / (e^1 + e^-1 + e^0)) = ln(1 + e + 1/e) = 1.40760
    EXPECT_NEAR(loss(std::vector<double>{1, -1, 0}, 2), std::log(1 + std::exp(1.0) + std::exp(-1.0)), 1e-12);
    EXPECT_NEAR(loss(std::vector<double>{1, -1, 0}, 2), 1.4076, 1e-4);
    auto g = loss_gradient(std::vector<double>{1, -1, 0}, 2);
    auto s = softmax(std::vector<double>{1, -1, 0});
    EXPECT_NEAR(g[0], s[0], 1e-12);
    EXPECT_NEAR(g[2], s[2] - 1, 1e-12);
    EXPECT_EQ(argmax(std::vector<double>{0.1, 0.7, 0.7}), 1u);
}

TEST(Loss, ClassLogits) {
    auto iris = ModelSpec::iris();
    auto logits = class_logits(iris, DensityState(8));
    EXPECT_EQ(logits, (std::vector<double>{1, 1, 1}));
    CircuitIR x(8);
    x.append(Gate::X, {0});
    auto two = ModelSpec::digits(1);
    auto l2 = class_logits(two, run(x));
    EXPECT_NEAR(l2[0], -1, 1e-12);
    EXPECT_NEAR(l2[1], 1, 1e-12);

    auto p = random_params(iris, 4);
    std::vector<double> f{0.4, 1.2, 2.2, 3.0};
    auto state = run(build_qnn(iris, f, p));
    auto direct = class_logits(iris, state);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(direct[k], expectation_z(state, k), 1e-12);
        EXPECT_LE(std::abs(direct[k]), 1 + 1e-12);
    }
    NoiselessEvaluator ev(iris);
    auto sv = ev.logits(f, p);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(sv[k], direct[k], 1e-10);
}

TEST(Adam, Steps) {
    AdamState zero(3);
    std::vector<double> p{1, 2, 3};
    adam_step(zero, p, std::vector<double>{0, 0, 0});
    EXPECT_EQ(p, (std::vector<double>{1, 2, 3}));

    AdamState first(3);
    adam_step(first, p, std::vector<double>{0.5, 0.5, 0.5});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], static_cast<double>(i + 1) - 1e-3, 1e-9);

    AdamState quad(1);
    quad.lr = 0.1;
    std::vector<double> theta{0};
    for (int k = 0; k < 100; ++k) adam_step(quad, theta, std::vector<double>{2 * (theta[0] - 2)});
    EXPECT_NEAR(theta[0], 2, 0.5);
}

TEST(Gradient, SingleRotationShiftRule) {
    // One RY on qubit 0 through a one-layer SEL with everything else zero.
    // The CX ring leaves cos|0..0> + sin|1..1> with qubit 0 flipped back, so
    // the angle shows up on qubit 1: <Z1> = cos(theta).
    auto spec = ModelSpec::digits(1);
    spec.n_layers = 1;
    NoiselessEvaluator ev(spec);
    std::vector<double> e0(64, 0.0);
    e0[0] = 1;
    ParameterSet p(1, 8);
    p.at(0, 0, 1) = 0.7;
    EXPECT_NEAR(ev.logits(e0, p)[1], std::cos(0.7), 1e-12);
    EXPECT_NEAR(ev.logits(e0, p)[0], 1.0, 1e-12);
    const double h = pi / 2;
    auto plus = p, minus = p;
    plus.at(0, 0, 1) += h;
    minus.at(0, 0, 1) -= h;
    EXPECT_NEAR((ev.logits(e0, plus)[1] - ev.logits(e0, minus)[1]) / 2, -std::sin(0.7), 1e-12);
}

TEST(Gradient, ZeroLayerModel) {
    auto spec = ModelSpec::iris();
    spec.n_layers = 0;
    auto iris = load_iris(kData / "iris.csv");
    std::vector<std::size_t> batch{0, 60, 120};
    auto g = gradient(spec, ParameterSet(0, 8), iris, batch);
    EXPECT_TRUE(g.empty());
}

TEST(Gradient, IrisMatchesFiniteDifferences) {
    auto spec = ModelSpec::iris();
    auto iris = load_iris(kData / "iris.csv");
    NoiselessEvaluator ev(spec);
    for (std::uint64_t seed : {7u, 11u, 19u}) {
        std::vector<std::size_t> batch{seed % 50, 50 + seed, 100 + 2 * seed};
        auto p = random_params(spec, seed);
        auto g = ev.evaluate(iris, batch, p, true).gradient;
        ASSERT_EQ(g.size(), 144u);
        auto fd = finite_difference(ev, iris, batch, p, 1e-4);
        EXPECT_LT(relative_error(g, fd), 1e-5) << "seed " << seed;
    }
}

TEST(Gradient, NoisyDeviceMatchesFiniteDifferences) {
    auto fleet = load_fleet(kData / "fleet");
    auto spec = ModelSpec::iris();
    spec.n_layers = 1;
    auto iris = load_iris(kData / "iris.csv");
    std::vector<std::size_t> batch{3, 77};
    auto p = random_params(spec, 5);
    DeviceEvaluator ev(spec, fleet.find("27Q:II"));
    auto g = ev.evaluate(iris, batch, p, true).gradient;
    auto fd = finite_difference(ev, iris, batch, p, 1e-4);
    EXPECT_LT(relative_error(g, fd), 1e-5);
    const auto cfg = fleet.find("27Q:II");
    auto free_fn = gradient(spec, p, iris, batch, &cfg);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(free_fn[j], g[j], 1e-12);
}

TEST(Gradient, TranspiledLogitsMatchLogical) {
    auto fleet = load_fleet(kData / "fleet");
    auto iris = load_iris(kData / "iris.csv");
    auto digits = load_digits(kData / "digits.csv", {8, 9});
    for (const char *id : {"27Q:III", "20Q:I", "127Q:IV"}) {
        for (auto spec : {ModelSpec::iris(), ModelSpec::digits(3)}) {
            const auto &data = spec.embedding == Embedding::Angle ? iris : digits;
            NoiselessEvaluator logical(spec);
            DeviceEvaluator device(spec, fleet.find(id), false);
            for (std::uint64_t s = 0; s < 3; ++s) {
                auto p = random_params(spec, 100 + s);
                const auto &x = data.features[s * 31];
                auto a = logical.logits(x, p), b = device.logits(x, p);
                for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9) << id;
            }
        }
    }
}

class ScheduleTest : public ::testing::Test {
   protected:
    static void SetUpTestSuite() {
        fleet_ = new Fleet(load_fleet(kData / "fleet"));
        ranked_ = new std::vector<ScoreCard>(rank_configurations(fleet_->configurations(), ModelSpec::iris()));
    }
    static void TearDownTestSuite() {
        delete ranked_;
        delete fleet_;
    }
    static Fleet *fleet_;
    static std::vector<ScoreCard> *ranked_;
};
Fleet *ScheduleTest::fleet_ = nullptr;
std::vector<ScoreCard> *ScheduleTest::ranked_ = nullptr;

std::string hw_of(const ScheduleSegment &s) { return s.config->hardware().name(); }

TEST_F(ScheduleTest, TwoHundredSeededRunsAreValid) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 5000);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::map<std::string, double> waits{{"20Q", u(rng)}, {"27Q", u(rng)}, {"127Q", u(rng)}};
        auto s = build_schedule(*ranked_, waits, 10, 5, seed);
        auto bad = schedule_violations(s, *ranked_);
        EXPECT_TRUE(bad.empty()) << "seed " << seed << ": " << (bad.empty() ? "" : bad.front());
        ASSERT_EQ(s.segments.size(), 5u);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_EQ(s.segments[i].epochs, 2u);
            if (i) EXPECT_NE(hw_of(s.segments[i]), hw_of(s.segments[i - 1]));
        }
    }
}

TEST_F(ScheduleTest, ShippedFleetShape) {
    auto s = build_schedule(*ranked_, fleet_->queue_estimates(), 10, 5, 1);
    std::set<std::string> prefix{hw_of(s.segments[0]), hw_of(s.segments[1]), hw_of(s.segments[2])};
    EXPECT_EQ(prefix.size(), 3u);
    // The slowest queue is visited once, inside the prefix.
    EXPECT_EQ(hw_of(s.segments[2]), "27Q");
    EXPECT_NE(hw_of(s.segments[3]), "27Q");
    EXPECT_NE(hw_of(s.segments[4]), "27Q");
}

TEST_F(ScheduleTest, TwoHardwareAlternates) {
    std::vector<ScoreCard> two;
    for (const auto &c : *ranked_) {
        if (c.hardware != "27Q") two.push_back(c);
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = build_schedule(two, {{"20Q", 5}, {"127Q", 9}}, 10, 5, seed);
        for (std::size_t i = 2; i < 5; ++i) EXPECT_EQ(hw_of(s.segments[i]), hw_of(s.segments[i - 2]));
        EXPECT_NE(hw_of(s.segments[0]), hw_of(s.segments[1]));
        EXPECT_TRUE(schedule_violations(s, two).empty());
    }
}

TEST_F(ScheduleTest, FreeHardwareStillAlternates) {
    std::map<std::string, double> waits{{"20Q", 100}, {"27Q", 0}, {"127Q", 50}};
    // Best achievable tail among all feasible hardware orders.
    std::vector<std::string> hw{"20Q", "27Q", "127Q"};
    double best = 1e300;
    std::sort(hw.begin(), hw.end());
    do {
        for (const auto &h4 : hw) {
            for (const auto &h5 : hw) {
                if (h4 != hw[2] && h5 != h4) best = std::min(best, waits[h4] + waits[h5]);
            }
        }
    } while (std::next_permutation(hw.begin(), hw.end()));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = build_schedule(*ranked_, waits, 10, 5, seed);
        EXPECT_FALSE(hw_of(s.segments[3]) == "27Q" && hw_of(s.segments[4]) == "27Q");
        EXPECT_DOUBLE_EQ(waits[hw_of(s.segments[3])] + waits[hw_of(s.segments[4])], best);
    }
}

TEST_F(ScheduleTest, Errors) {
    std::vector<ScoreCard> one;
    for (const auto &c : *ranked_) {
        if (c.hardware == "27Q") one.push_back(c);
    }
    EXPECT_THROW(build_schedule(one, {{"27Q", 1}}), ValidationError);
    EXPECT_THROW(build_schedule(*ranked_, {{"27Q", 1}}), ValidationError);
}

TEST_F(ScheduleTest, TrainWaitEstimate) {
    auto waits = fleet_->queue_estimates();
    auto s = build_schedule(*ranked_, waits, 10, 5, 3);
    double want = 0;
    for (const auto &seg : s.segments) want += waits[hw_of(seg)] * 105 * static_cast<double>(seg.epochs) / 60;
    EXPECT_NEAR(schedule_train_wait(s, waits, 105), want, 1e-9);
}

TEST(Train, ZeroEpochsKeepInitialisation) {
    auto iris = load_iris(kData / "iris.csv");
    TrainOptions opt;
    opt.seed = 3;
    opt.noiseless = true;
    auto model = train(ModelSpec::iris(), iris, TrainingSchedule::noiseless(0), opt);
    EXPECT_TRUE(model.history.empty());
    EXPECT_EQ(model.params, initial_parameters(ModelSpec::iris(), iris, opt));
    for (double v : model.params.values()) {
        EXPECT_GE(v, 0);
        EXPECT_LT(v, 2 * pi);
    }
}

TEST(Train, RestartsNeverWorseOnTrainingSet) {
    auto iris = load_iris(kData / "iris.csv");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < iris.size(); i += 5) idx.push_back(i);
    auto small = subset(iris, idx);
    std::vector<std::size_t> all(small.size());
    std::iota(all.begin(), all.end(), 0);
    NoiselessEvaluator judge(ModelSpec::iris());
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        TrainOptions opt;
        opt.seed = seed;
        opt.noiseless = true;
        opt.init_candidates = 16;
        const auto one = train(ModelSpec::iris(), small, TrainingSchedule::noiseless(2), opt);
        opt.restarts = 3;
        const auto three = train(ModelSpec::iris(), small, TrainingSchedule::noiseless(2), opt);
        const auto again = train(ModelSpec::iris(), small, TrainingSchedule::noiseless(2), opt);
        EXPECT_EQ(three.params, again.params);
        const auto r1 = judge.evaluate(small, all, one.params, false);
        const auto r3 = judge.evaluate(small, all, three.params, false);
        EXPECT_GE(r3.correct, r1.correct);
        if (r3.correct == r1.correct) EXPECT_LE(r3.loss, r1.loss + 1e-12);
    }
}

TEST(Train, InitialCandidatesDistinctAndAccurateFirst) {
    auto iris = load_iris(kData / "iris.csv");
    TrainOptions opt;
    opt.seed = 5;
    opt.init_candidates = 32;
    const auto c = initial_candidates(ModelSpec::iris(), iris, opt, 6);
    ASSERT_EQ(c.size(), 6u);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) EXPECT_NE(c[i], c[j]);
    EXPECT_EQ(c.front(), initial_parameters(ModelSpec::iris(), iris, opt));
    opt.restarts = 0;
    EXPECT_THROW(train(ModelSpec::iris(), iris, TrainingSchedule::noiseless(1), opt), ValidationError);
}

TEST(Train, DeterministicSegmentedRun) {
    auto fleet = load_fleet(kData / "fleet");
    auto iris = load_iris(kData / "iris.csv");
    std::vector<std::size_t> idx{0, 10, 20, 55, 65, 75, 110, 120, 130};
    auto small = subset(iris, idx);
    TrainingSchedule schedule;
    schedule.segments.push_back({fleet.find("27Q:I"), 1});
    schedule.segments.push_back({fleet.find("20Q:II"), 1});
    TrainOptions opt;
    opt.seed = 8;
    opt.batch_size = 4;
    auto a = train(ModelSpec::iris(), small, schedule, opt);
    auto b = train(ModelSpec::iris(), small, schedule, opt);
    ASSERT_EQ(a.history.size(), 2u);
    EXPECT_EQ(a.history[0].config, "27Q:I");
    EXPECT_EQ(a.history[1].config, "20Q:II");
    for (std::size_t e = 0; e < 2; ++e) {
        EXPECT_EQ(a.history[e].loss, b.history[e].loss);
        EXPECT_EQ(a.history[e].accuracy, b.history[e].accuracy);
    }
    EXPECT_EQ(a.params, b.params);
    EXPECT_NE(a.params, initial_parameters(ModelSpec::iris(), small, opt));
}

TEST(Train, ModelJsonRoundTrip) {
    TrainedModel m;
    m.spec = ModelSpec::digits(3);
    m.params = random_params(m.spec, 1);
    m.seed = 42;
    m.history.push_back({1, 0, "27Q:I", 0.6, 0.75});
    auto back = model_from_json(model_to_json(m));
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.spec.range_r, 3u);
    EXPECT_EQ(back.seed, 42u);
    ASSERT_EQ(back.history.size(), 1u);
    EXPECT_EQ(back.history[0].config, "27Q:I");
}

TEST(Infer, ConstantPredictionOnBalancedSet) {
    Dataset d;
    d.name = "flat";
    d.n_classes = 3;
    for (std::size_t i = 0; i < 30; ++i) {
        d.features.push_back({0, 0, 0, 0});
        d.labels.push_back(i % 3);
    }
    TrainedModel m;
    m.spec = ModelSpec::iris();
    m.spec.n_layers = 0;
    m.params = ParameterSet(0, 8);
    auto r = infer(m, d, nullptr, 10, 0);
    EXPECT_NEAR(r.mean_accuracy, 1.0 / 3, 1e-12);
}

TEST(Infer, NoiselessRepetitionsAgreeAndShotsVary) {
    auto iris = load_iris(kData / "iris.csv");
    auto test_set = subset(iris, split(iris, 0.7, 1).test);
    TrainedModel m;
    m.spec = ModelSpec::iris();
    m.params = random_params(m.spec, 2);
    auto r = infer(m, test_set, nullptr, 10, 0);
    ASSERT_EQ(r.accuracies.size(), 10u);
    for (double a : r.accuracies) EXPECT_EQ(a, r.accuracies[0]);

    auto fleet = load_fleet(kData / "fleet");
    auto cfg = fleet.find("27Q:I");
    auto shots = infer(m, test_set, &cfg, 4, 0, 64);
    auto again = infer(m, test_set, &cfg, 4, 0, 64);
    EXPECT_EQ(shots.accuracies, again.accuracies);
    EXPECT_THROW(infer(m, subset(iris, std::vector<std::size_t>{}), nullptr), ValidationError);
}

}  // namespace
}  // namespace qhw
