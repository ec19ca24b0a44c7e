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

#include "qhw/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "qhw/errors.hpp"

namespace qhw {

using std::numbers::pi;

// ---------------------------------------------------------------- schedule

std::size_t TrainingSchedule::total_epochs() const {
    std::size_t n = 0;
    for (const auto &s : segments) {
        n += s.epochs;
    }
    return n;
}

TrainingSchedule TrainingSchedule::noiseless(std::size_t epochs) { return {{ScheduleSegment{std::nullopt, epochs}}}; }

double schedule_train_wait(const TrainingSchedule &schedule, const std::map<std::string, double> &queue_estimates,
                           std::size_t n_train) {
    double seconds = 0;
    for (const auto &seg : schedule.segments) {
        if (!seg.config) {
            continue;
        }
        const auto it = queue_estimates.find(seg.config->hardware().name());
        if (it == queue_estimates.end()) {
            throw ValidationError("no queue estimate for " + seg.config->hardware().name());
        }
        seconds += it->second * static_cast<double>(n_train * seg.epochs);
    }
    return seconds / 60.0;
}

TrainingSchedule build_schedule(const std::vector<ScoreCard> &ranked,
                                const std::map<std::string, double> &queue_estimates, std::size_t total_epochs,
                                std::size_t n_segments, std::uint64_t seed) {
    std::vector<std::string> hardware;
    for (const auto &c : ranked) {
        if (!c.config) {
            throw ValidationError("score card " + c.id() + " carries no configuration");
        }
        if (std::find(hardware.begin(), hardware.end(), c.hardware) == hardware.end()) {
            hardware.push_back(c.hardware);
        }
    }
    if (hardware.size() < 2) {
        throw ValidationError("schedule needs at least 2 distinct hardware; a single-hardware fleet cannot alternate");
    }
    if (hardware.size() > 3) {
        throw ValidationError("schedule supports at most 3 hardware (each must appear in the first 3 segments)");
    }
    if (n_segments < hardware.size()) {
        throw ValidationError("need at least one segment per hardware");
    }
    std::map<std::string, double> wait;
    for (const auto &h : hardware) {
        const auto it = queue_estimates.find(h);
        if (it == queue_estimates.end()) {
            throw ValidationError("no queue estimate for hardware " + h);
        }
        wait[h] = it->second;
    }
    auto by_wait = [&](const std::string &a, const std::string &b) {
        return wait[a] != wait[b] ? wait[a] < wait[b] : a < b;
    };
    std::sort(hardware.begin(), hardware.end(), by_wait);

    std::mt19937_64 rng(seed);
    // The slowest queue closes the prefix so the tail is free to use the
    // fastest one next.
    std::vector<std::string> prefix(hardware.begin(), hardware.end() - 1);
    std::shuffle(prefix.begin(), prefix.end(), rng);
    prefix.push_back(hardware.back());

    std::set<std::string> used;
    auto pick = [&](const std::string &h) {
        const auto top = top_k_for(ranked, h, 3);
        std::vector<const ScoreCard *> fresh;
        for (const auto &c : top) {
            if (!used.count(c.id())) {
                fresh.push_back(&c);
            }
        }
        std::vector<const ScoreCard *> pool = fresh;
        if (pool.empty()) {
            for (const auto &c : top) {
                pool.push_back(&c);
            }
        }
        std::uniform_int_distribution<std::size_t> u(0, pool.size() - 1);
        const ScoreCard *chosen = pool[u(rng)];
        used.insert(chosen->id());
        return *chosen->config;
    };

    TrainingSchedule schedule;
    std::vector<std::string> order = prefix;
    while (order.size() < n_segments) {
        for (const auto &h : hardware) {
            if (h != order.back()) {
                order.push_back(h);
                break;
            }
        }
    }
    const std::size_t base = total_epochs / n_segments, extra = total_epochs % n_segments;
    for (std::size_t s = 0; s < n_segments; ++s) {
        schedule.segments.push_back({pick(order[s]), base + (s < extra ? 1 : 0)});
    }
    return schedule;
}

std::vector<std::string> schedule_violations(const TrainingSchedule &schedule, const std::vector<ScoreCard> &ranked,
                                             std::size_t expected_segments, std::size_t expected_epochs) {
    std::vector<std::string> out;
    if (schedule.segments.size() != expected_segments) {
        out.push_back("expected " + std::to_string(expected_segments) + " segments, got " +
                      std::to_string(schedule.segments.size()));
    }
    if (schedule.total_epochs() != expected_epochs) {
        out.push_back("total epochs " + std::to_string(schedule.total_epochs()));
    }
    std::set<std::string> hardware;
    for (const auto &c : ranked) {
        hardware.insert(c.hardware);
    }
    std::set<std::string> early;
    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const auto &seg = schedule.segments[i];
        if (!seg.config) {
            out.push_back("segment " + std::to_string(i) + " has no configuration");
            continue;
        }
        const std::string hw = seg.config->hardware().name();
        if (expected_segments > 0 && seg.epochs != expected_epochs / expected_segments) {
            out.push_back("segment " + std::to_string(i) + " runs " + std::to_string(seg.epochs) + " epochs");
        }
        if (i > 0 && schedule.segments[i - 1].config && schedule.segments[i - 1].config->hardware().name() == hw) {
            out.push_back("segments " + std::to_string(i - 1) + " and " + std::to_string(i) + " share " + hw);
        }
        if (i < 3) {
            early.insert(hw);
        }
        const auto top = top_k_for(ranked, hw, 3);
        if (std::none_of(top.begin(), top.end(), [&](const ScoreCard &c) { return c.id() == seg.config->id(); })) {
            out.push_back(seg.config->id() + " is not among the top 3 of " + hw);
        }
    }
    for (const auto &h : hardware) {
        if (!early.count(h)) {
            out.push_back(h + " missing from the first 3 segments");
        }
    }
    return out;
}

// ---------------------------------------------------------------- loss

std::vector<double> class_logits(const ModelSpec &spec, const DensityState &state) {
    if (spec.n_classes > state.n_qubits()) {
        throw ValidationError("more classes than qubits");
    }
    const auto wires = spec.measured_qubits();
    return class_logits(state, wires);
}

std::vector<double> class_logits(const DensityState &state, std::span<const std::size_t> wires,
                                 const NoiseModel *readout) {
    std::vector<double> z;
    z.reserve(wires.size());
    for (auto w : wires) {
        const double e = expectation_z(state, w);
        z.push_back(readout ? readout->readout_expectation(e, w) : e);
    }
    return z;
}

std::vector<double> softmax(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (auto &x : p) {
        x /= sum;
    }
    return p;
}

double loss(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size()) {
        throw ValidationError("label " + std::to_string(label) + " out of range");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0;
    for (double z : logits) {
        sum += std::exp(z - m);
    }
    return std::max(0.0, m + std::log(sum) - logits[label]);
}

std::vector<double> loss_gradient(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size()) {
        throw ValidationError("label " + std::to_string(label) + " out of range");
    }
    auto g = softmax(logits);
    g[label] -= 1.0;
    return g;
}

std::size_t argmax(std::span<const double> logits) {
    return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

// ---------------------------------------------------------------- noiseless

NoiselessEvaluator::NoiselessEvaluator(ModelSpec spec) : spec_(spec) { spec_.validate(); }

std::vector<double> NoiselessEvaluator::logits(std::span<const double> features, const ParameterSet &params) {
    StateVector sv(spec_.n_qubits);
    sv.apply(build_qnn(spec_, features, params));
    std::vector<double> z;
    for (auto q : spec_.measured_qubits()) {
        z.push_back(sv.expectation_z(q));
    }
    return z;
}

BatchResult NoiselessEvaluator::evaluate(const Dataset &data, std::span<const std::size_t> batch,
                                         const ParameterSet &params, bool with_gradient) {
    if (batch.empty()) {
        throw ValidationError("empty batch");
    }
    const CircuitIR pqc = build_pqc(spec_, params);
    const auto measured = spec_.measured_qubits();
    const auto &ops = pqc.ops();
    BatchResult res;
    if (with_gradient) {
        res.gradient.assign(spec_.n_params(), 0.0);
    }
    const double scale = 1.0 / static_cast<double>(batch.size());
    auto read = [&](const StateVector &sv) {
        std::vector<double> z;
        for (auto q : measured) {
            z.push_back(sv.expectation_z(q));
        }
        return z;
    };
    std::vector<StateVector> saved;
    std::vector<std::size_t> saved_at;
    for (auto idx : batch) {
        const auto &x = data.features.at(idx);
        const std::size_t y = data.labels.at(idx);
        StateVector sv(spec_.n_qubits);
        sv.apply(build_embedding(spec_, x));
        saved.clear();
        saved_at.clear();
        for (std::size_t i = 0; i < ops.size(); ++i) {
            if (with_gradient && !ops[i].tags.empty()) {
                saved.push_back(sv);
                saved_at.push_back(i);
            }
            sv.apply(ops[i]);
        }
        const auto z = read(sv);
        res.loss += loss(z, y) * scale;
        res.correct += argmax(z) == y;
        res.logits.push_back(z);
        if (!with_gradient) {
            continue;
        }
        const auto g = loss_gradient(z, y);
        for (std::size_t s = 0; s < saved.size(); ++s) {
            const std::size_t at = saved_at[s];
            double diff[2][8] = {};
            for (int sign = 0; sign < 2; ++sign) {
                StateVector w = saved[s];
                GateOp shifted = ops[at];
                shifted.params[0] += sign == 0 ? pi / 2 : -pi / 2;
                w.apply(shifted);
                for (std::size_t i = at + 1; i < ops.size(); ++i) {
                    w.apply(ops[i]);
                }
                for (std::size_t k = 0; k < measured.size(); ++k) {
                    diff[sign][k] = w.expectation_z(measured[k]);
                }
            }
            double d = 0;
            for (std::size_t k = 0; k < measured.size(); ++k) {
                d += g[k] * (diff[0][k] - diff[1][k]) / 2;
            }
            for (const auto &t : ops[at].tags) {
                res.gradient[t.index] += d * scale;
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------- device

DeviceEvaluator::DeviceEvaluator(ModelSpec spec, Configuration config, bool noisy, RouteOptions route)
    : spec_(spec),
      config_(std::move(config)),
      noisy_(noisy),
      route_(route),
      noise_(config_),
      coupling_(induced_coupling(config_)) {
    spec_.validate();
    if (spec_.n_qubits > config_.size()) {
        throw ValidationError("model needs " + std::to_string(spec_.n_qubits) + " qubits; " + config_.id() +
                              " has " + std::to_string(config_.size()));
    }
}

const DeviceEvaluator::Embedded &DeviceEvaluator::embed(std::span<const double> features) {
    auto it = embedded_.find(features.data());
    if (it != embedded_.end() && std::equal(features.begin(), features.end(), it->second.features.begin(),
                                            it->second.features.end())) {
        return it->second;
    }
    CircuitIR wide(config_.size());
    wide.extend(build_embedding(spec_, features));
    const auto routed = route(wide, coupling_, 0, route_);
    const CircuitIR lowered = decompose_to_basis(routed.circuit, config_.hardware().basis());
    Embedded e;
    e.features.assign(features.begin(), features.end());
    e.layout = routed.final_permutation;
    e.state = std::make_shared<const DensityState>(run(lowered, noisy_ ? &noise_ : nullptr));
    return embedded_.insert_or_assign(features.data(), std::move(e)).first->second;
}

const DeviceEvaluator::Template &DeviceEvaluator::pqc_for(const std::vector<std::size_t> &layout) {
    auto it = templates_.find(layout);
    if (it != templates_.end()) {
        return it->second;
    }
    CircuitIR wide(config_.size());
    wide.extend(build_pqc(spec_, ParameterSet::zeros_like(spec_)));
    const auto routed = route(wide, coupling_, 0, route_, layout);
    Template t;
    t.pqc = decompose_to_basis(routed.circuit, config_.hardware().basis());
    for (auto q : spec_.measured_qubits()) {
        t.class_wires.push_back(routed.final_permutation[q]);
    }
    return templates_.emplace(layout, std::move(t)).first->second;
}

CircuitIR DeviceEvaluator::bind(const CircuitIR &tmpl, const ParameterSet &params) const {
    if (!params.matches(spec_)) {
        throw ValidationError("parameter tensor does not match the model");
    }
    CircuitIR out = tmpl;
    for (auto &op : out.mutable_ops()) {
        for (const auto &t : op.tags) {
            op.params[t.slot] += params[t.index];
        }
    }
    return out;
}

CircuitIR DeviceEvaluator::compiled_circuit(std::span<const double> features, const ParameterSet &params) {
    CircuitIR wide(config_.size());
    wide.extend(build_embedding(spec_, features));
    const auto routed = route(wide, coupling_, 0, route_);
    CircuitIR out = decompose_to_basis(routed.circuit, config_.hardware().basis());
    out.extend(bind(pqc_for(routed.final_permutation).pqc, params));
    return out;
}

DensityState DeviceEvaluator::final_state(std::span<const double> features, const ParameterSet &params,
                                          std::vector<std::size_t> *class_wires) {
    const Embedded e = embed(features);
    const Template &t = pqc_for(e.layout);
    DensityState state = *e.state;
    apply_program(state, compile(bind(t.pqc, params), noise(), true), true);
    if (class_wires) {
        *class_wires = t.class_wires;
    }
    return state;
}

std::vector<double> DeviceEvaluator::logits(std::span<const double> features, const ParameterSet &params) {
    std::vector<std::size_t> wires;
    const DensityState state = final_state(features, params, &wires);
    return class_logits(state, wires, noise());
}

BatchResult DeviceEvaluator::evaluate(const Dataset &data, std::span<const std::size_t> batch,
                                      const ParameterSet &params, bool with_gradient) {
    if (batch.empty()) {
        throw ValidationError("empty batch");
    }
    struct Group {
        const Template *tmpl = nullptr;
        CircuitIR bound;
        Program program;  // fused, forward only
        std::vector<DensityState> sigma;
    };
    std::map<std::vector<std::size_t>, Group> groups;
    BatchResult res;
    const double scale = 1.0 / static_cast<double>(batch.size());
    const std::size_t n = config_.size();
    for (auto idx : batch) {
        const auto &x = data.features.at(idx);
        const std::size_t y = data.labels.at(idx);
        const Embedded &e = embed(x);
        auto [git, fresh] = groups.try_emplace(e.layout);
        Group &g = git->second;
        if (fresh) {
            g.tmpl = &pqc_for(e.layout);
            g.bound = bind(g.tmpl->pqc, params);
            g.program = compile(g.bound, noise(), true);
            if (with_gradient) {
                g.sigma.assign(spec_.n_classes, DensityState::zeros(n));
            }
        }
        DensityState state = *e.state;
        apply_program(state, g.program, true);
        const auto z = class_logits(state, g.tmpl->class_wires, noise());
        res.loss += loss(z, y) * scale;
        res.correct += argmax(z) == y;
        res.logits.push_back(z);
        if (with_gradient) {
            const auto dz = loss_gradient(z, y);
            for (std::size_t k = 0; k < spec_.n_classes; ++k) {
                const std::size_t w = g.tmpl->class_wires[k];
                const double a = noisy_ ? noise_.readout_scale(w) : 1.0;
                g.sigma[k].add_scaled(*e.state, dz[k] * a * scale);
            }
        }
    }
    if (!with_gradient) {
        return res;
    }
    // sum_k Tr(Z_k E(sigma_k)) has the batch gradient as its derivative. Each
    // tagged step gets the two-term shift rule evaluated against the state
    // entering it (forward) and the observable leaving it (backward).
    res.gradient.assign(spec_.n_params(), 0.0);
    for (auto &[layout, g] : groups) {
        const Program tagged = compile(g.bound, noise());
        const auto &steps = tagged.steps;
        const auto &ops = g.bound.ops();
        for (std::size_t k = 0; k < spec_.n_classes; ++k) {
            std::vector<DensityState> entering;
            DensityState rho = g.sigma[k];
            for (const auto &step : steps) {
                if (step.tagged_op >= 0) {
                    entering.push_back(rho);
                }
                apply_step(rho, step, false);
            }
            DensityState obs = z_observable(n, g.tmpl->class_wires[k]);
            std::size_t slot_idx = entering.size();
            for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
                if (it->tagged_op >= 0) {
                    const DensityState &f = entering[--slot_idx];
                    const GateOp &op = ops[static_cast<std::size_t>(it->tagged_op)];
                    std::set<std::uint16_t> slots;
                    for (const auto &t : op.tags) {
                        slots.insert(t.slot);
                    }
                    for (auto slot : slots) {
                        double v[2];
                        for (int sign = 0; sign < 2; ++sign) {
                            std::vector<double> p = op.params;
                            p[slot] += sign == 0 ? pi / 2 : -pi / 2;
                            v[sign] = trace_product_after(obs, f, it->q0, unitary_superop(gate_matrix(op.gate, p)));
                        }
                        const double d = (v[0] - v[1]) / 2;
                        for (const auto &t : op.tags) {
                            if (t.slot == slot) {
                                res.gradient[t.index] += d;
                            }
                        }
                    }
                }
                apply_step(obs, *it, true);
            }
        }
    }
    return res;
}

std::vector<double> gradient(const ModelSpec &spec, const ParameterSet &params, const Dataset &data,
                             std::span<const std::size_t> batch, const Configuration *config) {
    if (config) {
        DeviceEvaluator ev(spec, *config, true);
        return ev.evaluate(data, batch, params, true).gradient;
    }
    NoiselessEvaluator ev(spec);
    return ev.evaluate(data, batch, params, true).gradient;
}

// ---------------------------------------------------------------- adam

void adam_step(AdamState &s, std::span<double> params, std::span<const double> grad) {
    if (params.size() != grad.size() || params.size() != s.m.size()) {
        throw ValidationError("Adam state, parameters and gradient differ in size");
    }
    ++s.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        s.m[i] = s.beta1 * s.m[i] + (1 - s.beta1) * grad[i];
        s.v[i] = s.beta2 * s.v[i] + (1 - s.beta2) * grad[i] * grad[i];
        const double mhat = s.m[i] / c1, vhat = s.v[i] / c2;
        params[i] -= s.lr * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}

// ---------------------------------------------------------------- training

std::vector<ParameterSet> initial_candidates(const ModelSpec &spec, const Dataset &train_set,
                                             const TrainOptions &options, std::size_t count) {
    if (options.init_candidates == 0) {
        throw ValidationError("init_candidates must be >= 1");
    }
    if (count == 0) {
        throw ValidationError("need at least one starting point");
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> angle(0.0, 2 * pi);
    const std::size_t draws = std::max(options.init_candidates, count);
    std::vector<ParameterSet> drawn;
    for (std::size_t c = 0; c < draws; ++c) {
        ParameterSet p(spec.n_layers, spec.n_qubits);
        for (auto &v : p.values()) {
            v = angle(rng);
        }
        drawn.push_back(std::move(p));
    }
    if (draws == count || train_set.size() == 0) {
        drawn.resize(count);
        return drawn;
    }
    // Most training points classified correctly, then lowest loss.
    std::vector<std::size_t> all(train_set.size());
    std::iota(all.begin(), all.end(), 0);
    NoiselessEvaluator ev(spec);
    std::vector<std::pair<std::size_t, double>> score;
    for (const auto &p : drawn) {
        const auto r = ev.evaluate(train_set, all, p, false);
        score.emplace_back(r.correct, r.loss);
    }
    std::vector<std::size_t> by_acc(draws);
    std::iota(by_acc.begin(), by_acc.end(), 0);
    std::vector<std::size_t> by_loss = by_acc;
    std::stable_sort(by_acc.begin(), by_acc.end(), [&](std::size_t a, std::size_t b) {
        return score[a].first != score[b].first ? score[a].first > score[b].first : score[a].second < score[b].second;
    });
    std::stable_sort(by_loss.begin(), by_loss.end(),
                     [&](std::size_t a, std::size_t b) { return score[a].second < score[b].second; });
    // Alternate the two rankings, skipping repeats.
    std::vector<std::size_t> pick;
    std::size_t ia = 0;
    std::size_t il = 0;
    while (pick.size() < count) {
        const bool from_acc = pick.size() % 2 == 0;
        auto &list = from_acc ? by_acc : by_loss;
        auto &i = from_acc ? ia : il;
        while (std::find(pick.begin(), pick.end(), list[i]) != pick.end()) {
            ++i;
        }
        pick.push_back(list[i++]);
    }
    std::vector<ParameterSet> out;
    for (std::size_t k : pick) {
        out.push_back(drawn[k]);
    }
    return out;
}

ParameterSet initial_parameters(const ModelSpec &spec, const Dataset &train_set, const TrainOptions &options) {
    return std::move(initial_candidates(spec, train_set, options, 1).front());
}

namespace {

void run_schedule(TrainedModel &model, const Dataset &train_set, const TrainingSchedule &schedule,
                  const TrainOptions &options) {
    const auto &spec = model.spec;
    AdamState adam(spec.n_params());
    adam.lr = options.learning_rate;
    std::mt19937_64 shuffle_rng(options.seed ^ 0x5deece66dULL);
    std::vector<std::size_t> order(train_set.size());
    std::size_t epoch = 0;
    for (std::size_t s = 0; s < schedule.segments.size(); ++s) {
        const auto &seg = schedule.segments[s];
        if (seg.epochs == 0) {
            continue;
        }
        std::unique_ptr<Evaluator> ev;
        if (options.noiseless || !seg.config) {
            ev = std::make_unique<NoiselessEvaluator>(spec);
        } else {
            ev = std::make_unique<DeviceEvaluator>(spec, *seg.config, true, options.route);
        }
        for (std::size_t e = 0; e < seg.epochs; ++e) {
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            double total = 0;
            std::size_t correct = 0;
            for (std::size_t b = 0; b < order.size(); b += options.batch_size) {
                const std::size_t end = std::min(order.size(), b + options.batch_size);
                const std::span<const std::size_t> batch(order.data() + b, end - b);
                const BatchResult r = ev->evaluate(train_set, batch, model.params, true);
                adam_step(adam, model.params.values(), r.gradient);
                total += r.loss * static_cast<double>(batch.size());
                correct += r.correct;
            }
            EpochRecord rec;
            rec.epoch = ++epoch;
            rec.segment = s;
            rec.config = options.noiseless ? std::string("noiseless") : seg.id();
            rec.loss = total / static_cast<double>(train_set.size());
            rec.accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
            model.history.push_back(std::move(rec));
        }
    }
}

}  // namespace

TrainedModel train(const ModelSpec &spec, const Dataset &train_set, const TrainingSchedule &schedule,
                   const TrainOptions &options) {
    spec.validate();
    train_set.validate();
    if (train_set.n_classes != spec.n_classes) {
        throw ValidationError("dataset has " + std::to_string(train_set.n_classes) + " classes; model expects " +
                              std::to_string(spec.n_classes));
    }
    if (options.batch_size == 0) {
        throw ValidationError("batch size must be >= 1");
    }
    TrainedModel model;
    model.spec = spec;
    model.seed = options.seed;
    if (options.restarts == 0) {
        throw ValidationError("restarts must be >= 1");
    }
    auto starts = initial_candidates(spec, train_set, options, options.restarts);
    if (starts.size() == 1) {
        model.params = std::move(starts.front());
        run_schedule(model, train_set, schedule, options);
        return model;
    }
    // Keep the run that ends best on the training split, judged noiselessly.
    std::vector<std::size_t> all(train_set.size());
    std::iota(all.begin(), all.end(), 0);
    NoiselessEvaluator judge(spec);
    std::optional<TrainedModel> best;
    std::pair<std::size_t, double> best_score{0, 0.0};
    for (auto &start : starts) {
        TrainedModel run = model;
        run.params = std::move(start);
        run_schedule(run, train_set, schedule, options);
        const auto r = judge.evaluate(train_set, all, run.params, false);
        if (!best || r.correct > best_score.first || (r.correct == best_score.first && r.loss < best_score.second)) {
            best_score = {r.correct, r.loss};
            best = std::move(run);
        }
    }
    return std::move(*best);
}

std::uint64_t inference_subseed(std::uint64_t seed, std::size_t repetition, std::size_t sample) {
    return seed * 0x9e3779b97f4a7c15ULL + repetition * 0xbf58476d1ce4e5b9ULL + sample;
}

InferenceResult infer(const TrainedModel &model, const Dataset &test_set, const Configuration *config,
                      std::size_t repetitions, std::uint64_t seed, std::size_t shots) {
    std::unique_ptr<DeviceEvaluator> dev;
    if (config) {
        dev = std::make_unique<DeviceEvaluator>(model.spec, *config, true);
    }
    return infer_with(model, test_set, dev.get(), repetitions, seed, shots);
}

InferenceResult infer_with(const TrainedModel &model, const Dataset &test_set, DeviceEvaluator *dev,
                           std::size_t repetitions, std::uint64_t seed, std::size_t shots) {
    if (test_set.size() == 0) {
        throw ValidationError("empty test set");
    }
    if (repetitions == 0) {
        throw ValidationError("repetitions must be >= 1");
    }
    std::vector<std::size_t> correct(repetitions, 0);
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const auto &x = test_set.features[i];
        const std::size_t y = test_set.labels[i];
        std::vector<std::size_t> wires = model.spec.measured_qubits();
        std::optional<DensityState> state;
        const NoiseModel *noise = nullptr;
        if (dev) {
            state = dev->final_state(x, model.params, &wires);
            noise = dev->noise();
        } else if (shots > 0) {
            StateVector sv(model.spec.n_qubits);
            sv.apply(build_qnn(model.spec, x, model.params));
            state = DensityState::from_amplitudes(sv.amplitudes());
        }
        if (shots == 0) {
            std::vector<double> z;
            if (state) {
                z = class_logits(*state, wires, noise);
            } else {
                NoiselessEvaluator ev(model.spec);
                z = ev.logits(x, model.params);
            }
            const bool ok = argmax(z) == y;
            for (auto &c : correct) {
                c += ok;
            }
            continue;
        }
        for (std::size_t r = 0; r < repetitions; ++r) {
            const std::uint64_t sub = inference_subseed(seed, r, i);
            const auto counts = sample_counts(*state, shots, noise, sub);
            std::vector<double> z;
            for (auto w : wires) {
                z.push_back(counts_expectation_z(counts, w));
            }
            correct[r] += argmax(z) == y;
        }
    }
    InferenceResult res;
    for (auto c : correct) {
        res.accuracies.push_back(static_cast<double>(c) / static_cast<double>(test_set.size()));
    }
    res.mean_accuracy =
        std::accumulate(res.accuracies.begin(), res.accuracies.end(), 0.0) / static_cast<double>(repetitions);
    return res;
}

// ---------------------------------------------------------------- json

nlohmann::json spec_to_json(const ModelSpec &spec) {
    return {{"n_qubits", spec.n_qubits},
            {"embedding", spec.embedding == Embedding::Angle ? "angle" : "amplitude"},
            {"n_features", spec.n_features},
            {"n_layers", spec.n_layers},
            {"range_r", spec.range_r},
            {"n_classes", spec.n_classes}};
}

ModelSpec spec_from_json(const nlohmann::json &doc) {
    try {
        ModelSpec s;
        s.n_qubits = doc.at("n_qubits").get<std::size_t>();
        const auto emb = doc.at("embedding").get<std::string>();
        if (emb != "angle" && emb != "amplitude") {
            throw ValidationError("unknown embedding '" + emb + "'");
        }
        s.embedding = emb == "angle" ? Embedding::Angle : Embedding::Amplitude;
        s.n_features = doc.at("n_features").get<std::size_t>();
        s.n_layers = doc.at("n_layers").get<std::size_t>();
        s.range_r = doc.at("range_r").get<std::size_t>();
        s.n_classes = doc.at("n_classes").get<std::size_t>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("model spec: ") + e.what());
    }
}

nlohmann::json model_to_json(const TrainedModel &model) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto &h : model.history) {
        history.push_back({{"epoch", h.epoch},
                           {"segment", h.segment},
                           {"config", h.config},
                           {"loss", h.loss},
                           {"accuracy", h.accuracy}});
    }
    return {{"format", 1},
            {"spec", spec_to_json(model.spec)},
            {"params", std::vector<double>(model.params.values().begin(), model.params.values().end())},
            {"history", history},
            {"seed", model.seed}};
}

TrainedModel model_from_json(const nlohmann::json &doc) {
    try {
        TrainedModel m;
        m.spec = spec_from_json(doc.at("spec"));
        m.params = ParameterSet(m.spec.n_layers, m.spec.n_qubits, doc.at("params").get<std::vector<double>>());
        m.seed = doc.value("seed", std::uint64_t{0});
        for (const auto &h : doc.value("history", nlohmann::json::array())) {
            EpochRecord r;
            r.epoch = h.at("epoch").get<std::size_t>();
            r.segment = h.at("segment").get<std::size_t>();
            r.config = h.at("config").get<std::string>();
            r.loss = h.at("loss").get<double>();
            r.accuracy = h.at("accuracy").get<double>();
            m.history.push_back(std::move(r));
        }
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
}

ModelSpec model_for_dataset(const std::string &name) {
    if (name == "iris") {
        return ModelSpec::iris();
    }
    if (name == "digits01") {
        return ModelSpec::digits(3);
    }
    if (name == "digits89") {
        return ModelSpec::digits(1);
    }
    throw ValidationError("unknown dataset '" + name + "'");
}

}  // namespace qhw
