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


// qhwsel: command-line front end for scoring, scheduling, training and
// inference across a fleet of hardware snapshots.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qhw/errors.hpp"
#include "qhw/fleet.hpp"
#include "qhw/queue.hpp"
#include "qhw/scoring.hpp"
#include "qhw/train.hpp"
#include "qhw/transpile.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qhw;

namespace {

struct Globals {
    std::string fleet_dir;
    std::string data_dir;
    std::uint64_t seed = 0;
    std::string out;
    bool noiseless = false;
    std::size_t shots = 0;
    std::size_t init_candidates = kDefaultInitCandidates;
    std::size_t restarts = kDefaultRestarts;
};

std::string num(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

// Writes to <out>/<name> when an output directory was given, else stdout.
class Sink {
   public:
    Sink(const Globals &g, const std::string &name) {
        if (g.out.empty()) {
            return;
        }
        fs::create_directories(g.out);
        path_ = fs::path(g.out) / name;
        file_.open(path_);
        if (!file_) {
            throw IoError("cannot write " + path_.string());
        }
    }
    std::ostream &os() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }

   private:
    fs::path path_;
    std::ofstream file_;
};

fs::path data_dir(const Globals &g) { return g.data_dir.empty() ? default_data_dir() : fs::path(g.data_dir); }

Fleet fleet_of(const Globals &g) { return load_fleet(g.fleet_dir.empty() ? data_dir(g) / "fleet" : fs::path(g.fleet_dir)); }

void write_scorecard(std::ostream &os, const std::vector<ScoreCard> &ranked) {
    os << "rank,hardware,config,qubits,decoherence_us,readout,err_1q,err_2q,layer_depth,A,B,C,D,E,final\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto &c = ranked[i];
        std::string qubits;
        if (c.config) {
            for (auto q : c.config->physical_qubits()) {
                qubits += (qubits.empty() ? "" : " ") + std::to_string(q);
            }
        }
        os << i + 1 << ',' << c.hardware << ',' << c.label << ',' << qubits << ',' << num(c.raw.decoherence, 3) << ','
           << num(c.raw.readout, 5) << ',' << num(c.raw.err_1q, 6) << ',' << num(c.raw.err_2q, 5) << ','
           << num(c.raw.layer_depth, 0);
        for (double v : c.norm) {
            os << ',' << num(v, 2);
        }
        os << ',' << num(c.final, 2) << '\n';
    }
}

std::vector<ScoreCard> score_fleet(const Fleet &fleet, const ModelSpec &spec, const ScoreWeights &weights,
                                   std::uint64_t seed) {
    const auto configs = fleet.configurations();
    if (configs.size() < 2) {
        throw ValidationError("need ≥2 configurations");
    }
    return rank_configurations(configs, spec, weights, seed);
}

void write_schedule(std::ostream &os, const TrainingSchedule &schedule, const std::vector<ScoreCard> &ranked,
                    const std::map<std::string, double> &waits) {
    os << "segment,hardware,config,epochs,final_score,queue_wait_s\n";
    for (std::size_t i = 0; i < schedule.segments.size(); ++i) {
        const auto &seg = schedule.segments[i];
        if (!seg.config) {
            os << i + 1 << ",noiseless,," << seg.epochs << ",,\n";
            continue;
        }
        double score = 0;
        for (const auto &c : ranked) {
            if (c.id() == seg.config->id()) {
                score = c.final;
            }
        }
        const auto &hw = seg.config->hardware().name();
        os << i + 1 << ',' << hw << ',' << seg.config->label() << ',' << seg.epochs << ',' << num(score, 2) << ','
           << num(waits.at(hw), 1) << '\n';
    }
}

struct WaitRow {
    std::string hardware;
    std::string backend;
    double wait_s = 0;
    double train_min = 0;
    double infer_s = 0;
};

std::vector<WaitRow> wait_table(const Fleet &fleet, std::size_t n_train, std::size_t n_test, std::size_t epochs) {
    std::vector<WaitRow> rows;
    const auto waits = fleet.queue_estimates();
    for (const auto &h : fleet.hardware) {
        const double w = waits.at(h.name);
        rows.push_back({h.name, h.backend, w, train_wait(w, static_cast<double>(n_train), static_cast<double>(epochs)),
                        inference_wait(w, static_cast<double>(n_test))});
    }
    return rows;
}

void write_waits(std::ostream &os, const std::vector<WaitRow> &rows, double schedule_min) {
    os << "plan,backend,wait_per_job_s,train_wait_min,inference_wait_s\n";
    for (const auto &r : rows) {
        os << r.hardware << ',' << r.backend << ',' << num(r.wait_s, 1) << ',' << num(r.train_min, 1) << ','
           << num(r.infer_s, 1) << '\n';
    }
    os << "schedule,,," << num(schedule_min, 1) << ",\n";
}

void write_boxplot_row(std::ostream &os, const std::string &group, const std::vector<double> &values) {
    const auto s = summarize(values);
    os << group << ',' << s.n << ',' << num(s.min) << ',' << num(s.q1) << ',' << num(s.median) << ',' << num(s.q3)
       << ',' << num(s.max) << ',' << num(s.mean) << '\n';
}

const FleetHardware &hardware_named(const Fleet &fleet, const std::string &name) {
    for (const auto &h : fleet.hardware) {
        if (h.name == name) {
            return h;
        }
    }
    throw ValidationError("unknown hardware " + name);
}

TrainedModel load_model(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw IoError(path + ": " + e.what());
    }
    return model_from_json(doc);
}

void save_json(const Globals &g, const std::string &name, const json &doc) {
    Sink sink(g, name);
    sink.os() << doc.dump(2) << '\n';
}

void write_history(std::ostream &os, const TrainedModel &model) {
    os << "epoch,segment,config,loss,train_accuracy\n";
    for (const auto &e : model.history) {
        os << e.epoch << ',' << e.segment << ',' << e.config << ',' << num(e.loss, 6) << ',' << num(e.accuracy)
           << '\n';
    }
}

// ------------------------------------------------------------------ commands

int cmd_score(const Globals &g, const std::string &dataset, const std::string &weights_text) {
    const auto fleet = fleet_of(g);
    const auto weights = weights_text.empty() ? ScoreWeights{} : ScoreWeights::parse(weights_text);
    weights.validate();
    const auto ranked = score_fleet(fleet, model_for_dataset(dataset), weights, g.seed);
    Sink sink(g, "scorecard.csv");
    write_scorecard(sink.os(), ranked);
    return 0;
}

int cmd_transpile(const Globals &g, const std::string &config_id, const std::string &dataset,
                  const std::string &basis, std::size_t sample, bool emit_circuit) {
    const auto fleet = fleet_of(g);
    const auto config = fleet.find(config_id);
    const auto spec = model_for_dataset(dataset);
    const auto ds = load_named(dataset, data_dir(g));
    if (sample >= ds.size()) {
        throw ValidationError("sample index out of range");
    }
    const ParameterSet params(spec.n_layers, spec.n_qubits, 0.0);
    const auto logical = build_qnn(spec, ds.features[sample], params);
    auto t = transpile(logical, config, g.seed);
    const BasisSet target = basis.empty() ? config.hardware().basis() : parse_basis(basis);
    if (target != config.hardware().basis()) {
        t.circuit = decompose_to_basis(route(logical, induced_coupling(config), g.seed).circuit, target);
        t.depth = depth(t.circuit);
    }
    const auto counts = count_gates(t.circuit);
    Sink sink(g, "transpile.csv");
    auto &os = sink.os();
    os << "config,basis,depth,two_qubit_depth,one_qubit_gates,two_qubit_gates,swaps,final_permutation\n";
    std::string perm;
    for (auto w : t.final_permutation) {
        perm += (perm.empty() ? "" : " ") + std::to_string(w);
    }
    os << config.id() << ',' << basis_name(target) << ',' << t.depth << ',' << two_qubit_depth(t.circuit) << ','
       << counts.one_qubit << ',' << counts.two_qubit << ',' << t.swaps << ',' << perm << '\n';
    if (emit_circuit) {
        Sink circ(g, "circuit.txt");
        circ.os() << to_text(t.circuit);
    }
    return 0;
}

int cmd_schedule(const Globals &g, const std::string &dataset, std::size_t epochs, std::size_t segments) {
    const auto fleet = fleet_of(g);
    const auto ranked = score_fleet(fleet, model_for_dataset(dataset), {}, g.seed);
    const auto waits = fleet.queue_estimates();
    const auto schedule = build_schedule(ranked, waits, epochs, segments, g.seed);
    Sink sink(g, "schedule.csv");
    write_schedule(sink.os(), schedule, ranked, waits);
    return 0;
}

// Reads the CSV written by `schedule`: hardware, label and epochs per row.
TrainingSchedule read_schedule(const std::string &path, const Fleet &fleet) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    std::string line;
    std::getline(in, line);
    if (line.rfind("segment,hardware,config,epochs", 0) != 0) {
        throw ValidationError(path + ": expected a schedule CSV header");
    }
    TrainingSchedule schedule;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            f.push_back(cell);
        }
        if (f.size() < 4) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected at least 4 fields");
        }
        ScheduleSegment seg;
        try {
            seg.epochs = std::stoul(f[3]);
        } catch (const std::logic_error &) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": bad epoch count '" + f[3] + "'");
        }
        if (f[1] != "noiseless") {
            seg.config = fleet.find(f[1] + ":" + f[2]);
        }
        schedule.segments.push_back(std::move(seg));
    }
    if (schedule.segments.empty()) {
        throw ValidationError(path + ": schedule has no segments");
    }
    return schedule;
}

TrainedModel run_training(const Globals &g, const ModelSpec &spec, const Dataset &train_set, std::size_t epochs,
                          const TrainingSchedule *schedule) {
    TrainOptions opt;
    opt.seed = g.seed;
    opt.init_candidates = g.init_candidates;
    opt.restarts = g.restarts;
    opt.noiseless = g.noiseless;
    if (g.noiseless || !schedule) {
        return train(spec, train_set, TrainingSchedule::noiseless(epochs), opt);
    }
    return train(spec, train_set, *schedule, opt);
}

int cmd_train(Globals g, const std::string &dataset, std::size_t epochs, const std::string &schedule_src,
              const std::string &noise_dir) {
    const auto spec = model_for_dataset(dataset);
    const auto ds = load_named(dataset, data_dir(g));
    const auto sp = split(ds, 0.7, g.seed);
    const auto train_set = ds.subset(sp.train);
    if (!noise_dir.empty()) {
        g.fleet_dir = noise_dir;
    }
    std::optional<TrainingSchedule> schedule;
    if (!g.noiseless) {
        const auto fleet = fleet_of(g);
        if (schedule_src == "auto") {
            const auto ranked = score_fleet(fleet, spec, {}, g.seed);
            schedule = build_schedule(ranked, fleet.queue_estimates(), epochs, 5, g.seed);
        } else {
            schedule = read_schedule(schedule_src, fleet);
        }
    }
    const auto model = run_training(g, spec, train_set, epochs, schedule ? &*schedule : nullptr);
    save_json(g, "model.json", model_to_json(model));
    Sink hist(g, "history.csv");
    write_history(hist.os(), model);
    return 0;
}

int cmd_infer(const Globals &g, const std::string &model_path, const std::string &dataset,
              const std::string &config_id, std::size_t reps, const std::string &emit_counts) {
    const auto model = load_model(model_path);
    const auto ds = load_named(dataset, data_dir(g));
    if (ds.n_features() != model.spec.n_features) {
        throw ValidationError("model and dataset disagree on feature count");
    }
    const auto sp = split(ds, 0.7, model.seed);
    const auto test = ds.subset(sp.test);
    std::vector<std::optional<Configuration>> targets;
    std::optional<Fleet> fleet;
    if (g.noiseless) {
        targets.push_back(std::nullopt);
    } else {
        fleet = fleet_of(g);
        if (config_id == "all") {
            for (auto &c : fleet->configurations()) {
                targets.emplace_back(c);
            }
        } else {
            targets.emplace_back(fleet->find(config_id));
        }
    }
    Sink sink(g, "inference.csv");
    auto &os = sink.os();
    os << "config,repetition,accuracy\n";
    std::unique_ptr<Sink> counts_sink;
    if (!emit_counts.empty()) {
        counts_sink = std::make_unique<Sink>(g, emit_counts);
        counts_sink->os() << "config,sample,label,bitstring,count\n";
    }
    for (const auto &target : targets) {
        std::unique_ptr<DeviceEvaluator> dev;
        if (target) {
            dev = std::make_unique<DeviceEvaluator>(model.spec, *target, true);
        }
        const auto res = infer_with(model, test, dev.get(), reps, g.seed, g.shots);
        const std::string id = target ? target->id() : "noiseless";
        for (std::size_t r = 0; r < res.accuracies.size(); ++r) {
            os << id << ',' << r + 1 << ',' << num(res.accuracies[r]) << '\n';
        }
        if (counts_sink) {
            if (g.shots == 0) {
                throw ValidationError("--emit-counts needs --shots > 0");
            }
            for (std::size_t i = 0; i < test.size(); ++i) {
                DensityState state = dev ? dev->final_state(test.features[i], model.params)
                                         : [&] {
                                               StateVector sv(model.spec.n_qubits);
                                               sv.apply(build_qnn(model.spec, test.features[i], model.params));
                                               return DensityState::from_amplitudes(sv.amplitudes());
                                           }();
                const auto counts =
                    sample_counts(state, g.shots, dev ? dev->noise() : nullptr, inference_subseed(g.seed, 0, i));
                for (const auto &[bits, n] : counts) {
                    counts_sink->os() << id << ',' << i << ',' << test.labels[i] << ',' << bits << ',' << n << '\n';
                }
            }
        }
    }
    return 0;
}

int cmd_queue(const Globals &g, const std::string &trace_path, bool table5) {
    if (!trace_path.empty()) {
        const auto trace = load_trace(trace_path, fs::path(trace_path).stem().string());
        const auto s = trace_stats(trace);
        Sink sink(g, "queue_stats.csv");
        sink.os() << "hardware,n,mean,stddev,min,q1,median,q3,max\n"
                  << trace.hardware << ',' << s.n << ',' << num(s.mean, 2) << ',' << num(s.stddev, 2) << ','
                  << num(s.min, 0) << ',' << num(s.q1, 2) << ',' << num(s.median, 2) << ',' << num(s.q3, 2) << ','
                  << num(s.max, 0) << '\n';
        return 0;
    }
    const auto fleet = fleet_of(g);
    if (table5) {
        // Published wait inputs: total wait A over queue depth B gives the
        // per-job wait, scaled by training and test set sizes.
        const auto iris = load_named("iris", data_dir(g));
        const auto digits = load_named("digits01", data_dir(g));
        const auto si = split(iris, 0.7, 0), sd = split(digits, 0.7, 0);
        Sink sink(g, "wait_table.csv");
        auto &os = sink.os();
        os << "hardware,backend,total_wait_s,queue_depth,avg_wait_s,train_wait_iris_min,train_wait_digits_min,"
              "inference_wait_iris_s,inference_wait_digits_s\n";
        std::map<std::string, double> avg;
        for (const auto &h : fleet.hardware) {
            const auto ri = wait_table_row(h.reference_wait_seconds, h.reference_depth,
                                           static_cast<double>(si.train.size()), static_cast<double>(si.test.size()));
            const auto rd = wait_table_row(h.reference_wait_seconds, h.reference_depth,
                                           static_cast<double>(sd.train.size()), static_cast<double>(sd.test.size()));
            avg[h.name] = ri.train_minutes;
            os << h.name << ',' << h.backend << ',' << num(h.reference_wait_seconds, 0) << ','
               << num(h.reference_depth, 0) << ',' << num(ri.avg_seconds, 1) << ',' << num(ri.train_minutes, 1) << ','
               << num(rd.train_minutes, 1) << ',' << num(ri.inference_seconds, 1) << ','
               << num(rd.inference_seconds, 1) << '\n';
        }
        double lo = 0, hi = 0;
        std::string lo_name, hi_name;
        for (const auto &[name, a] : avg) {
            if (lo_name.empty() || a < lo) {
                lo = a, lo_name = name;
            }
            if (hi_name.empty() || a > hi) {
                hi = a, hi_name = name;
            }
        }
        std::cerr << "iris training speedup " << hi_name << " -> " << lo_name << ": " << num(speedup(hi, lo), 1)
                  << "x\n";
        return 0;
    }
    Sink sink(g, "queue_stats.csv");
    auto &os = sink.os();
    os << "hardware,backend,n,mean,stddev,min,q1,median,q3,max,last_depth,service_s,wait_estimate_s\n";
    const auto waits = fleet.queue_estimates();
    for (const auto &h : fleet.hardware) {
        const auto s = trace_stats(h.trace);
        os << h.name << ',' << h.backend << ',' << s.n << ',' << num(s.mean, 2) << ',' << num(s.stddev, 2) << ','
           << num(s.min, 0) << ',' << num(s.q1, 2) << ',' << num(s.median, 2) << ',' << num(s.q3, 2) << ','
           << num(s.max, 0) << ',' << h.trace.samples.back().depth << ',' << num(h.service_seconds, 3) << ','
           << num(waits.at(h.name), 1) << '\n';
    }
    return 0;
}

int cmd_datasets(const Globals &g) {
    Sink sink(g, "datasets.csv");
    auto &os = sink.os();
    os << "dataset,samples,features,classes,class_counts,train,test\n";
    for (const std::string name : {"iris", "digits01", "digits89"}) {
        const auto ds = load_named(name, data_dir(g));
        const auto sp = split(ds, 0.7, g.seed);
        std::string counts;
        for (auto c : ds.class_counts()) {
            counts += (counts.empty() ? "" : " ") + std::to_string(c);
        }
        os << name << ',' << ds.size() << ',' << ds.n_features() << ',' << ds.n_classes << ',' << counts << ','
           << sp.train.size() << ',' << sp.test.size() << '\n';
    }
    return 0;
}

int cmd_pipeline(Globals g, const std::string &dataset, std::size_t reps, bool dry_run) {
    if (g.out.empty()) {
        g.out = "qhwsel-out";
    }
    const auto fleet = fleet_of(g);
    const auto spec = model_for_dataset(dataset);
    const auto ds = load_named(dataset, data_dir(g));
    const auto sp = split(ds, 0.7, g.seed);
    const auto train_set = ds.subset(sp.train), test_set = ds.subset(sp.test);

    const auto ranked = score_fleet(fleet, spec, {}, g.seed);
    const auto waits = fleet.queue_estimates();
    const std::size_t epochs = 10;
    const auto schedule = build_schedule(ranked, waits, epochs, 5, g.seed);
    const auto rows = wait_table(fleet, sp.train.size(), sp.test.size(), epochs);
    const double schedule_min = schedule_train_wait(schedule, waits, sp.train.size());
    double worst = 0;
    std::string worst_name;
    for (const auto &r : rows) {
        if (r.train_min > worst) {
            worst = r.train_min, worst_name = r.hardware;
        }
    }
    const double gain = schedule_min > 0 ? speedup(worst, schedule_min) : 0.0;

    {
        Sink s(g, "scorecard.csv");
        write_scorecard(s.os(), ranked);
    }
    {
        Sink s(g, "schedule.csv");
        write_schedule(s.os(), schedule, ranked, waits);
    }
    {
        Sink s(g, "waits.csv");
        write_waits(s.os(), rows, schedule_min);
    }
    json report;
    report["dataset"] = dataset;
    report["seed"] = g.seed;
    report["noiseless"] = g.noiseless;
    report["shots"] = g.shots;
    report["train_size"] = sp.train.size();
    report["test_size"] = sp.test.size();
    for (const auto &seg : schedule.segments) {
        report["schedule"].push_back({{"config", seg.id()}, {"epochs", seg.epochs}});
    }
    report["schedule_train_wait_min"] = schedule_min;
    report["worst_single_hardware"] = worst_name;
    report["worst_single_hardware_train_wait_min"] = worst;
    report["speedup_vs_worst"] = gain;

    std::cout << "schedule:";
    for (const auto &seg : schedule.segments) {
        std::cout << ' ' << seg.id() << 'x' << seg.epochs;
    }
    std::cout << "\nqueue wait: schedule " << num(schedule_min, 1) << " min, worst single hardware (" << worst_name
              << ") " << num(worst, 1) << " min, speedup " << num(gain, 2) << "x\n";

    if (dry_run) {
        report["dry_run"] = true;
        save_json(g, "report.json", report);
        return 0;
    }

    const auto model = run_training(g, spec, train_set, epochs, &schedule);
    save_json(g, "model.json", model_to_json(model));
    {
        Sink s(g, "history.csv");
        write_history(s.os(), model);
    }

    Sink acc(g, "accuracy.csv");
    acc.os() << "hardware,config,repetition,accuracy\n";
    Sink box(g, "boxplot.csv");
    box.os() << "group,n,min,q1,median,q3,max,mean\n";
    std::map<std::string, std::vector<double>> per_hardware;
    std::vector<std::pair<std::string, std::vector<double>>> per_config;
    for (const auto &config : fleet.configurations()) {
        std::unique_ptr<DeviceEvaluator> dev;
        if (!g.noiseless) {
            dev = std::make_unique<DeviceEvaluator>(spec, config, true);
        }
        const auto res = infer_with(model, test_set, dev.get(), reps, g.seed, g.shots);
        const auto &hw = config.hardware().name();
        for (std::size_t r = 0; r < res.accuracies.size(); ++r) {
            acc.os() << hw << ',' << config.label() << ',' << r + 1 << ',' << num(res.accuracies[r]) << '\n';
        }
        per_config.emplace_back(config.id(), res.accuracies);
        per_hardware[hw].insert(per_hardware[hw].end(), res.accuracies.begin(), res.accuracies.end());
        report["accuracy"][config.id()] = res.mean_accuracy;
        std::cout << config.id() << " accuracy " << num(res.mean_accuracy) << '\n';
    }
    for (const auto &[id, values] : per_config) {
        write_boxplot_row(box.os(), id, values);
    }
    for (const auto &[hw, values] : per_hardware) {
        write_boxplot_row(box.os(), hw, values);
    }
    save_json(g, "report.json", report);
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Hardware selection for quantum classifiers"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--fleet", g.fleet_dir, "Fleet directory holding fleet.json (default: <data>/fleet)");
    app.add_option("--data", g.data_dir, "Dataset directory");
    app.add_option("--seed", g.seed, "Global seed");
    app.add_option("--out", g.out, "Output directory (default: stdout, pipeline: qhwsel-out)");
    app.add_flag("--noiseless", g.noiseless, "Simulate without noise");
    app.add_option("--shots", g.shots, "Shots per inference circuit (0 = exact expectations)");
    app.add_option("--init-candidates", g.init_candidates, "Random starts screened before training");
    app.add_option("--restarts", g.restarts, "Best screened starts trained in full; the best run is kept");

    std::string dataset = "iris";
    std::string weights, config_id, basis, trace, model_path, emit_counts, schedule_src, noise_dir;
    std::size_t epochs = 10, segments = 5, reps = 10, sample = 0;
    bool table5 = false, dry_run = false, emit_circuit = false;

    auto *score = app.add_subcommand("score", "Rank every fleet configuration");
    score->add_option("--dataset", dataset, "Model to score for");
    score->add_option("--weights", weights, "Five comma-separated weights");

    auto *tp = app.add_subcommand("transpile", "Transpile one model circuit onto a configuration");
    tp->add_option("--config", config_id, "Configuration id, e.g. 27Q:I")->required();
    tp->add_option("--dataset", dataset, "Dataset and model");
    tp->add_option("--basis", basis, "Override the basis set (A or B)");
    tp->add_option("--sample", sample, "Row of the dataset to embed");
    tp->add_flag("--emit-circuit", emit_circuit, "Also write the transpiled circuit");

    auto *sch = app.add_subcommand("schedule", "Build a multi-hardware training schedule");
    sch->add_option("--dataset", dataset, "Model to score for");
    sch->add_option("--epochs", epochs, "Total epochs");
    sch->add_option("--segments", segments, "Number of segments");

    auto *tr = app.add_subcommand("train", "Train a model on the schedule (or noiselessly)");
    tr->add_option("--dataset", dataset, "Dataset");
    tr->add_option("--epochs", epochs, "Total epochs (auto schedule)");
    tr->add_option("--schedule", schedule_src, "Schedule CSV from `schedule`, or auto")->default_val("auto");
    tr->add_option("--noise", noise_dir, "Fleet directory supplying the noise models (default: --fleet)");

    auto *inf = app.add_subcommand("infer", "Test-set accuracy of a trained model");
    inf->add_option("--model", model_path, "model.json from train")->required();
    inf->add_option("--dataset", dataset, "Dataset");
    inf->add_option("--config", config_id, "Configuration id or 'all'")->default_val("all");
    inf->add_option("--reps", reps, "Repetitions");
    inf->add_option("--emit-counts", emit_counts, "Write per-sample counts of the first repetition to this file");

    auto *qu = app.add_subcommand("queue", "Queue trace statistics and wait estimates");
    qu->add_option("--trace", trace, "Summarise a single trace CSV");
    qu->add_flag("--table5", table5, "Wait-time table from the published queue inputs");

    auto *dsc = app.add_subcommand("datasets", "Dataset shapes and class counts");

    auto *pipe = app.add_subcommand("pipeline", "Score, schedule, train and infer end to end");
    pipe->add_option("--dataset", dataset, "Dataset");
    pipe->add_option("--reps", reps, "Inference repetitions");
    pipe->add_flag("--dry-run", dry_run, "Schedule and wait table only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (*score) return cmd_score(g, dataset, weights);
        if (*tp) return cmd_transpile(g, config_id, dataset, basis, sample, emit_circuit);
        if (*sch) return cmd_schedule(g, dataset, epochs, segments);
        if (*tr) return cmd_train(g, dataset, epochs, schedule_src, noise_dir);
        if (*inf) return cmd_infer(g, model_path, dataset, config_id, reps, emit_counts);
        if (*qu) return cmd_queue(g, trace, table5);
        if (*dsc) return cmd_datasets(g);
        if (*pipe) return cmd_pipeline(g, dataset, reps, dry_run);
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
