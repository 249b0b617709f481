#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smore/error.hpp"
#include "smore/eval.hpp"
#include "smore/parallel.hpp"
#include "smore/store.hpp"

namespace {

using namespace smore;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitData = 3;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SMORE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return static_cast<std::uint64_t>(v);
    }
    return 1;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << std::endl;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot open for writing: " + out_path);
    out << text << "\n";
}

struct CommonFlags {
    PipelineConfig config;
    std::string baseline = "smore";
    std::string out;

    void add(CLI::App* cmd, bool with_model_knobs = true) {
        config.seed = default_seed();
        if (with_model_knobs) {
            cmd->add_option("--dim", config.dim, "Hypervector dimension")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
            cmd->add_option("--ngram", config.ngram, "Temporal n-gram window size")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
            cmd->add_option("--eta", config.eta, "Prototype learning rate")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
            cmd->add_option("--epochs", config.epochs, "Training passes per domain")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        }
        cmd->add_option("--delta-star", config.delta_star,
                        "OOD threshold on descriptor similarity")
            ->check(CLI::Range(-1.0, 1.0))
            ->capture_default_str();
        cmd->add_flag("--allow-negative-weights", config.allow_negative_weights,
                      "Keep negative similarities as ensemble weights");
        cmd->add_option("--seed", config.seed,
                        "Master seed (env SMORE_SEED supplies the default)")
            ->capture_default_str();
        cmd->add_option("--threads", config.threads, "Worker count (0 = all)")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_option("--baseline", baseline, "Model arm: smore | pooled")
            ->check(CLI::IsMember({"smore", "pooled"}))
            ->capture_default_str();
        cmd->add_option("--out", out, "Write the report here instead of stdout");
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg = config;
        cfg.arm = baseline == "pooled" ? Arm::Pooled : Arm::Smore;
        return cfg;
    }
};

struct PredictionSink {
    std::string path;
    std::string format = "csv";

    void add(CLI::App* cmd) {
        cmd->add_option("--predictions", path, "Write per-sample predictions to this file");
        cmd->add_option("--pred-format", format, "Prediction file format: csv | jsonl")
            ->check(CLI::IsMember({"csv", "jsonl"}));
    }
    void write(std::span<const SampleRecord> records) const {
        if (path.empty()) return;
        if (format == "jsonl") {
            write_predictions_jsonl(path, records);
        } else {
            write_predictions_csv(path, records);
        }
    }
    bool wanted() const { return !path.empty(); }
};

std::vector<double> parse_grid(const std::string& text) {
    // "lo:hi:step" or a comma-separated list
    std::vector<double> grid;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        double lo, hi, step;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0) {
            throw ValidationError("bad grid spec '" + text + "', expected lo:hi:step");
        }
        for (double v = lo; v <= hi + 1e-12; v += step) grid.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string field;
        while (std::getline(ss, field, ',')) {
            if (!field.empty()) grid.push_back(std::stod(field));
        }
    }
    if (grid.empty()) throw ValidationError("empty delta-star grid");
    return grid;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Similarity-weighted hyperdimensional classification for multi-sensor time series"};
    app.require_subcommand(1);

    // ------------------------------------------------------------------ train
    auto* train = app.add_subcommand("train", "Fit the encoder, domain models and descriptors");
    CommonFlags train_flags;
    std::string train_corpus, model_out;
    train->add_option("corpus", train_corpus, "Corpus CSV")->required();
    train->add_option("--model-out", model_out, "Model container path")->required();
    train_flags.add(train);

    // -------------------------------------------------------------- eval-lodo
    auto* lodo = app.add_subcommand("eval-lodo", "Leave-one-domain-out evaluation");
    CommonFlags lodo_flags;
    PredictionSink lodo_sink;
    std::string lodo_corpus, lodo_splits_out;
    lodo->add_option("corpus", lodo_corpus, "Corpus CSV")->required();
    lodo->add_option("--splits-out", lodo_splits_out, "Write the split plan as JSON");
    lodo_flags.add(lodo);
    lodo_sink.add(lodo);

    // ------------------------------------------------------------- eval-kfold
    auto* kfold = app.add_subcommand("eval-kfold", "Random k-fold evaluation");
    CommonFlags kfold_flags;
    PredictionSink kfold_sink;
    std::string kfold_corpus, kfold_splits_out;
    int kfold_k = 5;
    kfold->add_option("corpus", kfold_corpus, "Corpus CSV")->required();
    kfold->add_option("--splits-out", kfold_splits_out, "Write the split plan as JSON");
    kfold->add_option("--k", kfold_k, "Fold count")->check(CLI::Range(2, 1 << 20))
        ->capture_default_str();
    kfold_flags.add(kfold);
    kfold_sink.add(kfold);

    // ------------------------------------------------------------ sweep-delta
    auto* sweep = app.add_subcommand("sweep-delta", "LODO accuracy across a delta-star grid");
    CommonFlags sweep_flags;
    std::string sweep_corpus, grid_spec = "0.05:0.95:0.1";
    sweep->add_option("corpus", sweep_corpus, "Corpus CSV")->required();
    sweep->add_option("--grid", grid_spec, "Grid as lo:hi:step or v1,v2,...")
        ->capture_default_str();
    sweep_flags.add(sweep);

    // ------------------------------------------------------------------ bench
    auto* bench = app.add_subcommand("bench", "Train/infer wall-clock on corpus subsamples");
    CommonFlags bench_flags;
    std::string bench_corpus, fractions_spec = "0.25,0.5,1.0";
    bench->add_option("corpus", bench_corpus, "Corpus CSV")->required();
    bench->add_option("--fractions", fractions_spec, "Comma-separated fractions in (0,1]")
        ->capture_default_str();
    bench_flags.add(bench);

    // ------------------------------------------------------------------ synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic distribution-shift corpus");
    SynthSpec spec;
    std::string synth_out, spec_json;
    std::uint64_t synth_seed = default_seed();
    synth->add_option("--out", synth_out, "Corpus CSV to write")->required();
    synth->add_option("--spec-json", spec_json, "Read the spec from a JSON sidecar");
    synth->add_option("--domains", spec.domains)->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--classes", spec.classes)->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--sensors", spec.sensors)->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--timesteps", spec.timesteps)->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--samples-per", spec.samples_per_class,
                      "Samples per domain per class")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--shift", spec.shift, "Distribution shift magnitude")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--noise-sigma", spec.noise_sigma)->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();

    // ---------------------------------------------------------------- predict
    auto* predict = app.add_subcommand("predict", "Batch inference with a trained model");
    CommonFlags predict_flags;
    PredictionSink predict_sink;
    std::string predict_corpus, model_in;
    predict->add_option("corpus", predict_corpus, "Corpus CSV")->required();
    predict->add_option("--model", model_in, "Model container path")->required();
    predict_flags.add(predict, /*with_model_knobs=*/false);
    predict_sink.add(predict);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the help text or the error
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (train->parsed()) {
        PipelineConfig cfg = train_flags.resolve();
        Corpus corpus = load_corpus(train_corpus);
        std::vector<std::uint32_t> all(corpus.segments.size());
        for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;

        const auto start = std::chrono::steady_clock::now();
        TrainedPipeline pipeline = train_pipeline(corpus, all, cfg);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        save_model(model_out, pipeline, cfg);

        nlohmann::json j;
        j["corpus"] = {{"name", corpus.name},
                       {"segments", corpus.segments.size()},
                       {"sensors", corpus.sensors},
                       {"classes", corpus.classes},
                       {"domains", corpus.domains}};
        j["model"] = model_out;
        j["train_seconds"] = seconds;
        j["config"] = {{"dim", cfg.dim},
                       {"ngram", cfg.ngram},
                       {"eta", cfg.eta},
                       {"epochs", cfg.epochs},
                       {"delta_star", cfg.delta_star},
                       {"seed", cfg.seed},
                       {"baseline", cfg.arm == Arm::Pooled ? "pooled" : "smore"},
                       {"threads", cfg.threads}};
        emit(j.dump(2), train_flags.out);
    } else if (lodo->parsed()) {
        PipelineConfig cfg = lodo_flags.resolve();
        Corpus corpus = load_corpus(lodo_corpus);
        if (!lodo_splits_out.empty()) {
            emit(splits_to_json(make_lodo_splits(corpus), "lodo"), lodo_splits_out);
        }
        std::vector<SampleRecord> records;
        RunReport report = run_lodo(corpus, cfg, lodo_sink.wanted() ? &records : nullptr);
        lodo_sink.write(records);
        emit(report_to_json(report), lodo_flags.out);
    } else if (kfold->parsed()) {
        PipelineConfig cfg = kfold_flags.resolve();
        Corpus corpus = load_corpus(kfold_corpus);
        if (!kfold_splits_out.empty()) {
            emit(splits_to_json(make_kfold_splits(corpus, kfold_k, cfg.seed), "kfold"),
                 kfold_splits_out);
        }
        std::vector<SampleRecord> records;
        RunReport report =
            run_kfold(corpus, kfold_k, cfg, kfold_sink.wanted() ? &records : nullptr);
        kfold_sink.write(records);
        emit(report_to_json(report), kfold_flags.out);
    } else if (sweep->parsed()) {
        PipelineConfig cfg = sweep_flags.resolve();
        Corpus corpus = load_corpus(sweep_corpus);
        auto grid = parse_grid(grid_spec);
        auto rows = sweep_delta(corpus, grid, cfg);
        nlohmann::json j;
        j["protocol"] = "sweep-delta";
        j["corpus"] = corpus.name;
        j["rows"] = nlohmann::json::array();
        for (const SweepRow& r : rows) {
            j["rows"].push_back({{"delta_star", r.delta_star},
                                 {"mean_accuracy", r.mean_accuracy},
                                 {"mean_ood_rate", r.mean_ood_rate}});
        }
        emit(j.dump(2), sweep_flags.out);
    } else if (bench->parsed()) {
        PipelineConfig cfg = bench_flags.resolve();
        Corpus corpus = load_corpus(bench_corpus);
        auto fractions = parse_grid(fractions_spec);
        auto rows = run_bench(corpus, fractions, cfg);
        nlohmann::json j;
        j["protocol"] = "bench";
        j["corpus"] = corpus.name;
        j["threads"] = resolve_threads(cfg.threads);
        j["rows"] = nlohmann::json::array();
        for (const BenchRow& r : rows) {
            j["rows"].push_back({{"fraction", r.fraction},
                                 {"samples", r.samples},
                                 {"train_seconds", r.train_seconds},
                                 {"infer_seconds", r.infer_seconds},
                                 {"throughput", r.throughput}});
        }
        emit(j.dump(2), bench_flags.out);
    } else if (synth->parsed()) {
        if (!spec_json.empty()) spec = synth_spec_from_json_file(spec_json);
        spec.seed = synth_seed;
        Corpus corpus = generate_synthetic(spec);
        write_corpus(corpus, synth_out);
        nlohmann::json j;
        j["corpus"] = synth_out;
        j["segments"] = corpus.segments.size();
        j["spec"] = nlohmann::json::parse(synth_spec_to_json(spec));
        std::cout << j.dump(2) << std::endl;
    } else if (predict->parsed()) {
        PipelineConfig cfg = predict_flags.resolve();
        Corpus corpus = load_corpus(predict_corpus);
        LoadedModel lm = load_model(model_in);
        lm.config.delta_star = cfg.delta_star;
        lm.config.allow_negative_weights = cfg.allow_negative_weights;
        lm.config.threads = cfg.threads;

        std::vector<std::uint32_t> all(corpus.segments.size());
        for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
        const auto start = std::chrono::steady_clock::now();
        SplitOutcome outcome = evaluate_split(lm.pipeline, corpus, all, lm.config, true);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        predict_sink.write(outcome.records);

        nlohmann::json j;
        j["corpus"] = corpus.name;
        j["samples"] = outcome.total;
        j["accuracy"] = outcome.accuracy();
        j["ood_rate"] = outcome.ood_rate;
        j["infer_seconds"] = seconds;
        j["throughput"] = seconds > 0.0 ? static_cast<double>(outcome.total) / seconds : 0.0;
        j["delta_star"] = lm.config.delta_star;
        emit(j.dump(2), predict_flags.out);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const smore::ValidationError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitValidation;
    } catch (const smore::DataError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << std::endl;
        return 1;
    }
}
