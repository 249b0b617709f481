#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "smore/error.hpp"
#include "smore/eval.hpp"
#include "smore/store.hpp"

using namespace smore;

namespace {

// Small, fast corpus for harness tests.
SynthSpec tiny_spec() {
    SynthSpec spec;
    spec.domains = 4;
    spec.classes = 3;
    spec.sensors = 3;
    spec.timesteps = 12;
    spec.samples_per_class = 12;
    spec.shift = 2.0;
    spec.seed = 5;
    return spec;
}

PipelineConfig tiny_config() {
    PipelineConfig cfg;
    cfg.dim = 1024;
    cfg.epochs = 5;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("lodo report is deterministic and self-consistent") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();

    std::vector<SampleRecord> records;
    RunReport a = run_lodo(corpus, cfg, &records);
    RunReport b = run_lodo(corpus, cfg);

    REQUIRE(a.splits.size() == 4);
    CHECK(a.protocol == "lodo");
    CHECK(b.mean_accuracy == a.mean_accuracy);
    for (std::size_t k = 0; k < a.splits.size(); ++k) {
        CHECK(a.splits[k].accuracy == b.splits[k].accuracy);
        CHECK(a.splits[k].correct == b.splits[k].correct);
        CHECK(a.splits[k].ood_rate == b.splits[k].ood_rate);
    }

    // Mean accuracy is the arithmetic mean of the per-split accuracies.
    double acc = 0.0;
    for (const SplitReport& s : a.splits) acc += s.accuracy;
    CHECK(a.mean_accuracy == doctest::Approx(acc / 4.0).epsilon(1e-12));

    // Accuracy accounting recomputes from the per-sample records.
    CHECK(records.size() == corpus.segments.size());
    std::size_t correct = 0;
    for (const SampleRecord& r : records) {
        if (r.prediction == r.truth) ++correct;
    }
    std::size_t reported = 0;
    for (const SplitReport& s : a.splits) reported += s.correct;
    CHECK(correct == reported);
}

TEST_CASE("reports are independent of the worker count") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig one = tiny_config();
    one.threads = 1;
    PipelineConfig four = tiny_config();
    four.threads = 4;

    RunReport a = run_lodo(corpus, one);
    RunReport b = run_lodo(corpus, four);
    for (std::size_t k = 0; k < a.splits.size(); ++k) {
        CHECK(a.splits[k].accuracy == b.splits[k].accuracy);
        CHECK(a.splits[k].correct == b.splits[k].correct);
    }
}

TEST_CASE("kfold evaluates every segment once") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    RunReport r = run_kfold(corpus, 5, cfg);
    REQUIRE(r.splits.size() == 5);
    CHECK(r.kfold_k == 5);
    std::size_t total = 0;
    for (const SplitReport& s : r.splits) total += s.total;
    CHECK(total == corpus.segments.size());
    CHECK(r.mean_accuracy > 0.3);  // far above 1/3 chance on this corpus
}

TEST_CASE("pooled baseline trains a single merged model") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    cfg.arm = Arm::Pooled;

    std::vector<std::uint32_t> all;
    for (std::uint32_t i = 0; i < corpus.segments.size(); ++i) all.push_back(i);
    TrainedPipeline p = train_pipeline(corpus, all, cfg);
    CHECK(p.pooled);
    CHECK(p.models.size() == 1);
    CHECK(p.descriptors.size() == 1);
    CHECK(p.domain_ids == std::vector<int>{-1});

    SplitOutcome outcome = evaluate_split(p, corpus, all, cfg, true);
    CHECK(outcome.ood_rate == 0.0);
    for (const SampleRecord& r : outcome.records) {
        CHECK(r.domain_similarities.size() == 1);
        CHECK_FALSE(r.ood);
    }
}

TEST_CASE("sweep at a single point reproduces the lodo run") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    RunReport direct = run_lodo(corpus, cfg);
    const double grid[] = {0.65};
    auto rows = sweep_delta(corpus, grid, cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].delta_star == 0.65);
    CHECK(rows[0].mean_accuracy == doctest::Approx(direct.mean_accuracy).epsilon(1e-12));

    CHECK_THROWS_AS(sweep_delta(corpus, {}, cfg), ValidationError);
    const double bad[] = {1.5};
    CHECK_THROWS_AS(sweep_delta(corpus, bad, cfg), ValidationError);
}

TEST_CASE("extreme thresholds coincide when no similarity is negative") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    const double grid[] = {-1.0, 1.0};
    auto rows = sweep_delta(corpus, grid, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mean_accuracy == doctest::Approx(rows[1].mean_accuracy).epsilon(1e-12));
}

TEST_CASE("bench rows are monotone in training work") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    const double fractions[] = {0.25, 0.5, 1.0};
    auto rows = run_bench(corpus, fractions, cfg);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].samples < rows[1].samples);
    CHECK(rows[1].samples < rows[2].samples);
    CHECK(rows[2].samples == corpus.segments.size());
    for (const BenchRow& r : rows) {
        CHECK(r.train_seconds > 0.0);
        CHECK(r.throughput > 0.0);
    }

    const double bad[] = {0.0};
    CHECK_THROWS_AS(run_bench(corpus, bad, cfg), ValidationError);
}

TEST_CASE("report JSON carries the config echo") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    cfg.delta_star = 0.42;
    RunReport r = run_lodo(corpus, cfg);
    std::string json = report_to_json(r);
    CHECK(json.find("\"delta_star\": 0.42") != std::string::npos);
    CHECK(json.find("\"dim\": 1024") != std::string::npos);
    CHECK(json.find("\"epochs\": 5") != std::string::npos);
    CHECK(json.find("\"baseline\": \"smore\"") != std::string::npos);
    CHECK(json.find("\"mean_accuracy\"") != std::string::npos);
}

TEST_CASE("prediction files round-trip the outcome counts") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    std::vector<SampleRecord> records;
    run_lodo(corpus, cfg, &records);

    const std::string csv = "/tmp/smore_test_pred.csv";
    const std::string jsonl = "/tmp/smore_test_pred.jsonl";
    write_predictions_csv(csv, records);
    write_predictions_jsonl(jsonl, records);

    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("segment_id,label,prediction,ood", 0) == 0);
    std::size_t rows = 0, correct = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string id, truth, pred;
        std::getline(ss, id, ',');
        std::getline(ss, truth, ',');
        std::getline(ss, pred, ',');
        if (truth == pred) ++correct;
    }
    CHECK(rows == records.size());
    std::size_t expect_correct = 0;
    for (const SampleRecord& r : records) {
        if (r.prediction == r.truth) ++expect_correct;
    }
    CHECK(correct == expect_correct);

    std::ifstream jin(jsonl);
    rows = 0;
    while (std::getline(jin, line)) ++rows;
    CHECK(rows == records.size());
    std::remove(csv.c_str());
    std::remove(jsonl.c_str());
}

TEST_CASE("model container round-trips inference exactly") {
    Corpus corpus = generate_synthetic(tiny_spec());
    PipelineConfig cfg = tiny_config();
    std::vector<std::uint32_t> all;
    for (std::uint32_t i = 0; i < corpus.segments.size(); ++i) all.push_back(i);
    TrainedPipeline p = train_pipeline(corpus, all, cfg);

    const std::string path = "/tmp/smore_test_model.bin";
    save_model(path, p, cfg);
    LoadedModel lm = load_model(path);

    CHECK(lm.config.seed == cfg.seed);
    CHECK(lm.config.eta == cfg.eta);
    CHECK(lm.config.epochs == cfg.epochs);
    CHECK(lm.pipeline.classes == p.classes);
    CHECK(lm.pipeline.domain_ids == p.domain_ids);
    REQUIRE(lm.pipeline.models.size() == p.models.size());
    for (std::size_t k = 0; k < p.models.size(); ++k) {
        CHECK(lm.pipeline.models[k].classes == p.models[k].classes);
        CHECK(lm.pipeline.descriptors[k].u == p.descriptors[k].u);
        CHECK(lm.pipeline.descriptors[k].count == p.descriptors[k].count);
    }
    for (std::size_t s = 0; s < p.encoder.sensors.size(); ++s) {
        CHECK(lm.pipeline.encoder.sensors[s].level_min == p.encoder.sensors[s].level_min);
        CHECK(lm.pipeline.encoder.sensors[s].level_max == p.encoder.sensors[s].level_max);
        CHECK(lm.pipeline.encoder.sensors[s].signature == p.encoder.sensors[s].signature);
        CHECK(lm.pipeline.encoder.sensors[s].y_min == p.encoder.sensors[s].y_min);
        CHECK(lm.pipeline.encoder.sensors[s].y_max == p.encoder.sensors[s].y_max);
    }

    SplitOutcome a = evaluate_split(p, corpus, all, cfg);
    SplitOutcome b = evaluate_split(lm.pipeline, corpus, all, cfg);
    CHECK(a.correct == b.correct);
    CHECK(a.ood_rate == b.ood_rate);

    // Saving twice produces identical bytes.
    const std::string path2 = "/tmp/smore_test_model2.bin";
    save_model(path2, p, cfg);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    std::remove(path.c_str());
    std::remove(path2.c_str());

    CHECK_THROWS_AS(load_model("/nonexistent/model.bin"), DataError);
}
