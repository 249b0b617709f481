#include "smore/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "smore/error.hpp"
#include "smore/rng.hpp"

namespace smore {

namespace {

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::vector<Segment> gather(const Corpus& corpus, std::span<const std::uint32_t> idx) {
    std::vector<Segment> out;
    out.reserve(idx.size());
    for (std::uint32_t i : idx) out.push_back(corpus.segments[i]);
    return out;
}

RunReport finalize_report(RunReport report) {
    double acc = 0.0, ood = 0.0, train_s = 0.0, infer_s = 0.0;
    std::size_t tested = 0;
    for (const SplitReport& s : report.splits) {
        acc += s.accuracy;
        ood += s.ood_rate;
        train_s += s.train_seconds;
        infer_s += s.infer_seconds;
        tested += s.total;
    }
    const double k = report.splits.empty() ? 1.0 : static_cast<double>(report.splits.size());
    report.mean_accuracy = acc / k;
    report.mean_ood_rate = ood / k;
    report.train_seconds = train_s;
    report.infer_seconds = infer_s;
    report.throughput = infer_s > 0.0 ? static_cast<double>(tested) / infer_s : 0.0;
    return report;
}

}  // namespace

TrainedPipeline train_pipeline(const Corpus& corpus, std::span<const std::uint32_t> train_idx,
                               const PipelineConfig& cfg) {
    if (train_idx.empty()) throw ValidationError("empty training split");
    if (!(cfg.delta_star >= -1.0 && cfg.delta_star <= 1.0)) {
        throw ValidationError("delta-star must lie in [-1, 1]");
    }

    TrainedPipeline p;
    p.classes = corpus.classes;
    p.pooled = cfg.arm == Arm::Pooled;

    std::vector<Segment> train = gather(corpus, train_idx);
    if (p.pooled) {
        p.domain_ids = {-1};
        for (Segment& seg : train) seg.domain = 0;
    } else {
        std::map<int, int> dense;
        for (const Segment& seg : train) dense.emplace(seg.domain, 0);
        for (auto& [orig, idx] : dense) {
            idx = static_cast<int>(p.domain_ids.size());
            p.domain_ids.push_back(orig);
        }
        for (Segment& seg : train) seg.domain = dense.at(seg.domain);
    }
    const int num_domains = static_cast<int>(p.domain_ids.size());

    p.encoder = fit_encoder(train, cfg.dim, cfg.ngram, cfg.seed);
    std::vector<EncodedSample> encoded = encode_segments(train, p.encoder, cfg.threads);

    TrainConfig tc;
    tc.eta = cfg.eta;
    tc.epochs = cfg.epochs;
    tc.shuffle_seed = cfg.seed;
    p.models = train_domain_models(encoded, num_domains, corpus.classes, tc, cfg.threads);
    p.descriptors = build_descriptors(encoded, num_domains, cfg.threads);
    return p;
}

SplitOutcome evaluate_encoded(const TrainedPipeline& pipeline,
                              std::span<const EncodedSample> test, const PipelineConfig& cfg,
                              bool keep_records) {
    SplitOutcome out;
    out.total = test.size();

    std::size_t ood_count = 0;
    if (pipeline.pooled) {
        // Plain prototype classification, no test-time ensembling.
        const DomainModel& model = pipeline.models.at(0);
        for (const EncodedSample& q : test) {
            Prediction pred = predict_domain_model(model, q.hv);
            if (pred.label == q.label) ++out.correct;
            if (keep_records) {
                SampleRecord rec;
                rec.segment_id = q.id;
                rec.truth = q.label;
                rec.prediction = pred.label;
                rec.ood = false;
                rec.domain_similarities = {similarity(q.hv, pipeline.descriptors.at(0).u)};
                rec.class_scores = std::move(pred.scores);
                out.records.push_back(std::move(rec));
            }
        }
    } else {
        AdaptConfig ac;
        ac.delta_star = cfg.delta_star;
        ac.allow_negative_weights = cfg.allow_negative_weights;
        EnsembleScorer scorer(pipeline.models, pipeline.descriptors);
        std::vector<InferenceOutcome> outcomes = infer_batch(test, scorer, ac, cfg.threads);
        for (std::size_t i = 0; i < test.size(); ++i) {
            if (outcomes[i].prediction == test[i].label) ++out.correct;
            if (outcomes[i].ood) ++ood_count;
            if (keep_records) {
                SampleRecord rec;
                rec.segment_id = test[i].id;
                rec.truth = test[i].label;
                rec.prediction = outcomes[i].prediction;
                rec.ood = outcomes[i].ood;
                rec.domain_similarities = std::move(outcomes[i].domain_similarities);
                rec.class_scores = std::move(outcomes[i].class_scores);
                out.records.push_back(std::move(rec));
            }
        }
    }
    out.ood_rate = out.total ? static_cast<double>(ood_count) / out.total : 0.0;
    return out;
}

SplitOutcome evaluate_split(const TrainedPipeline& pipeline, const Corpus& corpus,
                            std::span<const std::uint32_t> test_idx, const PipelineConfig& cfg,
                            bool keep_records) {
    std::vector<Segment> test = gather(corpus, test_idx);
    std::vector<EncodedSample> encoded = encode_segments(test, pipeline.encoder, cfg.threads);
    return evaluate_encoded(pipeline, encoded, cfg, keep_records);
}

namespace {

RunReport run_protocol(const Corpus& corpus, std::span<const Split> splits,
                       const PipelineConfig& cfg, const std::string& protocol,
                       std::vector<SampleRecord>* records) {
    RunReport report;
    report.protocol = protocol;
    report.corpus = corpus.name;
    report.segments = corpus.segments.size();
    report.sensors = corpus.sensors;
    report.classes = corpus.classes;
    report.domains = corpus.domains;
    report.config = cfg;

    for (std::size_t k = 0; k < splits.size(); ++k) {
        SplitReport sr;
        sr.index = static_cast<int>(k);

        Timer train_timer;
        TrainedPipeline pipeline = train_pipeline(corpus, splits[k].train, cfg);
        sr.train_seconds = train_timer.seconds();

        Timer infer_timer;
        SplitOutcome outcome =
            evaluate_split(pipeline, corpus, splits[k].test, cfg, records != nullptr);
        sr.infer_seconds = infer_timer.seconds();

        sr.accuracy = outcome.accuracy();
        sr.ood_rate = outcome.ood_rate;
        sr.correct = outcome.correct;
        sr.total = outcome.total;
        report.splits.push_back(sr);
        if (records) {
            for (SampleRecord& rec : outcome.records) records->push_back(std::move(rec));
        }
    }
    return finalize_report(std::move(report));
}

}  // namespace

RunReport run_lodo(const Corpus& corpus, const PipelineConfig& cfg,
                   std::vector<SampleRecord>* records) {
    return run_protocol(corpus, make_lodo_splits(corpus), cfg, "lodo", records);
}

RunReport run_kfold(const Corpus& corpus, int k, const PipelineConfig& cfg,
                    std::vector<SampleRecord>* records) {
    RunReport report =
        run_protocol(corpus, make_kfold_splits(corpus, k, cfg.seed), cfg, "kfold", records);
    report.kfold_k = k;
    return report;
}

std::vector<SweepRow> sweep_delta(const Corpus& corpus, std::span<const double> grid,
                                  const PipelineConfig& cfg) {
    if (grid.empty()) throw ValidationError("delta-star grid is empty");
    for (double d : grid) {
        if (!(d >= -1.0 && d <= 1.0)) throw ValidationError("delta-star grid point outside [-1, 1]");
    }

    const std::vector<Split> splits = make_lodo_splits(corpus);
    std::vector<TrainedPipeline> pipelines;
    std::vector<std::vector<EncodedSample>> encoded_tests;
    pipelines.reserve(splits.size());
    encoded_tests.reserve(splits.size());
    for (const Split& split : splits) {
        pipelines.push_back(train_pipeline(corpus, split.train, cfg));
        std::vector<Segment> test = gather(corpus, split.test);
        encoded_tests.push_back(encode_segments(test, pipelines.back().encoder, cfg.threads));
    }

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (double delta : grid) {
        PipelineConfig point = cfg;
        point.delta_star = delta;
        SweepRow row;
        row.delta_star = delta;
        for (std::size_t k = 0; k < splits.size(); ++k) {
            SplitOutcome outcome = evaluate_encoded(pipelines[k], encoded_tests[k], point);
            row.mean_accuracy += outcome.accuracy();
            row.mean_ood_rate += outcome.ood_rate;
        }
        row.mean_accuracy /= static_cast<double>(splits.size());
        row.mean_ood_rate /= static_cast<double>(splits.size());
        rows.push_back(row);
    }
    return rows;
}

std::vector<BenchRow> run_bench(const Corpus& corpus, std::span<const double> fractions,
                                const PipelineConfig& cfg) {
    if (fractions.empty()) throw ValidationError("no bench fractions given");
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ValidationError("bench fractions must lie in (0, 1]");
    }

    // One seeded shuffle per domain; each fraction takes a prefix, so the
    // subsamples are nested.
    std::vector<std::vector<std::uint32_t>> by_domain(corpus.domains);
    for (std::uint32_t i = 0; i < corpus.segments.size(); ++i) {
        by_domain[corpus.segments[i].domain].push_back(i);
    }
    HvRng sub_rng(cfg.seed, kStreamSubsample);
    for (int k = 0; k < corpus.domains; ++k) {
        RngSequence seq = sub_rng.sequence(static_cast<std::uint64_t>(k));
        shuffle_indices(by_domain[k], seq);
    }

    std::vector<BenchRow> rows;
    for (double f : fractions) {
        std::vector<std::uint32_t> subset;
        for (int k = 0; k < corpus.domains; ++k) {
            const std::size_t take = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(f * static_cast<double>(by_domain[k].size()))));
            subset.insert(subset.end(), by_domain[k].begin(),
                          by_domain[k].begin() + std::min(take, by_domain[k].size()));
        }
        std::sort(subset.begin(), subset.end());

        BenchRow row;
        row.fraction = f;
        row.samples = subset.size();

        Timer train_timer;
        TrainedPipeline pipeline = train_pipeline(corpus, subset, cfg);
        row.train_seconds = train_timer.seconds();

        Timer infer_timer;
        SplitOutcome outcome = evaluate_split(pipeline, corpus, subset, cfg);
        row.infer_seconds = infer_timer.seconds();
        row.throughput =
            row.infer_seconds > 0.0 ? static_cast<double>(outcome.total) / row.infer_seconds : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::string report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["protocol"] = report.protocol;
    j["corpus"] = {{"name", report.corpus},
                   {"segments", report.segments},
                   {"sensors", report.sensors},
                   {"classes", report.classes},
                   {"domains", report.domains}};
    if (report.kfold_k > 0) j["k"] = report.kfold_k;
    j["splits"] = nlohmann::json::array();
    for (const SplitReport& s : report.splits) {
        j["splits"].push_back({{"index", s.index},
                               {"accuracy", s.accuracy},
                               {"ood_rate", s.ood_rate},
                               {"correct", s.correct},
                               {"total", s.total},
                               {"train_seconds", s.train_seconds},
                               {"infer_seconds", s.infer_seconds}});
    }
    j["mean_accuracy"] = report.mean_accuracy;
    j["mean_ood_rate"] = report.mean_ood_rate;
    j["train_seconds"] = report.train_seconds;
    j["infer_seconds"] = report.infer_seconds;
    j["throughput"] = report.throughput;
    j["config"] = {{"dim", report.config.dim},
                   {"ngram", report.config.ngram},
                   {"eta", report.config.eta},
                   {"epochs", report.config.epochs},
                   {"delta_star", report.config.delta_star},
                   {"allow_negative_weights", report.config.allow_negative_weights},
                   {"seed", report.config.seed},
                   {"baseline", report.config.arm == Arm::Pooled ? "pooled" : "smore"},
                   {"threads", report.config.threads}};
    return j.dump(2);
}

void write_predictions_csv(const std::string& path, std::span<const SampleRecord> records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    const std::size_t K = records.empty() ? 0 : records[0].domain_similarities.size();
    const std::size_t n = records.empty() ? 0 : records[0].class_scores.size();
    out << "segment_id,label,prediction,ood";
    for (std::size_t k = 0; k < K; ++k) out << ",domain_sim_" << k;
    for (std::size_t t = 0; t < n; ++t) out << ",class_score_" << t;
    out << "\n";
    char buf[64];
    for (const SampleRecord& r : records) {
        out << r.segment_id << ',' << r.truth << ',' << r.prediction << ',' << (r.ood ? 1 : 0);
        for (double v : r.domain_similarities) {
            std::snprintf(buf, sizeof(buf), "%.9g", v);
            out << ',' << buf;
        }
        for (double v : r.class_scores) {
            std::snprintf(buf, sizeof(buf), "%.9g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw DataError("failed writing predictions to " + path);
}

void write_predictions_jsonl(const std::string& path, std::span<const SampleRecord> records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const SampleRecord& r : records) {
        nlohmann::json j;
        j["segment_id"] = r.segment_id;
        j["label"] = r.truth;
        j["prediction"] = r.prediction;
        j["ood"] = r.ood;
        j["domain_similarities"] = r.domain_similarities;
        j["class_scores"] = r.class_scores;
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("failed writing predictions to " + path);
}

}  // namespace smore
