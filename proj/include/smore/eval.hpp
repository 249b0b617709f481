#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smore/adapt.hpp"
#include "smore/data.hpp"
#include "smore/model.hpp"

namespace smore {

/// Arm selector: the full similarity-weighted ensemble, or a single
/// prototype model trained on all source domains merged.
enum class Arm { Smore, Pooled };

struct PipelineConfig {
    std::size_t dim = 8192;
    int ngram = 3;
    double eta = 0.05;
    int epochs = 20;
    double delta_star = 0.65;
    bool allow_negative_weights = false;
    std::uint64_t seed = 1;
    Arm arm = Arm::Smore;
    int threads = 0;
};

/// Everything the inference phase needs: fitted encoder, per-domain models
/// and descriptors. Domain indices are dense; domain_ids maps them back to
/// corpus domain ids (a single -1 entry for the pooled arm).
struct TrainedPipeline {
    EncoderConfig encoder;
    std::vector<DomainModel> models;
    std::vector<DomainDescriptor> descriptors;
    std::vector<int> domain_ids;
    int classes = 0;
    bool pooled = false;
};

TrainedPipeline train_pipeline(const Corpus& corpus, std::span<const std::uint32_t> train_idx,
                               const PipelineConfig& cfg);

struct SampleRecord {
    std::int64_t segment_id = 0;
    int truth = -1;
    int prediction = 0;
    bool ood = false;
    std::vector<double> domain_similarities;
    std::vector<double> class_scores;
};

struct SplitOutcome {
    std::size_t correct = 0;
    std::size_t total = 0;
    double ood_rate = 0.0;
    std::vector<SampleRecord> records;

    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

SplitOutcome evaluate_encoded(const TrainedPipeline& pipeline,
                              std::span<const EncodedSample> test, const PipelineConfig& cfg,
                              bool keep_records = false);
SplitOutcome evaluate_split(const TrainedPipeline& pipeline, const Corpus& corpus,
                            std::span<const std::uint32_t> test_idx, const PipelineConfig& cfg,
                            bool keep_records = false);

struct SplitReport {
    int index = 0;  // held-out domain (lodo) or fold index (kfold)
    double accuracy = 0.0;
    double ood_rate = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    double train_seconds = 0.0;
    double infer_seconds = 0.0;
};

struct RunReport {
    std::string protocol;
    std::string corpus;
    std::size_t segments = 0;
    int sensors = 0;
    int classes = 0;
    int domains = 0;
    int kfold_k = 0;
    std::vector<SplitReport> splits;
    double mean_accuracy = 0.0;
    double mean_ood_rate = 0.0;
    double train_seconds = 0.0;
    double infer_seconds = 0.0;
    double throughput = 0.0;  // test samples per second of inference
    PipelineConfig config;
};

std::string report_to_json(const RunReport& report);

/// Train on K-1 domains, test on the held-out one, for every domain.
RunReport run_lodo(const Corpus& corpus, const PipelineConfig& cfg,
                   std::vector<SampleRecord>* records = nullptr);

/// Seeded uniform k-fold over segments; fold seed is the pipeline seed.
RunReport run_kfold(const Corpus& corpus, int k, const PipelineConfig& cfg,
                    std::vector<SampleRecord>* records = nullptr);

struct SweepRow {
    double delta_star = 0.0;
    double mean_accuracy = 0.0;
    double mean_ood_rate = 0.0;
};

/// LODO accuracy per threshold value. Models are trained once per split and
/// reused across the grid; the threshold only affects inference.
std::vector<SweepRow> sweep_delta(const Corpus& corpus, std::span<const double> grid,
                                  const PipelineConfig& cfg);

struct BenchRow {
    double fraction = 0.0;
    std::size_t samples = 0;
    double train_seconds = 0.0;
    double infer_seconds = 0.0;
    double throughput = 0.0;
};

/// Train+infer wall-clock on nested seeded subsamples of the corpus.
std::vector<BenchRow> run_bench(const Corpus& corpus, std::span<const double> fractions,
                                const PipelineConfig& cfg);

void write_predictions_csv(const std::string& path, std::span<const SampleRecord> records);
void write_predictions_jsonl(const std::string& path, std::span<const SampleRecord> records);

}  // namespace smore
