#pragma once

#include <span>
#include <utility>
#include <vector>

#include "smore/hv.hpp"
#include "smore/model.hpp"

namespace smore {

struct AdaptConfig {
    /// OOD threshold on the best descriptor similarity. A query is OOD when
    /// max_k similarity(q, U_k) is strictly below this.
    double delta_star = 0.65;
    /// Keep negative descriptor similarities as ensemble weights instead of
    /// clamping them to zero. Off by default: negative weights subtract
    /// prototype evidence.
    bool allow_negative_weights = false;
};

/// Per-query ensemble of the domain models: classes = sum of weight_k *
/// prototypes of the domains listed in provenance.
struct TestTimeModel {
    std::vector<Hypervector> classes;
    std::vector<std::pair<int, double>> provenance;  // (domain index, weight)
};

struct InferenceOutcome {
    int prediction = 0;
    bool ood = false;
    std::vector<double> domain_similarities;
    std::vector<double> class_scores;
};

/// Cosine similarity of the query against every domain descriptor, in
/// domain order.
std::vector<double> domain_similarities(const Hypervector& q,
                                        std::span<const DomainDescriptor> descriptors);

/// True iff max(sims) < delta_star (strict).
bool detect_ood(std::span<const double> sims, const AdaptConfig& cfg);

/// Weighted model ensemble. OOD: every domain participates. In
/// distribution: only domains whose similarity reaches delta_star.
TestTimeModel build_test_time_model(std::span<const double> sims, bool ood,
                                    std::span<const DomainModel> models, const AdaptConfig& cfg);

/// Full per-query pipeline: descriptor similarities, OOD branch, ensemble,
/// argmax over similarity to the ensembled class hypervectors.
InferenceOutcome infer(const Hypervector& q, std::span<const DomainModel> models,
                       std::span<const DomainDescriptor> descriptors, const AdaptConfig& cfg);

/// Inference engine that never materializes the per-query ensemble: class
/// scores come from per-domain dot products plus precomputed prototype Gram
/// matrices. Matches the materialized path within 1e-6. Holds views into the
/// models and descriptors, which must outlive it.
class EnsembleScorer {
public:
    EnsembleScorer(std::span<const DomainModel> models,
                   std::span<const DomainDescriptor> descriptors);

    InferenceOutcome infer(const Hypervector& q, const AdaptConfig& cfg) const;

    int num_domains() const { return static_cast<int>(models_.size()); }
    int num_classes() const { return classes_; }

private:
    std::span<const DomainModel> models_;
    std::span<const DomainDescriptor> descriptors_;
    int classes_ = 0;
    std::vector<double> descriptor_norms_;
    // gram_[t * K * K + k * K + l] = dot(C_t^k, C_t^l)
    std::vector<double> gram_;
};

/// Batch inference; the parallel variant is bit-identical to the serial
/// reference for any worker count.
std::vector<InferenceOutcome> infer_batch_serial(std::span<const EncodedSample> queries,
                                                 const EnsembleScorer& scorer,
                                                 const AdaptConfig& cfg);
std::vector<InferenceOutcome> infer_batch(std::span<const EncodedSample> queries,
                                          const EnsembleScorer& scorer, const AdaptConfig& cfg,
                                          int threads = 0);

}  // namespace smore
