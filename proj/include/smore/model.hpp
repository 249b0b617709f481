#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smore/encoder.hpp"
#include "smore/hv.hpp"

namespace smore {

/// Prototype model for one source domain: one class hypervector per class.
struct DomainModel {
    int domain = 0;
    std::vector<Hypervector> classes;
};

/// Bundle of every encoded training sample of one domain.
struct DomainDescriptor {
    int domain = 0;
    Hypervector u;
    std::size_t count = 0;
};

struct TrainConfig {
    double eta = 0.05;
    int epochs = 20;
    std::uint64_t shuffle_seed = 0;
};

struct Prediction {
    int label = 0;
    std::vector<double> scores;  // cosine similarity per class
};

/// Argmax of per-class similarities; ties break toward the lowest index.
Prediction predict_domain_model(const DomainModel& model, const Hypervector& q);

/// Single perceptron-style step: fires only when the prediction misses the
/// true label, then pulls the true prototype toward the sample and pushes the
/// mispredicted one away, each scaled by eta * (1 - similarity).
/// Returns whether the update fired.
bool update_on_sample(DomainModel& model, const EncodedSample& sample, double eta);

/// Train one prototype model per domain: zero-initialized prototypes,
/// `epochs` reshuffled passes, updates sequential within a domain. Domains
/// are independent, so the parallel variant trains them on separate workers
/// and is bit-identical to the serial reference.
std::vector<DomainModel> train_domain_models_serial(std::span<const EncodedSample> samples,
                                                    int num_domains, int num_classes,
                                                    const TrainConfig& cfg);
std::vector<DomainModel> train_domain_models(std::span<const EncodedSample> samples,
                                             int num_domains, int num_classes,
                                             const TrainConfig& cfg, int threads = 0);

/// Per-domain descriptor U_k: element-wise sum of the domain's samples in
/// input order.
std::vector<DomainDescriptor> build_descriptors_serial(std::span<const EncodedSample> samples,
                                                       int num_domains);
std::vector<DomainDescriptor> build_descriptors(std::span<const EncodedSample> samples,
                                                int num_domains, int threads = 0);

}  // namespace smore
