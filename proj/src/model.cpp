#include "smore/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "smore/error.hpp"
#include "smore/parallel.hpp"
#include "smore/rng.hpp"

namespace smore {

namespace {

std::vector<std::vector<std::uint32_t>> partition_by_domain(std::span<const EncodedSample> samples,
                                                            int num_domains, int num_classes) {
    std::vector<std::vector<std::uint32_t>> by_domain(num_domains);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const EncodedSample& s = samples[i];
        if (s.domain < 0 || s.domain >= num_domains) {
            throw std::invalid_argument("sample domain " + std::to_string(s.domain) +
                                        " outside [0, " + std::to_string(num_domains) + ")");
        }
        if (num_classes > 0 && (s.label < 0 || s.label >= num_classes)) {
            throw std::invalid_argument("sample label " + std::to_string(s.label) +
                                        " outside [0, " + std::to_string(num_classes) + ")");
        }
        by_domain[s.domain].push_back(static_cast<std::uint32_t>(i));
    }
    for (int k = 0; k < num_domains; ++k) {
        if (by_domain[k].empty()) {
            throw DataError("domain " + std::to_string(k) + " has no training samples");
        }
    }
    return by_domain;
}

// Same update rule as repeated update_on_sample calls, bit for bit, but the
// prototype norms are memoized: a prototype only changes when an update
// fires, and the query norm is the same for every class.
void train_one_domain(DomainModel& model, std::span<const EncodedSample> samples,
                      std::vector<std::uint32_t> order, const TrainConfig& cfg) {
    const std::size_t n = model.classes.size();
    std::vector<double> class_norm(n);
    for (std::size_t t = 0; t < n; ++t) class_norm[t] = norm(model.classes[t]);
    std::vector<double> scores(n);

    HvRng shuffles(cfg.shuffle_seed, kStreamShuffle);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(model.domain) << 32) ^ static_cast<std::uint64_t>(epoch);
        RngSequence seq = shuffles.sequence(key);
        shuffle_indices(order, seq);
        for (std::uint32_t idx : order) {
            const EncodedSample& s = samples[idx];
            const double hnorm = norm(s.hv);
            int pred = 0;
            for (std::size_t t = 0; t < n; ++t) {
                // Mirrors similarity() exactly, with the norms cached.
                scores[t] = (hnorm == 0.0 || class_norm[t] == 0.0)
                                ? 0.0
                                : dot(s.hv, model.classes[t]) / (hnorm * class_norm[t]);
                if (scores[t] > scores[pred]) pred = static_cast<int>(t);
            }
            if (pred == s.label) continue;
            axpy_inplace(model.classes[s.label], cfg.eta * (1.0 - scores[s.label]), s.hv);
            axpy_inplace(model.classes[pred], -cfg.eta * (1.0 - scores[pred]), s.hv);
            class_norm[s.label] = norm(model.classes[s.label]);
            class_norm[pred] = norm(model.classes[pred]);
        }
    }
}

}  // namespace

Prediction predict_domain_model(const DomainModel& model, const Hypervector& q) {
    Prediction p;
    p.scores.reserve(model.classes.size());
    for (const Hypervector& c : model.classes) {
        p.scores.push_back(similarity(q, c));
    }
    p.label = 0;
    for (std::size_t t = 1; t < p.scores.size(); ++t) {
        if (p.scores[t] > p.scores[p.label]) p.label = static_cast<int>(t);
    }
    return p;
}

bool update_on_sample(DomainModel& model, const EncodedSample& sample, double eta) {
    const int n = static_cast<int>(model.classes.size());
    if (sample.label < 0 || sample.label >= n) {
        throw std::invalid_argument("sample label " + std::to_string(sample.label) +
                                    " outside [0, " + std::to_string(n) + ")");
    }
    if (sample.domain != model.domain) {
        throw std::invalid_argument("sample from domain " + std::to_string(sample.domain) +
                                    " fed to model for domain " + std::to_string(model.domain));
    }
    const Prediction p = predict_domain_model(model, sample.hv);
    if (p.label == sample.label) return false;

    axpy_inplace(model.classes[sample.label], eta * (1.0 - p.scores[sample.label]), sample.hv);
    axpy_inplace(model.classes[p.label], -eta * (1.0 - p.scores[p.label]), sample.hv);
    return true;
}

std::vector<DomainModel> train_domain_models_serial(std::span<const EncodedSample> samples,
                                                    int num_domains, int num_classes,
                                                    const TrainConfig& cfg) {
    if (num_domains < 1) throw ValidationError("need at least one domain");
    if (num_classes < 1) throw ValidationError("need at least one class");
    if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
        throw ValidationError("learning rate must be finite and positive");
    }
    if (cfg.epochs < 1) throw ValidationError("epoch count must be positive");
    const std::size_t dim = samples.empty() ? 0 : samples[0].hv.size();
    auto by_domain = partition_by_domain(samples, num_domains, num_classes);

    std::vector<DomainModel> models(num_domains);
    for (int k = 0; k < num_domains; ++k) {
        models[k].domain = k;
        models[k].classes.assign(num_classes, Hypervector(dim, 0.0));
        train_one_domain(models[k], samples, std::move(by_domain[k]), cfg);
    }
    return models;
}

std::vector<DomainModel> train_domain_models(std::span<const EncodedSample> samples,
                                             int num_domains, int num_classes,
                                             const TrainConfig& cfg, int threads) {
#ifdef SMORE_HAVE_OPENMP
    if (num_domains < 1) throw ValidationError("need at least one domain");
    if (num_classes < 1) throw ValidationError("need at least one class");
    if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
        throw ValidationError("learning rate must be finite and positive");
    }
    if (cfg.epochs < 1) throw ValidationError("epoch count must be positive");
    const std::size_t dim = samples.empty() ? 0 : samples[0].hv.size();
    auto by_domain = partition_by_domain(samples, num_domains, num_classes);

    std::vector<DomainModel> models(num_domains);
    const int nt = resolve_threads(threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (int k = 0; k < num_domains; ++k) {
        models[k].domain = k;
        models[k].classes.assign(num_classes, Hypervector(dim, 0.0));
        train_one_domain(models[k], samples, std::move(by_domain[k]), cfg);
    }
    return models;
#else
    (void)threads;
    return train_domain_models_serial(samples, num_domains, num_classes, cfg);
#endif
}

std::vector<DomainDescriptor> build_descriptors_serial(std::span<const EncodedSample> samples,
                                                       int num_domains) {
    if (num_domains < 1) throw ValidationError("need at least one domain");
    const std::size_t dim = samples.empty() ? 0 : samples[0].hv.size();
    auto by_domain = partition_by_domain(samples, num_domains, 0);

    std::vector<DomainDescriptor> out(num_domains);
    for (int k = 0; k < num_domains; ++k) {
        out[k].domain = k;
        out[k].u.assign(dim, 0.0);
        out[k].count = by_domain[k].size();
        for (std::uint32_t idx : by_domain[k]) {
            add_inplace(out[k].u, samples[idx].hv);
        }
    }
    return out;
}

std::vector<DomainDescriptor> build_descriptors(std::span<const EncodedSample> samples,
                                                int num_domains, int threads) {
#ifdef SMORE_HAVE_OPENMP
    if (num_domains < 1) throw ValidationError("need at least one domain");
    const std::size_t dim = samples.empty() ? 0 : samples[0].hv.size();
    auto by_domain = partition_by_domain(samples, num_domains, 0);

    std::vector<DomainDescriptor> out(num_domains);
    const int nt = resolve_threads(threads);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (int k = 0; k < num_domains; ++k) {
        out[k].domain = k;
        out[k].u.assign(dim, 0.0);
        out[k].count = by_domain[k].size();
        for (std::uint32_t idx : by_domain[k]) {
            add_inplace(out[k].u, samples[idx].hv);
        }
    }
    return out;
#else
    (void)threads;
    return build_descriptors_serial(samples, num_domains);
#endif
}

}  // namespace smore
