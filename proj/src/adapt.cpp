#include "smore/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "smore/parallel.hpp"

namespace smore {

namespace {

int argmax_lowest(std::span<const double> scores) {
    int best = 0;
    for (std::size_t t = 1; t < scores.size(); ++t) {
        if (scores[t] > scores[best]) best = static_cast<int>(t);
    }
    return best;
}

double weight_of(double sim, const AdaptConfig& cfg) {
    return cfg.allow_negative_weights ? sim : std::max(sim, 0.0);
}

}  // namespace

std::vector<double> domain_similarities(const Hypervector& q,
                                        std::span<const DomainDescriptor> descriptors) {
    if (descriptors.empty()) throw std::invalid_argument("no domain descriptors");
    std::vector<double> sims;
    sims.reserve(descriptors.size());
    for (const DomainDescriptor& d : descriptors) {
        sims.push_back(similarity(q, d.u));
    }
    return sims;
}

bool detect_ood(std::span<const double> sims, const AdaptConfig& cfg) {
    double best = -2.0;
    for (double s : sims) best = std::max(best, s);
    return best < cfg.delta_star;
}

TestTimeModel build_test_time_model(std::span<const double> sims, bool ood,
                                    std::span<const DomainModel> models, const AdaptConfig& cfg) {
    if (models.empty()) throw std::invalid_argument("no domain models");
    if (sims.size() != models.size()) {
        throw std::invalid_argument("similarity count does not match model count");
    }
    const std::size_t n = models[0].classes.size();
    const std::size_t d = n == 0 ? 0 : models[0].classes[0].size();

    TestTimeModel ttm;
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (ood || sims[k] >= cfg.delta_star) {
            ttm.provenance.emplace_back(models[k].domain, weight_of(sims[k], cfg));
        }
    }
    if (ttm.provenance.empty()) {
        // detect_ood guarantees at least one qualifying domain on the
        // in-distribution branch.
        throw std::logic_error("in-distribution ensemble with no qualifying domain");
    }

    ttm.classes.assign(n, Hypervector(d, 0.0));
    std::size_t p = 0;
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (!(ood || sims[k] >= cfg.delta_star)) continue;
        const double w = ttm.provenance[p++].second;
        for (std::size_t t = 0; t < n; ++t) {
            axpy_inplace(ttm.classes[t], w, models[k].classes[t]);
        }
    }
    return ttm;
}

InferenceOutcome infer(const Hypervector& q, std::span<const DomainModel> models,
                       std::span<const DomainDescriptor> descriptors, const AdaptConfig& cfg) {
    InferenceOutcome out;
    out.domain_similarities = domain_similarities(q, descriptors);
    out.ood = detect_ood(out.domain_similarities, cfg);
    TestTimeModel ttm = build_test_time_model(out.domain_similarities, out.ood, models, cfg);
    out.class_scores.reserve(ttm.classes.size());
    for (const Hypervector& c : ttm.classes) {
        out.class_scores.push_back(similarity(q, c));
    }
    out.prediction = argmax_lowest(out.class_scores);
    return out;
}

EnsembleScorer::EnsembleScorer(std::span<const DomainModel> models,
                               std::span<const DomainDescriptor> descriptors)
    : models_(models), descriptors_(descriptors) {
    if (models.empty()) throw std::invalid_argument("no domain models");
    if (descriptors.size() != models.size()) {
        throw std::invalid_argument("descriptor count does not match model count");
    }
    classes_ = static_cast<int>(models[0].classes.size());
    const std::size_t K = models.size();
    descriptor_norms_.reserve(K);
    for (const DomainDescriptor& desc : descriptors) descriptor_norms_.push_back(norm(desc.u));
    gram_.assign(static_cast<std::size_t>(classes_) * K * K, 0.0);
    for (int t = 0; t < classes_; ++t) {
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t l = k; l < K; ++l) {
                const double g = dot(models[k].classes[t], models[l].classes[t]);
                gram_[(static_cast<std::size_t>(t) * K + k) * K + l] = g;
                gram_[(static_cast<std::size_t>(t) * K + l) * K + k] = g;
            }
        }
    }
}

InferenceOutcome EnsembleScorer::infer(const Hypervector& q, const AdaptConfig& cfg) const {
    InferenceOutcome out;
    const std::size_t K = models_.size();
    const double qn = norm(q);
    // Mirrors similarity() exactly, with the descriptor norms cached.
    out.domain_similarities.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        out.domain_similarities[k] = (qn == 0.0 || descriptor_norms_[k] == 0.0)
                                         ? 0.0
                                         : dot(q, descriptors_[k].u) / (qn * descriptor_norms_[k]);
    }
    out.ood = detect_ood(out.domain_similarities, cfg);

    std::vector<double> weights(K, 0.0);
    std::vector<char> included(K, 0);
    for (std::size_t k = 0; k < K; ++k) {
        if (out.ood || out.domain_similarities[k] >= cfg.delta_star) {
            included[k] = 1;
            weights[k] = weight_of(out.domain_similarities[k], cfg);
        }
    }

    out.class_scores.assign(classes_, 0.0);
    for (int t = 0; t < classes_; ++t) {
        double num = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (included[k] && weights[k] != 0.0) {
                num += weights[k] * dot(q, models_[k].classes[t]);
            }
        }
        double nsq = 0.0;
        const double* g = gram_.data() + static_cast<std::size_t>(t) * K * K;
        for (std::size_t k = 0; k < K; ++k) {
            if (!included[k] || weights[k] == 0.0) continue;
            for (std::size_t l = 0; l < K; ++l) {
                if (!included[l] || weights[l] == 0.0) continue;
                nsq += weights[k] * weights[l] * g[k * K + l];
            }
        }
        out.class_scores[t] = (nsq > 0.0 && qn > 0.0) ? num / (qn * std::sqrt(nsq)) : 0.0;
    }
    out.prediction = argmax_lowest(out.class_scores);
    return out;
}

std::vector<InferenceOutcome> infer_batch_serial(std::span<const EncodedSample> queries,
                                                 const EnsembleScorer& scorer,
                                                 const AdaptConfig& cfg) {
    std::vector<InferenceOutcome> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        out[i] = scorer.infer(queries[i].hv, cfg);
    }
    return out;
}

std::vector<InferenceOutcome> infer_batch(std::span<const EncodedSample> queries,
                                          const EnsembleScorer& scorer, const AdaptConfig& cfg,
                                          int threads) {
#ifdef SMORE_HAVE_OPENMP
    std::vector<InferenceOutcome> out(queries.size());
    const int nt = resolve_threads(threads);
    const std::int64_t count = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < count; ++i) {
        out[i] = scorer.infer(queries[i].hv, cfg);
    }
    return out;
#else
    (void)threads;
    return infer_batch_serial(queries, scorer, cfg);
#endif
}

}  // namespace smore
