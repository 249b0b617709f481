// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Heavyweight corpora and trained pipelines are shared across criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <string>
#include <vector>

#include "smore/eval.hpp"
#include "trace_cases.hpp"

using namespace smore;

namespace {

struct Outcome {
    bool pass = true;
    bool skipped = false;
    std::string detail;
};

double now() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

bool g_all_pass = true;

template <typename F>
void criterion(int id, const char* name, F&& fn) {
    const double t0 = now();
    Outcome out;
    try {
        out = fn();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double dt = now() - t0;
    const char* tag = out.skipped ? "SKIP" : out.pass ? "PASS" : "FAIL";
    std::printf("[%s] criterion %2d %-28s %s (%.1fs)\n", tag, id, name, out.detail.c_str(), dt);
    std::fflush(stdout);
    if (!out.pass && !out.skipped) g_all_pass = false;
}

constexpr std::size_t kDim = 8192;
const HvRng kRng{20240, kStreamTest};

// ---------------------------------------------------------------------------

Outcome hypervector_algebra() {
    const double t0 = now();
    const int trials = 1000;
    double max_rand = 0, max_bind = 0, max_perm = 0;
    double mean_rand = 0, mean_bind = 0, mean_perm = 0;
    int bundle_in_band = 0;
    bool reversible = true;
    for (int i = 0; i < trials; ++i) {
        Hypervector a = random_bipolar(kRng, 2 * i, kDim);
        Hypervector b = random_bipolar(kRng, 2 * i + 1, kDim);

        const double s_rand = similarity(a, b);
        max_rand = std::max(max_rand, std::fabs(s_rand));
        mean_rand += s_rand;

        Hypervector bound = smore::bind(a, b);
        const double s_bind = similarity(bound, a);
        max_bind = std::max(max_bind, std::fabs(s_bind));
        mean_bind += s_bind;
        reversible &= smore::bind(bound, a) == b && smore::bind(bound, b) == a;

        const double s_perm = similarity(permute(a, 1), a);
        max_perm = std::max(max_perm, std::fabs(s_perm));
        mean_perm += s_perm;

        const Hypervector pair[] = {a, b};
        const double s_bundle = similarity(bundle(pair), a);
        if (s_bundle >= 0.6 && s_bundle <= 0.8) ++bundle_in_band;
    }
    mean_rand = std::fabs(mean_rand / trials);
    mean_bind = std::fabs(mean_bind / trials);
    mean_perm = std::fabs(mean_perm / trials);
    const double elapsed = now() - t0;

    Outcome out;
    out.pass = max_rand < 0.06 && max_bind < 0.06 && max_perm < 0.06 && mean_rand < 0.005 &&
               mean_bind < 0.005 && mean_perm < 0.005 && bundle_in_band >= 990 && reversible &&
               elapsed < 5.0;
    out.detail = fmt("max|sim| %.3f/%.3f/%.3f mean %.4f/%.4f/%.4f bundle %d/1000 exact-unbind %s",
                     max_rand, max_bind, max_perm, mean_rand, mean_bind, mean_perm,
                     bundle_in_band, reversible ? "yes" : "no");
    return out;
}

Outcome encoder_invariants() {
    const double t0 = now();
    Outcome out;

    // Batch of random segments; determinism across runs and worker counts.
    std::vector<Segment> segs;
    RngSequence data_seq = kRng.sequence(5000);
    for (int i = 0; i < 16; ++i) {
        Segment seg;
        seg.id = i;
        seg.domain = 0;
        seg.label = 0;
        seg.sensors = 3;
        seg.steps = 16;
        seg.values.resize(3 * 16);
        for (double& v : seg.values) v = data_seq.next_unit();
        segs.push_back(std::move(seg));
    }
    EncoderConfig cfg = fit_encoder(segs, kDim, 3, 77);
    auto serial = encode_segments_serial(segs, cfg);
    auto again = encode_segments_serial(segs, cfg);
    auto par1 = encode_segments(segs, cfg, 1);
    auto par4 = encode_segments(segs, cfg, 4);
    bool deterministic = true;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        deterministic &= serial[i].hv == again[i].hv && serial[i].hv == par1[i].hv &&
                         serial[i].hv == par4[i].hv;
    }

    // Level monotonicity.
    bool monotone = true;
    double prev = -2.0;
    for (int i = 0; i <= 200; ++i) {
        const double y = cfg.sensors[0].y_min +
                         (cfg.sensors[0].y_max - cfg.sensors[0].y_min) * i / 200.0;
        const double s = similarity(quantize_level(y, 0, cfg), cfg.sensors[0].level_max);
        monotone &= s >= prev - 1e-12;
        prev = s;
    }

    // Temporal order sensitivity on bipolar levels.
    double max_reorder = 0.0;
    for (int i = 0; i < 50; ++i) {
        Hypervector a = random_bipolar(kRng, 6000 + 3 * i, kDim);
        Hypervector b = random_bipolar(kRng, 6001 + 3 * i, kDim);
        Hypervector c = random_bipolar(kRng, 6002 + 3 * i, kDim);
        const Hypervector abc[] = {a, b, c};
        const Hypervector bca[] = {b, c, a};
        max_reorder = std::max(
            max_reorder,
            std::fabs(similarity(encode_sensor_window(abc, 3), encode_sensor_window(bca, 3))));
    }

    // Fusion linearity.
    double max_fusion_err = 0.0;
    for (int pick = 0; pick < 4; ++pick) {
        const Segment& seg = segs[pick];
        EncodedSample enc = encode_segment(seg, cfg);
        Hypervector fused(kDim, 0.0);
        for (int s = 0; s < seg.sensors; ++s) {
            std::vector<Hypervector> windows;
            for (int w = 0; w + cfg.ngram <= seg.steps; ++w) {
                std::vector<Hypervector> levels;
                for (int k = 0; k < cfg.ngram; ++k) {
                    levels.push_back(quantize_level(seg.at(s, w + k), s, cfg));
                }
                windows.push_back(encode_sensor_window(levels, cfg.ngram));
            }
            add_inplace(fused, smore::bind(cfg.sensors[s].signature, bundle(windows)));
        }
        for (std::size_t j = 0; j < kDim; ++j) {
            max_fusion_err = std::max(max_fusion_err, std::fabs(fused[j] - enc.hv[j]));
        }
    }

    const double elapsed = now() - t0;
    out.pass = deterministic && monotone && max_reorder < 0.06 && max_fusion_err < 1e-6 &&
               elapsed < 10.0;
    out.detail = fmt("bit-exact %s monotone %s reorder|sim| %.3f fusion-err %.1e",
                     deterministic ? "yes" : "no", monotone ? "yes" : "no", max_reorder,
                     max_fusion_err);
    return out;
}

Outcome update_rule() {
    const int cases = 1000;
    const double eta = 0.05;
    const std::size_t dim = 2048;
    int direction_ok = 0, magnitude_ok = 0;
    RngSequence seq = kRng.sequence(7000);
    for (int i = 0; i < cases; ++i) {
        Hypervector h = random_bipolar(kRng, 8000 + i, dim);
        Hypervector other = random_bipolar(kRng, 9000 + i, dim);

        // Direction: force a miss, check both similarities move.
        DomainModel m;
        m.domain = 0;
        m.classes.resize(3);
        for (auto& c : m.classes) {
            c.resize(dim);
            for (double& v : c) v = seq.next_gaussian();
        }
        Prediction before = predict_domain_model(m, h);
        const int truth = (before.label + 1) % 3;
        EncodedSample s;
        s.hv = h;
        s.domain = 0;
        s.label = truth;
        if (update_on_sample(m, s, eta)) {
            Prediction after = predict_domain_model(m, h);
            if (after.scores[truth] > before.scores[truth] &&
                after.scores[before.label] < before.scores[before.label]) {
                ++direction_ok;
            }
        }

        // Magnitude: lower prior similarity must give the larger step.
        const double w_low = 0.2 * seq.next_unit();
        const double w_high = 0.5 + 0.4 * seq.next_unit();
        double step[2];
        for (int variant = 0; variant < 2; ++variant) {
            const double w = variant == 0 ? w_low : w_high;
            DomainModel mv;
            mv.domain = 0;
            mv.classes.resize(2);
            mv.classes[0].resize(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                mv.classes[0][j] = w * h[j] + (1.0 - w) * other[j];
            }
            mv.classes[1] = h;  // prediction always lands here; truth is 0
            Hypervector before_proto = mv.classes[0];
            EncodedSample sv;
            sv.hv = h;
            sv.domain = 0;
            sv.label = 0;
            update_on_sample(mv, sv, eta);
            double acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = mv.classes[0][j] - before_proto[j];
                acc += d * d;
            }
            step[variant] = std::sqrt(acc);
        }
        if (step[0] > step[1] && step[1] > 0.0) ++magnitude_ok;
    }
    Outcome out;
    out.pass = direction_ok == cases && magnitude_ok == cases;
    out.detail = fmt("direction %d/%d magnitude-monotone %d/%d", direction_ok, cases,
                     magnitude_ok, cases);
    return out;
}

Outcome descriptor_membership(const Corpus& corpus, const TrainedPipeline& full,
                              const std::vector<EncodedSample>& encoded) {
    std::size_t own = 0;
    double in_sum = 0, out_sum = 0;
    std::size_t in_n = 0, out_n = 0;
    for (const EncodedSample& s : encoded) {
        int best = 0;
        double best_sim = -2.0;
        for (int k = 0; k < corpus.domains; ++k) {
            const double sim = similarity(s.hv, full.descriptors[k].u);
            if (sim > best_sim) {
                best_sim = sim;
                best = k;
            }
            if (k == s.domain) {
                in_sum += sim;
                ++in_n;
            } else {
                out_sum += sim;
                ++out_n;
            }
        }
        if (best == s.domain) ++own;
    }
    const double membership = static_cast<double>(own) / encoded.size();
    const double gap = in_sum / in_n - out_sum / out_n;
    Outcome out;
    out.pass = membership >= 0.95 && gap >= 0.1;
    out.detail = fmt("own-domain %.1f%% in-out gap %.3f", 100.0 * membership, gap);
    return out;
}

struct GapResults {
    double kfold_shift = 0, lodo_shift = 0, kfold_flat = 0, lodo_flat = 0;
    double pooled_lodo_mean = 0;  // shift corpus, reused by criterion 6
};

Outcome shift_gap(const Corpus& shifted, const Corpus& flat, GapResults& results) {
    const double t0 = now();
    PipelineConfig pooled;
    pooled.arm = Arm::Pooled;

    results.kfold_shift = run_kfold(shifted, 5, pooled).mean_accuracy;
    results.lodo_shift = run_lodo(shifted, pooled).mean_accuracy;
    results.kfold_flat = run_kfold(flat, 5, pooled).mean_accuracy;
    results.lodo_flat = run_lodo(flat, pooled).mean_accuracy;
    results.pooled_lodo_mean = results.lodo_shift;

    const double shift_gap_pts = 100.0 * (results.kfold_shift - results.lodo_shift);
    const double flat_gap_pts = 100.0 * (results.kfold_flat - results.lodo_flat);
    const double elapsed = now() - t0;

    Outcome out;
    out.pass = shift_gap_pts >= 10.0 && flat_gap_pts <= 3.0 && elapsed < 120.0;
    out.detail = fmt("shifted kfold %.3f lodo %.3f (+%.1f pts); flat gap %.1f pts; %.0fs",
                     results.kfold_shift, results.lodo_shift, shift_gap_pts, flat_gap_pts,
                     elapsed);
    return out;
}

struct SweepResults {
    std::vector<SweepRow> rows;
};

Outcome adaptation_benefit(const Corpus& shifted, const GapResults& gaps, SweepResults& sweep) {
    PipelineConfig cfg;  // defaults: delta_star 0.65
    std::vector<double> grid;
    for (double d = 0.05; d < 1.0; d += 0.1) grid.push_back(d);
    sweep.rows = sweep_delta(shifted, grid, cfg);

    double smore_at_065 = -1.0;
    for (const SweepRow& r : sweep.rows) {
        if (std::fabs(r.delta_star - 0.65) < 1e-9) smore_at_065 = r.mean_accuracy;
    }
    const double margin = 100.0 * (smore_at_065 - gaps.pooled_lodo_mean);
    Outcome out;
    out.pass = smore_at_065 >= 0.0 && margin >= 5.0;
    out.detail = fmt("smore %.3f vs pooled %.3f (%+.1f pts at delta*=0.65)", smore_at_065,
                     gaps.pooled_lodo_mean, margin);
    return out;
}

Outcome sweep_shape(const SweepResults& sweep) {
    Outcome out;
    if (sweep.rows.size() < 3) {
        out.pass = false;
        out.detail = "sweep missing";
        return out;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
        if (sweep.rows[i].mean_accuracy > sweep.rows[best].mean_accuracy) best = i;
    }
    const double first = sweep.rows.front().mean_accuracy;
    const double last = sweep.rows.back().mean_accuracy;
    const double peak = sweep.rows[best].mean_accuracy;
    out.pass = best != 0 && best != sweep.rows.size() - 1 && peak > first && peak > last;
    out.detail = fmt("peak %.3f at delta*=%.2f, endpoints %.3f / %.3f", peak,
                     sweep.rows[best].delta_star, first, last);
    return out;
}

Outcome trace_conformance() {
    const auto cases = testing::trace_cases();
    const Hypervector q = testing::trace_query();
    int ok = 0;
    std::string first_failure;
    for (const auto& tc : cases) {
        AdaptConfig cfg;
        cfg.delta_star = tc.delta_star;
        cfg.allow_negative_weights = tc.allow_negative;
        auto models = testing::trace_models(static_cast<int>(tc.sims.size()));

        bool good = detect_ood(tc.sims, cfg) == tc.ood;
        TestTimeModel ttm = build_test_time_model(tc.sims, tc.ood, models, cfg);
        good &= ttm.provenance.size() == tc.included.size();
        if (good) {
            for (std::size_t i = 0; i < tc.included.size(); ++i) {
                good &= ttm.provenance[i].first == tc.included[i] &&
                        std::fabs(ttm.provenance[i].second - tc.weights[i]) < 1e-12;
            }
        }
        if (good) {
            for (std::size_t t = 0; t < ttm.classes.size() && good; ++t) {
                Hypervector rebuilt(q.size(), 0.0);
                for (const auto& [domain, weight] : ttm.provenance) {
                    axpy_inplace(rebuilt, weight, models[domain].classes[t]);
                }
                for (std::size_t j = 0; j < rebuilt.size(); ++j) {
                    good &= std::fabs(rebuilt[j] - ttm.classes[t][j]) < 1e-12;
                }
            }
        }
        if (good) {
            int pred = 0;
            double best = similarity(q, ttm.classes[0]);
            for (std::size_t t = 1; t < ttm.classes.size(); ++t) {
                const double s = similarity(q, ttm.classes[t]);
                if (s > best) {
                    best = s;
                    pred = static_cast<int>(t);
                }
            }
            good &= pred == tc.prediction;
        }
        if (good) {
            ++ok;
        } else if (first_failure.empty()) {
            first_failure = tc.name;
        }
    }
    Outcome out;
    out.pass = ok == static_cast<int>(cases.size()) && cases.size() >= 20;
    out.detail = fmt("%d/%zu hand-built cases%s%s", ok, cases.size(),
                     first_failure.empty() ? "" : ", first failure: ",
                     first_failure.c_str());
    return out;
}

Outcome real_data_smoke() {
    Outcome out;
    const char* path = std::getenv("SMORE_DSADS_CSV");
    if (!path) {
        out.skipped = true;
        out.detail = "set SMORE_DSADS_CSV=<preprocessed corpus> to run";
        return out;
    }
    Corpus corpus = load_corpus(path);
    auto splits = make_lodo_splits(corpus);
    std::string sizes;
    for (const Split& s : splits) sizes += fmt("%zu ", s.test.size());

    PipelineConfig cfg;
    PipelineConfig pooled;
    pooled.arm = Arm::Pooled;
    RunReport smore_report = run_lodo(corpus, cfg);
    RunReport pooled_report = run_lodo(corpus, pooled);
    out.pass = smore_report.mean_accuracy >= pooled_report.mean_accuracy;
    out.detail = fmt("test splits [%s] smore %.3f >= pooled %.3f", sizes.c_str(),
                     smore_report.mean_accuracy, pooled_report.mean_accuracy);
    return out;
}

Outcome determinism_and_scaling(const Corpus& shifted) {
    // Identical seeds reproduce identical reports.
    SynthSpec small;
    small.samples_per_class = 20;
    small.seed = 11;
    Corpus corpus = generate_synthetic(small);
    PipelineConfig cfg;
    cfg.dim = 2048;
    cfg.epochs = 5;
    cfg.seed = 11;
    RunReport a = run_lodo(corpus, cfg);
    RunReport b = run_lodo(corpus, cfg);
    bool identical = a.mean_accuracy == b.mean_accuracy && a.splits.size() == b.splits.size();
    for (std::size_t k = 0; k < a.splits.size() && identical; ++k) {
        identical &= a.splits[k].accuracy == b.splits[k].accuracy &&
                     a.splits[k].correct == b.splits[k].correct &&
                     a.splits[k].ood_rate == b.splits[k].ood_rate;
    }

    // Sub-quadratic scaling: train time grows at most 2.5x per doubling,
    // and inference time stays roughly linear in the test size.
    PipelineConfig bench_cfg;
    const double fractions[] = {0.25, 0.5, 1.0};
    auto rows = run_bench(shifted, fractions, bench_cfg);
    const double r1 = rows[1].train_seconds / rows[0].train_seconds;
    const double r2 = rows[2].train_seconds / rows[1].train_seconds;
    const double infer_ratio = rows[2].infer_seconds / rows[1].infer_seconds;
    Outcome out;
    out.pass = identical && r1 <= 2.5 && r2 <= 2.5 && infer_ratio >= 1.5 && infer_ratio <= 2.5;
    out.detail = fmt("reports identical %s; train ratios %.2fx %.2fx, infer ratio %.2fx",
                     identical ? "yes" : "no", r1, r2, infer_ratio);
    return out;
}

}  // namespace

int main() {
    std::printf("acceptance suite: dim=8192 defaults, single corpus family shared\n");

    criterion(1, "hypervector algebra", hypervector_algebra);
    criterion(2, "encoder invariants", encoder_invariants);
    criterion(3, "update rule", update_rule);

    SynthSpec spec;  // defaults: K=4, 100 samples/domain/class, shift 2.0
    Corpus shifted = generate_synthetic(spec);
    SynthSpec flat_spec = spec;
    flat_spec.shift = 0.0;
    Corpus flat = generate_synthetic(flat_spec);

    criterion(4, "descriptor membership", [&] {
        PipelineConfig cfg;
        std::vector<std::uint32_t> all(shifted.segments.size());
        for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
        TrainedPipeline full = train_pipeline(shifted, all, cfg);
        auto encoded = encode_segments(shifted.segments, full.encoder, cfg.threads);
        return descriptor_membership(shifted, full, encoded);
    });

    GapResults gaps;
    criterion(5, "distribution-shift gap", [&] { return shift_gap(shifted, flat, gaps); });

    SweepResults sweep;
    criterion(6, "adaptation benefit", [&] { return adaptation_benefit(shifted, gaps, sweep); });
    criterion(7, "delta-star sweep shape", [&] { return sweep_shape(sweep); });
    criterion(8, "inference trace table", trace_conformance);
    criterion(9, "real-data smoke", real_data_smoke);
    criterion(10, "determinism and scaling", [&] { return determinism_and_scaling(shifted); });

    std::printf("%s\n", g_all_pass ? "acceptance: ALL PASS" : "acceptance: FAILURES PRESENT");
    return g_all_pass ? 0 : 1;
}
