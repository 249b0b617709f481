#include "smore/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "smore/error.hpp"
#include "smore/parallel.hpp"

namespace smore {

namespace {

void check_sensor(int sensor, const EncoderConfig& cfg) {
    if (sensor < 0 || static_cast<std::size_t>(sensor) >= cfg.sensors.size()) {
        throw std::invalid_argument("unknown sensor id " + std::to_string(sensor));
    }
}

double level_weight(double y, const SensorCoder& sc) {
    const double span = sc.y_max - sc.y_min;
    if (!(span > 0.0)) return 0.0;  // constant channel carries no level information
    return std::clamp((y - sc.y_min) / span, 0.0, 1.0);
}

void fill_level(std::span<double> out, double alpha, const SensorCoder& sc) {
    const std::size_t d = out.size();
    for (std::size_t j = 0; j < d; ++j) {
        out[j] = sc.level_min[j] + alpha * (sc.level_max[j] - sc.level_min[j]);
    }
}

// A window of interpolated levels expands over 2^n fixed anchor products:
//   window_w = prod_k [(1-a_k) rot(min) + a_k rot(max)]
//            = sum over bit patterns p of (prod_k weight) * basis_p,
// so a whole channel collapses to 2^n scalar-weighted basis vectors. The
// basis planes depend only on the sensor's anchors and the n-gram size.
struct SensorBasis {
    std::vector<double> planes;  // (1 << ngram) * dim
};

// The basis grows as 2^n planes of dim doubles; past n = 6 the memory and
// the axpy count stop paying for themselves.
constexpr bool basis_worth_building(int ngram) { return ngram <= 6; }

constexpr bool use_basis_path(int ngram, int steps) {
    return basis_worth_building(ngram) &&
           (1 << ngram) <= (steps - ngram + 1) * (ngram + 1);
}

SensorBasis build_sensor_basis(const SensorCoder& sc, int ngram, std::size_t d) {
    const std::size_t count = std::size_t{1} << ngram;
    SensorBasis basis;
    basis.planes.assign(count * d, 1.0);
    std::vector<double> rotated(d);
    for (int k = 0; k < ngram; ++k) {
        const auto shifts = static_cast<std::size_t>(ngram - 1 - k);
        for (int bit = 0; bit < 2; ++bit) {
            rotate_into(rotated, bit ? sc.level_max : sc.level_min, shifts);
            for (std::size_t p = 0; p < count; ++p) {
                if (((p >> k) & 1u) == static_cast<unsigned>(bit)) {
                    mul_inplace({basis.planes.data() + p * d, d}, rotated);
                }
            }
        }
    }
    return basis;
}

// Scratch reused across segments within one worker.
struct EncodeScratch {
    std::vector<double> levels;   // steps * dim, level vector per timestep
    std::vector<double> window;   // dim
    std::vector<double> channel;  // dim
    std::vector<double> alphas;   // steps
    std::vector<double> coeffs;   // 1 << ngram
    std::vector<double> pattern;  // 1 << ngram
};

void check_segment(const Segment& seg, const EncoderConfig& cfg) {
    if (static_cast<std::size_t>(seg.sensors) != cfg.sensors.size()) {
        throw std::invalid_argument("segment " + std::to_string(seg.id) + " has " +
                                    std::to_string(seg.sensors) + " sensors, encoder expects " +
                                    std::to_string(cfg.sensors.size()));
    }
    if (seg.steps < cfg.ngram) {
        throw std::invalid_argument("segment " + std::to_string(seg.id) + " has only " +
                                    std::to_string(seg.steps) + " timesteps, n-gram needs " +
                                    std::to_string(cfg.ngram));
    }
}

void encode_segment_into(const Segment& seg, const EncoderConfig& cfg,
                         std::span<const SensorBasis> bases, EncodeScratch& scratch,
                         Hypervector& out) {
    const std::size_t d = cfg.dim;
    const int n = cfg.ngram;
    const int steps = seg.steps;
    check_segment(seg, cfg);

    scratch.channel.resize(d);
    out.assign(d, 0.0);

    for (int s = 0; s < seg.sensors; ++s) {
        const SensorCoder& sc = cfg.sensors[s];
        auto readings = seg.channel(s);
        std::span<double> channel(scratch.channel);

        if (!bases.empty() && use_basis_path(n, steps)) {
            // Basis path: accumulate per-pattern coefficient sums over the
            // sliding windows, then take 2^n weighted basis planes.
            const std::size_t count = std::size_t{1} << n;
            scratch.alphas.resize(steps);
            for (int t = 0; t < steps; ++t) {
                scratch.alphas[t] = level_weight(readings[t], sc);
            }
            scratch.coeffs.assign(count, 0.0);
            scratch.pattern.resize(count);
            std::vector<double>& coeffs = scratch.coeffs;
            std::vector<double>& partial = scratch.pattern;
            for (int w = 0; w + n <= steps; ++w) {
                // partial[p] = prod_k (bit_k ? a_k : 1-a_k), built per bit
                partial[0] = 1.0;
                std::size_t width = 1;
                for (int k = 0; k < n; ++k) {
                    const double a = scratch.alphas[w + k];
                    for (std::size_t p = width; p-- > 0;) {
                        const double base = partial[p];
                        partial[p + width] = base * a;
                        partial[p] = base * (1.0 - a);
                    }
                    width <<= 1;
                }
                for (std::size_t p = 0; p < count; ++p) coeffs[p] += partial[p];
            }
            std::fill(channel.begin(), channel.end(), 0.0);
            const std::vector<double>& planes = bases[s].planes;
            for (std::size_t p = 0; p < count; ++p) {
                if (coeffs[p] != 0.0) {
                    axpy_inplace(channel, coeffs[p], {planes.data() + p * d, d});
                }
            }
        } else {
            scratch.levels.resize(static_cast<std::size_t>(steps) * d);
            scratch.window.resize(d);
            for (int t = 0; t < steps; ++t) {
                fill_level({scratch.levels.data() + static_cast<std::size_t>(t) * d, d},
                           level_weight(readings[t], sc), sc);
            }
            std::fill(channel.begin(), channel.end(), 0.0);
            std::span<double> window(scratch.window);
            for (int w = 0; w + n <= steps; ++w) {
                auto level_at = [&](int k) {
                    return std::span<const double>(
                        scratch.levels.data() + static_cast<std::size_t>(w + k) * d, d);
                };
                rotate_into(window, level_at(0), static_cast<std::size_t>(n - 1));
                for (int k = 1; k < n; ++k) {
                    rotate_mul_inplace(window, level_at(k), static_cast<std::size_t>(n - 1 - k));
                }
                add_inplace(channel, window);
            }
        }
        mul_add_inplace(out, sc.signature, channel);
    }
}

std::vector<SensorBasis> build_bases(const EncoderConfig& cfg) {
    std::vector<SensorBasis> bases;
    if (basis_worth_building(cfg.ngram)) {
        bases.reserve(cfg.sensors.size());
        for (const SensorCoder& sc : cfg.sensors) {
            bases.push_back(build_sensor_basis(sc, cfg.ngram, cfg.dim));
        }
    }
    return bases;
}

}  // namespace

EncoderConfig fit_encoder(std::span<const Segment> train, std::size_t dim, int ngram,
                          std::uint64_t seed) {
    if (train.empty()) throw ValidationError("fit_encoder requires a nonempty training set");
    if (dim == 0) throw ValidationError("encoder dimension must be positive");
    if (ngram < 1) throw ValidationError("n-gram size must be at least 1");

    const int m = train[0].sensors;
    EncoderConfig cfg;
    cfg.dim = dim;
    cfg.ngram = ngram;
    cfg.seed = seed;
    cfg.sensors.resize(m);

    HvRng anchors(seed, kStreamAnchors);
    HvRng signatures(seed, kStreamSignatures);
    for (int s = 0; s < m; ++s) {
        SensorCoder& sc = cfg.sensors[s];
        sc.y_min = std::numeric_limits<double>::infinity();
        sc.y_max = -std::numeric_limits<double>::infinity();
        sc.level_min = random_bipolar(anchors, static_cast<std::uint64_t>(2 * s), dim);
        sc.level_max = random_bipolar(anchors, static_cast<std::uint64_t>(2 * s + 1), dim);
        sc.signature = random_bipolar(signatures, static_cast<std::uint64_t>(s), dim);
    }

    for (const Segment& seg : train) {
        if (seg.sensors != m) {
            throw DataError("segment " + std::to_string(seg.id) +
                            " has inconsistent sensor count");
        }
        for (int s = 0; s < m; ++s) {
            for (double y : seg.channel(s)) {
                cfg.sensors[s].y_min = std::min(cfg.sensors[s].y_min, y);
                cfg.sensors[s].y_max = std::max(cfg.sensors[s].y_max, y);
            }
        }
    }
    return cfg;
}

Hypervector quantize_level(double y, int sensor, const EncoderConfig& cfg) {
    check_sensor(sensor, cfg);
    const SensorCoder& sc = cfg.sensors[sensor];
    Hypervector out(cfg.dim);
    fill_level(out, level_weight(y, sc), sc);
    return out;
}

Hypervector encode_sensor_window(std::span<const Hypervector> levels, int ngram) {
    if (ngram < 1 || levels.empty()) {
        throw std::invalid_argument("window must contain at least one level");
    }
    if (levels.size() != static_cast<std::size_t>(ngram)) {
        throw std::invalid_argument("window holds " + std::to_string(levels.size()) +
                                    " levels, n-gram needs " + std::to_string(ngram));
    }
    const std::size_t d = levels[0].size();
    Hypervector out(d);
    rotate_into(out, levels[0], static_cast<std::size_t>(ngram - 1));
    for (int k = 1; k < ngram; ++k) {
        if (levels[k].size() != d) throw std::invalid_argument("window level dimension mismatch");
        rotate_mul_inplace(out, levels[k], static_cast<std::size_t>(ngram - 1 - k));
    }
    return out;
}

EncodedSample encode_segment(const Segment& seg, const EncoderConfig& cfg) {
    check_segment(seg, cfg);
    EncodeScratch scratch;
    EncodedSample out;
    auto bases = use_basis_path(cfg.ngram, seg.steps) ? build_bases(cfg)
                                                      : std::vector<SensorBasis>{};
    encode_segment_into(seg, cfg, bases, scratch, out.hv);
    out.domain = seg.domain;
    out.label = seg.label;
    out.id = seg.id;
    return out;
}

std::vector<EncodedSample> encode_segments_serial(std::span<const Segment> segs,
                                                  const EncoderConfig& cfg) {
    std::vector<EncodedSample> out(segs.size());
    EncodeScratch scratch;
    const auto bases = build_bases(cfg);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        encode_segment_into(segs[i], cfg, bases, scratch, out[i].hv);
        out[i].domain = segs[i].domain;
        out[i].label = segs[i].label;
        out[i].id = segs[i].id;
    }
    return out;
}

std::vector<EncodedSample> encode_segments(std::span<const Segment> segs,
                                           const EncoderConfig& cfg, int threads) {
#ifdef SMORE_HAVE_OPENMP
    // Validate up front; exceptions must not escape the parallel region.
    for (const Segment& seg : segs) check_segment(seg, cfg);
    std::vector<EncodedSample> out(segs.size());
    const auto bases = build_bases(cfg);
    const int nt = resolve_threads(threads);
    const std::int64_t count = static_cast<std::int64_t>(segs.size());
#pragma omp parallel num_threads(nt)
    {
        EncodeScratch scratch;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < count; ++i) {
            encode_segment_into(segs[i], cfg, bases, scratch, out[i].hv);
            out[i].domain = segs[i].domain;
            out[i].label = segs[i].label;
            out[i].id = segs[i].id;
        }
    }
    return out;
#else
    (void)threads;
    return encode_segments_serial(segs, cfg);
#endif
}

}  // namespace smore
