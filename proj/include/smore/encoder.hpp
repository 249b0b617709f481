#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smore/hv.hpp"

namespace smore {

/// One classification sample: m sensor channels over `steps` timesteps,
/// stored sensor-major.
struct Segment {
    std::int64_t id = 0;
    int domain = 0;
    int label = 0;
    int sensors = 0;
    int steps = 0;
    std::vector<double> values;  // sensors * steps, row per sensor

    std::span<const double> channel(int sensor) const {
        return {values.data() + static_cast<std::size_t>(sensor) * steps,
                static_cast<std::size_t>(steps)};
    }
    double at(int sensor, int t) const {
        return values[static_cast<std::size_t>(sensor) * steps + t];
    }
};

/// Per-sensor encoding state: level anchors, value range seen in training,
/// and the sensor's signature vector.
struct SensorCoder {
    double y_min = 0.0;
    double y_max = 0.0;
    Hypervector level_min;   // bipolar anchor for y_min
    Hypervector level_max;   // bipolar anchor for y_max
    Hypervector signature;   // bipolar sensor tag
};

struct EncoderConfig {
    std::size_t dim = 8192;
    int ngram = 3;
    std::uint64_t seed = 0;
    std::vector<SensorCoder> sensors;
};

struct EncodedSample {
    Hypervector hv;
    int domain = 0;
    int label = 0;
    std::int64_t id = 0;
};

/// Fit per-sensor value ranges on the training segments and draw anchor and
/// signature vectors from the seed's dedicated streams.
EncoderConfig fit_encoder(std::span<const Segment> train, std::size_t dim, int ngram,
                          std::uint64_t seed);

/// Level hypervector for reading `y` on `sensor`: linear interpolation
/// between the sensor's anchors, clamped to the fitted range. A degenerate
/// range (y_min == y_max) always yields the minimum anchor.
Hypervector quantize_level(double y, int sensor, const EncoderConfig& cfg);

/// Window hypervector: bind of the levels after rotating the k-th oldest
/// level ngram-1-k times, so the oldest timestep carries the most shifts.
Hypervector encode_sensor_window(std::span<const Hypervector> levels, int ngram);

/// Encode one segment: per sensor, stride-1 n-gram windows are encoded and
/// bundled into a channel vector H_i; the output is the bundle of
/// signature-bound channels, sum over i of G_i * H_i.
EncodedSample encode_segment(const Segment& seg, const EncoderConfig& cfg);

/// Batch encode. The parallel variant farms segments out to OpenMP workers
/// and is bit-identical to the serial reference for any worker count.
std::vector<EncodedSample> encode_segments_serial(std::span<const Segment> segs,
                                                  const EncoderConfig& cfg);
std::vector<EncodedSample> encode_segments(std::span<const Segment> segs,
                                           const EncoderConfig& cfg, int threads = 0);

}  // namespace smore
