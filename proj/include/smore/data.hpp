#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smore/encoder.hpp"

namespace smore {

/// An immutable, validated set of segments. Labels cover [0, classes) and
/// domains cover [0, domains); every segment has the same sensor count.
struct Corpus {
    std::string name;
    int sensors = 0;
    int classes = 0;
    int domains = 0;
    std::vector<Segment> segments;
};

/// Column roles for the long-form corpus CSV. Every column that is not one
/// of the four role columns is a sensor channel, in header order.
struct CorpusSchema {
    std::string segment_col = "segment_id";
    std::string domain_col = "domain";
    std::string label_col = "label";
    std::string time_col = "t";
};

/// Load a long-form CSV (one row per segment x timestep). Malformed input
/// fails with the offending row number.
Corpus load_corpus(const std::string& path, const CorpusSchema& schema = {});

/// Write in canonical form: segments ordered by id, rows by t, sensor
/// columns named s1..sm, full-precision values. load/write round-trips.
void write_corpus(const Corpus& corpus, const std::string& path);

/// One train/test split as segment indices into Corpus::segments.
struct Split {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> test;
};

/// K splits, split k holding out exactly domain k.
std::vector<Split> make_lodo_splits(const Corpus& corpus);

/// Seeded uniform partition into k folds whose sizes differ by at most one.
std::vector<Split> make_kfold_splits(const Corpus& corpus, int k, std::uint64_t seed);

std::string splits_to_json(std::span<const Split> splits, const std::string& kind);

/// Knobs for the synthetic distribution-shift corpus: per-class sinusoid
/// templates shared across domains, plus a per-domain offset and gain whose
/// scale grows with `shift`.
struct SynthSpec {
    int domains = 4;
    int classes = 5;
    int sensors = 3;
    int timesteps = 24;
    int samples_per_class = 100;  // per domain
    double shift = 2.0;
    double noise_sigma = 0.1;
    std::uint64_t seed = 1;
};

SynthSpec synth_spec_from_json_file(const std::string& path);
std::string synth_spec_to_json(const SynthSpec& spec);

/// Deterministic synthetic corpus: classes are separable within every
/// domain while domain marginals drift apart as `shift` grows.
Corpus generate_synthetic(const SynthSpec& spec);

}  // namespace smore
