#pragma once

#include <string>

#include "smore/eval.hpp"

namespace smore {

struct LoadedModel {
    TrainedPipeline pipeline;
    PipelineConfig config;  // training-time configuration echo
};

/// Versioned binary container: dimension, n-gram size, anchors, signatures,
/// per-sensor ranges, prototypes, descriptors and the seeds, enough to
/// reload and reproduce inference exactly. Deterministic byte layout.
void save_model(const std::string& path, const TrainedPipeline& pipeline,
                const PipelineConfig& cfg);

LoadedModel load_model(const std::string& path);

}  // namespace smore
