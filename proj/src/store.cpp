#include "smore/store.hpp"

#include <cstdint>
#include <fstream>

#include "smore/error.hpp"

namespace smore {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'H', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_hv(std::ofstream& out, const Hypervector& hv) {
    out.write(reinterpret_cast<const char*>(hv.data()),
              static_cast<std::streamsize>(hv.size() * sizeof(double)));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError(path + ": truncated model file");
    return v;
}

Hypervector get_hv(std::ifstream& in, std::size_t dim, const std::string& path) {
    Hypervector hv(dim);
    in.read(reinterpret_cast<char*>(hv.data()),
            static_cast<std::streamsize>(dim * sizeof(double)));
    if (!in) throw DataError(path + ": truncated model file");
    return hv;
}

}  // namespace

void save_model(const std::string& path, const TrainedPipeline& pipeline,
                const PipelineConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);

    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, static_cast<std::uint64_t>(pipeline.encoder.dim));
    put(out, static_cast<std::int32_t>(pipeline.encoder.ngram));
    put(out, static_cast<std::int32_t>(pipeline.encoder.sensors.size()));
    put(out, static_cast<std::int32_t>(pipeline.classes));
    put(out, static_cast<std::int32_t>(pipeline.models.size()));
    put(out, static_cast<std::uint8_t>(pipeline.pooled ? 1 : 0));
    put(out, static_cast<std::uint64_t>(cfg.seed));
    put(out, cfg.eta);
    put(out, static_cast<std::int32_t>(cfg.epochs));
    put(out, cfg.delta_star);
    put(out, static_cast<std::uint8_t>(cfg.allow_negative_weights ? 1 : 0));

    for (const SensorCoder& sc : pipeline.encoder.sensors) {
        put(out, sc.y_min);
        put(out, sc.y_max);
        put_hv(out, sc.level_min);
        put_hv(out, sc.level_max);
        put_hv(out, sc.signature);
    }
    for (std::size_t k = 0; k < pipeline.models.size(); ++k) {
        put(out, static_cast<std::int32_t>(pipeline.domain_ids.at(k)));
        for (const Hypervector& c : pipeline.models[k].classes) put_hv(out, c);
    }
    for (const DomainDescriptor& d : pipeline.descriptors) {
        put(out, static_cast<std::uint64_t>(d.count));
        put_hv(out, d.u);
    }
    if (!out) throw DataError("failed writing model to " + path);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);

    char magic[4];
    in.read(magic, 4);
    if (!in || magic[0] != kMagic[0] || magic[1] != kMagic[1] || magic[2] != kMagic[2] ||
        magic[3] != kMagic[3]) {
        throw DataError(path + ": not a model container");
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw DataError(path + ": unsupported model version " + std::to_string(version));
    }

    LoadedModel lm;
    const auto dim = get<std::uint64_t>(in, path);
    const auto ngram = get<std::int32_t>(in, path);
    const auto sensors = get<std::int32_t>(in, path);
    const auto classes = get<std::int32_t>(in, path);
    const auto num_domains = get<std::int32_t>(in, path);
    const auto pooled = get<std::uint8_t>(in, path);
    lm.config.seed = get<std::uint64_t>(in, path);
    lm.config.eta = get<double>(in, path);
    lm.config.epochs = get<std::int32_t>(in, path);
    lm.config.delta_star = get<double>(in, path);
    lm.config.allow_negative_weights = get<std::uint8_t>(in, path) != 0;
    lm.config.dim = static_cast<std::size_t>(dim);
    lm.config.ngram = ngram;
    lm.config.arm = pooled ? Arm::Pooled : Arm::Smore;

    if (dim == 0 || ngram < 1 || sensors < 1 || classes < 1 || num_domains < 1) {
        throw DataError(path + ": corrupt model header");
    }

    lm.pipeline.pooled = pooled != 0;
    lm.pipeline.classes = classes;
    lm.pipeline.encoder.dim = static_cast<std::size_t>(dim);
    lm.pipeline.encoder.ngram = ngram;
    lm.pipeline.encoder.seed = lm.config.seed;
    lm.pipeline.encoder.sensors.resize(sensors);
    for (std::int32_t s = 0; s < sensors; ++s) {
        SensorCoder& sc = lm.pipeline.encoder.sensors[s];
        sc.y_min = get<double>(in, path);
        sc.y_max = get<double>(in, path);
        sc.level_min = get_hv(in, dim, path);
        sc.level_max = get_hv(in, dim, path);
        sc.signature = get_hv(in, dim, path);
    }
    lm.pipeline.models.resize(num_domains);
    lm.pipeline.domain_ids.resize(num_domains);
    for (std::int32_t k = 0; k < num_domains; ++k) {
        lm.pipeline.domain_ids[k] = get<std::int32_t>(in, path);
        lm.pipeline.models[k].domain = k;
        lm.pipeline.models[k].classes.resize(classes);
        for (std::int32_t t = 0; t < classes; ++t) {
            lm.pipeline.models[k].classes[t] = get_hv(in, dim, path);
        }
    }
    lm.pipeline.descriptors.resize(num_domains);
    for (std::int32_t k = 0; k < num_domains; ++k) {
        lm.pipeline.descriptors[k].domain = k;
        lm.pipeline.descriptors[k].count =
            static_cast<std::size_t>(get<std::uint64_t>(in, path));
        lm.pipeline.descriptors[k].u = get_hv(in, dim, path);
    }
    return lm;
}

}  // namespace smore
