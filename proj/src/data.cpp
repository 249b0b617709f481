#include "smore/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "smore/error.hpp"
#include "smore/rng.hpp"

namespace smore {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        if (!std::isfinite(v)) {
            throw DataError("row " + std::to_string(row) + ": non-finite value in column " + col);
        }
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError("row " + std::to_string(row) + ": cannot parse '" + text +
                        "' in column " + col);
    }
}

long parse_long(const std::string& text, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        long v = std::stol(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("row " + std::to_string(row) + ": cannot parse '" + text +
                        "' in column " + col);
    }
}

std::string stem_of(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

void validate_corpus(Corpus& corpus) {
    if (corpus.segments.empty()) throw DataError("corpus has no segments");
    corpus.sensors = corpus.segments[0].sensors;

    int max_label = -1, max_domain = -1;
    for (const Segment& seg : corpus.segments) {
        if (seg.sensors != corpus.sensors) {
            throw DataError("segment " + std::to_string(seg.id) +
                            " has inconsistent sensor count");
        }
        if (seg.label < 0) {
            throw DataError("segment " + std::to_string(seg.id) + ": negative label");
        }
        if (seg.domain < 0) {
            throw DataError("segment " + std::to_string(seg.id) + ": negative domain");
        }
        max_label = std::max(max_label, seg.label);
        max_domain = std::max(max_domain, seg.domain);
    }
    corpus.classes = max_label + 1;
    corpus.domains = max_domain + 1;

    std::vector<bool> label_seen(corpus.classes, false), domain_seen(corpus.domains, false);
    for (const Segment& seg : corpus.segments) {
        label_seen[seg.label] = true;
        domain_seen[seg.domain] = true;
    }
    for (int c = 0; c < corpus.classes; ++c) {
        if (!label_seen[c]) {
            throw DataError("labels must cover 0.." + std::to_string(corpus.classes - 1) +
                            ": class " + std::to_string(c) + " is absent");
        }
    }
    for (int k = 0; k < corpus.domains; ++k) {
        if (!domain_seen[k]) {
            throw DataError("domains must cover 0.." + std::to_string(corpus.domains - 1) +
                            ": domain " + std::to_string(k) + " is absent");
        }
    }
}

}  // namespace

Corpus load_corpus(const std::string& path, const CorpusSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    int col_id = -1, col_domain = -1, col_label = -1, col_time = -1;
    std::vector<int> sensor_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == schema.segment_col) col_id = static_cast<int>(i);
        else if (header[i] == schema.domain_col) col_domain = static_cast<int>(i);
        else if (header[i] == schema.label_col) col_label = static_cast<int>(i);
        else if (header[i] == schema.time_col) col_time = static_cast<int>(i);
        else sensor_cols.push_back(static_cast<int>(i));
    }
    if (col_id < 0) throw DataError(path + ": missing column '" + schema.segment_col + "'");
    if (col_domain < 0) throw DataError(path + ": missing column '" + schema.domain_col + "'");
    if (col_label < 0) throw DataError(path + ": missing column '" + schema.label_col + "'");
    if (col_time < 0) throw DataError(path + ": missing column '" + schema.time_col + "'");
    if (sensor_cols.empty()) throw DataError(path + ": no sensor columns");

    const int m = static_cast<int>(sensor_cols.size());

    struct Row {
        long t;
        std::size_t file_row;
        std::vector<double> readings;
    };
    struct Raw {
        int domain;
        int label;
        std::size_t first_row;
        std::vector<Row> rows;
    };
    std::map<long, Raw> by_segment;

    std::size_t row_no = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(row_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        const long id = parse_long(fields[col_id], row_no, schema.segment_col);
        const long domain = parse_long(fields[col_domain], row_no, schema.domain_col);
        const long label = parse_long(fields[col_label], row_no, schema.label_col);
        const long t = parse_long(fields[col_time], row_no, schema.time_col);
        if (domain < 0 || domain > 1000000 || label < 0 || label > 1000000 || t < 0 ||
            t > 100000000) {
            throw DataError("row " + std::to_string(row_no) +
                            ": domain/label/t outside the supported range");
        }

        Row row;
        row.t = t;
        row.file_row = row_no;
        row.readings.reserve(m);
        for (int s = 0; s < m; ++s) {
            row.readings.push_back(parse_double(fields[sensor_cols[s]], row_no, header[sensor_cols[s]]));
        }

        auto [it, inserted] = by_segment.try_emplace(
            id, Raw{static_cast<int>(domain), static_cast<int>(label), row_no, {}});
        if (!inserted) {
            if (it->second.domain != domain || it->second.label != label) {
                throw DataError("row " + std::to_string(row_no) + ": segment " +
                                std::to_string(id) + " changes domain or label mid-file");
            }
        }
        it->second.rows.push_back(std::move(row));
    }

    Corpus corpus;
    corpus.name = stem_of(path);
    corpus.segments.reserve(by_segment.size());
    for (auto& [id, raw] : by_segment) {
        std::sort(raw.rows.begin(), raw.rows.end(),
                  [](const Row& a, const Row& b) { return a.t < b.t; });
        const int steps = static_cast<int>(raw.rows.size());
        for (int t = 0; t < steps; ++t) {
            if (raw.rows[t].t != t) {
                throw DataError("row " + std::to_string(raw.rows[t].file_row) + ": segment " +
                                std::to_string(id) + " is ragged (expected t=" +
                                std::to_string(t) + ", found t=" +
                                std::to_string(raw.rows[t].t) + ")");
            }
        }
        Segment seg;
        seg.id = id;
        seg.domain = raw.domain;
        seg.label = raw.label;
        seg.sensors = m;
        seg.steps = steps;
        seg.values.resize(static_cast<std::size_t>(m) * steps);
        for (int t = 0; t < steps; ++t) {
            for (int s = 0; s < m; ++s) {
                seg.values[static_cast<std::size_t>(s) * steps + t] = raw.rows[t].readings[s];
            }
        }
        corpus.segments.push_back(std::move(seg));
    }

    validate_corpus(corpus);
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);

    out << "segment_id,domain,label,t";
    for (int s = 1; s <= corpus.sensors; ++s) out << ",s" << s;
    out << "\n";

    std::vector<const Segment*> ordered;
    ordered.reserve(corpus.segments.size());
    for (const Segment& seg : corpus.segments) ordered.push_back(&seg);
    std::sort(ordered.begin(), ordered.end(),
              [](const Segment* a, const Segment* b) { return a->id < b->id; });

    char buf[64];
    for (const Segment* seg : ordered) {
        for (int t = 0; t < seg->steps; ++t) {
            out << seg->id << ',' << seg->domain << ',' << seg->label << ',' << t;
            for (int s = 0; s < seg->sensors; ++s) {
                std::snprintf(buf, sizeof(buf), "%.17g", seg->at(s, t));
                out << ',' << buf;
            }
            out << "\n";
        }
    }
    if (!out) throw DataError("failed writing corpus to " + path);
}

std::vector<Split> make_lodo_splits(const Corpus& corpus) {
    if (corpus.domains < 2) {
        throw ValidationError("leave-one-domain-out needs at least 2 domains, corpus has " +
                              std::to_string(corpus.domains));
    }
    std::vector<Split> splits(corpus.domains);
    for (std::uint32_t i = 0; i < corpus.segments.size(); ++i) {
        const int d = corpus.segments[i].domain;
        for (int k = 0; k < corpus.domains; ++k) {
            (k == d ? splits[k].test : splits[k].train).push_back(i);
        }
    }
    return splits;
}

std::vector<Split> make_kfold_splits(const Corpus& corpus, int k, std::uint64_t seed) {
    const std::size_t n = corpus.segments.size();
    if (k < 2) throw ValidationError("k-fold needs k >= 2");
    if (static_cast<std::size_t>(k) > n) {
        throw ValidationError("k-fold needs k <= segment count (" + std::to_string(n) + ")");
    }

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    RngSequence seq = HvRng(seed, kStreamFolds).sequence(0);
    shuffle_indices(order, seq);

    std::vector<Split> splits(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) splits[f].test.push_back(order[pos + i]);
        pos += size;
    }
    for (int f = 0; f < k; ++f) {
        std::sort(splits[f].test.begin(), splits[f].test.end());
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            splits[f].train.insert(splits[f].train.end(), splits[g].test.begin(),
                                   splits[g].test.end());
        }
        std::sort(splits[f].train.begin(), splits[f].train.end());
    }
    return splits;
}

std::string splits_to_json(std::span<const Split> splits, const std::string& kind) {
    nlohmann::json j;
    j["kind"] = kind;
    j["splits"] = nlohmann::json::array();
    for (std::size_t i = 0; i < splits.size(); ++i) {
        nlohmann::json s;
        s["index"] = i;
        s["train"] = splits[i].train;
        s["test"] = splits[i].test;
        j["splits"].push_back(std::move(s));
    }
    return j.dump(2);
}

SynthSpec synth_spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open synth spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    SynthSpec spec;
    spec.domains = j.value("domains", spec.domains);
    spec.classes = j.value("classes", spec.classes);
    spec.sensors = j.value("sensors", spec.sensors);
    spec.timesteps = j.value("timesteps", spec.timesteps);
    spec.samples_per_class = j.value("samples_per_class", spec.samples_per_class);
    spec.shift = j.value("shift", spec.shift);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
    nlohmann::json j;
    j["domains"] = spec.domains;
    j["classes"] = spec.classes;
    j["sensors"] = spec.sensors;
    j["timesteps"] = spec.timesteps;
    j["samples_per_class"] = spec.samples_per_class;
    j["shift"] = spec.shift;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    return j.dump(2);
}

Corpus generate_synthetic(const SynthSpec& spec) {
    if (spec.domains < 1 || spec.classes < 1 || spec.sensors < 1 || spec.timesteps < 1 ||
        spec.samples_per_class < 1) {
        throw ValidationError("synthetic spec counts must be positive");
    }
    if (spec.shift < 0.0) throw ValidationError("shift magnitude must be >= 0");
    if (spec.noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");

    const int K = spec.domains, n = spec.classes, m = spec.sensors, T = spec.timesteps;
    constexpr double kRoot3 = 1.7320508075688772;  // uniform noise, sigma-matched

    // Per (class, sensor) waveform template, shared across domains so a
    // class means the same thing everywhere; the drift fields control how
    // far the waveform morphs as a domain moves along the drift line.
    struct Wave {
        double freq, amp, base, phase, drift_dir, harmonic, freq_drift, amp_drift;
    };
    std::vector<Wave> waves(static_cast<std::size_t>(n) * m);
    HvRng class_rng(spec.seed, kStreamSynthClass);
    for (int c = 0; c < n; ++c) {
        for (int s = 0; s < m; ++s) {
            RngSequence seq = class_rng.sequence(static_cast<std::uint64_t>(c) * m + s);
            Wave& w = waves[static_cast<std::size_t>(c) * m + s];
            w.freq = 1.0 + 4.0 * seq.next_unit();
            w.amp = 0.4 + 1.2 * seq.next_unit();
            w.base = 3.0 * (seq.next_unit() - 0.5);
            w.phase = 2.0 * std::numbers::pi * seq.next_unit();
            w.drift_dir = seq.next_gaussian();
            w.harmonic = 0.3 + 0.5 * seq.next_unit();
            w.freq_drift = seq.next_gaussian();
            w.amp_drift = seq.next_gaussian();
        }
    }

    // Per (domain, sensor) disturbance: an additive offset and a gain, both
    // scaled by the shift magnitude.
    struct Drift {
        double offset, gain, bg_amp, bg_freq, bg_phase;
    };
    std::vector<Drift> drifts(static_cast<std::size_t>(K) * m);
    std::vector<double> positions(K, 0.0);
    if (K > 1) {
        // Two clusters of domains around -1 and +1 with small in-cluster
        // spacing: every domain has a close partner whose classes still
        // look alike, and a far group whose classes have drifted.
        const int lower = (K + 1) / 2;
        for (int k = 0; k < K; ++k) {
            const bool first = k < lower;
            const int size = first ? lower : K - lower;
            const int j = first ? k : k - lower;
            const double center = first ? -1.0 : 1.0;
            positions[k] = center + 0.06 * (j - 0.5 * (size - 1));
        }
    }
    HvRng domain_rng(spec.seed, kStreamSynthDomain);
    for (int k = 0; k < K; ++k) {
        const double pos = positions[k];
        for (int s = 0; s < m; ++s) {
            RngSequence seq = domain_rng.sequence(static_cast<std::uint64_t>(k) * m + s);
            RngSequence dir_seq = domain_rng.sequence(0x10000u + static_cast<std::uint64_t>(s));
            const double g = dir_seq.next_gaussian();
            // Sensor 0 separates the domains, middle sensors share a band
            // where drifting classes collide across far domains, and with
            // three or more sensors the last one carries a per-domain
            // staircase fingerprint.
            const double strength = (s == 0 ? 2.4 : 0.0) * (g < 0.0 ? -1.0 : 1.0) *
                                    (1.0 + 0.25 * std::fabs(g));
            const bool beacon = (m >= 3 && s == m - 1);

            Drift& dr = drifts[static_cast<std::size_t>(k) * m + s];
            dr.offset = spec.shift * (pos * strength + 0.03 * seq.next_gaussian());
            dr.gain = std::max(0.2, 1.0 + 0.04 * spec.shift * seq.next_gaussian());
            // Domain fingerprint: a fixed background wave, gone at shift 0.
            dr.bg_amp = 0.2 * spec.shift * seq.next_gaussian();
            dr.bg_freq = 1.0 + 3.0 * seq.next_unit();
            dr.bg_phase = 2.0 * std::numbers::pi * seq.next_unit();
            if (beacon) {
                dr.offset = 0.0;
                dr.gain = 0.0;  // mutes the class wave; staircase only
                dr.bg_amp = 0.0;
            }
        }
    }

    Corpus corpus;
    corpus.name = "synthetic";
    corpus.sensors = m;
    corpus.classes = n;
    corpus.domains = K;
    corpus.segments.reserve(static_cast<std::size_t>(K) * n * spec.samples_per_class);

    HvRng noise_rng(spec.seed, kStreamSynthNoise);
    std::int64_t next_id = 0;
    for (int k = 0; k < K; ++k) {
        for (int c = 0; c < n; ++c) {
            for (int i = 0; i < spec.samples_per_class; ++i) {
                RngSequence seq = noise_rng.sequence(static_cast<std::uint64_t>(next_id));
                Segment seg;
                seg.id = next_id++;
                seg.domain = k;
                seg.label = c;
                seg.sensors = m;
                seg.steps = T;
                seg.values.resize(static_cast<std::size_t>(m) * T);
                const double tau = seq.next_unit() * T;  // random phase start
                const double pos = positions[k];
                for (int s = 0; s < m; ++s) {
                    const bool beacon_channel = (m >= 3 && s == m - 1);
                    const Wave& w = waves[static_cast<std::size_t>(c) * m + s];
                    const Drift& dr = drifts[static_cast<std::size_t>(k) * m + s];
                    // Classes morph as domains move apart, so distant
                    // domains give conflicting class evidence while near
                    // neighbours stay consistent.
                    const double class_drift = 0.5 * spec.shift * pos * w.drift_dir;
                    const double freq =
                        std::max(0.5, w.freq * (1.0 + 0.18 * spec.shift * pos * w.freq_drift));
                    const double amp =
                        w.amp * std::max(0.25, 1.0 + 0.15 * spec.shift * pos * w.amp_drift);
                    for (int t = 0; t < T; ++t) {
                        const double angle =
                            2.0 * std::numbers::pi * freq * (t + tau) / T + w.phase;
                        const double signal =
                            w.base + amp * (std::sin(angle) +
                                            w.harmonic * std::sin(2.0 * angle + 1.0));
                        double background;
                        if (beacon_channel) {
                            // Binary period-4 staircase: each cluster has a
                            // base cycle and members flip one bit of it, so
                            // paired domains share half their windows while
                            // the clusters share almost none.
                            static constexpr unsigned kClusterBase[2] = {0x3u, 0xFu};
                            const int lower_half = (K + 1) / 2;
                            const int cluster = k < lower_half ? 0 : 1;
                            const int member = cluster == 0 ? k : k - lower_half;
                            unsigned pattern = kClusterBase[cluster];
                            if (member > 0) pattern ^= 1u << ((member - 1) % 4);
                            const unsigned bit = (pattern >> (t % 4)) & 1u;
                            background = spec.shift * (bit ? 1.0 : -1.0);
                        } else {
                            background =
                                dr.bg_amp * std::sin(2.0 * std::numbers::pi * dr.bg_freq * t / T +
                                                     dr.bg_phase);
                        }
                        seg.values[static_cast<std::size_t>(s) * T + t] =
                            dr.gain * signal + dr.offset +
                            (beacon_channel ? 0.0 : class_drift) + background +
                            spec.noise_sigma * kRoot3 * (2.0 * seq.next_unit() - 1.0);
                    }
                }
                corpus.segments.push_back(std::move(seg));
            }
        }
    }
    return corpus;
}

}  // namespace smore
