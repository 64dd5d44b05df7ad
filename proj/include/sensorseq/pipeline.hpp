#pragma once

// Stage runners shared by the CLI and the end-to-end `pipeline` command.
// Every stage reads and writes files, so a pipeline run is literally the
// composition of the individual stages. Each primary artifact gets a sibling
// "<artifact>.manifest.json" with input/output SHA-256 hashes, the seed, the
// effective-config hash and timings.

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sensorseq/compressor.hpp"
#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"
#include "sensorseq/eval.hpp"
#include "sensorseq/event_model.hpp"
#include "sensorseq/ground_truth.hpp"
#include "sensorseq/matrix_io.hpp"
#include "sensorseq/random.hpp"
#include "sensorseq/rnn.hpp"
#include "sensorseq/sequencer.hpp"
#include "sensorseq/synth.hpp"
#include "sensorseq/trainer.hpp"
#include "sensorseq/weighting.hpp"

namespace sensorseq {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Hashing

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 failed");
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string sha256_file(const fs::path& p) { return sha256_hex(read_file(p)); }

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
    std::uint64_t seed = 7;
    std::optional<std::string> schema_path;
    Schema schema = Schema::default_schema();
    SynthConfig synth;
    LabelSpec label;
    EncoderSettings encoder;
    SplitSpec split;
    bool compress = true;
    CompressionConfig compression;
    WeightStrategy weights = WeightStrategy::inverse_log_frequency;
    std::vector<WeightStrategy> weight_sweep;  // extra strategies reported side by side
    ModelConfig model;                         // input_dim comes from the encoder
    TrainConfig train;
    std::size_t predict_sequence_length = 64;
    unsigned threads = 1;
    MatrixFormat format = MatrixFormat::text;

    /// Seeds of the individual stages, derived from the master seed by name.
    std::uint64_t stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

    /// Pushes the master seed into every seeded sub-config.
    void apply_seeds() {
        synth.seed = stage_seed("synth");
        split.seed = stage_seed("split");
        model.seed = stage_seed("model");
        train.sequencer.seed = stage_seed("sequencer");
    }
};

inline json pipeline_config_to_json(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    if (c.schema_path) j["schema"] = *c.schema_path;
    j["synth"] = synth_config_to_json(c.synth);
    j["synth"].erase("seed");
    j["label"] = {{"window_minutes", c.label.window_minutes}, {"excluded_categories", c.label.excluded_categories}};
    j["encoder"] = {{"cap_percentile", c.encoder.cap_percentile},
                    {"delta_cap_minutes", c.encoder.delta_cap_minutes},
                    {"gender_categories", c.encoder.gender_categories}};
    j["split"] = {{"train_days", c.split.train_days},
                  {"valid_days", c.split.valid_days},
                  {"test_days", c.split.test_days},
                  {"unknown_user_fraction", c.split.unknown_user_fraction}};
    j["compression"] = {{"enabled", c.compress},
                        {"threshold_minutes", c.compression.threshold_minutes ? json(*c.compression.threshold_minutes)
                                                                              : json(nullptr)}};
    j["weights"] = to_string(c.weights);
    json sweep = json::array();
    for (auto s : c.weight_sweep) sweep.push_back(to_string(s));
    j["weight_sweep"] = sweep;
    j["sequencer"] = {{"sequence_length", c.train.sequencer.sequence_length},
                      {"batch_size", c.train.sequencer.batch_size},
                      {"shuffle_buckets", c.train.sequencer.shuffle_buckets}};
    j["model"] = {{"dense_units", c.model.dense_units},
                  {"lstm_layers", c.model.lstm_layers},
                  {"lstm_units", c.model.lstm_units}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"step_size", c.train.step_size},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"epsilon", c.train.epsilon},
                  {"clip_norm", c.train.clip_norm},
                  {"keep_best_valid", c.train.keep_best_valid},
                  {"predict_sequence_length", c.predict_sequence_length}};
    return j;
}

/// Hash of the effective configuration (threads and format excluded: they do
/// not change artifact contents).
inline std::string config_hash(const PipelineConfig& c) { return sha256_hex(pipeline_config_to_json(c).dump()); }

namespace pipeline_detail {

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace pipeline_detail

/// Parses a config document; `base_dir` resolves a relative schema path.
inline PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir = {}) {
    using pipeline_detail::get_if;
    PipelineConfig c;
    try {
        get_if(j, "seed", c.seed);
        if (auto it = j.find("schema"); it != j.end() && !it->is_null()) {
            fs::path p = it->get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            c.schema_path = p.string();
            std::ifstream in(p);
            if (!in) throw ConfigError("schema file not found: " + p.string());
            c.schema = Schema::from_json(json::parse(in));
        }
        if (auto it = j.find("synth"); it != j.end()) c.synth = synth_config_from_json(*it);
        if (auto it = j.find("label"); it != j.end()) {
            get_if(*it, "window_minutes", c.label.window_minutes);
            if (auto e = it->find("excluded_categories"); e != it->end())
                c.label.excluded_categories = e->get<std::set<std::string>>();
        }
        if (auto it = j.find("encoder"); it != j.end()) {
            get_if(*it, "cap_percentile", c.encoder.cap_percentile);
            get_if(*it, "delta_cap_minutes", c.encoder.delta_cap_minutes);
            get_if(*it, "gender_categories", c.encoder.gender_categories);
        }
        if (auto it = j.find("split"); it != j.end()) {
            get_if(*it, "train_days", c.split.train_days);
            get_if(*it, "valid_days", c.split.valid_days);
            get_if(*it, "test_days", c.split.test_days);
            get_if(*it, "unknown_user_fraction", c.split.unknown_user_fraction);
        }
        if (auto it = j.find("compression"); it != j.end()) {
            get_if(*it, "enabled", c.compress);
            if (auto t = it->find("threshold_minutes"); t != it->end() && !t->is_null())
                c.compression.threshold_minutes = t->get<double>();
        }
        c.compression.delta_cap_minutes = c.encoder.delta_cap_minutes;
        if (auto it = j.find("weights"); it != j.end()) c.weights = parse_weight_strategy(it->get<std::string>());
        if (auto it = j.find("weight_sweep"); it != j.end())
            for (const auto& s : *it) c.weight_sweep.push_back(parse_weight_strategy(s.get<std::string>()));
        if (auto it = j.find("sequencer"); it != j.end()) {
            get_if(*it, "sequence_length", c.train.sequencer.sequence_length);
            get_if(*it, "batch_size", c.train.sequencer.batch_size);
            get_if(*it, "shuffle_buckets", c.train.sequencer.shuffle_buckets);
        }
        if (auto it = j.find("model"); it != j.end()) {
            get_if(*it, "dense_units", c.model.dense_units);
            get_if(*it, "lstm_layers", c.model.lstm_layers);
            get_if(*it, "lstm_units", c.model.lstm_units);
        }
        if (auto it = j.find("train"); it != j.end()) {
            get_if(*it, "epochs", c.train.epochs);
            get_if(*it, "step_size", c.train.step_size);
            get_if(*it, "beta1", c.train.beta1);
            get_if(*it, "beta2", c.train.beta2);
            get_if(*it, "epsilon", c.train.epsilon);
            get_if(*it, "clip_norm", c.train.clip_norm);
            get_if(*it, "keep_best_valid", c.train.keep_best_valid);
            get_if(*it, "predict_sequence_length", c.predict_sequence_length);
        }
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    if (!(c.encoder.cap_percentile > 0.0 && c.encoder.cap_percentile <= 1.0))
        throw ConfigError("encoder.cap_percentile must lie in (0, 1]");
    if (!(c.encoder.delta_cap_minutes > 0.0)) throw ConfigError("encoder.delta_cap_minutes must be > 0");
    if (!(c.label.window_minutes > 0.0)) throw ConfigError("label.window_minutes must be > 0");
    if (!(c.train.step_size > 0.0)) throw ConfigError("train.step_size must be > 0");
    if (c.predict_sequence_length < 1) throw ConfigError("train.predict_sequence_length must be >= 1");
    c.compression.check();
    c.train.sequencer.check();
    c.apply_seeds();
    return c;
}

inline PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return pipeline_config_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Manifests

struct Manifest {
    std::string stage;
    std::string config_hash;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    double seconds = 0.0;
    json summary = json::object();

    json to_json() const {
        auto files = [](const std::vector<fs::path>& ps) {
            json a = json::array();
            for (const auto& p : ps)
                a.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
            return a;
        };
        return {{"stage", stage},     {"config_hash", config_hash}, {"seed", seed},
                {"threads", threads}, {"inputs", files(inputs)},    {"outputs", files(outputs)},
                {"seconds", seconds}, {"summary", summary}};
    }
};

inline fs::path manifest_path(const fs::path& artifact) { return fs::path(artifact.string() + ".manifest.json"); }

inline void write_manifest(const Manifest& m) {
    if (m.outputs.empty()) return;
    std::ofstream out(manifest_path(m.outputs.front()));
    out << m.to_json().dump(2) << '\n';
}

namespace pipeline_detail {

class StageClock {
public:
    explicit StageClock(Manifest& m) : m_(m), t0_(std::chrono::steady_clock::now()) {}
    ~StageClock() { m_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    Manifest& m_;
    std::chrono::steady_clock::time_point t0_;
};

inline Manifest start(const PipelineConfig& c, std::string stage) {
    Manifest m;
    m.stage = std::move(stage);
    m.config_hash = config_hash(c);
    m.seed = c.seed;
    m.threads = c.threads;
    return m;
}

inline std::ofstream open_out(const fs::path& p, bool binary = false) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

inline std::ifstream open_in(const fs::path& p, bool binary = false) {
    std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open " + p.string());
    return in;
}

inline std::vector<SensorEvent> read_events(const fs::path& p) {
    auto in = open_in(p);
    auto log = parse_event_log(in);
    if (!log.malformed.empty())
        throw IoError(p.string() + ": line " + std::to_string(log.malformed.front().record() + 1) + ": " +
                      log.malformed.front().reason());
    return log.events;
}

inline SampleMatrix load_matrix(const fs::path& p) {
    auto in = open_in(p, true);
    return read_matrix(in);
}

inline void save_matrix(const fs::path& p, const SampleMatrix& m, MatrixFormat fmt) {
    auto out = open_out(p, fmt == MatrixFormat::binary);
    write_matrix(out, m, fmt);
}

inline ModelParams<double> load_checkpoint(const fs::path& p) {
    auto in = open_in(p);
    return read_checkpoint(in);
}

}  // namespace pipeline_detail

inline const char* matrix_extension(MatrixFormat f) { return f == MatrixFormat::binary ? ".ssqm" : ".tsv"; }

inline const std::array<const char*, 4>& split_names() {
    static const std::array<const char*, 4> n{"train", "valid", "known_test", "unknown_test"};
    return n;
}

// ---------------------------------------------------------------------------
// Stages

/// events.jsonl, profiles.jsonl and the hidden-truth sidecar.
inline Manifest run_synth(const PipelineConfig& c, const fs::path& events_out, const fs::path& profiles_out,
                          const fs::path& truth_out) {
    using namespace pipeline_detail;
    auto m = start(c, "synth");
    {
        StageClock clock(m);
        const auto out = generate(c.synth, c.threads);
        {
            auto f = open_out(events_out);
            write_event_log(f, out.events);
        }
        {
            auto f = open_out(profiles_out);
            write_profiles(f, out.profiles);
        }
        {
            auto f = open_out(truth_out);
            write_hidden_truth(f, out.truth);
        }
        m.summary = {{"users", c.synth.n_users},
                     {"days", c.synth.days},
                     {"events", out.events.size()},
                     {"notifications", out.truth.size()},
                     {"intercept", out.intercept}};
    }
    m.outputs = {events_out, profiles_out, truth_out};
    return m;
}

/// Sorted, schema-checked events (seq order) plus a rejection report.
inline Manifest run_validate(const PipelineConfig& c, const fs::path& events_in, const fs::path& events_out,
                             const fs::path& report_out) {
    using namespace pipeline_detail;
    auto m = start(c, "validate");
    {
        StageClock clock(m);
        const auto vs = validate_stream(read_events(events_in), c.schema);
        {
            auto f = open_out(events_out);
            write_event_log(f, vs.users);
        }
        auto f = open_out(report_out);
        f << "input=" << vs.report.input << "\naccepted=" << vs.report.accepted
          << "\nrejected=" << vs.report.rejected.size() << "\nreordered=" << vs.report.reordered << '\n';
        for (const auto& v : vs.report.rejected) f << "reject record=" << v.record() << " reason=" << v.reason() << '\n';
        m.summary = {{"input", vs.report.input},
                     {"accepted", vs.report.accepted},
                     {"rejected", vs.report.rejected.size()},
                     {"reordered", vs.report.reordered}};
    }
    m.inputs = {events_in};
    m.outputs = {events_out, report_out};
    return m;
}

inline Manifest run_label(const PipelineConfig& c, const fs::path& events_in, const fs::path& labels_out) {
    using namespace pipeline_detail;
    auto m = start(c, "label");
    {
        StageClock clock(m);
        const auto vs = validate_stream(read_events(events_in), c.schema, true);
        const auto lr = label_notifications(vs.users, c.label);
        auto f = open_out(labels_out);
        write_label_audit(f, lr.audit);
        std::size_t pos = 0;
        for (const auto& l : lr.labels) pos += static_cast<std::size_t>(l.label);
        m.summary = {{"posts", lr.report.posts},
                     {"labeled", lr.labels.size()},
                     {"positive", pos},
                     {"excluded", lr.report.excluded},
                     {"truncated", lr.report.truncated},
                     {"missing_meta", lr.report.missing_meta},
                     {"label_fraction_of_events",
                      vs.event_count() ? static_cast<double>(lr.labels.size()) / static_cast<double>(vs.event_count())
                                       : 0.0}};
    }
    m.inputs = {events_in};
    m.outputs = {labels_out};
    return m;
}

/// Splits, fits the encoder on the training split and encodes all four splits
/// into `<dir>/<split><ext>` plus `<dir>/encoder_state.txt` and `<dir>/split.txt`.
inline Manifest run_encode(const PipelineConfig& c, const fs::path& events_in, const fs::path& labels_in,
                           const fs::path& profiles_in, const fs::path& dir) {
    using namespace pipeline_detail;
    auto m = start(c, "encode");
    {
        StageClock clock(m);
        const auto vs = validate_stream(read_events(events_in), c.schema, true);
        std::vector<LabeledEvent> labels;
        {
            auto in = open_in(labels_in);
            labels = read_labels(in);
        }
        ProfileMap profiles;
        {
            auto in = open_in(profiles_in);
            profiles = read_profiles(in);
        }
        const auto split = split_dataset(vs.users, c.split);
        const auto state = fit(split.train, c.schema, profiles, c.encoder);
        const std::array<const UserStreams*, 4> parts{&split.train, &split.valid, &split.known_test,
                                                      &split.unknown_test};
        std::vector<fs::path> outs;
        outs.push_back(dir / "encoder_state.txt");
        {
            auto f = open_out(outs.back());
            write_encoder_state(f, state);
        }
        json rows = json::object();
        for (std::size_t k = 0; k < parts.size(); ++k) {
            SampleMatrix mat{state.column_names(), encode_stream(*parts[k], labels_within(*parts[k], labels), profiles, state)};
            outs.push_back(dir / (std::string(split_names()[k]) + matrix_extension(c.format)));
            save_matrix(outs.back(), mat, c.format);
            std::size_t labeled = 0;
            for (const auto& [_, r] : mat.users)
                for (const auto& row : r) labeled += row.labeled() ? 1 : 0;
            rows[split_names()[k]] = {{"users", mat.users.size()}, {"rows", row_count(mat.users)}, {"labeled", labeled}};
        }
        outs.push_back(dir / "split.txt");
        {
            auto f = open_out(outs.back());
            for (const auto& u : split.unknown_users) f << "unknown\t" << u << '\n';
            for (const auto& u : split.dropped_users) f << "dropped\t" << u << '\n';
        }
        m.summary = {{"dim", state.dim()},
                     {"splits", rows},
                     {"unknown_users", split.unknown_users},
                     {"dropped_users", split.dropped_users},
                     {"empty_columns", state.empty_columns}};
        m.outputs = outs;
    }
    m.inputs = {events_in, labels_in, profiles_in};
    return m;
}

inline Manifest run_compress(const PipelineConfig& c, const fs::path& matrix_in, const fs::path& matrix_out,
                             const fs::path& report_out) {
    using namespace pipeline_detail;
    auto m = start(c, "compress");
    {
        StageClock clock(m);
        auto mat = load_matrix(matrix_in);
        CompressionReport rep;
        mat.users = compress_all(mat.users, c.compression, &rep);
        save_matrix(matrix_out, mat, c.format);
        auto f = open_out(report_out);
        write_compression_report(f, rep);
        m.summary = {{"rows_in", rep.rows_in},
                     {"rows_out", rep.rows_out},
                     {"ratio", rep.ratio()},
                     {"blocked_clash", rep.blocked_clash},
                     {"blocked_ground_truth", rep.blocked_ground_truth},
                     {"blocked_threshold", rep.blocked_threshold}};
    }
    m.inputs = {matrix_in};
    m.outputs = {matrix_out, report_out};
    return m;
}

inline Manifest run_weigh(const PipelineConfig& c, WeightStrategy strategy, const fs::path& matrix_in,
                          const fs::path& matrix_out, const fs::path& table_out) {
    using namespace pipeline_detail;
    auto m = start(c, "weigh");
    {
        StageClock clock(m);
        auto mat = load_matrix(matrix_in);
        const auto table = compute_weights(mat.users, strategy);
        apply_weights(mat.users, table);
        save_matrix(matrix_out, mat, c.format);
        auto f = open_out(table_out);
        write_weight_table(f, table);
        m.summary = {{"strategy", to_string(strategy)}, {"users", table.users.size()}};
    }
    m.inputs = {matrix_in};
    m.outputs = {matrix_out, table_out};
    return m;
}

inline Manifest run_batch(const PipelineConfig& c, const fs::path& matrix_in, const fs::path& plan_out) {
    using namespace pipeline_detail;
    auto m = start(c, "batch");
    {
        StageClock clock(m);
        const auto mat = load_matrix(matrix_in);
        const auto buckets = plan_buckets(mat.users, c.train.sequencer);
        auto f = open_out(plan_out);
        write_batch_plan(f, buckets, c.train.sequencer);
        const auto s = plan_stats(buckets, c.train.sequencer);
        m.summary = {{"buckets", buckets.size()},
                     {"batches", s.batches},
                     {"rows", s.rows},
                     {"padding_fraction", s.padding_fraction()}};
    }
    m.inputs = {matrix_in};
    m.outputs = {plan_out};
    return m;
}

/// Trains from a fresh initialisation (seeded by the config) on a weighted matrix.
inline Manifest run_train(const PipelineConfig& c, const fs::path& train_in, const std::optional<fs::path>& valid_in,
                          const fs::path& checkpoint_out, const fs::path& metrics_out, std::ostream* log = nullptr) {
    using namespace pipeline_detail;
    auto m = start(c, "train");
    {
        StageClock clock(m);
        const auto tr = load_matrix(train_in);
        std::optional<SampleMatrix> va;
        if (valid_in) va = load_matrix(*valid_in);
        if (va && va->columns != tr.columns) throw ShapeMismatch("train/valid column layouts differ");
        ModelConfig mc = c.model;
        mc.input_dim = tr.columns.size();
        mc.check();
        TrainConfig tc = c.train;
        tc.divergence_dump = checkpoint_out.string() + ".diverged";
        const auto result = train(tr.users, va ? &va->users : nullptr, init_params<double>(mc), tc, log);
        {
            auto f = open_out(checkpoint_out);
            write_checkpoint(f, result.params);
        }
        {
            auto f = open_out(metrics_out);
            write_metrics(f, result.metrics);
        }
        double seconds = 0.0;
        for (const auto& e : result.metrics) seconds += e.wall_seconds;
        std::ostringstream loss;
        loss.precision(17);
        loss << result.final_train_loss;
        m.summary = {{"epochs", result.metrics.size()},
                     {"best_epoch", result.best_epoch},
                     {"final_train_loss", result.final_train_loss},
                     {"final_train_loss_text", loss.str()},
                     {"mean_epoch_seconds", result.metrics.empty() ? 0.0 : seconds / static_cast<double>(result.metrics.size())},
                     {"parameters", result.params.size()}};
        if (!result.metrics.empty() && result.metrics.back().valid_auc)
            m.summary["final_valid_auc"] = *result.metrics.back().valid_auc;
    }
    m.inputs = {train_in};
    if (valid_in) m.inputs.push_back(*valid_in);
    m.outputs = {checkpoint_out, metrics_out};
    return m;
}

inline Manifest run_predict(const PipelineConfig& c, const fs::path& checkpoint_in, const fs::path& matrix_in,
                            const fs::path& predictions_out) {
    using namespace pipeline_detail;
    auto m = start(c, "predict");
    {
        StageClock clock(m);
        const auto params = load_checkpoint(checkpoint_in);
        const auto mat = load_matrix(matrix_in);
        if (mat.columns.size() != params.config.input_dim)
            throw ShapeMismatch("matrix has " + std::to_string(mat.columns.size()) + " columns, model expects " +
                                std::to_string(params.config.input_dim));
        const auto probs = predict_rows(params, mat.users, c.predict_sequence_length, c.train.sequencer.batch_size);
        auto f = open_out(predictions_out);
        write_predictions(f, mat.users, probs);
        m.summary = {{"users", mat.users.size()}, {"rows", row_count(mat.users)}};
    }
    m.inputs = {checkpoint_in, matrix_in};
    m.outputs = {predictions_out};
    return m;
}

/// Fits the click-rate table on `train_in` and draws hard 0/1 predictions for
/// the labeled rows of `matrix_in`. The table probability is kept as an extra
/// diagnostic column.
inline Manifest run_baseline(const PipelineConfig& c, const fs::path& train_in, const fs::path& matrix_in,
                             const fs::path& table_out, const fs::path& predictions_out) {
    using namespace pipeline_detail;
    auto m = start(c, "baseline");
    {
        StageClock clock(m);
        const auto tr = load_matrix(train_in);
        const auto mat = load_matrix(matrix_in);
        std::map<std::string, std::vector<double>> zeros;
        for (const auto& [u, r] : tr.users) zeros[u].assign(r.size(), 0.0);
        const auto table = fit_baseline(scored_labels(tr.users, zeros));
        {
            auto f = open_out(table_out);
            write_baseline_table(f, table);
        }
        Rng rng(c.stage_seed("baseline/" + matrix_in.stem().string()));
        auto f = open_out(predictions_out);
        f << "user_id\twall_time_ms\tcategory\tlabel\tscore\ttable_probability\n";
        f.precision(17);
        std::size_t n = 0;
        for (const auto& [user, rows] : mat.users)
            for (const auto& r : rows) {
                if (!r.labeled()) continue;
                const int draw = baseline_predict(user, r.category, table, rng);
                f << user << '\t' << r.wall_time_ms << '\t' << (r.category.empty() ? "-" : r.category) << '\t'
                  << static_cast<int>(r.y) << '\t' << draw << '\t' << table.probability(user, r.category) << '\n';
                ++n;
            }
        m.summary = {{"global_rate", table.global}, {"predictions", n}};
    }
    m.inputs = {train_in, matrix_in};
    m.outputs = {predictions_out, table_out};
    return m;
}

/// Per-group AUC table, pooled ROC points and the macro AUC.
inline Manifest run_eval(const PipelineConfig& c, const fs::path& predictions_in, const fs::path& groups_out,
                         const fs::path& roc_out) {
    using namespace pipeline_detail;
    auto m = start(c, "eval");
    {
        StageClock clock(m);
        std::vector<ScoredLabel> preds;
        {
            auto in = open_in(predictions_in);
            preds = read_predictions(in);
        }
        const auto rep = macro_auc(preds);
        {
            auto f = open_out(groups_out);
            write_group_table(f, rep);
        }
        {
            auto f = open_out(roc_out);
            write_roc(f, rep.roc);
        }
        m.summary = {{"macro_auc", rep.macro_auc},
                     {"valid_groups", rep.valid_groups},
                     {"skipped_groups", rep.skipped_groups},
                     {"labels", preds.size()}};
    }
    m.inputs = {predictions_in};
    m.outputs = {groups_out, roc_out};
    return m;
}

// ---------------------------------------------------------------------------
// End-to-end

struct PipelineResult {
    std::map<std::string, double> model_auc;     // split -> macro AUC
    std::map<std::string, double> baseline_auc;  // split -> macro AUC
    std::map<std::string, std::map<std::string, double>> sweep_auc;  // strategy -> split -> macro AUC
    double compression_ratio = 0.0;
    double mean_epoch_seconds = 0.0;
    double final_train_loss = 0.0;
    std::size_t best_epoch = 0;
    std::vector<fs::path> artifacts;  // every deterministic artifact, for hashing
    json report;
};

inline void write_manifest_and_track(const Manifest& m, PipelineResult& r) {
    write_manifest(m);
    for (const auto& p : m.outputs) r.artifacts.push_back(p);
}

namespace pipeline_detail {

/// Trains one weighting strategy and scores it on valid / known / unknown test.
inline std::map<std::string, double> train_and_score(const PipelineConfig& c, WeightStrategy strategy,
                                                     const fs::path& data_dir, const fs::path& dir,
                                                     PipelineResult& r, Manifest* train_manifest, std::ostream* log) {
    const auto ext = matrix_extension(c.format);
    const auto weighted = dir / (std::string("train_weighted") + ext);
    write_manifest_and_track(run_weigh(c, strategy, data_dir / (std::string("train") + ext), weighted, dir / "weights.tsv"), r);
    const auto ckpt = dir / "checkpoint.txt";
    auto tm = run_train(c, weighted, data_dir / (std::string("valid") + ext), ckpt, dir / "metrics.tsv", log);
    write_manifest(tm);
    r.artifacts.push_back(ckpt);  // metrics carry wall times
    if (train_manifest) *train_manifest = tm;
    std::map<std::string, double> auc;
    for (const char* split : {"valid", "known_test", "unknown_test"}) {
        const auto preds = dir / "predictions" / (std::string(split) + ".tsv");
        write_manifest_and_track(run_predict(c, ckpt, data_dir / (std::string(split) + ext), preds), r);
        auto em = run_eval(c, preds, dir / "eval" / (std::string(split) + "_groups.tsv"),
                           dir / "eval" / (std::string(split) + "_roc.tsv"));
        write_manifest_and_track(em, r);
        auc[split] = em.summary["macro_auc"].get<double>();
    }
    return auc;
}

inline std::string fixed(double v, int digits = 3) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace pipeline_detail

/// synth -> validate -> label -> encode -> compress -> weigh -> batch -> train
/// -> predict / baseline -> eval, all under `dir`. Writes report.tsv (model vs
/// baseline per split), weights_report.tsv when a sweep is configured, and
/// report.json.
inline PipelineResult run_pipeline(const PipelineConfig& c, const fs::path& dir, std::ostream* log = nullptr) {
    using namespace pipeline_detail;
    PipelineResult r;
    const auto ext = matrix_extension(c.format);
    auto note = [&](const Manifest& m) {
        if (log) *log << "[" << m.stage << "] " << fixed(m.seconds, 2) << "s " << m.summary.dump() << '\n';
    };
    auto step = [&](const Manifest& m) {
        write_manifest_and_track(m, r);
        note(m);
        return m;
    };

    step(run_synth(c, dir / "events.jsonl", dir / "profiles.jsonl", dir / "hidden_truth.tsv"));
    step(run_validate(c, dir / "events.jsonl", dir / "validated.jsonl", dir / "validation.txt"));
    const auto lm = step(run_label(c, dir / "validated.jsonl", dir / "labels.tsv"));
    step(run_encode(c, dir / "validated.jsonl", dir / "labels.tsv", dir / "profiles.jsonl", dir / "encoded"));

    fs::path data = dir / "encoded";
    if (c.compress) {
        CompressionReport total;
        for (const char* split : split_names()) {
            const auto m = step(run_compress(c, dir / "encoded" / (std::string(split) + ext),
                                             dir / "compressed" / (std::string(split) + ext),
                                             dir / "compressed" / (std::string(split) + "_report.txt")));
            if (std::string(split) == "train") r.compression_ratio = m.summary["ratio"].get<double>();
        }
        data = dir / "compressed";
    }
    step(run_batch(c, data / (std::string("train") + ext), dir / "batch_plan.txt"));

    Manifest tm;
    r.model_auc = train_and_score(c, c.weights, data, dir / "model", r, &tm, log);
    note(tm);
    r.mean_epoch_seconds = tm.summary["mean_epoch_seconds"].get<double>();
    r.final_train_loss = tm.summary["final_train_loss"].get<double>();
    r.best_epoch = tm.summary["best_epoch"].get<std::size_t>();

    for (const char* split : {"valid", "known_test", "unknown_test"}) {
        const auto preds = dir / "baseline" / (std::string(split) + ".tsv");
        step(run_baseline(c, data / (std::string("train") + ext), data / (std::string(split) + ext),
                          dir / "baseline" / "table.tsv", preds));
        const auto em = step(run_eval(c, preds, dir / "baseline" / "eval" / (std::string(split) + "_groups.tsv"),
                                      dir / "baseline" / "eval" / (std::string(split) + "_roc.tsv")));
        r.baseline_auc[split] = em.summary["macro_auc"].get<double>();
    }

    for (auto s : c.weight_sweep) {
        if (s == c.weights) {
            r.sweep_auc[to_string(s)] = r.model_auc;
            continue;
        }
        r.sweep_auc[to_string(s)] = train_and_score(c, s, data, dir / "sweep" / to_string(s), r, nullptr, log);
    }

    {
        auto f = open_out(dir / "report.tsv");
        f << "method\tvalid_auc\tknown_test_auc\tunknown_test_auc\n";
        f << "model(" << (c.compress ? "compressed" : "uncompressed") << "," << to_string(c.weights) << ")\t"
          << fixed(r.model_auc["valid"]) << '\t' << fixed(r.model_auc["known_test"]) << '\t'
          << fixed(r.model_auc["unknown_test"]) << '\n';
        f << "baseline\t" << fixed(r.baseline_auc["valid"]) << '\t' << fixed(r.baseline_auc["known_test"]) << '\t'
          << fixed(r.baseline_auc["unknown_test"]) << '\n';
        r.artifacts.push_back(dir / "report.tsv");
    }
    if (!r.sweep_auc.empty()) {
        auto f = open_out(dir / "weights_report.tsv");
        f << "weights\tvalid_auc\tknown_test_auc\tunknown_test_auc\n";
        for (auto s : {WeightStrategy::binary, WeightStrategy::inverse_frequency, WeightStrategy::inverse_sqrt_frequency,
                       WeightStrategy::inverse_log_frequency}) {
            auto it = r.sweep_auc.find(to_string(s));
            if (it == r.sweep_auc.end()) continue;
            f << it->first << '\t' << fixed(it->second["valid"]) << '\t' << fixed(it->second["known_test"]) << '\t'
              << fixed(it->second["unknown_test"]) << '\n';
        }
        r.artifacts.push_back(dir / "weights_report.tsv");
    }

    r.report = {{"config_hash", config_hash(c)},
                {"seed", c.seed},
                {"compressed", c.compress},
                {"compression_ratio", r.compression_ratio},
                {"weights", to_string(c.weights)},
                {"model_auc", r.model_auc},
                {"baseline_auc", r.baseline_auc},
                {"sweep_auc", r.sweep_auc},
                {"labels", lm.summary},
                {"best_epoch", r.best_epoch},
                {"final_train_loss", r.final_train_loss},
                {"mean_epoch_seconds", r.mean_epoch_seconds}};
    {
        auto f = open_out(dir / "report.json");
        f << r.report.dump(2) << '\n';
    }
    return r;
}

}  // namespace sensorseq
