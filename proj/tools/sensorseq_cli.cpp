// sensorseq: stage-by-stage or end-to-end notification-attendance pipeline.
//
// Exit codes: 0 success, 1 usage/config, 2 data/I-O, 3 numeric divergence.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "sensorseq/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sensorseq;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string format = "text";
    bool quiet = false;
};

PipelineConfig resolve(const Common& o) {
    PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_pipeline_config(o.config);
    if (o.seed) c.seed = *o.seed;
    c.apply_seeds();
    c.threads = o.threads;
    c.format = o.format == "binary" ? MatrixFormat::binary : MatrixFormat::text;
    return c;
}

void add_common(CLI::App* sub, Common& o) {
    sub->add_option("--config", o.config, "pipeline config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed; overrides the config");
    sub->add_option("--threads", o.threads, "worker cap; 1 gives bit-identical runs")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "matrix format")->check(CLI::IsMember({"text", "binary"}));
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
}

void report(const Manifest& m, bool quiet) {
    write_manifest(m);
    if (!quiet) std::cout << m.stage << ": " << m.summary.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse phone-sensor logs -> compressed weighted sequences -> stateful LSTM attendance model"};
    app.require_subcommand(1);
    Common o;

    std::string out, in, events, labels, profiles, report_path, table, train_path, valid_path, checkpoint, metrics,
        predictions, groups, roc, strategy;

    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    synth->add_option("--out", out, "output directory")->required();

    auto* validate = app.add_subcommand("validate", "schema-check and sort an event log");
    validate->add_option("--events", events)->required()->check(CLI::ExistingFile);
    validate->add_option("--out", out)->required();
    validate->add_option("--report", report_path);

    auto* label = app.add_subcommand("label", "derive notification attendance labels");
    label->add_option("--events", events)->required()->check(CLI::ExistingFile);
    label->add_option("--out", out)->required();

    auto* encode = app.add_subcommand("encode", "split, fit the encoder on train, encode all splits");
    encode->add_option("--events", events)->required()->check(CLI::ExistingFile);
    encode->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
    encode->add_option("--profiles", profiles)->required()->check(CLI::ExistingFile);
    encode->add_option("--out", out, "output directory")->required();

    auto* compress = app.add_subcommand("compress", "time-based compression of an encoded matrix");
    compress->add_option("--in", in)->required()->check(CLI::ExistingFile);
    compress->add_option("--out", out)->required();
    compress->add_option("--report", report_path);

    auto* weigh = app.add_subcommand("weigh", "attach per-user class weights");
    weigh->add_option("--in", in)->required()->check(CLI::ExistingFile);
    weigh->add_option("--out", out)->required();
    weigh->add_option("--table", table);
    weigh->add_option("--strategy", strategy, "binary | inverse_frequency | inverse_sqrt_frequency | inverse_log_frequency");

    auto* batch = app.add_subcommand("batch", "write the bucket/batch plan");
    batch->add_option("--in", in)->required()->check(CLI::ExistingFile);
    batch->add_option("--out", out)->required();

    auto* trainc = app.add_subcommand("train", "train the stateful network");
    trainc->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    trainc->add_option("--valid", valid_path)->check(CLI::ExistingFile);
    trainc->add_option("--out", checkpoint, "checkpoint path")->required();
    trainc->add_option("--metrics", metrics);

    auto* predict = app.add_subcommand("predict", "score the labeled rows of a matrix");
    predict->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
    predict->add_option("--in", in)->required()->check(CLI::ExistingFile);
    predict->add_option("--out", out)->required();

    auto* baseline = app.add_subcommand("baseline", "random click-rate baseline");
    baseline->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    baseline->add_option("--in", in)->required()->check(CLI::ExistingFile);
    baseline->add_option("--out", out)->required();
    baseline->add_option("--table", table);

    auto* eval = app.add_subcommand("eval", "macro AUC per (user, app category)");
    eval->add_option("--predictions", predictions)->required()->check(CLI::ExistingFile);
    eval->add_option("--groups", groups)->required();
    eval->add_option("--roc", roc);

    auto* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
    pipeline->add_option("--out", out, "work directory")->required();

    for (auto* sub : app.get_subcommands({})) add_common(sub, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    auto with_suffix = [](const std::string& base, const char* suffix) { return fs::path(base + suffix); };

    try {
        const PipelineConfig c = resolve(o);
        if (synth->parsed()) {
            const fs::path d = out;
            report(run_synth(c, d / "events.jsonl", d / "profiles.jsonl", d / "hidden_truth.tsv"), o.quiet);
        } else if (validate->parsed()) {
            report(run_validate(c, events, out, report_path.empty() ? with_suffix(out, ".report.txt") : fs::path(report_path)),
                   o.quiet);
        } else if (label->parsed()) {
            report(run_label(c, events, out), o.quiet);
        } else if (encode->parsed()) {
            report(run_encode(c, events, labels, profiles, out), o.quiet);
        } else if (compress->parsed()) {
            report(run_compress(c, in, out, report_path.empty() ? with_suffix(out, ".report.txt") : fs::path(report_path)),
                   o.quiet);
        } else if (weigh->parsed()) {
            const auto s = strategy.empty() ? c.weights : parse_weight_strategy(strategy);
            report(run_weigh(c, s, in, out, table.empty() ? with_suffix(out, ".weights.tsv") : fs::path(table)), o.quiet);
        } else if (batch->parsed()) {
            report(run_batch(c, in, out), o.quiet);
        } else if (trainc->parsed()) {
            std::optional<fs::path> valid;
            if (!valid_path.empty()) valid = valid_path;
            report(run_train(c, train_path, valid, checkpoint,
                             metrics.empty() ? with_suffix(checkpoint, ".metrics.tsv") : fs::path(metrics),
                             o.quiet ? nullptr : &std::cout),
                   o.quiet);
        } else if (predict->parsed()) {
            report(run_predict(c, checkpoint, in, out), o.quiet);
        } else if (baseline->parsed()) {
            report(run_baseline(c, train_path, in, table.empty() ? with_suffix(out, ".table.tsv") : fs::path(table), out),
                   o.quiet);
        } else if (eval->parsed()) {
            report(run_eval(c, predictions, groups, roc.empty() ? with_suffix(groups, ".roc.tsv") : fs::path(roc)),
                   o.quiet);
        } else if (pipeline->parsed()) {
            const auto r = run_pipeline(c, out, o.quiet ? nullptr : &std::cout);
            if (!o.quiet) std::cout << r.report.dump(2) << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "sensorseq: " << e.what() << '\n';
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "sensorseq: io: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
