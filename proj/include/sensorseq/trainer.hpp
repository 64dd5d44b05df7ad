#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sensorseq/error.hpp"
#include "sensorseq/eval.hpp"
#include "sensorseq/rnn.hpp"
#include "sensorseq/sequencer.hpp"

namespace sensorseq {

struct TrainConfig {
    std::size_t epochs = 20;
    SequencerConfig sequencer;
    double step_size = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 0.0;  // 0 disables gradient-norm clipping
    bool keep_best_valid = true;
    std::string divergence_dump;  // checkpoint path written before DivergenceDetected
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> valid_loss;
    std::optional<double> valid_auc;
    double wall_seconds = 0.0;  // training pass only
    std::size_t batches = 0;
    std::size_t updates = 0;
};

struct TrainResult {
    ModelParams<double> params;  // selected checkpoint
    std::vector<EpochMetrics> metrics;
    std::size_t best_epoch = 0;  // 0 = initial parameters
    double final_train_loss = 0.0;
};

struct ValidationScore {
    double loss = 0.0;
    std::optional<double> macro_auc;
};

inline ValidationScore score_rows(const ModelParams<double>& params, const RowStreams& rows) {
    ValidationScore out;
    const auto probs = predict_rows(params, rows);
    LossValue lv;
    for (const auto& [user, r] : rows) {
        const auto& p = probs.at(user);
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!r[i].labeled() || r[i].w == 0.0) continue;
            const double q = std::clamp(p[i], kProbFloor, 1.0 - kProbFloor);
            const double y = r[i].y == 1 ? 1.0 : 0.0;
            lv.sum += r[i].w * -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
            lv.weight += r[i].w;
        }
    }
    out.loss = lv.value();
    try {
        out.macro_auc = macro_auc(scored_labels(rows, probs)).macro_auc;
    } catch (const NoValidGroups&) {
    }
    return out;
}

/// Stateful training over the bucket plan of `train_rows`. Lane states reset at
/// bucket boundaries; gradients stop at batch boundaries.
inline TrainResult train(const RowStreams& train_rows, const RowStreams* valid_rows, ModelParams<double> params,
                         const TrainConfig& config, std::ostream* log = nullptr) {
    config.sequencer.check();
    TrainResult result;
    result.params = params;
    std::optional<double> best_auc;

    AdamState<double> adam;
    adam.step_size = config.step_size;
    adam.beta1 = config.beta1;
    adam.beta2 = config.beta2;
    adam.epsilon = config.epsilon;

    const auto buckets = plan_buckets(train_rows, config.sequencer);
    const std::size_t dim = params.config.input_dim;
    const std::size_t lanes = config.sequencer.batch_size;

    if (valid_rows && config.keep_best_valid && config.epochs > 0) best_auc = score_rows(params, *valid_rows).macro_auc;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochMetrics m;
        m.epoch = epoch;
        LossValue total;
        LstmState<double> state = LstmState<double>::zeros(params.config, lanes);
        const auto t0 = std::chrono::steady_clock::now();
        for_each_batch(
            buckets, train_rows, config.sequencer, dim,
            [&](const Batch& batch, std::size_t, std::size_t index) {
                ++m.batches;
                double wsum = 0.0;
                for (double w : batch.w) wsum += w;
                if (wsum == 0.0) {
                    forward(batch, params, state);
                    return;
                }
                ForwardCache<double> cache;
                const auto probs = forward(batch, params, state, &cache);
                const auto lv = batch_loss(probs, batch);
                if (!std::isfinite(lv.sum)) {
                    if (!config.divergence_dump.empty()) {
                        std::ofstream dump(config.divergence_dump);
                        write_checkpoint(dump, params);
                    }
                    throw DivergenceDetected("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                                             std::to_string(index));
                }
                total.sum += lv.sum;
                total.weight += lv.weight;
                auto grads = backward(batch, params, cache, probs);
                if (config.clip_norm > 0.0) {
                    const double norm = gradient_norm(grads);
                    if (norm > config.clip_norm)
                        for (auto* t : grads.tensors()) *t *= config.clip_norm / norm;
                }
                adam_step(params, grads, adam);
                ++m.updates;
            },
            epoch);
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        m.train_loss = total.value();
        if (!params.all_finite()) throw DivergenceDetected("non-finite parameters after epoch " + std::to_string(epoch));

        if (valid_rows) {
            const auto vs = score_rows(params, *valid_rows);
            m.valid_loss = vs.loss;
            m.valid_auc = vs.macro_auc;
        }
        if (log) {
            *log << "epoch " << epoch << " train_loss=" << m.train_loss;
            if (m.valid_loss) *log << " valid_loss=" << *m.valid_loss;
            if (m.valid_auc) *log << " valid_auc=" << *m.valid_auc;
            *log << " seconds=" << m.wall_seconds << '\n';
        }
        result.metrics.push_back(m);
        result.final_train_loss = m.train_loss;

        const bool select = !valid_rows || !config.keep_best_valid;
        if (select) {
            result.params = params;
            result.best_epoch = epoch;
        } else if (m.valid_auc && (!best_auc || *m.valid_auc > *best_auc)) {
            best_auc = m.valid_auc;
            result.params = params;
            result.best_epoch = epoch;
        }
    }
    return result;
}

inline void write_metrics(std::ostream& out, const std::vector<EpochMetrics>& metrics) {
    out.precision(10);
    out << "epoch\ttrain_loss\tvalid_loss\tvalid_auc\twall_seconds\tbatches\tupdates\n";
    for (const auto& m : metrics) {
        out << m.epoch << '\t' << m.train_loss << '\t';
        if (m.valid_loss) out << *m.valid_loss; else out << '-';
        out << '\t';
        if (m.valid_auc) out << *m.valid_auc; else out << '-';
        out << '\t' << m.wall_seconds << '\t' << m.batches << '\t' << m.updates << '\n';
    }
}

}  // namespace sensorseq
