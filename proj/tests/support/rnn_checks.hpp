#pragma once

// Finite-difference gradient check, stateful split/concat equivalence and
// masking probes for the recurrent classifier.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sensorseq/random.hpp"
#include "sensorseq/rnn.hpp"

namespace rnncheck {

using sensorseq::Batch;
using sensorseq::LstmState;
using sensorseq::Mat;
using sensorseq::ModelConfig;
using sensorseq::ModelParams;
using sensorseq::Rng;

inline ModelConfig desk_model(std::uint64_t seed = 3) { return {12, 6, 2, 8, seed}; }

/// Batch with sparse [0.05, 1] features, some labels, and a padded tail on lane 0.
inline Batch random_batch(Rng& rng, std::size_t lanes, std::size_t steps, std::size_t dim, std::size_t pad_tail = 0,
                          double label_p = 0.4) {
    Batch b(lanes, steps, dim);
    for (std::size_t s = 0; s < steps; ++s)
        for (std::size_t lane = 0; lane < lanes; ++lane) {
            const std::size_t k = b.at(s, lane);
            if (lane == 0 && s + pad_tail >= steps) continue;
            b.pad[k] = 0;
            b.row[k] = static_cast<std::int64_t>(s);
            for (std::size_t d = 0; d < dim; ++d)
                if (rng.bernoulli(0.6)) b.x[k * dim + d] = static_cast<float>(rng.uniform(0.05, 1.0));
            if (rng.bernoulli(label_p)) {
                b.y[k] = rng.bernoulli(0.5) ? 1.0f : 0.0f;
                b.w[k] = rng.uniform(0.2, 3.0);
            }
        }
    return b;
}

inline LstmState<double> random_state(Rng& rng, const ModelConfig& c, std::size_t lanes) {
    auto s = LstmState<double>::zeros(c, lanes);
    for (auto* v : {&s.h, &s.c})
        for (auto& m : *v)
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-0.5, 0.5);
    return s;
}

inline double loss_at(const Batch& b, const ModelParams<double>& p, const LstmState<double>& s0) {
    auto s = s0;
    const auto probs = sensorseq::forward(b, p, s);
    return sensorseq::batch_loss(probs, b).value();
}

struct GroupError {
    std::string name;
    double relative = 0.0;
};

/// Per-group ||analytic - numeric|| / max(||analytic||, ||numeric||), central differences.
inline std::vector<GroupError> gradient_check(const Batch& b, ModelParams<double> p, const LstmState<double>& s0,
                                              double h = 1e-5) {
    auto s = s0;
    sensorseq::ForwardCache<double> cache;
    const auto probs = sensorseq::forward(b, p, s, &cache);
    auto grads = sensorseq::backward(b, p, cache, probs);
    std::vector<Mat<double>> analytic;
    for (auto* t : grads.tensors()) analytic.push_back(*t);

    std::vector<std::string> names;
    p.visit([&](const std::string& n, const Mat<double>&) { names.push_back(n); });
    auto tensors = p.tensors();
    std::vector<GroupError> out;
    for (std::size_t g = 0; g < tensors.size(); ++g) {
        Mat<double>& m = *tensors[g];
        Mat<double> numeric(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            const double orig = m.data()[i];
            m.data()[i] = orig + h;
            const double up = loss_at(b, p, s0);
            m.data()[i] = orig - h;
            const double down = loss_at(b, p, s0);
            m.data()[i] = orig;
            numeric.data()[i] = (up - down) / (2.0 * h);
        }
        const double denom = std::max({analytic[g].norm(), numeric.norm(), 1e-300});
        out.push_back({names[g], (analytic[g] - numeric).norm() / denom});
    }
    return out;
}

inline double max_error(const std::vector<GroupError>& e) {
    double m = 0.0;
    for (const auto& g : e) m = std::max(m, g.relative);
    return m;
}

/// Slices steps [from, from + n) of a batch; reset flags are cleared.
inline Batch slice(const Batch& b, std::size_t from, std::size_t n) {
    Batch out(b.lanes, n, b.dim);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t lane = 0; lane < b.lanes; ++lane) {
            const std::size_t src = b.at(from + s, lane), dst = out.at(s, lane);
            std::copy_n(b.x.begin() + static_cast<std::ptrdiff_t>(src * b.dim), b.dim,
                        out.x.begin() + static_cast<std::ptrdiff_t>(dst * b.dim));
            out.y[dst] = b.y[src];
            out.w[dst] = b.w[src];
            out.pad[dst] = b.pad[src];
            out.row[dst] = b.row[src];
        }
    return out;
}

/// Max |difference| between the probabilities (and final states) of two
/// consecutive L-step batches and one 2L-step batch.
inline double stateful_gap(const ModelParams<double>& p, const Batch& whole, const LstmState<double>& s0) {
    const std::size_t L = whole.steps / 2;
    auto s_split = s0;
    const auto a = sensorseq::forward(slice(whole, 0, L), p, s_split);
    const auto b = sensorseq::forward(slice(whole, L, L), p, s_split);
    auto s_whole = s0;
    const auto c = sensorseq::forward(slice(whole, 0, 2 * L), p, s_whole);
    double gap = std::max((a - c.topRows(static_cast<Eigen::Index>(L))).cwiseAbs().maxCoeff(),
                          (b - c.bottomRows(static_cast<Eigen::Index>(L))).cwiseAbs().maxCoeff());
    for (std::size_t l = 0; l < s0.h.size(); ++l) {
        gap = std::max(gap, (s_split.h[l] - s_whole.h[l]).cwiseAbs().maxCoeff());
        gap = std::max(gap, (s_split.c[l] - s_whole.c[l]).cwiseAbs().maxCoeff());
    }
    return gap;
}

struct MaskingProbe {
    double loss_change_from_label = 0.0;  // flipping y of a w=0 row
    double loss_change_from_prob = 0.0;   // overriding the row's own probability
    double later_state_change = 0.0;      // changing its features moves later outputs
};

/// Row (step, lane) must carry w = 0 and not be the last step.
inline MaskingProbe masking_probe(const ModelParams<double>& p, Batch b, const LstmState<double>& s0, std::size_t step,
                                  std::size_t lane) {
    MaskingProbe out;
    const std::size_t k = b.at(step, lane);
    b.w[k] = 0.0;
    const double base = loss_at(b, p, s0);

    Batch flipped = b;
    flipped.y[k] = 1.0f - flipped.y[k];
    out.loss_change_from_label = std::abs(loss_at(flipped, p, s0) - base);

    auto s = s0;
    auto probs = sensorseq::forward(b, p, s);
    const double l1 = sensorseq::batch_loss(probs, b).value();
    probs(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(lane)) = 0.987654;
    const double l2 = sensorseq::batch_loss(probs, b).value();
    out.loss_change_from_prob = std::abs(l2 - l1);

    Batch moved = b;
    for (std::size_t d = 0; d < b.dim; ++d) moved.x[k * b.dim + d] = d % 2 ? 0.9f : 0.05f;
    auto sa = s0, sb = s0;
    const auto pa = sensorseq::forward(b, p, sa);
    const auto pb = sensorseq::forward(moved, p, sb);
    for (std::size_t t = step + 1; t < b.steps; ++t)
        out.later_state_change = std::max(out.later_state_change, std::abs(pa(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(lane)) -
                                                                           pb(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(lane))));
    return out;
}

}  // namespace rnncheck
