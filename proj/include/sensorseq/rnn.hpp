#pragma once

// Classifier: time-distributed dense layer with PReLU units, stacked stateful
// LSTM layers and a sigmoid output, trained with weighted cross-entropy,
// truncated BPTT (state entering a batch is a constant) and Adam.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sensorseq/error.hpp"
#include "sensorseq/random.hpp"
#include "sensorseq/sequencer.hpp"

namespace sensorseq {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kProbFloor = 1e-7;

struct ModelConfig {
    std::size_t input_dim = 0;
    std::size_t dense_units = 16;
    std::size_t lstm_layers = 2;
    std::size_t lstm_units = 32;
    std::uint64_t seed = 1;

    /// Full-size layers: 50 PReLU units, 2 x 500 LSTM.
    static ModelConfig full_size(std::size_t input_dim) { return {input_dim, 50, 2, 500, 1}; }

    void check() const {
        if (input_dim < 1 || dense_units < 1 || lstm_layers < 1 || lstm_units < 1)
            throw ConfigError("model dimensions must all be >= 1");
    }
    bool operator==(const ModelConfig&) const = default;
};

template <class T>
struct ModelParams {
    ModelConfig config;
    Mat<T> dense_w;      // dense x input
    Mat<T> dense_b;      // dense x 1
    Mat<T> prelu_alpha;  // dense x 1
    std::vector<Mat<T>> lstm_w;  // 4H x in, gate blocks [input, forget, candidate, output]
    std::vector<Mat<T>> lstm_u;  // 4H x H
    std::vector<Mat<T>> lstm_b;  // 4H x 1
    Mat<T> out_w;        // H x 1
    Mat<T> out_b;        // 1 x 1

    static ModelParams zeros(const ModelConfig& c) {
        c.check();
        ModelParams p;
        p.config = c;
        const auto D = static_cast<Eigen::Index>(c.input_dim);
        const auto N = static_cast<Eigen::Index>(c.dense_units);
        const auto H = static_cast<Eigen::Index>(c.lstm_units);
        p.dense_w = Mat<T>::Zero(N, D);
        p.dense_b = Mat<T>::Zero(N, 1);
        p.prelu_alpha = Mat<T>::Zero(N, 1);
        for (std::size_t l = 0; l < c.lstm_layers; ++l) {
            p.lstm_w.push_back(Mat<T>::Zero(4 * H, l == 0 ? N : H));
            p.lstm_u.push_back(Mat<T>::Zero(4 * H, H));
            p.lstm_b.push_back(Mat<T>::Zero(4 * H, 1));
        }
        p.out_w = Mat<T>::Zero(H, 1);
        p.out_b = Mat<T>::Zero(1, 1);
        return p;
    }

    template <class F>
    void visit(F&& f) {
        f("dense.weight", dense_w);
        f("dense.bias", dense_b);
        f("dense.prelu_alpha", prelu_alpha);
        for (std::size_t l = 0; l < lstm_w.size(); ++l) {
            const std::string pre = "lstm" + std::to_string(l);
            f(pre + ".input_weight", lstm_w[l]);
            f(pre + ".recurrent_weight", lstm_u[l]);
            f(pre + ".bias", lstm_b[l]);
        }
        f("output.weight", out_w);
        f("output.bias", out_b);
    }

    template <class F>
    void visit(F&& f) const {
        const_cast<ModelParams*>(this)->visit([&](const std::string& n, Mat<T>& m) { f(n, std::as_const(m)); });
    }

    std::vector<Mat<T>*> tensors() {
        std::vector<Mat<T>*> out;
        visit([&](const std::string&, Mat<T>& m) { out.push_back(&m); });
        return out;
    }

    std::size_t size() const {
        std::size_t n = 0;
        visit([&](const std::string&, const Mat<T>& m) { n += static_cast<std::size_t>(m.size()); });
        return n;
    }

    bool all_finite() const {
        bool ok = true;
        visit([&](const std::string&, const Mat<T>& m) { ok = ok && m.allFinite(); });
        return ok;
    }

    template <class U>
    ModelParams<U> cast() const {
        ModelParams<U> out = ModelParams<U>::zeros(config);
        auto dst = out.tensors();
        std::size_t i = 0;
        visit([&](const std::string&, const Mat<T>& m) { *dst[i++] = m.template cast<U>(); });
        return out;
    }

    bool operator==(const ModelParams& o) const {
        if (!(config == o.config)) return false;
        auto a = const_cast<ModelParams*>(this)->tensors();
        auto b = const_cast<ModelParams&>(o).tensors();
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols() || *a[i] != *b[i]) return false;
        return true;
    }
};

/// Glorot-uniform input weights, orthogonal recurrent blocks, forget bias 1, PReLU slope 0.25.
template <class T>
ModelParams<T> init_params(const ModelConfig& c) {
    auto p = ModelParams<T>::zeros(c);
    Rng rng(derive_seed(c.seed, "init"));
    auto glorot = [&](Mat<T>& m, double fan_in, double fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<T>(rng.uniform(-a, a));
    };
    const auto H = static_cast<Eigen::Index>(c.lstm_units);
    glorot(p.dense_w, static_cast<double>(c.input_dim), static_cast<double>(c.dense_units));
    p.prelu_alpha.setConstant(static_cast<T>(0.25));
    for (std::size_t l = 0; l < c.lstm_layers; ++l) {
        glorot(p.lstm_w[l], static_cast<double>(p.lstm_w[l].cols()), static_cast<double>(4 * H));
        for (Eigen::Index g = 0; g < 4; ++g) {
            Eigen::MatrixXd a(H, H);
            for (Eigen::Index j = 0; j < H; ++j)
                for (Eigen::Index i = 0; i < H; ++i) a(i, j) = rng.normal();
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
            Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(H, H);
            p.lstm_u[l].middleRows(g * H, H) = q.cast<T>();
        }
        p.lstm_b[l].middleRows(H, H).setConstant(static_cast<T>(1.0));
    }
    glorot(p.out_w, static_cast<double>(H), 1.0);
    return p;
}

/// Hidden and cell vectors per layer, one column per lane.
template <class T>
struct LstmState {
    std::vector<Mat<T>> h;
    std::vector<Mat<T>> c;

    static LstmState zeros(const ModelConfig& cfg, std::size_t lanes) {
        LstmState s;
        const auto H = static_cast<Eigen::Index>(cfg.lstm_units);
        for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
            s.h.push_back(Mat<T>::Zero(H, static_cast<Eigen::Index>(lanes)));
            s.c.push_back(Mat<T>::Zero(H, static_cast<Eigen::Index>(lanes)));
        }
        return s;
    }
};

template <class T>
struct StepCache {
    Mat<T> x, z, a;
    std::vector<Mat<T>> gates, c_prev, h_prev, tanh_c, h;
    Eigen::Array<bool, Eigen::Dynamic, 1> clamped;
};

template <class T>
struct ForwardCache {
    std::vector<StepCache<T>> steps;
};

namespace detail {

template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
    using S = typename Derived::Scalar;
    return (S(1) + (-x).exp()).inverse();
}

template <class T>
void check_shapes(const Batch& batch, const ModelParams<T>& p, const LstmState<T>& s) {
    if (batch.dim != p.config.input_dim)
        throw ShapeMismatch("batch dim " + std::to_string(batch.dim) + " != model input " +
                            std::to_string(p.config.input_dim));
    if (s.h.size() != p.config.lstm_layers || s.c.size() != p.config.lstm_layers)
        throw ShapeMismatch("state layer count");
    for (std::size_t l = 0; l < s.h.size(); ++l)
        if (s.h[l].rows() != static_cast<Eigen::Index>(p.config.lstm_units) ||
            s.h[l].cols() != static_cast<Eigen::Index>(batch.lanes) || s.c[l].rows() != s.h[l].rows() ||
            s.c[l].cols() != s.h[l].cols())
            throw ShapeMismatch("state dimensions");
}

}  // namespace detail

/// Runs one batch. Returns probabilities (steps x lanes); `state` is updated in
/// place. Lanes flagged in batch.reset start from zero state. Padded steps keep
/// the lane's state unchanged.
template <class T>
Mat<T> forward(const Batch& batch, const ModelParams<T>& p, LstmState<T>& state, ForwardCache<T>* cache = nullptr) {
    detail::check_shapes(batch, p, state);
    const auto B = static_cast<Eigen::Index>(batch.lanes);
    const auto D = static_cast<Eigen::Index>(batch.dim);
    const auto H = static_cast<Eigen::Index>(p.config.lstm_units);
    const std::size_t layers = p.config.lstm_layers;

    for (Eigen::Index lane = 0; lane < B; ++lane) {
        if (!batch.reset[static_cast<std::size_t>(lane)]) continue;
        for (std::size_t l = 0; l < layers; ++l) {
            state.h[l].col(lane).setZero();
            state.c[l].col(lane).setZero();
        }
    }

    Mat<T> probs(static_cast<Eigen::Index>(batch.steps), B);
    if (cache) cache->steps.assign(batch.steps, StepCache<T>{});

    for (std::size_t s = 0; s < batch.steps; ++s) {
        Mat<T> x = Eigen::Map<const Eigen::MatrixXf>(batch.x.data() + s * batch.lanes * batch.dim, D, B).cast<T>();
        Mat<T> z = p.dense_w * x;
        z.colwise() += p.dense_b.col(0);
        Mat<T> a = z.cwiseMax(T(0)) + (z.cwiseMin(T(0)).array().colwise() * p.prelu_alpha.col(0).array()).matrix();

        StepCache<T>* sc = cache ? &cache->steps[s] : nullptr;
        if (sc) {
            sc->gates.resize(layers);
            sc->c_prev.resize(layers);
            sc->h_prev.resize(layers);
            sc->tanh_c.resize(layers);
            sc->h.resize(layers);
        }

        const Mat<T>* in = &a;
        for (std::size_t l = 0; l < layers; ++l) {
            Mat<T> g = p.lstm_w[l] * (*in) + p.lstm_u[l] * state.h[l];
            g.colwise() += p.lstm_b[l].col(0);
            g.topRows(H) = detail::sigmoid(g.topRows(H).array()).matrix();
            g.middleRows(H, H) = detail::sigmoid(g.middleRows(H, H).array()).matrix();
            g.middleRows(2 * H, H) = g.middleRows(2 * H, H).array().tanh().matrix();
            g.bottomRows(H) = detail::sigmoid(g.bottomRows(H).array()).matrix();

            Mat<T> c_new = (g.middleRows(H, H).array() * state.c[l].array() +
                            g.topRows(H).array() * g.middleRows(2 * H, H).array())
                               .matrix();
            for (Eigen::Index lane = 0; lane < B; ++lane)
                if (batch.pad[batch.at(s, static_cast<std::size_t>(lane))]) c_new.col(lane) = state.c[l].col(lane);
            Mat<T> tc = c_new.array().tanh().matrix();
            Mat<T> h_new = (g.bottomRows(H).array() * tc.array()).matrix();
            for (Eigen::Index lane = 0; lane < B; ++lane)
                if (batch.pad[batch.at(s, static_cast<std::size_t>(lane))]) h_new.col(lane) = state.h[l].col(lane);

            if (sc) {
                sc->gates[l] = std::move(g);
                sc->c_prev[l] = state.c[l];
                sc->h_prev[l] = state.h[l];
                sc->tanh_c[l] = tc;
            }
            state.c[l] = std::move(c_new);
            state.h[l] = std::move(h_new);
            if (sc) sc->h[l] = state.h[l];
            in = sc ? &sc->h[l] : &state.h[l];
        }

        Mat<T> logit = p.out_w.transpose() * state.h[layers - 1];
        logit.array() += p.out_b(0, 0);
        Eigen::Array<T, 1, Eigen::Dynamic> prob = detail::sigmoid(logit.array().row(0));
        const T lo = static_cast<T>(kProbFloor);
        const T hi = static_cast<T>(1.0 - kProbFloor);
        if (sc) sc->clamped = (prob < lo || prob > hi).transpose();
        probs.row(static_cast<Eigen::Index>(s)) = prob.max(lo).min(hi).matrix();

        if (sc) {
            sc->x = std::move(x);
            sc->z = std::move(z);
            sc->a = std::move(a);
        }
    }
    return probs;
}

struct LossValue {
    double sum = 0.0;     // sum of w * cross-entropy
    double weight = 0.0;  // sum of w
    double value() const { return sum / std::max(weight, 1.0); }
};

/// Weighted binary cross-entropy, normalized by max(sum of weights, 1).
inline double loss(const std::vector<double>& probs, const std::vector<double>& y, const std::vector<double>& w) {
    if (probs.size() != y.size() || probs.size() != w.size()) throw ShapeMismatch("loss inputs");
    LossValue lv;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        lv.weight += w[i];
        if (w[i] == 0.0) continue;
        const double p = std::clamp(probs[i], kProbFloor, 1.0 - kProbFloor);
        lv.sum += w[i] * -(y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
    }
    return lv.value();
}

template <class T>
LossValue batch_loss(const Mat<T>& probs, const Batch& batch) {
    LossValue lv;
    for (std::size_t s = 0; s < batch.steps; ++s) {
        for (std::size_t lane = 0; lane < batch.lanes; ++lane) {
            const std::size_t k = batch.at(s, lane);
            const double w = batch.w[k];
            lv.weight += w;
            if (w == 0.0) continue;
            const double p = std::clamp(static_cast<double>(probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(lane))),
                                        kProbFloor, 1.0 - kProbFloor);
            const double y = batch.y[k];
            lv.sum += w * -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
        }
    }
    return lv;
}

/// Gradient of the batch loss w.r.t. every parameter, by backpropagation through
/// the batch's steps. With normalize = false the 1 / max(sum w, 1) factor is dropped.
template <class T>
ModelParams<T> backward(const Batch& batch, const ModelParams<T>& p, const ForwardCache<T>& cache, const Mat<T>& probs,
                        bool normalize = true) {
    if (cache.steps.size() != batch.steps) throw ShapeMismatch("forward cache does not match batch");
    auto g = ModelParams<T>::zeros(p.config);
    const auto B = static_cast<Eigen::Index>(batch.lanes);
    const auto H = static_cast<Eigen::Index>(p.config.lstm_units);
    const std::size_t layers = p.config.lstm_layers;

    double wsum = 0.0;
    for (double w : batch.w) wsum += w;
    const T scale = normalize ? static_cast<T>(1.0 / std::max(wsum, 1.0)) : T(1);

    std::vector<Mat<T>> dh_next(layers, Mat<T>::Zero(H, B));
    std::vector<Mat<T>> dc_next(layers, Mat<T>::Zero(H, B));

    for (std::size_t s = batch.steps; s-- > 0;) {
        const StepCache<T>& sc = cache.steps[s];
        Mat<T> dlogit(1, B);
        for (Eigen::Index lane = 0; lane < B; ++lane) {
            const std::size_t k = batch.at(s, static_cast<std::size_t>(lane));
            const double w = batch.w[k];
            if (w == 0.0 || sc.clamped(lane))
                dlogit(0, lane) = T(0);
            else
                dlogit(0, lane) =
                    static_cast<T>(w) * scale * (probs(static_cast<Eigen::Index>(s), lane) - static_cast<T>(batch.y[k]));
        }
        g.out_w += sc.h[layers - 1] * dlogit.transpose();
        g.out_b(0, 0) += dlogit.sum();
        Mat<T> dh = p.out_w * dlogit;

        for (std::size_t l = layers; l-- > 0;) {
            dh += dh_next[l];
            const Mat<T>& gt = sc.gates[l];
            const auto i = gt.topRows(H).array();
            const auto f = gt.middleRows(H, H).array();
            const auto cand = gt.middleRows(2 * H, H).array();
            const auto o = gt.bottomRows(H).array();
            const auto tc = sc.tanh_c[l].array();

            Mat<T> dc = (dc_next[l].array() + dh.array() * o * (T(1) - tc * tc)).matrix();
            Mat<T> dG(4 * H, B);
            dG.topRows(H) = (dc.array() * cand * i * (T(1) - i)).matrix();
            dG.middleRows(H, H) = (dc.array() * sc.c_prev[l].array() * f * (T(1) - f)).matrix();
            dG.middleRows(2 * H, H) = (dc.array() * i * (T(1) - cand * cand)).matrix();
            dG.bottomRows(H) = (dh.array() * tc * o * (T(1) - o)).matrix();
            Mat<T> dc_prev = (dc.array() * f).matrix();

            for (Eigen::Index lane = 0; lane < B; ++lane) {
                if (!batch.pad[batch.at(s, static_cast<std::size_t>(lane))]) continue;
                dG.col(lane).setZero();
                dc_prev.col(lane) = dc_next[l].col(lane);
            }

            const Mat<T>& in = l == 0 ? sc.a : sc.h[l - 1];
            g.lstm_w[l].noalias() += dG * in.transpose();
            g.lstm_u[l].noalias() += dG * sc.h_prev[l].transpose();
            g.lstm_b[l] += dG.rowwise().sum();

            Mat<T> dh_prev = p.lstm_u[l].transpose() * dG;
            for (Eigen::Index lane = 0; lane < B; ++lane)
                if (batch.pad[batch.at(s, static_cast<std::size_t>(lane))]) dh_prev.col(lane) = dh.col(lane);
            dh_next[l] = std::move(dh_prev);
            dc_next[l] = std::move(dc_prev);
            dh = p.lstm_w[l].transpose() * dG;
        }

        const auto z = sc.z.array();
        Mat<T> dz = (dh.array() * (z > T(0)).select(Mat<T>::Ones(z.rows(), z.cols()).array(),
                                                     p.prelu_alpha.col(0).replicate(1, B).array()))
                        .matrix();
        g.prelu_alpha += (dh.array() * z.min(T(0))).matrix().rowwise().sum();
        g.dense_w.noalias() += dz * sc.x.transpose();
        g.dense_b += dz.rowwise().sum();
    }
    return g;
}

template <class T>
struct AdamState {
    double step_size = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<Mat<T>> m;
    std::vector<Mat<T>> v;
};

/// Bias-corrected Adam update, in place.
template <class T>
void adam_step(ModelParams<T>& params, ModelParams<T>& grads, AdamState<T>& adam) {
    auto ps = params.tensors();
    auto gs = grads.tensors();
    if (adam.m.empty()) {
        for (auto* t : ps) {
            adam.m.push_back(Mat<T>::Zero(t->rows(), t->cols()));
            adam.v.push_back(Mat<T>::Zero(t->rows(), t->cols()));
        }
    }
    ++adam.step;
    const T b1 = static_cast<T>(adam.beta1);
    const T b2 = static_cast<T>(adam.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(adam.beta1, static_cast<double>(adam.step)));
    const T c2 = static_cast<T>(1.0 - std::pow(adam.beta2, static_cast<double>(adam.step)));
    const T lr = static_cast<T>(adam.step_size);
    const T eps = static_cast<T>(adam.epsilon);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        auto g = gs[i]->array();
        adam.m[i].array() = b1 * adam.m[i].array() + (T(1) - b1) * g;
        adam.v[i].array() = b2 * adam.v[i].array() + (T(1) - b2) * g * g;
        ps[i]->array() -= lr * (adam.m[i].array() / c1) / ((adam.v[i].array() / c2).sqrt() + eps);
    }
}

template <class T>
T gradient_norm(ModelParams<T>& g) {
    T sq = 0;
    for (auto* t : g.tensors()) sq += t->squaredNorm();
    return std::sqrt(sq);
}

/// Continual single-sample prediction with one recurrent state per user.
/// New users start from zero state.
template <class T>
class OnlinePredictor {
public:
    explicit OnlinePredictor(const ModelParams<T>& params) : params_(&params) {}

    double predict(const std::string& user_id, const std::vector<float>& x) {
        auto it = states_.find(user_id);
        if (it == states_.end()) it = states_.emplace(user_id, LstmState<T>::zeros(params_->config, 1)).first;
        Batch b(1, 1, x.size());
        std::copy(x.begin(), x.end(), b.x.begin());
        b.pad[0] = 0;
        const Mat<T> p = forward(b, *params_, it->second);
        return static_cast<double>(p(0, 0));
    }

    bool knows(const std::string& user_id) const { return states_.count(user_id) > 0; }
    void forget(const std::string& user_id) { states_.erase(user_id); }

private:
    const ModelParams<T>* params_;
    std::map<std::string, LstmState<T>> states_;
};

/// Probabilities for every row of every user (stateful, users processed in lanes).
template <class T>
std::map<std::string, std::vector<double>> predict_rows(const ModelParams<T>& params, const RowStreams& rows,
                                                        std::size_t sequence_length = 64, std::size_t lanes = 8) {
    SequencerConfig sc;
    sc.sequence_length = sequence_length;
    sc.batch_size = lanes;
    std::map<std::string, std::vector<double>> out;
    for (const auto& [user, r] : rows) out[user].assign(r.size(), 0.0);
    const auto buckets = plan_buckets(rows, sc);
    LstmState<T> state = LstmState<T>::zeros(params.config, lanes);
    for_each_batch(buckets, rows, sc, params.config.input_dim, [&](const Batch& b, std::size_t bucket, std::size_t) {
        const Mat<T> probs = forward(b, params, state);
        const auto& users = buckets[bucket].users;
        for (std::size_t s = 0; s < b.steps; ++s)
            for (std::size_t lane = 0; lane < users.size(); ++lane) {
                const auto idx = b.row[b.at(s, lane)];
                if (idx >= 0)
                    out[users[lane]][static_cast<std::size_t>(idx)] =
                        static_cast<double>(probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(lane)));
            }
    });
    return out;
}

// Checkpoint: "sensorseq-checkpoint 1", a config line, then per tensor
// "tensor <name> <rows> <cols>" followed by the values (column-major, one per
// line, shortest round-trip decimal).

inline void write_checkpoint(std::ostream& out, const ModelParams<double>& p) {
    const auto& c = p.config;
    out << "sensorseq-checkpoint 1\n";
    out << "config input_dim=" << c.input_dim << " dense_units=" << c.dense_units << " lstm_layers=" << c.lstm_layers
        << " lstm_units=" << c.lstm_units << " seed=" << c.seed << '\n';
    std::string buf;
    p.visit([&](const std::string& name, const Mat<double>& m) {
        out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            char tmp[64];
            auto [end, ec] = std::to_chars(tmp, tmp + sizeof tmp, m.data()[i]);
            out.write(tmp, end - tmp);
            out << '\n';
        }
    });
}

inline ModelParams<double> read_checkpoint(std::istream& in) {
    std::string magic, word;
    int version = 0;
    if (!(in >> magic >> version) || magic != "sensorseq-checkpoint" || version != 1)
        throw IoError("checkpoint: bad header");
    ModelConfig c;
    if (!(in >> word) || word != "config") throw IoError("checkpoint: missing config");
    for (int k = 0; k < 5; ++k) {
        if (!(in >> word)) throw IoError("checkpoint: truncated config");
        const auto eq = word.find('=');
        const std::string key = word.substr(0, eq);
        const std::uint64_t val = std::stoull(word.substr(eq + 1));
        if (key == "input_dim") c.input_dim = val;
        else if (key == "dense_units") c.dense_units = val;
        else if (key == "lstm_layers") c.lstm_layers = val;
        else if (key == "lstm_units") c.lstm_units = val;
        else if (key == "seed") c.seed = val;
        else throw IoError("checkpoint: unknown config key " + key);
    }
    auto p = ModelParams<double>::zeros(c);
    p.visit([&](const std::string& name, Mat<double>& m) {
        std::string tag, got;
        Eigen::Index r = 0, cols = 0;
        if (!(in >> tag >> got >> r >> cols) || tag != "tensor" || got != name || r != m.rows() || cols != m.cols())
            throw IoError("checkpoint: expected tensor " + name);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            std::string tok;
            if (!(in >> tok)) throw IoError("checkpoint: truncated tensor " + name);
            double v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc()) throw IoError("checkpoint: bad value in " + name);
            m.data()[i] = v;
        }
    });
    return p;
}

}  // namespace sensorseq
