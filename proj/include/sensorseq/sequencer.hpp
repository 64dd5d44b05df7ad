#pragma once

// Buckets, batches and sequences for stateful training. Users are sorted by
// sequence count and chunked into buckets of B lanes; every batch of a bucket
// interleaves the same users in the same lane order, so recurrent state can
// be carried from one batch to the next.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"
#include "sensorseq/random.hpp"

namespace sensorseq {

struct SequencerConfig {
    std::size_t sequence_length = 32;
    std::size_t batch_size = 8;
    bool shuffle_buckets = false;
    std::uint64_t seed = 0;

    void check() const {
        if (sequence_length < 1) throw ConfigError("sequence_length must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    }
};

struct UserLength {
    std::string user_id;
    std::size_t rows = 0;
};

struct Bucket {
    std::vector<std::string> users;  // lane order, fixed for all batches
    std::vector<std::size_t> rows;
    std::vector<std::size_t> sequences;
    std::size_t depth = 0;
};

struct Batch {
    std::size_t lanes = 0;
    std::size_t steps = 0;
    std::size_t dim = 0;
    std::vector<float> x;            // [step][lane][dim]
    std::vector<float> y;            // [step][lane], 0 where unlabeled
    std::vector<double> w;           // [step][lane]
    std::vector<std::uint8_t> pad;   // [step][lane], 1 = padding
    std::vector<std::int64_t> row;   // [step][lane], index into the lane user's rows, -1 = padding
    std::vector<std::uint8_t> reset;  // [lane]

    std::size_t at(std::size_t step, std::size_t lane) const { return step * lanes + lane; }
    const float* features(std::size_t step, std::size_t lane) const { return x.data() + (step * lanes + lane) * dim; }

    Batch() = default;
    Batch(std::size_t lanes_, std::size_t steps_, std::size_t dim_)
        : lanes(lanes_), steps(steps_), dim(dim_), x(lanes_ * steps_ * dim_, 0.0f), y(lanes_ * steps_, 0.0f),
          w(lanes_ * steps_, 0.0), pad(lanes_ * steps_, 1), row(lanes_ * steps_, -1), reset(lanes_, 0) {}
};

inline std::size_t sequence_count(std::size_t rows, std::size_t L) { return (rows + L - 1) / L; }

/// Sort by sequence count (descending, ties in input order) and chunk into groups of B.
inline std::vector<Bucket> plan_buckets(const std::vector<UserLength>& users, const SequencerConfig& config) {
    config.check();
    std::vector<std::size_t> order(users.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t L = config.sequence_length;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sequence_count(users[a].rows, L) > sequence_count(users[b].rows, L);
    });
    std::vector<Bucket> out;
    for (std::size_t i = 0; i < order.size(); i += config.batch_size) {
        Bucket b;
        for (std::size_t k = i; k < std::min(order.size(), i + config.batch_size); ++k) {
            const auto& u = users[order[k]];
            b.users.push_back(u.user_id);
            b.rows.push_back(u.rows);
            b.sequences.push_back(sequence_count(u.rows, L));
            b.depth = std::max(b.depth, b.sequences.back());
        }
        out.push_back(std::move(b));
    }
    return out;
}

inline std::vector<Bucket> plan_buckets(const RowStreams& rows, const SequencerConfig& config) {
    std::vector<UserLength> lengths;
    for (const auto& [user, r] : rows) lengths.push_back({user, r.size()});
    return plan_buckets(lengths, config);
}

/// Batch t of a bucket: lane u holds user u's t-th sequence, zero-padded at the tail.
inline Batch build_batch(const Bucket& bucket, std::size_t t, const RowStreams& rows, const SequencerConfig& config,
                         std::size_t dim) {
    const std::size_t L = config.sequence_length;
    const std::size_t B = config.batch_size;
    Batch batch(B, L, dim);
    for (std::size_t lane = 0; lane < B; ++lane) batch.reset[lane] = t == 0 ? 1 : 0;
    for (std::size_t lane = 0; lane < bucket.users.size(); ++lane) {
        const auto& user_rows = rows.at(bucket.users[lane]);
        for (std::size_t s = 0; s < L; ++s) {
            const std::size_t idx = t * L + s;
            if (idx >= user_rows.size()) break;
            const SampleRow& r = user_rows[idx];
            if (r.x.size() != dim) throw ShapeMismatch("row width " + std::to_string(r.x.size()) + " != " + std::to_string(dim));
            const std::size_t k = batch.at(s, lane);
            std::copy(r.x.begin(), r.x.end(), batch.x.begin() + static_cast<std::ptrdiff_t>(k * dim));
            batch.y[k] = r.y == 1 ? 1.0f : 0.0f;
            batch.w[k] = r.labeled() ? r.w : 0.0;
            batch.pad[k] = 0;
            batch.row[k] = static_cast<std::int64_t>(idx);
        }
    }
    return batch;
}

inline std::vector<Batch> build_batches(const Bucket& bucket, const RowStreams& rows, const SequencerConfig& config,
                                        std::size_t dim) {
    std::vector<Batch> out;
    out.reserve(bucket.depth);
    for (std::size_t t = 0; t < bucket.depth; ++t) out.push_back(build_batch(bucket, t, rows, config, dim));
    return out;
}

/// Bucket visiting order for an epoch (identity unless shuffling is enabled).
inline std::vector<std::size_t> bucket_order(std::size_t n, const SequencerConfig& config, std::uint64_t epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (config.shuffle_buckets) {
        Rng rng(derive_seed(config.seed, "buckets/" + std::to_string(epoch)));
        rng.shuffle(order);
    }
    return order;
}

/// Visits every batch in order: buckets sequentially, batches in order within a
/// bucket. Reset markers are set on batch 0 of each bucket.
inline void for_each_batch(const std::vector<Bucket>& buckets, const RowStreams& rows, const SequencerConfig& config,
                           std::size_t dim,
                           const std::function<void(const Batch&, std::size_t bucket, std::size_t index)>& fn,
                           std::uint64_t epoch = 0) {
    for (std::size_t b : bucket_order(buckets.size(), config, epoch))
        for (std::size_t t = 0; t < buckets[b].depth; ++t) fn(build_batch(buckets[b], t, rows, config, dim), b, t);
}

struct IteratedBatch {
    Batch batch;
    std::size_t bucket = 0;
    std::size_t index = 0;
};

inline std::vector<IteratedBatch> iterate(const std::vector<Bucket>& buckets, const RowStreams& rows,
                                          const SequencerConfig& config, std::size_t dim) {
    std::vector<IteratedBatch> out;
    for_each_batch(buckets, rows, config, dim,
                   [&](const Batch& b, std::size_t bucket, std::size_t t) { out.push_back({b, bucket, t}); });
    return out;
}

struct PlanStats {
    std::size_t slots = 0;  // B * depth * L summed over buckets
    std::size_t rows = 0;
    std::size_t batches = 0;
    double padding_fraction() const {
        return slots == 0 ? 0.0 : static_cast<double>(slots - rows) / static_cast<double>(slots);
    }
};

inline PlanStats plan_stats(const std::vector<Bucket>& buckets, const SequencerConfig& config) {
    PlanStats s;
    for (const auto& b : buckets) {
        s.slots += config.batch_size * b.depth * config.sequence_length;
        s.batches += b.depth;
        for (auto r : b.rows) s.rows += r;
    }
    return s;
}

inline void write_batch_plan(std::ostream& out, const std::vector<Bucket>& buckets, const SequencerConfig& config) {
    const std::size_t L = config.sequence_length;
    out << "sensorseq-batch-plan 1\n";
    out << "sequence_length=" << L << " batch_size=" << config.batch_size << '\n';
    for (std::size_t b = 0; b < buckets.size(); ++b) {
        const auto& bk = buckets[b];
        out << "bucket " << b << " depth=" << bk.depth << " lanes=" << bk.users.size() << '\n';
        for (std::size_t lane = 0; lane < bk.users.size(); ++lane)
            out << "  lane " << lane << " user=" << bk.users[lane] << " rows=" << bk.rows[lane]
                << " sequences=" << bk.sequences[lane] << " padding_rows=" << bk.depth * L - bk.rows[lane] << '\n';
        for (std::size_t lane = bk.users.size(); lane < config.batch_size; ++lane)
            out << "  lane " << lane << " user=- rows=0 sequences=0 padding_rows=" << bk.depth * L << '\n';
    }
    const auto s = plan_stats(buckets, config);
    out << "summary buckets=" << buckets.size() << " batches=" << s.batches << " slots=" << s.slots
        << " rows=" << s.rows << " padding_fraction=" << s.padding_fraction() << '\n';
}

}  // namespace sensorseq
