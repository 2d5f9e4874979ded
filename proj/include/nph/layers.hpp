#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>

#include "nph/dynamics.hpp"
#include "nph/errors.hpp"
#include "nph/kernels.hpp"
#include "nph/masks.hpp"
#include "nph/patterns.hpp"

namespace nph {

// Projection weights for the attention-shaped forward pass. Raw queries R
// (L x d_raw) and raw memories Y (M x d_raw_mem) embed as Q = R W_q and
// K = Y W_k; values are V = K W_v.
struct LayerWeights {
    Matrix w_query;  // d_raw x d
    Matrix w_key;    // d_raw_mem x d
    Matrix w_value;  // d x d_v

    static LayerWeights identity(Index d) {
        return {Matrix::Identity(d, d), Matrix::Identity(d, d), Matrix::Identity(d, d)};
    }
};

enum class LayerMode {
    MemoryRetrieval,  // weights forced to identity; Y holds the stored patterns
    Nph,              // generic attention replacement, weights supplied
    NphPooling,       // R holds static prototype patterns pooling over Y
    NphLayer,         // Y = identity; W_k / W_v act as the stored patterns
};

// Row-weighting schemes. Masked schemes are materialized per query row:
// the window slides with the row index (self-attention alignment, M == L),
// top-K uses that row's scores, and the random mask is drawn once per
// forward pass and shared across rows.
struct RowDense {};
struct RowFixedMask {
    SupportMask mask;
};
struct RowWindow {
    Index width = 0;  // 0 -> round(sqrt(L))
};
struct RowTopK {
    Index k = 1;
};
struct RowRandom {
    Index k = 1;
    std::uint64_t seed = 0;
};
struct RowLinear {};
struct RowPrf {
    PrfConfig config;
};

using RowScheme =
    std::variant<RowDense, RowFixedMask, RowWindow, RowTopK, RowRandom, RowLinear, RowPrf>;

struct LayerConfig {
    Beta beta;
    RowScheme scheme = RowDense{};
    int steps = 1;  // one Hopfield update per forward pass; >1 iterates
    bool renormalize = false;

    explicit LayerConfig(Beta b) : beta(b) {}
    LayerConfig(Beta b, RowScheme s) : beta(b), scheme(std::move(s)) {}
};

namespace detail {

inline Vector masked_weights(const Vector& w, const SupportMask& mask, bool renormalize) {
    Vector out = Vector::Zero(w.size());
    double selected = 0.0;
    for (Index mu : mask.indices()) {
        out[mu] = w[mu];
        selected += w[mu];
    }
    if (renormalize && selected > 0.0) out /= selected;
    return out;
}

}  // namespace detail

/// Attention-shaped forward pass: per query row, variant weights of the
/// score row beta * q K^T combine the value rows V = K W_v. Output is L x d_v.
inline Matrix nph_forward(const Matrix& queries, const Matrix& memories,
                          const LayerWeights& weights_in, LayerMode mode,
                          const LayerConfig& config) {
    if (queries.rows() < 1 || memories.rows() < 1) {
        throw ShapeMismatchError("queries and memories must each have at least one row");
    }
    if (!queries.allFinite() || !memories.allFinite()) {
        throw NonFiniteError("layer inputs contain non-finite values");
    }
    if (config.steps < 1) throw OutOfDomainError("step count must be >= 1");

    LayerWeights weights = weights_in;
    if (mode == LayerMode::MemoryRetrieval) {
        if (queries.cols() != memories.cols()) {
            throw ShapeMismatchError("retrieval mode needs matching raw dimensions");
        }
        weights = LayerWeights::identity(queries.cols());
    }
    if (queries.cols() != weights.w_query.rows() || memories.cols() != weights.w_key.rows() ||
        weights.w_query.cols() != weights.w_key.cols() ||
        weights.w_key.cols() != weights.w_value.rows()) {
        throw ShapeMismatchError("projection shapes are inconsistent");
    }

    const Matrix embedded_queries = queries * weights.w_query;  // L x d
    const Matrix keys = memories * weights.w_key;               // M x d
    const Matrix values = keys * weights.w_value;               // M x d_v
    const Index L = embedded_queries.rows();
    const Index M = keys.rows();

    // Key matrix doubles as the memory store for the top-K builder.
    const MemoryStore key_store{Matrix(keys.transpose())};
    std::optional<SupportMask> shared_random;
    if (const auto* rr = std::get_if<RowRandom>(&config.scheme)) {
        shared_random = mask_random(M, rr->k, rr->seed);
    }

    auto weigh = [&](const Vector& q, Index row) -> Vector {
        return std::visit(
            [&](const auto& s) -> Vector {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, RowDense>) {
                    return softmax(config.beta, keys * q);
                } else if constexpr (std::is_same_v<T, RowFixedMask>) {
                    return detail::masked_weights(softmax(config.beta, keys * q), s.mask,
                                                  config.renormalize);
                } else if constexpr (std::is_same_v<T, RowWindow>) {
                    const Index w = s.width > 0 ? s.width : default_window_width(L);
                    return detail::masked_weights(softmax(config.beta, keys * q),
                                                  mask_window(L, M, row, w), config.renormalize);
                } else if constexpr (std::is_same_v<T, RowTopK>) {
                    return detail::masked_weights(softmax(config.beta, keys * q),
                                                  mask_topk(key_store, q, s.k),
                                                  config.renormalize);
                } else if constexpr (std::is_same_v<T, RowRandom>) {
                    return detail::masked_weights(softmax(config.beta, keys * q), *shared_random,
                                                  config.renormalize);
                } else if constexpr (std::is_same_v<T, RowLinear>) {
                    const Vector fq = elu_feature(q);
                    Vector w(M);
                    for (Index mu = 0; mu < M; ++mu) {
                        w[mu] = fq.dot(elu_feature(keys.row(mu).transpose()));
                    }
                    return w / w.sum();
                } else {
                    const Vector fq = prf_features(q, s.config);
                    Vector w(M);
                    for (Index mu = 0; mu < M; ++mu) {
                        w[mu] = fq.dot(prf_features(keys.row(mu).transpose(), s.config));
                    }
                    return w / w.sum();
                }
            },
            config.scheme);
    };

    Matrix out(L, values.cols());
    for (Index row = 0; row < L; ++row) {
        Vector q = embedded_queries.row(row).transpose();
        Vector w = weigh(q, row);
        for (int step = 1; step < config.steps; ++step) {
            q = keys.transpose() * w;  // iterate the update in the embedded space
            w = weigh(q, row);
        }
        out.row(row) = (w.transpose() * values).eval();
    }
    return out;
}

/// Stored-weight configuration: the key projection itself plays the memory
/// role, so Y is the identity on its rows.
inline Matrix nph_layer_forward(const Matrix& queries, const Matrix& w_key, const Matrix& w_value,
                                const LayerConfig& config) {
    LayerWeights weights{Matrix::Identity(queries.cols(), w_key.cols()), w_key, w_value};
    const Matrix y = Matrix::Identity(w_key.rows(), w_key.rows());
    return nph_forward(queries, y, weights, LayerMode::NphLayer, config);
}

}  // namespace nph
