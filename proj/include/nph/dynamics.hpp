#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "nph/errors.hpp"
#include "nph/kernels.hpp"
#include "nph/masks.hpp"
#include "nph/patterns.hpp"

namespace nph {

// --------------------------------- steps -------------------------------------

/// One dense update: clean memories weighted by softmax scores against the
/// effective (possibly contaminated) memories. Output lies in the convex hull
/// of the clean columns.
inline Vector step_dense(const MemoryStore& store, const Vector& x, Beta beta) {
    check_query(store, x);
    const Vector w = softmax(beta, store.effective().transpose() * x);
    return store.memories() * w;
}

/// One sparse-structured update: softmax over all M scores, then summed over
/// the support set only. Weights are deliberately not renormalized over the
/// mask; pass renormalize=true for the extension that does.
inline Vector step_sparse(const MemoryStore& store, const Vector& x, Beta beta,
                          const SupportMask& mask, bool renormalize = false) {
    check_query(store, x);
    if (mask.universe() != store.count()) {
        throw InvalidMaskError("mask was built for a different memory count");
    }
    const Vector w = softmax(beta, store.effective().transpose() * x);
    Vector out = Vector::Zero(store.dim());
    double selected = 0.0;
    for (Index mu : mask.indices()) {
        out += w[mu] * store.memories().col(mu);
        selected += w[mu];
    }
    if (renormalize && selected > 0.0) out /= selected;
    return out;
}

// Linear-kernel model: weights are inner products of elu features. The two
// per-store sums are computed once so each query costs O(d^2).
class LinearModel {
public:
    explicit LinearModel(const MemoryStore& store)
        : dim_(store.dim()),
          cross_(Matrix::Zero(store.dim(), store.dim())),
          feature_sum_(Vector::Zero(store.dim())) {
        for (Index mu = 0; mu < store.count(); ++mu) {
            const Vector f = elu_feature(store.effective().col(mu));
            cross_ += store.memories().col(mu) * f.transpose();
            feature_sum_ += f;
        }
    }

    Vector step(const Vector& x) const {
        if (x.size() != dim_) throw DimensionMismatchError("query length mismatch");
        const Vector fx = elu_feature(x);
        return (cross_ * fx) / feature_sum_.dot(fx);
    }

private:
    Index dim_;
    Matrix cross_;
    Vector feature_sum_;
};

/// One-shot linear-kernel update with explicit per-memory weights. The
/// iteration driver uses the cached LinearModel instead; the two agree to
/// rounding.
inline Vector step_linear(const MemoryStore& store, const Vector& x) {
    check_query(store, x);
    const Vector fx = elu_feature(x);
    Vector weights(store.count());
    for (Index mu = 0; mu < store.count(); ++mu) {
        weights[mu] = fx.dot(elu_feature(store.effective().col(mu)));
    }
    weights /= weights.sum();
    return store.memories() * weights;
}

/// One positive-random-feature update; weights <Phi(x), Phi(xi+dxi)> are
/// strictly positive and the output is their convex combination of the
/// clean memories.
inline Vector step_prf(const MemoryStore& store, const Vector& x, const PrfConfig& cfg) {
    check_query(store, x);
    if (cfg.dim() != store.dim()) {
        throw DimensionMismatchError("random-feature config drawn for a different dimension");
    }
    const Vector fx = prf_features(x, cfg);
    Vector weights(store.count());
    for (Index mu = 0; mu < store.count(); ++mu) {
        weights[mu] = fx.dot(prf_features(store.effective().col(mu), cfg));
    }
    weights /= weights.sum();
    return store.memories() * weights;
}

// ------------------------------- multi-head ----------------------------------

struct MultiHeadSpec {
    std::vector<MemoryStore> heads;
    std::vector<Matrix> output_weights;  // W_O per head, d x d

    void validate() const {
        if (heads.empty()) throw ShapeMismatchError("multi-head model needs at least one head");
        if (output_weights.size() != heads.size()) {
            throw ShapeMismatchError("one output matrix per head required");
        }
        const Index d = heads.front().dim();
        for (std::size_t s = 0; s < heads.size(); ++s) {
            if (heads[s].dim() != d) throw ShapeMismatchError("heads must share the pattern size");
            if (output_weights[s].rows() != d || output_weights[s].cols() != d) {
                throw ShapeMismatchError("output matrices must be d x d");
            }
            if (!output_weights[s].allFinite()) {
                throw NonFiniteError("output matrix contains non-finite values");
            }
        }
    }
};

inline MultiHeadSpec identity_heads(std::vector<MemoryStore> heads) {
    MultiHeadSpec spec;
    const double h = static_cast<double>(heads.size());
    for (std::size_t s = 0; s < heads.size(); ++s) {
        spec.output_weights.push_back(Matrix::Identity(heads[s].dim(), heads[s].dim()) / h);
    }
    spec.heads = std::move(heads);
    spec.validate();
    return spec;
}

inline Vector step_multihead(const MultiHeadSpec& spec, const Vector& x, Beta beta) {
    spec.validate();
    Vector out = Vector::Zero(spec.heads.front().dim());
    for (std::size_t s = 0; s < spec.heads.size(); ++s) {
        out += spec.output_weights[s] * step_dense(spec.heads[s], x, beta);
    }
    return out;
}

// -------------------------------- energy -------------------------------------

/// Dense-model energy -lse(beta, Xi^T x) + <x,x>/2 over the clean memories.
inline double energy(const MemoryStore& store, const Vector& x, Beta beta) {
    check_query(store, x);
    return -lse(beta, store.memories().transpose() * x) + 0.5 * x.squaredNorm();
}

// ------------------------------ retrieval ------------------------------------

struct DenseVariant {};
struct SparseVariant {
    SupportMask mask;
};
struct LinearVariant {};
struct PrfVariant {
    PrfConfig config;
};
struct MultiHeadVariant {
    std::shared_ptr<const MultiHeadSpec> spec;
};

using DynamicsVariant =
    std::variant<DenseVariant, SparseVariant, LinearVariant, PrfVariant, MultiHeadVariant>;

struct DynamicsConfig {
    DynamicsVariant variant = DenseVariant{};
    Beta beta;
    double tol = 1e-8;
    int max_iters = 100;
    bool record_trajectory = false;
    bool record_energy = false;       // dense variant only
    bool renormalize_sparse = false;  // extension, off by default

    explicit DynamicsConfig(Beta b) : beta(b) {}
    DynamicsConfig(DynamicsVariant v, Beta b) : variant(std::move(v)), beta(b) {}
};

struct RetrievalOutcome {
    Vector retrieved;
    int steps = 0;
    bool converged = false;
    std::vector<Vector> trajectory;     // filled when requested; includes x0
    std::vector<double> energy_trace;   // filled when requested; includes E(x0)
};

/// Iterates the configured update until the move is within tol or the
/// iteration budget runs out. Linear/PRF variants expect any beta already
/// folded into the patterns (scale by sqrt(beta)).
inline RetrievalOutcome retrieve(const MemoryStore& store, const Vector& x0,
                                 const DynamicsConfig& config) {
    check_query(store, x0);
    if (config.tol <= 0.0) throw OutOfDomainError("tolerance must be positive");
    if (config.max_iters < 1) throw OutOfDomainError("iteration budget must be >= 1");

    const bool dense = std::holds_alternative<DenseVariant>(config.variant);
    const std::optional<LinearModel> linear =
        std::holds_alternative<LinearVariant>(config.variant)
            ? std::optional<LinearModel>(LinearModel(store))
            : std::nullopt;

    auto apply = [&](const Vector& x) -> Vector {
        return std::visit(
            [&](const auto& v) -> Vector {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, DenseVariant>) {
                    return step_dense(store, x, config.beta);
                } else if constexpr (std::is_same_v<T, SparseVariant>) {
                    return step_sparse(store, x, config.beta, v.mask, config.renormalize_sparse);
                } else if constexpr (std::is_same_v<T, LinearVariant>) {
                    return linear->step(x);
                } else if constexpr (std::is_same_v<T, PrfVariant>) {
                    return step_prf(store, x, v.config);
                } else {
                    if (!v.spec) throw ShapeMismatchError("multi-head spec missing");
                    return step_multihead(*v.spec, x, config.beta);
                }
            },
            config.variant);
    };

    RetrievalOutcome out;
    Vector x = x0;
    if (config.record_trajectory) out.trajectory.push_back(x);
    if (config.record_energy && dense) out.energy_trace.push_back(energy(store, x, config.beta));

    for (int t = 0; t < config.max_iters; ++t) {
        Vector next = apply(x);
        if (!next.allFinite()) throw NonFiniteError("retrieval iterate diverged");
        ++out.steps;
        if (config.record_trajectory) out.trajectory.push_back(next);
        if (config.record_energy && dense) {
            out.energy_trace.push_back(energy(store, next, config.beta));
        }
        const double move = (next - x).norm();
        x = std::move(next);
        if (move <= config.tol) {
            out.converged = true;
            break;
        }
    }
    out.retrieved = std::move(x);
    return out;
}

}  // namespace nph
