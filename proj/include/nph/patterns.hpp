#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nph/errors.hpp"

namespace nph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Memory patterns stored column-wise: column mu is the mu-th pattern.
// The optional contamination block has the same shape; scores are taken
// against memories+contamination while outputs always combine the clean
// columns. Immutable after construction, safe to share across threads.
class MemoryStore {
public:
    explicit MemoryStore(Matrix memories) : memories_(std::move(memories)) {
        validate_memories();
    }

    MemoryStore(Matrix memories, Matrix contamination)
        : memories_(std::move(memories)), contamination_(std::move(contamination)) {
        validate_memories();
        if (contamination_->rows() != memories_.rows() ||
            contamination_->cols() != memories_.cols()) {
            throw ShapeMismatchError("contamination shape must match memories");
        }
        if (!contamination_->allFinite()) {
            throw NonFiniteError("contamination contains non-finite values");
        }
        effective_ = memories_ + *contamination_;
    }

    Index dim() const { return memories_.rows(); }
    Index count() const { return memories_.cols(); }

    const Matrix& memories() const { return memories_; }
    bool has_contamination() const { return contamination_.has_value(); }
    const Matrix& contamination() const {
        static const Matrix empty;
        return contamination_ ? *contamination_ : empty;
    }

    /// memories + contamination; just the memories in the auto-associative case.
    const Matrix& effective() const { return effective_ ? *effective_ : memories_; }

    Vector pattern(Index mu) const {
        check_index(mu);
        return memories_.col(mu);
    }

    void check_index(Index mu) const {
        if (mu < 0 || mu >= count()) {
            throw PositionOutOfRangeError("memory index out of range");
        }
    }

private:
    void validate_memories() const {
        if (memories_.rows() < 1 || memories_.cols() < 1) {
            throw ShapeMismatchError("memory matrix must be at least 1x1");
        }
        if (!memories_.allFinite()) {
            throw NonFiniteError("memories contain non-finite values");
        }
    }

    Matrix memories_;
    std::optional<Matrix> contamination_;
    std::optional<Matrix> effective_;
};

inline void check_query(const MemoryStore& store, const Vector& x) {
    if (x.size() != store.dim()) {
        throw DimensionMismatchError("query length does not match pattern size");
    }
    if (!x.allFinite()) throw NonFiniteError("query contains non-finite values");
}

// ------------------------------ geometry ------------------------------------

struct GeometryStats {
    double max_norm = 0.0;        // m
    double radius = 0.0;          // R, half the minimum pairwise distance
    Vector separation;            // Delta_mu per pattern in scope order
};

namespace detail {

inline std::vector<Index> all_indices(Index M) {
    std::vector<Index> idx(static_cast<std::size_t>(M));
    for (Index i = 0; i < M; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

inline void check_scope(const MemoryStore& store, std::span<const Index> scope) {
    if (scope.empty()) throw InvalidMaskError("index scope must be nonempty");
    for (Index i : scope) store.check_index(i);
}

}  // namespace detail

/// Largest memory norm; defined for any M >= 1.
inline double max_memory_norm(const MemoryStore& store) {
    return store.memories().colwise().norm().maxCoeff();
}

inline double max_memory_norm(const MemoryStore& store, std::span<const Index> scope) {
    detail::check_scope(store, scope);
    double m = 0.0;
    for (Index i : scope) m = std::max(m, store.memories().col(i).norm());
    return m;
}

/// Half the minimum pairwise distance over the given index scope.
inline double min_half_distance(const MemoryStore& store, std::span<const Index> scope) {
    detail::check_scope(store, scope);
    if (scope.size() < 2) throw SingleMemoryError();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a + 1 < scope.size(); ++a) {
        for (std::size_t b = a + 1; b < scope.size(); ++b) {
            best = std::min(best,
                            (store.memories().col(scope[a]) - store.memories().col(scope[b])).norm());
        }
    }
    return best / 2.0;
}

/// Separation of pattern mu at query x: min over other scope members of
/// <x, xi_mu> - <x, xi_nu>. Evaluated at x = xi_mu this is Delta_mu, by the
/// same arithmetic path.
inline double separation_at(const MemoryStore& store, const Vector& x, Index mu,
                            std::span<const Index> scope) {
    detail::check_scope(store, scope);
    store.check_index(mu);
    check_query(store, x);
    const double own = x.dot(store.memories().col(mu));
    double best = std::numeric_limits<double>::infinity();
    bool has_other = false;
    for (Index nu : scope) {
        if (nu == mu) continue;
        has_other = true;
        best = std::min(best, own - x.dot(store.memories().col(nu)));
    }
    if (!has_other) throw SingleMemoryError();
    return best;
}

inline double separation_at(const MemoryStore& store, const Vector& x, Index mu) {
    const auto idx = detail::all_indices(store.count());
    return separation_at(store, x, mu, idx);
}

inline GeometryStats geometry_stats(const MemoryStore& store, std::span<const Index> scope) {
    detail::check_scope(store, scope);
    if (scope.size() < 2) throw SingleMemoryError();
    GeometryStats g;
    g.max_norm = max_memory_norm(store, scope);
    g.radius = min_half_distance(store, scope);
    g.separation.resize(static_cast<Index>(scope.size()));
    for (std::size_t i = 0; i < scope.size(); ++i) {
        const Index mu = scope[i];
        g.separation[static_cast<Index>(i)] =
            separation_at(store, store.memories().col(mu), mu, scope);
    }
    return g;
}

inline GeometryStats geometry_stats(const MemoryStore& store) {
    const auto idx = detail::all_indices(store.count());
    return geometry_stats(store, idx);
}

/// True iff x lies in the retrieval sphere of pattern mu (radius R).
inline bool in_sphere(const MemoryStore& store, const Vector& x, Index mu) {
    store.check_index(mu);
    check_query(store, x);
    const auto idx = detail::all_indices(store.count());
    const double r = min_half_distance(store, idx);
    return (x - store.memories().col(mu)).norm() <= r;
}

}  // namespace nph
