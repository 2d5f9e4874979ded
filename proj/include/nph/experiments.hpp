#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nph/bounds.hpp"
#include "nph/dynamics.hpp"
#include "nph/errors.hpp"
#include "nph/io.hpp"
#include "nph/kernels.hpp"
#include "nph/masks.hpp"
#include "nph/patterns.hpp"
#include "nph/rng.hpp"
#include "nph/version.hpp"

namespace nph {

// --------------------------- synthetic data ----------------------------------

/// M i.i.d. uniform points on the radius-m sphere (Gaussian normalize-and-scale).
inline MemoryStore gen_sphere_patterns(Index d, Index M, double radius, std::uint64_t seed) {
    if (d < 1 || M < 1) throw OutOfDomainError("dimensions must be >= 1");
    if (!(radius > 0.0)) throw OutOfDomainError("sphere radius must be positive");
    Rng rng(seed);
    Matrix memories(d, M);
    for (Index mu = 0; mu < M; ++mu) {
        Vector g = gaussian_vector(rng, d);
        memories.col(mu) = radius * g / g.norm();
    }
    return MemoryStore(std::move(memories));
}

/// First ceil(d/2) coordinates kept, the rest zeroed. A d=1 query passes through.
inline Vector half_mask_query(const Vector& pattern) {
    Vector out = pattern;
    const Index keep = (pattern.size() + 1) / 2;
    for (Index i = keep; i < out.size(); ++i) out[i] = 0.0;
    return out;
}

/// Noise-variance grid the bench sweeps by default: 0.1 through 1.4.
inline std::vector<double> default_noise_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 14; ++i) grid.push_back(0.1 * i);
    return grid;
}

/// Pattern plus N(0, variance I) noise; variance 0 returns the pattern exactly.
inline Vector noisy_query(const Vector& pattern, double variance, std::uint64_t seed) {
    if (variance < 0.0) throw OutOfDomainError("noise variance must be >= 0");
    if (variance == 0.0) return pattern;
    Rng rng(seed);
    const double sigma = std::sqrt(variance);
    Vector out = pattern;
    for (Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.next_gaussian();
    return out;
}

// ------------------------------ experiment spec ------------------------------

enum class ExperimentKind { HalfMask, NoiseSweep, CapacitySweep, BoundCheck, Timing };

enum class VariantKind { Dense, RandomMask, WindowMask, TopK, Linear, Prf };

struct VariantSpec {
    VariantKind kind = VariantKind::Dense;
    Index mask_k = 0;         // random/top-K size; 0 -> max(1, M/4)
    Index window_width = 0;   // 0 -> round(sqrt(M))
    Index prf_features = 2048;
    bool renormalize = false;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::HalfMask;
    Index dim = 16;
    std::vector<Index> memory_counts;     // sweep axis (NoiseSweep uses the first entry)
    std::vector<double> noise_variances;  // NoiseSweep axis
    std::vector<Index> mask_sizes;        // Timing axis for masked variants (fixed M)
    int trials = 50;
    double success_threshold = 0.2;       // relative sum-of-squares cutoff
    std::optional<double> beta;           // absent -> 1/sqrt(d)
    double pattern_radius = 1.0;
    double tol = 1e-8;
    int max_iters = 100;
    std::uint64_t seed = 0;
    VariantSpec variant;
};

struct ResultRow {
    Index memory_count = 0;
    double noise_variance = 0.0;
    Index mask_k = 0;
    int trials = 0;
    int successes = 0;
    double success_rate = 0.0;
    double mean_error = 0.0;
    double mean_steps = 0.0;
    std::uint64_t wall_time_ns = 0;
};

struct ResultTable {
    ExperimentSpec spec;
    std::vector<ResultRow> rows;
    std::string version{kVersion};
};

// ------------------------------ internals ------------------------------------

namespace detail {

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::HalfMask: return "halfmask";
        case ExperimentKind::NoiseSweep: return "noise";
        case ExperimentKind::CapacitySweep: return "capacity";
        case ExperimentKind::BoundCheck: return "boundcheck";
        case ExperimentKind::Timing: return "timing";
    }
    return "?";
}

inline const char* variant_name(VariantKind k) {
    switch (k) {
        case VariantKind::Dense: return "dense";
        case VariantKind::RandomMask: return "random";
        case VariantKind::WindowMask: return "window";
        case VariantKind::TopK: return "topk";
        case VariantKind::Linear: return "linear";
        case VariantKind::Prf: return "prf";
    }
    return "?";
}

inline int thread_cap() {
    if (const char* env = std::getenv("NPH_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct Cell {
    Index memory_count = 0;
    double noise_variance = 0.0;
    Index mask_k = 0;
};

inline std::vector<Cell> cells_for(const ExperimentSpec& spec) {
    std::vector<Cell> cells;
    const bool masked_timing =
        spec.kind == ExperimentKind::Timing && !spec.mask_sizes.empty() &&
        (spec.variant.kind == VariantKind::RandomMask ||
         spec.variant.kind == VariantKind::WindowMask || spec.variant.kind == VariantKind::TopK);
    if (spec.kind == ExperimentKind::NoiseSweep) {
        if (spec.memory_counts.empty() || spec.noise_variances.empty()) {
            throw OutOfDomainError("noise sweep needs a memory count and variances");
        }
        for (double v : spec.noise_variances) {
            cells.push_back({spec.memory_counts.front(), v, 0});
        }
    } else if (masked_timing) {
        if (spec.memory_counts.empty()) throw OutOfDomainError("timing sweep needs a memory count");
        for (Index k : spec.mask_sizes) cells.push_back({spec.memory_counts.front(), 0.0, k});
    } else {
        if (spec.memory_counts.empty()) throw OutOfDomainError("sweep needs memory counts");
        for (Index m : spec.memory_counts) cells.push_back({m, 0.0, 0});
    }
    if (spec.trials < 1) throw OutOfDomainError("trials must be >= 1");
    if (!(spec.success_threshold > 0.0) || spec.success_threshold >= 1.0) {
        throw OutOfDomainError("success threshold must lie in (0, 1)");
    }
    return cells;
}

/// Builds the per-trial dynamics for the spec'd variant. Masked variants
/// resolve their size defaults against the store; the window centers on the
/// target index (self-attention alignment).
inline DynamicsConfig trial_dynamics(const ExperimentSpec& spec, const Cell& cell,
                                     const MemoryStore& store, const Vector& query, Index target,
                                     std::uint64_t mask_seed) {
    const Beta beta = spec.beta ? Beta(*spec.beta) : default_beta(spec.dim);
    const Index M = store.count();
    const Index k_request = cell.mask_k > 0 ? cell.mask_k : spec.variant.mask_k;
    const Index k = k_request > 0 ? std::min(k_request, M) : std::max<Index>(1, M / 4);
    DynamicsVariant variant = DenseVariant{};
    switch (spec.variant.kind) {
        case VariantKind::Dense: break;
        case VariantKind::RandomMask:
            variant = SparseVariant{mask_random(M, k, mask_seed)};
            break;
        case VariantKind::WindowMask: {
            const Index w = spec.variant.window_width > 0 ? std::min(spec.variant.window_width, M)
                                                          : default_window_width(M);
            variant = SparseVariant{mask_window(M, M, target, w)};
            break;
        }
        case VariantKind::TopK:
            variant = SparseVariant{mask_topk(store, query, k)};
            break;
        case VariantKind::Linear:
            variant = LinearVariant{};
            break;
        case VariantKind::Prf:
            variant = PrfVariant{PrfConfig(spec.variant.prf_features, store.dim(), mask_seed)};
            break;
    }
    DynamicsConfig config(std::move(variant), beta);
    config.tol = spec.tol;
    config.max_iters = spec.max_iters;
    config.renormalize_sparse = spec.variant.renormalize;
    return config;
}

inline ResultRow run_cell(const ExperimentSpec& spec, const Cell& cell, std::size_t cell_index) {
    ResultRow row;
    row.memory_count = cell.memory_count;
    row.noise_variance = cell.noise_variance;
    row.mask_k = cell.mask_k;
    row.trials = spec.trials;

    const std::uint64_t cell_base = spec.seed ^ static_cast<std::uint64_t>(cell_index);
    const auto t0 = std::chrono::steady_clock::now();

    double error_sum = 0.0;
    double step_sum = 0.0;
    int successes = 0;
    int counted = 0;

    for (int trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t store_seed = derive_seed(cell_base, 2 * static_cast<std::uint64_t>(trial));
        const std::uint64_t aux_seed =
            derive_seed(cell_base, 2 * static_cast<std::uint64_t>(trial) + 1);
        const MemoryStore store =
            gen_sphere_patterns(spec.dim, cell.memory_count, spec.pattern_radius, store_seed);
        const Index target = static_cast<Index>(trial % cell.memory_count);
        const Vector pattern = store.memories().col(target);

        if (spec.kind == ExperimentKind::BoundCheck) {
            // Admissible instance: query inside the target's sphere.
            Rng rng(aux_seed);
            Vector u = gaussian_vector(rng, spec.dim);
            u /= u.norm();
            const auto idx = all_indices(store.count());
            const double r = min_half_distance(store, idx);
            const Vector x = pattern + 0.6 * rng.next_double() * r * u;
            const auto config = trial_dynamics(spec, cell, store, x, target, derive_seed(aux_seed, 1));
            const auto* sparse = std::get_if<SparseVariant>(&config.variant);
            const SupportMask mask = sparse ? sparse->mask : mask_full(store.count());
            if (!mask.contains(target)) continue;  // hypothesis not met, skip
            const auto check = check_error_bound_dominates(store, x, target, config.beta, mask);
            ++counted;
            successes += check.holds ? 1 : 0;
            error_sum += check.actual;
            continue;
        }

        Vector x0;
        switch (spec.kind) {
            case ExperimentKind::HalfMask: x0 = half_mask_query(pattern); break;
            case ExperimentKind::NoiseSweep:
                x0 = noisy_query(pattern, cell.noise_variance, aux_seed);
                break;
            default: x0 = pattern; break;
        }
        const auto config = trial_dynamics(spec, cell, store, x0, target, derive_seed(aux_seed, 1));
        const RetrievalOutcome outcome = retrieve(store, x0, config);
        const double err =
            (outcome.retrieved - pattern).squaredNorm() / pattern.squaredNorm();
        ++counted;
        successes += err <= spec.success_threshold ? 1 : 0;
        error_sum += err;
        step_sum += outcome.steps;
    }

    const auto t1 = std::chrono::steady_clock::now();
    row.trials = counted;
    row.successes = successes;
    row.success_rate = counted ? static_cast<double>(successes) / counted : 0.0;
    row.mean_error = counted ? error_sum / counted : 0.0;
    row.mean_steps = counted ? step_sum / counted : 0.0;
    row.wall_time_ns =
        static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    return row;
}

}  // namespace detail

// ------------------------------ run_experiment -------------------------------

/// Runs every cell of the sweep; cells execute in parallel (NPH_THREADS caps
/// the pool) with per-cell derived seeds, so the table is identical under any
/// scheduling. Timing sweeps run sequentially to keep measurements honest.
inline ResultTable run_experiment(const ExperimentSpec& spec) {
    const auto cells = detail::cells_for(spec);
    ResultTable table;
    table.spec = spec;
    table.rows.resize(cells.size());

    const int cap = spec.kind == ExperimentKind::Timing
                        ? 1
                        : std::min<int>(detail::thread_cap(), static_cast<int>(cells.size()));
    if (cap <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            table.rows[i] = detail::run_cell(spec, cells[i], i);
        }
        return table;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                table.rows[i] = detail::run_cell(spec, cells[i], i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < cap; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return table;
}

// ------------------------------ serialization --------------------------------

/// Versioned JSON form of a result table. Timing fields are the only
/// nondeterministic content; exclude them to get byte-identical output for
/// identical spec+seed.
inline std::string result_table_to_json(const ResultTable& table, bool include_timing = true) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["tool"] = "nph";
    doc["version"] = table.version;
    nlohmann::ordered_json spec;
    spec["kind"] = detail::kind_name(table.spec.kind);
    spec["dim"] = table.spec.dim;
    spec["memory_counts"] = table.spec.memory_counts;
    spec["noise_variances"] = table.spec.noise_variances;
    spec["mask_sizes"] = table.spec.mask_sizes;
    spec["trials"] = table.spec.trials;
    spec["success_threshold"] = table.spec.success_threshold;
    if (table.spec.beta) {
        spec["beta"] = *table.spec.beta;
    } else {
        spec["beta"] = nullptr;
    }
    spec["pattern_radius"] = table.spec.pattern_radius;
    spec["tol"] = table.spec.tol;
    spec["max_iters"] = table.spec.max_iters;
    spec["seed"] = table.spec.seed;
    nlohmann::ordered_json variant;
    variant["kind"] = detail::variant_name(table.spec.variant.kind);
    variant["mask_k"] = table.spec.variant.mask_k;
    variant["window_width"] = table.spec.variant.window_width;
    variant["prf_features"] = table.spec.variant.prf_features;
    variant["renormalize"] = table.spec.variant.renormalize;
    spec["variant"] = variant;
    doc["spec"] = spec;

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        nlohmann::ordered_json row;
        row["memory_count"] = r.memory_count;
        row["noise_variance"] = r.noise_variance;
        row["mask_k"] = r.mask_k;
        row["trials"] = r.trials;
        row["successes"] = r.successes;
        row["success_rate"] = r.success_rate;
        row["mean_error"] = r.mean_error;
        row["mean_steps"] = r.mean_steps;
        if (include_timing) row["wall_time_ns"] = r.wall_time_ns;
        rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

/// Flat CSV mirror of the JSON rows, ready for plotting.
inline std::string result_table_to_csv(const ResultTable& table) {
    std::string out =
        "memory_count,noise_variance,mask_k,trials,successes,success_rate,mean_error,mean_steps,"
        "wall_time_ns\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.memory_count) + ',' + detail::fmt_double(r.noise_variance) + ',' +
               std::to_string(r.mask_k) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.successes) + ',' + detail::fmt_double(r.success_rate) + ',' +
               detail::fmt_double(r.mean_error) + ',' + detail::fmt_double(r.mean_steps) + ',' +
               std::to_string(r.wall_time_ns) + '\n';
    }
    return out;
}

}  // namespace nph
