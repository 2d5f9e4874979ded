// Command-line front end: retrieval over pattern files, desk-scale benches,
// the analytical bound report, and the built-in verification suite.
//
// Exit codes: 0 success, 1 failed verification, 2 validation error, 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nph/nph.hpp"
#include "nph/selfcheck.hpp"

namespace {

using nph::Beta;
using nph::Index;
using nph::Matrix;
using nph::MemoryStore;
using nph::Vector;

// ------------------------------ mask spelling --------------------------------
// full | random:k=<k>,seed=<s> | window:w=<w> | topk:k=<K>

struct MaskSpec {
    enum class Kind { Full, Random, Window, TopK } kind = Kind::Full;
    Index k = 0;
    Index window = 0;
    std::uint64_t seed = 0;
};

MaskSpec parse_mask_spec(const std::string& text) {
    MaskSpec spec;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);

    auto take = [&args](const std::string& key) -> std::optional<std::string> {
        const auto pos = args.find(key + "=");
        if (pos == std::string::npos) return std::nullopt;
        const auto start = pos + key.size() + 1;
        const auto end = args.find(',', start);
        return args.substr(start, end == std::string::npos ? std::string::npos : end - start);
    };

    if (head == "full") {
        spec.kind = MaskSpec::Kind::Full;
    } else if (head == "random") {
        spec.kind = MaskSpec::Kind::Random;
        const auto k = take("k");
        if (!k) throw nph::ValidationError("random mask needs k=<size>");
        spec.k = std::stoll(*k);
        if (const auto s = take("seed")) spec.seed = std::stoull(*s);
    } else if (head == "window") {
        spec.kind = MaskSpec::Kind::Window;
        if (const auto w = take("w")) spec.window = std::stoll(*w);
    } else if (head == "topk") {
        spec.kind = MaskSpec::Kind::TopK;
        const auto k = take("k");
        if (!k) throw nph::ValidationError("topk mask needs k=<K>");
        spec.k = std::stoll(*k);
    } else {
        throw nph::ValidationError("unknown mask spelling: " + text);
    }
    return spec;
}

nph::SupportMask materialize_mask(const MaskSpec& spec, const MemoryStore& store,
                                  const Vector& query, Index row, Index total_rows) {
    const Index M = store.count();
    switch (spec.kind) {
        case MaskSpec::Kind::Full: return nph::mask_full(M);
        case MaskSpec::Kind::Random: return nph::mask_random(M, spec.k, spec.seed);
        case MaskSpec::Kind::Window: {
            const Index w = spec.window > 0 ? spec.window : nph::default_window_width(total_rows);
            return nph::mask_window(total_rows, M, row, w);
        }
        case MaskSpec::Kind::TopK: return nph::mask_topk(store, query, spec.k);
    }
    throw nph::ValidationError("unreachable mask kind");
}

// -------------------------------- retrieve -----------------------------------

struct RetrieveArgs {
    std::string memories_path;
    std::string query_path;
    std::string format = "auto";
    std::string variant = "dense";
    std::string mask = "full";
    double beta = 0.0;  // 0 -> 1/sqrt(d)
    double tol = 1e-8;
    int max_iters = 100;
    bool renormalize = false;
    Index prf_features = 2048;
    std::uint64_t prf_seed = 0;
    std::string out_path;
    std::string json_path;
};

nph::PatternFormat resolve_format(const std::string& requested, const std::string& path) {
    if (requested == "csv") return nph::PatternFormat::Csv;
    if (requested == "nphb") return nph::PatternFormat::Nphb;
    return nph::format_from_path(path);
}

int run_retrieve(const RetrieveArgs& args) {
    const MemoryStore store =
        nph::load_patterns(args.memories_path, resolve_format(args.format, args.memories_path));
    const Matrix queries =
        nph::load_query_rows(args.query_path, resolve_format(args.format, args.query_path));
    if (queries.cols() != store.dim()) {
        throw nph::DimensionMismatchError("query width does not match pattern size");
    }
    const Beta beta = args.beta > 0.0 ? Beta(args.beta) : nph::default_beta(store.dim());
    const MaskSpec mask_spec = parse_mask_spec(args.mask);
    const bool masked = mask_spec.kind != MaskSpec::Kind::Full;
    if (args.variant != "dense" && masked) {
        throw nph::ValidationError("masks apply to the dense (softmax) variant only");
    }

    Matrix retrieved(queries.rows(), store.dim());
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Index row = 0; row < queries.rows(); ++row) {
        const Vector x0 = queries.row(row).transpose();
        nph::DynamicsConfig config{beta};
        if (args.variant == "linear") {
            config.variant = nph::LinearVariant{};
        } else if (args.variant == "prf") {
            config.variant =
                nph::PrfVariant{nph::PrfConfig(args.prf_features, store.dim(), args.prf_seed)};
        } else if (args.variant == "dense") {
            if (masked) {
                config.variant = nph::SparseVariant{
                    materialize_mask(mask_spec, store, x0, row, queries.rows())};
            }
        } else {
            throw nph::ValidationError("unknown variant: " + args.variant);
        }
        config.tol = args.tol;
        config.max_iters = args.max_iters;
        config.renormalize_sparse = args.renormalize;

        const nph::RetrievalOutcome outcome = nph::retrieve(store, x0, config);
        retrieved.row(row) = outcome.retrieved.transpose();
        nlohmann::ordered_json meta;
        meta["row"] = row;
        meta["steps"] = outcome.steps;
        meta["converged"] = outcome.converged;
        rows.push_back(std::move(meta));
    }

    const MemoryStore out_store{Matrix(retrieved.transpose())};
    if (!args.out_path.empty()) {
        nph::save_patterns(out_store, args.out_path,
                           resolve_format(args.format, args.out_path));
    } else {
        for (Index r = 0; r < retrieved.rows(); ++r) {
            for (Index i = 0; i < retrieved.cols(); ++i) {
                if (i) std::cout << ',';
                std::cout << retrieved(r, i);
            }
            std::cout << '\n';
        }
    }
    if (!args.json_path.empty()) {
        nlohmann::ordered_json doc;
        doc["schema_version"] = 1;
        doc["tool"] = "nph";
        doc["version"] = std::string(nph::kVersion);
        doc["beta"] = beta.value();
        doc["variant"] = args.variant;
        doc["mask"] = args.mask;
        doc["rows"] = std::move(rows);
        nph::write_text_file(args.json_path, doc.dump(2) + "\n");
    }
    return 0;
}

// --------------------------------- bench -------------------------------------

struct BenchArgs {
    std::string kind;
    Index dim = 64;
    std::vector<Index> m_range;
    std::vector<double> noise_range;
    int trials = 50;
    double theta = 0.20;
    double beta = 0.0;
    std::uint64_t seed = 0;
    std::string variant = "dense";
    std::string mask;
    Index prf_features = 2048;
    double radius = 1.0;
    double tol = 1e-8;
    int max_iters = 100;
    std::string out_path = "results.json";
    std::string csv_path;
};

int run_bench(const BenchArgs& args) {
    nph::ExperimentSpec spec;
    if (args.kind == "halfmask") {
        spec.kind = nph::ExperimentKind::HalfMask;
    } else if (args.kind == "noise") {
        spec.kind = nph::ExperimentKind::NoiseSweep;
    } else if (args.kind == "capacity") {
        spec.kind = nph::ExperimentKind::CapacitySweep;
    } else {
        throw nph::ValidationError("unknown bench kind: " + args.kind);
    }
    spec.dim = args.dim;
    spec.memory_counts = args.m_range.empty() ? std::vector<Index>{10, 25, 50, 100, 200}
                                              : args.m_range;
    spec.noise_variances =
        args.noise_range.empty() ? nph::default_noise_grid() : args.noise_range;
    spec.trials = args.trials;
    spec.success_threshold = args.theta;
    if (args.beta > 0.0) spec.beta = args.beta;
    spec.pattern_radius = args.radius;
    spec.tol = args.tol;
    spec.max_iters = args.max_iters;
    spec.seed = args.seed;

    if (args.variant == "dense") {
        spec.variant.kind = nph::VariantKind::Dense;
    } else if (args.variant == "linear") {
        spec.variant.kind = nph::VariantKind::Linear;
    } else if (args.variant == "prf") {
        spec.variant.kind = nph::VariantKind::Prf;
        spec.variant.prf_features = args.prf_features;
    } else {
        throw nph::ValidationError("unknown bench variant: " + args.variant);
    }
    if (!args.mask.empty()) {
        if (args.variant != "dense") {
            throw nph::ValidationError("masks apply to the dense (softmax) variant only");
        }
        const MaskSpec mask = parse_mask_spec(args.mask);
        switch (mask.kind) {
            case MaskSpec::Kind::Full: break;
            case MaskSpec::Kind::Random:
                spec.variant.kind = nph::VariantKind::RandomMask;
                spec.variant.mask_k = mask.k;
                break;
            case MaskSpec::Kind::Window:
                spec.variant.kind = nph::VariantKind::WindowMask;
                spec.variant.window_width = mask.window;
                break;
            case MaskSpec::Kind::TopK:
                spec.variant.kind = nph::VariantKind::TopK;
                spec.variant.mask_k = mask.k;
                break;
        }
    }

    const nph::ResultTable table = nph::run_experiment(spec);
    nph::write_text_file(args.out_path, nph::result_table_to_json(table, true));
    if (!args.csv_path.empty()) {
        nph::write_text_file(args.csv_path, nph::result_table_to_csv(table));
    }
    std::cout << "wrote " << table.rows.size() << " cells to " << args.out_path << "\n";
    return 0;
}

// --------------------------------- bounds ------------------------------------

struct BoundsArgs {
    Index dim = 0;
    double m = 0.0;
    double radius = 0.0;
    double beta = 0.0;
    Index k = 1;
    double p = 0.95;
    Index total = 0;  // M, enables the well-separation threshold in scalar mode
    std::string sweep;
    std::vector<double> values;
    std::string memories_path;
    std::string query_path;
    Index mu = 0;
    std::string mask = "full";
    std::string format = "auto";
    std::string out_path;
};

nlohmann::ordered_json capacity_json(const nph::CapacityBound& cap) {
    nlohmann::ordered_json j;
    j["m_sparse"] = cap.m_sparse;
    j["a"] = cap.a;
    j["b"] = cap.b;
    j["c"] = cap.c;
    j["w0_log_arg"] = cap.w0_log_arg;
    return j;
}

int run_bounds(const BoundsArgs& args) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["tool"] = "nph";
    doc["version"] = std::string(nph::kVersion);

    Index dim = args.dim;
    double m = args.m;
    double radius = args.radius;
    Index total = args.total;

    std::optional<MemoryStore> store;
    if (!args.memories_path.empty()) {
        store = nph::load_patterns(args.memories_path,
                                   resolve_format(args.format, args.memories_path));
        dim = store->dim();
        total = store->count();
        m = nph::max_memory_norm(*store);
        const auto idx = nph::detail::all_indices(total);
        radius = nph::min_half_distance(*store, idx);
    }
    if (dim < 2 || !(m > 0.0) || !(radius > 0.0) || !(args.beta > 0.0)) {
        throw nph::ValidationError(
            "need --d >= 2, --m > 0, --R > 0 and --beta > 0 (or --memories)");
    }
    const Beta beta(args.beta);

    nlohmann::ordered_json inputs;
    inputs["d"] = dim;
    inputs["m"] = m;
    inputs["R"] = radius;
    inputs["beta"] = args.beta;
    inputs["k"] = args.k;
    inputs["p"] = args.p;
    if (total > 0) inputs["M"] = total;
    doc["inputs"] = inputs;

    doc["capacity"] = capacity_json(nph::capacity_lower_bound(dim, m, radius, args.beta, args.k, args.p));

    if (total >= 2) {
        nlohmann::ordered_json ws;
        const double threshold =
            std::log(static_cast<double>(total + args.k - 2) * m / radius) / args.beta +
            2.0 * m * radius;
        ws["threshold"] = threshold;
        if (store) {
            const auto scope = nph::detail::all_indices(total);
            const auto rep = nph::well_separation(*store, args.mu, beta, args.k, scope);
            ws["separation"] = rep.separation;
            ws["satisfied"] = rep.satisfied;
        } else {
            ws["separation"] = nullptr;
            ws["satisfied"] = nullptr;
        }
        doc["well_separation"] = ws;
    } else {
        doc["well_separation"] = nullptr;
    }

    if (store && !args.query_path.empty()) {
        const Matrix queries =
            nph::load_query_rows(args.query_path, resolve_format(args.format, args.query_path));
        const Vector x = queries.row(0).transpose();
        nlohmann::ordered_json eb;
        eb["value"] = nph::retrieval_error_bound(*store, x, args.mu, beta, args.k);
        eb["dense_value"] = nph::retrieval_error_bound(*store, x, args.mu, beta, total);
        const MaskSpec mask_spec = parse_mask_spec(args.mask);
        try {
            const auto mask = materialize_mask(mask_spec, *store, x, args.mu, total);
            const auto check = nph::check_error_bound_dominates(*store, x, args.mu, beta, mask);
            eb["actual"] = check.actual;
            eb["holds"] = check.holds;
        } catch (const nph::HypothesisViolatedError& e) {
            eb["actual"] = nullptr;
            eb["holds"] = nullptr;
            eb["note"] = e.what();
        }
        doc["error_bound"] = eb;
    } else {
        doc["error_bound"] = nullptr;
    }

    if (!args.sweep.empty()) {
        nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
        std::vector<double> values = args.values;
        if (values.empty()) {
            if (args.sweep == "k") values = {1, 2, 4, 8, 16, 32, 64};
            else if (args.sweep == "d") values = {8, 16, 32, 64};
            else if (args.sweep == "beta") values = {0.25, 0.5, 1, 2, 4};
            else throw nph::ValidationError("sweep must be one of k|d|beta");
        }
        for (double v : values) {
            nlohmann::ordered_json point;
            point["param"] = args.sweep;
            point["value"] = v;
            nph::CapacityBound cap;
            if (args.sweep == "k") {
                cap = nph::capacity_lower_bound(dim, m, radius, args.beta,
                                                static_cast<Index>(v), args.p);
            } else if (args.sweep == "d") {
                cap = nph::capacity_lower_bound(static_cast<Index>(v), m, radius, args.beta,
                                                args.k, args.p);
            } else {
                cap = nph::capacity_lower_bound(dim, m, radius, v, args.k, args.p);
            }
            point["capacity"] = capacity_json(cap);
            sweep.push_back(std::move(point));
        }
        doc["sweep"] = std::move(sweep);
    }

    const std::string text = doc.dump(2) + "\n";
    if (args.out_path.empty()) {
        std::cout << text;
    } else {
        nph::write_text_file(args.out_path, text);
    }
    return 0;
}

// --------------------------------- verify ------------------------------------

int run_verify() {
    int failures = 0;
    for (const auto& result : nph::selfcheck::run_all()) {
        std::printf("[%s] %s — %s\n", result.passed ? "PASS" : "FAIL", result.name.c_str(),
                    result.detail.c_str());
        failures += result.passed ? 0 : 1;
    }
    if (failures) std::printf("%d check(s) failed\n", failures);
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric Hopfield retrieval dynamics, bounds and benches"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(nph::kVersion));

    RetrieveArgs retrieve_args;
    auto* retrieve = app.add_subcommand("retrieve", "Retrieve patterns for each query row");
    retrieve->add_option("--memories", retrieve_args.memories_path, "pattern file")->required();
    retrieve->add_option("--query", retrieve_args.query_path, "query file (one per row)")
        ->required();
    retrieve->add_option("--format", retrieve_args.format, "csv|nphb|auto");
    retrieve->add_option("--variant", retrieve_args.variant, "dense|linear|prf");
    retrieve->add_option("--mask", retrieve_args.mask,
                         "full|random:k=<k>,seed=<s>|window:w=<w>|topk:k=<K>");
    retrieve->add_option("--beta", retrieve_args.beta, "inverse temperature (default 1/sqrt(d))");
    retrieve->add_option("--tol", retrieve_args.tol, "fixed-point tolerance");
    retrieve->add_option("--max-iters", retrieve_args.max_iters, "iteration budget");
    retrieve->add_flag("--renormalize", retrieve_args.renormalize,
                       "renormalize masked weights (extension)");
    retrieve->add_option("--prf-features", retrieve_args.prf_features, "random-feature count");
    retrieve->add_option("--prf-seed", retrieve_args.prf_seed, "random-feature seed");
    retrieve->add_option("--out", retrieve_args.out_path, "write retrieved patterns here");
    retrieve->add_option("--json", retrieve_args.json_path, "write convergence metadata here");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run a retrieval bench and write JSON results");
    bench->add_option("kind", bench_args.kind, "halfmask|noise|capacity")->required();
    bench->add_option("--d", bench_args.dim, "pattern size");
    bench->add_option("--m-range", bench_args.m_range, "memory counts to sweep")->delimiter(',');
    bench->add_option("--noise-range", bench_args.noise_range, "noise variances (noise bench)")
        ->delimiter(',');
    bench->add_option("--trials", bench_args.trials, "trials per cell");
    bench->add_option("--theta", bench_args.theta, "success threshold");
    bench->add_option("--beta", bench_args.beta, "inverse temperature (default 1/sqrt(d))");
    bench->add_option("--seed", bench_args.seed, "master seed");
    bench->add_option("--variant", bench_args.variant, "dense|linear|prf");
    bench->add_option("--mask", bench_args.mask, "mask spelling (dense variant)");
    bench->add_option("--prf-features", bench_args.prf_features, "random-feature count");
    bench->add_option("--radius", bench_args.radius, "sphere radius of generated patterns");
    bench->add_option("--tol", bench_args.tol, "fixed-point tolerance");
    bench->add_option("--max-iters", bench_args.max_iters, "iteration budget");
    bench->add_option("--out", bench_args.out_path, "JSON output path");
    bench->add_option("--csv", bench_args.csv_path, "optional CSV mirror");

    BoundsArgs bounds_args;
    auto* bounds = app.add_subcommand("bounds", "Emit a JSON bound report");
    bounds->add_option("--d", bounds_args.dim, "pattern size");
    bounds->add_option("--m", bounds_args.m, "largest memory norm");
    bounds->add_option("--R", bounds_args.radius, "half minimal pairwise distance");
    bounds->add_option("--beta", bounds_args.beta, "inverse temperature")->required();
    bounds->add_option("--k", bounds_args.k, "support size");
    bounds->add_option("--p", bounds_args.p, "storage failure probability parameter");
    bounds->add_option("--M", bounds_args.total, "memory count (well-separation threshold)");
    bounds->add_option("--sweep", bounds_args.sweep, "k|d|beta");
    bounds->add_option("--values", bounds_args.values, "sweep values")->delimiter(',');
    bounds->add_option("--memories", bounds_args.memories_path,
                       "derive d, M, m, R from a pattern file");
    bounds->add_option("--query", bounds_args.query_path, "query file (error bound)");
    bounds->add_option("--mu", bounds_args.mu, "target memory index");
    bounds->add_option("--mask", bounds_args.mask, "mask spelling for the bound check");
    bounds->add_option("--format", bounds_args.format, "csv|nphb|auto");
    bounds->add_option("--out", bounds_args.out_path, "write report here (default stdout)");

    auto* verify = app.add_subcommand("verify", "Run the full property suite");

    try {
        app.parse(argc, argv);
        if (retrieve->parsed()) return run_retrieve(retrieve_args);
        if (bench->parsed()) return run_bench(bench_args);
        if (bounds->parsed()) return run_bounds(bounds_args);
        if (verify->parsed()) return run_verify();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const nph::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const nph::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
