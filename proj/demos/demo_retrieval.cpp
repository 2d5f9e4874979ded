// Store a handful of patterns, corrupt a query, and watch the different
// dynamics pull it back.

#include <cstdio>

#include "nph/nph.hpp"

int main() {
    using namespace nph;

    const Index d = 32;
    const Index M = 6;
    const MemoryStore store = gen_sphere_patterns(d, M, 1.0, 7);
    const Index target = 2;

    const Vector query = noisy_query(store.pattern(target), 0.05, 11);
    const Beta beta(8.0);

    auto show = [&](const char* name, const Vector& out) {
        std::printf("%-12s error %.3e\n", name, (out - store.pattern(target)).norm());
    };

    std::printf("query error  %.3e\n", (query - store.pattern(target)).norm());
    show("dense", step_dense(store, query, beta));
    show("top-2", step_sparse(store, query, beta, mask_topk(store, query, 2)));
    show("linear", step_linear(store, query));
    show("prf", step_prf(store, query, PrfConfig(4096, d, 0)));

    DynamicsConfig config{beta};
    const RetrievalOutcome outcome = retrieve(store, query, config);
    std::printf("iterated     error %.3e after %d step(s), converged=%s\n",
                (outcome.retrieved - store.pattern(target)).norm(), outcome.steps,
                outcome.converged ? "yes" : "no");

    const auto report = well_separation(store, target, beta, M, mask_full(M).indices());
    std::printf("separation %.3f vs threshold %.3f -> %s\n", report.separation, report.threshold,
                report.satisfied ? "well-separated" : "not well-separated");
    return 0;
}
