#include "ml4c/pipeline.hpp"

#include "ml4c/errors.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>

namespace ml4c {

namespace {

std::array<Edge, 2> arrows(const UnshieldedTriple& ut) { return {Edge{ut.x, ut.t}, Edge{ut.y, ut.t}}; }

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

bool conflicts(const VCandidate& a, const VCandidate& b) {
    for (const auto& [u, v] : arrows(a.triple))
        for (const auto& e : arrows(b.triple))
            if (e == Edge{v, u})
                return true;
    return false;
}

bool higher_priority(const VCandidate& a, const VCandidate& b) {
    if (a.score != b.score)
        return a.score > b.score;
    return a.triple < b.triple;
}

std::vector<VCandidate> conflict_resolve(std::vector<VCandidate> candidates) {
    std::sort(candidates.begin(), candidates.end(), higher_priority);
    // Rank of the best candidate claiming each arrow. Removing a candidate
    // never creates a conflict, so the lowest-loser fixpoint drops exactly
    // the candidates whose reversed arrow is claimed by someone ranked above.
    std::map<Edge, std::size_t> best_claim;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        for (const auto& e : arrows(candidates[i].triple))
            best_claim.emplace(e, i);
    std::vector<VCandidate> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        bool loses = false;
        for (const auto& [u, v] : arrows(candidates[i].triple)) {
            const auto it = best_claim.find(Edge{v, u});
            loses = loses || (it != best_claim.end() && it->second < i);
        }
        if (!loses)
            out.push_back(candidates[i]);
    }
    return out;
}

Pdag orient(const Skeleton& skel, std::span<const VCandidate> survivors) {
    std::vector<Edge> directed;
    for (const auto& c : survivors)
        for (const auto& e : arrows(c.triple)) {
            if (!skel.adjacent(e.first, e.second))
                throw OrientationConflict("candidate orients a pair the skeleton does not connect");
            directed.push_back(e);
        }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
    for (const auto& [u, v] : directed)
        if (std::binary_search(directed.begin(), directed.end(), Edge{v, u}))
            throw OrientationConflict("candidates orient " + skel.names()[static_cast<std::size_t>(u)] + " - " +
                                      skel.names()[static_cast<std::size_t>(v)] + " both ways");
    std::vector<Edge> undirected;
    for (const auto& [a, b] : skel.edges())
        if (!std::binary_search(directed.begin(), directed.end(), Edge{a, b}) &&
            !std::binary_search(directed.begin(), directed.end(), Edge{b, a}))
            undirected.emplace_back(a, b);
    try {
        return Pdag(skel.names(), std::move(directed), std::move(undirected));
    } catch (const CycleDetected& e) {
        throw OrientationConflict(std::string("candidates form a directed cycle: ") + e.what());
    }
}

Admission admit(const Skeleton& skel, std::span<const VCandidate> survivors) {
    try {
        return {meek_closure(orient(skel, survivors)), {survivors.begin(), survivors.end()}};
    } catch (const OrientationConflict&) {
    }
    Admission out{Pdag::from_skeleton(skel), {}};
    for (const auto& c : survivors) {
        out.admitted.push_back(c);
        try {
            out.cpdag = meek_closure(orient(skel, out.admitted));
        } catch (const OrientationConflict&) {
            out.admitted.pop_back();
        }
    }
    return out;
}

PipelineResult run_ml4c_detailed(const CiTester& tester, const Skeleton& skel, const Classifier& classifier,
                                 const PipelineConfig& config) {
    if (tester.n_nodes() != skel.size())
        throw NodeMismatch("tester covers " + std::to_string(tester.n_nodes()) + " nodes, skeleton has " +
                           std::to_string(skel.size()));
    PipelineResult result;
    const auto uts = unshielded_triples(skel);
    const auto predicate = classifier.predicate();
    const EmbeddingBasis* basis = classifier.model() != nullptr ? &classifier.model()->basis : nullptr;

    auto start = std::chrono::steady_clock::now();
    result.scored.resize(uts.size());
    std::vector<char> empty(uts.size(), 0);
    auto score_one = [&](std::size_t i) {
        const auto ctx = build_vicinity(skel, uts[i], tester, config.sepsets);
        double s = 0.0;
        if (predicate) {
            const auto outcome = evaluate_predicate(*predicate, ctx, tester);
            s = outcome.score;
            empty[i] = outcome.empty_sepsets ? 1 : 0;
        } else {
            const auto fv = featurize_context(ctx, tester, *basis);
            s = classifier.score(ctx, tester, &fv);
        }
        result.scored[i] = VCandidate{uts[i], s};
    };
    if (config.parallel) {
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const auto n = static_cast<std::int64_t>(uts.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < n; ++i) {
            try {
                score_one(static_cast<std::size_t>(i));
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
        if (failure)
            std::rethrow_exception(failure);
    } else {
        for (std::size_t i = 0; i < uts.size(); ++i)
            score_one(i);
    }
    result.empty_sepsets = static_cast<int>(std::count(empty.begin(), empty.end(), 1));
    result.timings.score_seconds = seconds_since(start);

    start = std::chrono::steady_clock::now();
    for (const auto& c : result.scored)
        if (c.score >= config.threshold)
            result.candidates.push_back(c);
    result.survivors = conflict_resolve(result.candidates);
    result.timings.resolve_seconds = seconds_since(start);

    start = std::chrono::steady_clock::now();
    auto admission = admit(skel, result.survivors);
    result.cpdag = std::move(admission.cpdag);
    result.admitted = std::move(admission.admitted);
    result.timings.orient_seconds = seconds_since(start);
    return result;
}

Pdag run_ml4c(const CiTester& tester, const Skeleton& skel, const Classifier& classifier, const PipelineConfig& config) {
    return run_ml4c_detailed(tester, skel, classifier, config).cpdag;
}

Pdag run_ml4c(const DiscreteDataset& data, const Skeleton& skel, const Classifier& classifier, const PipelineConfig& config,
              double alpha) {
    if (data.names() != skel.names())
        throw NodeMismatch("dataset columns do not match skeleton nodes");
    const G2Tester tester(data, alpha);
    return run_ml4c(tester, skel, classifier, config);
}

std::vector<UtExample> build_training_set(std::span<const CorpusItem> corpus, const EmbeddingBasis& basis,
                                          const SepsetOptions& sepsets, double alpha, const std::string& corpus_name) {
    std::vector<UtExample> out;
    for (std::size_t g = 0; g < corpus.size(); ++g) {
        const auto& item = corpus[g];
        const Skeleton skel = skeleton_of(item.net.dag);
        const auto labelled = label_uts(item.net.dag, skel);
        std::vector<UnshieldedTriple> uts;
        uts.reserve(labelled.size());
        for (const auto& [ut, label] : labelled)
            uts.push_back(ut);
        const G2Tester tester(item.data, alpha);
        auto features = featurize_all(skel, uts, tester, basis, sepsets);
        for (std::size_t i = 0; i < uts.size(); ++i)
            out.push_back(UtExample{std::move(features[i]), labelled[i].second,
                                    Provenance{corpus_name, static_cast<int>(g), uts[i]}});
    }
    return out;
}

} // namespace ml4c
