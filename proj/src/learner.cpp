#include "ml4c/learner.hpp"

#include "ml4c/errors.hpp"

#include <algorithm>
#include <limits>

namespace ml4c {

std::vector<std::pair<UnshieldedTriple, int>> label_uts(const Dag& dag, const Skeleton& skel) {
    if (skel.size() != dag.size() || skel.edges() != skeleton_of(dag).edges())
        throw SkeletonMismatch("label_uts: skeleton is not the skeleton of the DAG");
    std::vector<std::pair<UnshieldedTriple, int>> out;
    for (const auto& ut : unshielded_triples(skel))
        out.emplace_back(ut, dag.has_edge(ut.x, ut.t) && dag.has_edge(ut.y, ut.t) ? 1 : 0);
    return out;
}

std::string to_string(PredicateKind k) {
    switch (k) {
    case PredicateKind::StrongCpc: return "STRONG_CPC";
    case PredicateKind::StrongMpc: return "STRONG_MPC";
    case PredicateKind::StrongGmb: return "STRONG_GMB";
    case PredicateKind::Weak1: return "WEAK_1";
    case PredicateKind::Weak2: return "WEAK_2";
    case PredicateKind::Weak3: return "WEAK_3";
    }
    return "?";
}

PredicateKind predicate_kind_from_string(const std::string& s) {
    for (auto k : {PredicateKind::StrongCpc, PredicateKind::StrongMpc, PredicateKind::StrongGmb, PredicateKind::Weak1,
                   PredicateKind::Weak2, PredicateKind::Weak3})
        if (to_string(k) == s)
            return k;
    throw ConfigError("unknown predicate '" + s + "'");
}

namespace {

/// min over the extended dependency; +inf when the set is empty, so a
/// vacuous "all > 0" holds.
double min_dependency(const CiTester& tester, const NodeSet& a, const NodeSet& b, const Ensemble& z) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& d : extended_dependency(tester, a, b, z))
        lo = std::min(lo, d.severity);
    return lo;
}

} // namespace

PredicateOutcome evaluate_predicate(PredicateKind kind, const VicinityContext& ctx, const CiTester& tester) {
    const Ensemble& s = ctx.sepsets.sets;
    const NodeSet center{ctx.ut.t};
    const NodeSet xs{ctx.ut.x};
    const NodeSet ys{ctx.ut.y};
    const bool needs_sepsets = kind == PredicateKind::StrongCpc || kind == PredicateKind::StrongMpc ||
                               kind == PredicateKind::StrongGmb || kind == PredicateKind::Weak3;
    if (needs_sepsets && s.empty())
        return {0, true};

    const double olp_t = overlap(center, s);
    bool verdict = false;
    switch (kind) {
    case PredicateKind::StrongCpc:
        verdict = olp_t == 0.0;
        break;
    case PredicateKind::StrongMpc:
        verdict = olp_t < 0.5;
        break;
    case PredicateKind::StrongGmb:
        verdict = olp_t < 1.0 && min_dependency(tester, xs, ys, elementwise_union(s, ctx.ut.t)) > 0.0;
        break;
    case PredicateKind::Weak1:
        verdict = tester.dependency(ctx.ut.x, ctx.ut.y, center) > 0.0;
        break;
    case PredicateKind::Weak2: {
        // An empty PC_T gives no evidence either way; report "not a v-structure".
        if (ctx.pc_t.empty())
            break;
        double hi = 0.0;
        for (NodeId p : ctx.pc_t)
            hi = std::max(hi, tester.dependency(ctx.ut.x, ctx.ut.y, NodeSet{p}));
        verdict = hi == 0.0;
        break;
    }
    case PredicateKind::Weak3:
        verdict = min_dependency(tester, ctx.pc_x, ctx.pc_y, elementwise_union(s, ctx.ut.t)) > 0.0;
        break;
    }
    return {verdict ? 1 : 0, false};
}

int predicate_score(PredicateKind kind, const VicinityContext& ctx, const CiTester& tester) {
    return evaluate_predicate(kind, ctx, tester).score;
}

TreeEnsembleModel train(std::span<const UtExample> examples, const BoostParams& params) {
    if (examples.empty())
        throw DegenerateLabels("no training examples");
    const int cols = static_cast<int>(examples.front().features.values.size());
    FeatureMatrix x(static_cast<int>(examples.size()), cols);
    std::vector<int> labels;
    labels.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (examples[i].features.schema != examples.front().features.schema)
            throw SchemaMismatch("training examples mix feature schemas");
        x.set_row(static_cast<int>(i), examples[i].features.values);
        labels.push_back(examples[i].label);
    }
    return train_gbdt(x, labels, params);
}

double score(const UtModel& model, const FeatureVector& fv) {
    if (fv.schema != model.schema || static_cast<int>(fv.values.size()) != model.ensemble.n_features)
        throw SchemaMismatch("feature vector schema '" + fv.schema + "' (" + std::to_string(fv.values.size()) +
                             " values) does not match model schema '" + model.schema + "'");
    return model.ensemble.predict_proba(fv.values);
}

std::optional<PredicateKind> Classifier::predicate() const noexcept {
    if (const auto* k = std::get_if<PredicateKind>(&impl_))
        return *k;
    return std::nullopt;
}

double Classifier::score(const VicinityContext& ctx, const CiTester& tester, const FeatureVector* fv) const {
    if (const auto* k = std::get_if<PredicateKind>(&impl_))
        return predicate_score(*k, ctx, tester);
    if (fv == nullptr)
        throw SchemaMismatch("model classifier needs a feature vector");
    return ml4c::score(std::get<UtModel>(impl_), *fv);
}

} // namespace ml4c
