#include "ml4c/featurize.hpp"

#include "ml4c/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ml4c {

namespace {

NodeSet without(const NodeSet& s, std::initializer_list<NodeId> drop) {
    NodeSet out;
    out.reserve(s.size());
    for (NodeId v : s)
        if (std::find(drop.begin(), drop.end(), v) == drop.end())
            out.push_back(v);
    return out;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace

VicinityContext build_vicinity(const Skeleton& skel, const UnshieldedTriple& ut, const CiTester& tester, const SepsetOptions& options) {
    VicinityContext ctx;
    ctx.ut = ut;
    ctx.pc_x = without(skel.neighbors(ut.x), {ut.t, ut.y});
    ctx.pc_y = without(skel.neighbors(ut.y), {ut.t, ut.x});
    ctx.pc_t = without(skel.neighbors(ut.t), {ut.x, ut.y});
    ctx.vicinity = set_union(set_union(make_node_set({ut.x, ut.t, ut.y}), ctx.pc_x), set_union(ctx.pc_y, ctx.pc_t));
    ctx.sepsets = find_sepsets(tester, skel, ut, options);
    return ctx;
}

Ensemble elementwise_union(const Ensemble& e, NodeId v) {
    Ensemble out;
    out.reserve(e.size());
    for (const auto& s : e) {
        NodeSet u = s;
        u.push_back(v);
        out.push_back(make_node_set(std::move(u)));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::array<Ensemble, kConditionals> conditional_domain(const VicinityContext& ctx) {
    std::array<Ensemble, kConditionals> d;
    d[static_cast<int>(Conditional::Empty)] = {NodeSet{}};
    d[static_cast<int>(Conditional::Center)] = {NodeSet{ctx.ut.t}};
    for (NodeId p : ctx.pc_t)
        d[static_cast<int>(Conditional::CenterNeighbors)].push_back(NodeSet{p});
    d[static_cast<int>(Conditional::Sepsets)] = ctx.sepsets.sets;
    d[static_cast<int>(Conditional::SepsetsWithCenter)] = elementwise_union(ctx.sepsets.sets, ctx.ut.t);
    return d;
}

std::vector<Dependence> extended_dependency(const CiTester& tester, const NodeSet& a, const NodeSet& b, const Ensemble& z) {
    std::vector<Dependence> out;
    for (NodeId u : a)
        for (NodeId v : b) {
            if (u == v)
                continue;
            for (const auto& cond : z) {
                if (contains(cond, u) || contains(cond, v))
                    continue;
                out.push_back(tester.measure(u, v, cond));
            }
        }
    return out;
}

double overlap(const NodeSet& a, const NodeSet& b) {
    if (a.empty() || b.empty())
        return 0.0;
    NodeSet common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(std::min(a.size(), b.size()));
}

double overlap(const NodeSet& a, const Ensemble& s) {
    if (s.empty())
        return 0.0;
    double total = 0.0;
    for (const auto& si : s)
        total += overlap(a, si);
    return total / static_cast<double>(s.size());
}

std::array<double, 12> entanglement_features(const VicinityContext& ctx) {
    const Ensemble& s = ctx.sepsets.sets;
    double mean_size = 0.0;
    for (const auto& si : s)
        mean_size += static_cast<double>(si.size());
    if (!s.empty())
        mean_size /= static_cast<double>(s.size());
    return {
        static_cast<double>(ctx.pc_x.size()),
        static_cast<double>(ctx.pc_y.size()),
        static_cast<double>(ctx.pc_t.size()),
        static_cast<double>(s.size()),
        mean_size,
        overlap(ctx.pc_x, ctx.pc_y),
        overlap(ctx.pc_x, ctx.pc_t),
        overlap(ctx.pc_x, s),
        overlap(ctx.pc_y, ctx.pc_t),
        overlap(ctx.pc_y, s),
        overlap(ctx.pc_t, s),
        overlap(NodeSet{ctx.ut.t}, s),
    };
}

EmbeddingBasis EmbeddingBasis::from_seed(std::uint64_t seed) {
    EmbeddingBasis basis;
    basis.seed = seed;
    Rng rng(seed);
    for (int j = 0; j < kEmbeddingDim; ++j) {
        basis.w[static_cast<std::size_t>(j)] = rng.normal();
        basis.b[static_cast<std::size_t>(j)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return basis;
}

std::array<double, 4 + kEmbeddingDim> embed_channel(std::span<const double> values, const EmbeddingBasis& basis) {
    std::array<double, 4 + kEmbeddingDim> out{};
    if (values.empty())
        return out;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    double lo = values.front();
    double hi = values.front();
    for (double v : values) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : values)
        sq += (v - mean) * (v - mean);
    out[0] = mean;
    out[1] = std::sqrt(sq / n);
    out[2] = hi;
    out[3] = lo;
    for (int j = 0; j < kEmbeddingDim; ++j) {
        double acc = 0.0;
        for (double v : values)
            acc += std::cos(basis.w[static_cast<std::size_t>(j)] * v + basis.b[static_cast<std::size_t>(j)]);
        out[static_cast<std::size_t>(4 + j)] = acc / n;
    }
    return out;
}

std::array<double, kBlockDim> embed(std::span<const Dependence> values, const EmbeddingBasis& basis) {
    std::vector<double> p, s;
    p.reserve(values.size());
    s.reserve(values.size());
    for (const auto& d : values) {
        p.push_back(d.one_minus_p);
        s.push_back(d.severity);
    }
    const auto ep = embed_channel(p, basis);
    const auto es = embed_channel(s, basis);
    std::array<double, kBlockDim> out{};
    out[0] = static_cast<double>(values.size());
    std::copy_n(ep.begin(), 4, out.begin() + 1);
    std::copy_n(es.begin(), 4, out.begin() + 5);
    std::copy_n(ep.begin() + 4, kEmbeddingDim, out.begin() + 9);
    std::copy_n(es.begin() + 4, kEmbeddingDim, out.begin() + 9 + kEmbeddingDim);
    return out;
}

FeatureVector featurize_context(const VicinityContext& ctx, const CiTester& tester, const EmbeddingBasis& basis) {
    FeatureVector fv;
    fv.values.reserve(kFeatureDim);
    const auto ent = entanglement_features(ctx);
    fv.values.insert(fv.values.end(), ent.begin(), ent.end());

    const NodeSet center{ctx.ut.t};
    const auto unitary = tester.measure(ctx.ut.x, ctx.ut.y, center);
    fv.values.push_back(unitary.one_minus_p);
    fv.values.push_back(unitary.severity);

    const NodeSet xs{ctx.ut.x};
    const NodeSet ys{ctx.ut.y};
    const std::array<std::pair<const NodeSet*, const NodeSet*>, kBivariables> bivariables{{
        {&xs, &ys}, {&xs, &ctx.pc_y}, {&ctx.pc_x, &ys}, {&ctx.pc_x, &ctx.pc_y}}};
    const auto conditionals = conditional_domain(ctx);
    for (int bi = 0; bi < kBivariables; ++bi) {
        for (int ci = 0; ci < kConditionals; ++ci) {
            if (bi == 0 && ci == static_cast<int>(Conditional::Center))
                continue;
            const auto& [a, b] = bivariables[static_cast<std::size_t>(bi)];
            const auto deps = extended_dependency(tester, *a, *b, conditionals[static_cast<std::size_t>(ci)]);
            const auto block = embed(deps, basis);
            fv.values.insert(fv.values.end(), block.begin(), block.end());
        }
    }
    return fv;
}

FeatureVector featurize_ut(const Skeleton& skel, const UnshieldedTriple& ut, const CiTester& tester, const EmbeddingBasis& basis,
                           const SepsetOptions& options) {
    return featurize_context(build_vicinity(skel, ut, tester, options), tester, basis);
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n{"size_pc_x", "size_pc_y", "size_pc_t", "size_s", "mean_size_s_i",
                                   "olp_pcx_pcy", "olp_pcx_pct", "olp_pcx_s", "olp_pcy_pct", "olp_pcy_s", "olp_pct_s", "olp_t_s",
                                   "x_y_given_t_1mp", "x_y_given_t_sev"};
        const char* biv[] = {"x_y", "x_pcy", "pcx_y", "pcx_pcy"};
        const char* cond[] = {"empty", "t", "pct", "s", "s_t"};
        for (int bi = 0; bi < kBivariables; ++bi)
            for (int ci = 0; ci < kConditionals; ++ci) {
                if (bi == 0 && ci == 1)
                    continue;
                const std::string p = std::string(biv[bi]) + "__" + cond[ci] + "__";
                n.push_back(p + "size");
                for (const char* ch : {"1mp", "sev"})
                    for (const char* st : {"mean", "std", "max", "min"})
                        n.push_back(p + ch + "_" + st);
                for (const char* ch : {"1mp", "sev"})
                    for (int j = 0; j < kEmbeddingDim; ++j)
                        n.push_back(p + ch + "_rf" + std::to_string(j));
            }
        return n;
    }();
    return names;
}

std::vector<FeatureVector> featurize_all(const Skeleton& skel, std::span<const UnshieldedTriple> uts, const CiTester& tester,
                                         const EmbeddingBasis& basis, const SepsetOptions& options) {
    std::vector<FeatureVector> out(uts.size());
    const auto n = static_cast<std::int64_t>(uts.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = featurize_ut(skel, uts[static_cast<std::size_t>(i)], tester, basis, options);
    return out;
}

std::vector<FeatureVector> featurize_all_serial(const Skeleton& skel, std::span<const UnshieldedTriple> uts, const CiTester& tester,
                                                const EmbeddingBasis& basis, const SepsetOptions& options) {
    std::vector<FeatureVector> out;
    out.reserve(uts.size());
    for (const auto& ut : uts)
        out.push_back(featurize_ut(skel, ut, tester, basis, options));
    return out;
}

} // namespace ml4c
