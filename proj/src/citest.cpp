#include "ml4c/citest.hpp"

#include "ml4c/errors.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace ml4c {

double severity(double p) {
    if (!(p < 1.0))
        return 0.0;
    if (!(p > 0.0))
        return kSeverityCap;
    try {
        return std::min(std::sqrt(2.0) * boost::math::erfc_inv(p), kSeverityCap);
    } catch (const std::overflow_error&) {
        return kSeverityCap;
    }
}

namespace {

void check_query(int n_cols, NodeId x, NodeId y, std::span<const NodeId> z) {
    auto bad = [n_cols](NodeId v) { return v < 0 || v >= n_cols; };
    if (bad(x) || bad(y) || x == y)
        throw InvalidNodes("CI query: invalid pair");
    for (NodeId v : z)
        if (bad(v) || v == x || v == y)
            throw InvalidNodes("CI query: invalid conditioning set");
}

/// Reused per thread so repeated tests do not reallocate.
struct G2Scratch {
    std::vector<std::uint64_t> stratum;
    std::vector<std::uint64_t> keys;
    std::vector<std::int32_t> counts;
};

} // namespace

CiResult g2_test(const DiscreteDataset& data, NodeId x, NodeId y, std::span<const NodeId> z, const G2Options& options) {
    check_query(data.n_cols(), x, y, z);
    thread_local G2Scratch scratch;
    const auto n = static_cast<std::size_t>(data.n_rows());
    const auto cx = static_cast<std::size_t>(data.cardinality(x));
    const auto cy = static_cast<std::size_t>(data.cardinality(y));
    const std::size_t cell_count = cx * cy;

    // Stratum code per row, mixed radix over z.
    auto& stratum = scratch.stratum;
    stratum.assign(n, 0);
    std::uint64_t radix_product = 1;
    bool overflow = false;
    for (NodeId w : z) {
        const auto card = static_cast<std::uint64_t>(data.cardinality(w));
        const auto col = data.column(w);
        for (std::size_t r = 0; r < n; ++r)
            stratum[r] = stratum[r] * card + col[r];
        if (radix_product > (std::uint64_t{1} << 40) / card)
            overflow = true;
        radix_product *= card;
    }
    if (overflow)
        throw UnsupportedFeature("g2_test: conditioning set too large");

    // Dense when the full table is small relative to the sample, otherwise
    // compact the observed strata.
    std::size_t n_strata = static_cast<std::size_t>(radix_product);
    if (n_strata * cell_count > std::max<std::size_t>(4096, 2 * n)) {
        auto& keys = scratch.keys;
        keys.assign(stratum.begin(), stratum.end());
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (std::size_t r = 0; r < n; ++r)
            stratum[r] = static_cast<std::uint64_t>(std::lower_bound(keys.begin(), keys.end(), stratum[r]) - keys.begin());
        n_strata = keys.size();
    }

    auto& counts = scratch.counts;
    counts.assign(n_strata * cell_count, 0);
    const auto colx = data.column(x);
    const auto coly = data.column(y);
    for (std::size_t r = 0; r < n; ++r)
        ++counts[stratum[r] * cell_count + colx[r] * cy + coly[r]];

    CiResult result;
    double g2 = 0.0;
    std::int64_t dof = 0;
    std::vector<std::int64_t> row_sum(cx), col_sum(cy);
    for (std::size_t s = 0; s < n_strata; ++s) {
        const std::int32_t* table = counts.data() + s * cell_count;
        std::fill(row_sum.begin(), row_sum.end(), 0);
        std::fill(col_sum.begin(), col_sum.end(), 0);
        std::int64_t total = 0;
        for (std::size_t a = 0; a < cx; ++a)
            for (std::size_t b = 0; b < cy; ++b) {
                const auto o = table[a * cy + b];
                row_sum[a] += o;
                col_sum[b] += o;
                total += o;
            }
        if (total == 0)
            continue;
        const auto live_rows = std::count_if(row_sum.begin(), row_sum.end(), [](auto v) { return v > 0; });
        const auto live_cols = std::count_if(col_sum.begin(), col_sum.end(), [](auto v) { return v > 0; });
        dof += std::max<std::int64_t>(0, (live_rows - 1) * (live_cols - 1));
        for (std::size_t a = 0; a < cx; ++a)
            for (std::size_t b = 0; b < cy; ++b) {
                const auto o = table[a * cy + b];
                if (o > 0) {
                    const double expected = static_cast<double>(row_sum[a]) * static_cast<double>(col_sum[b]) / static_cast<double>(total);
                    g2 += static_cast<double>(o) * std::log(static_cast<double>(o) / expected);
                }
            }
    }
    result.statistic = std::max(0.0, 2.0 * g2);
    result.dof = static_cast<int>(dof);
    if (dof <= 0 || static_cast<double>(n) < options.min_samples_per_dof * static_cast<double>(dof)) {
        result.p_value = 1.0;
        result.degenerate = true;
    } else {
        result.p_value = boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * result.statistic);
    }
    result.severity = severity(result.p_value);
    return result;
}

// ---------------------------------------------------------------- testers

std::size_t G2Tester::KeyHash::operator()(const std::vector<NodeId>& k) const noexcept {
    std::uint64_t h = 0x84222325CBF29CE4ULL;
    for (NodeId v : k)
        h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
}

G2Tester::G2Tester(const DiscreteDataset& data, double alpha, G2Options options) : data_(&data), alpha_(alpha), options_(options) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("significance level must lie in (0, 1)");
}

CiResult G2Tester::test(NodeId x, NodeId y, std::span<const NodeId> z) const {
    check_query(data_->n_cols(), x, y, z);
    std::vector<NodeId> key;
    key.reserve(z.size() + 2);
    key.push_back(std::min(x, y));
    key.push_back(std::max(x, y));
    key.insert(key.end(), z.begin(), z.end());
    std::sort(key.begin() + 2, key.end());
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++hits_;
            return it->second;
        }
    }
    ++misses_;
    const auto result = g2_test(*data_, key[0], key[1], std::span<const NodeId>(key).subspan(2), options_);
    std::unique_lock lock(mutex_);
    cache_.insert_or_assign(std::move(key), result);
    return result;
}

Dependence G2Tester::measure(NodeId x, NodeId y, std::span<const NodeId> z) const {
    const auto r = test(x, y, z);
    return Dependence{1.0 - r.p_value, r.p_value < alpha_ ? r.severity : 0.0};
}

Dependence OracleTester::measure(NodeId x, NodeId y, std::span<const NodeId> z) const {
    const double dep = d_separated(*dag_, x, y, z) ? 0.0 : 1.0;
    return Dependence{dep, dep};
}

// ---------------------------------------------------------------- sepsets

std::vector<NodeSet> subsets_up_to(const NodeSet& pool, int max_size) {
    const int n = static_cast<int>(pool.size());
    const int limit = max_size < 0 ? n : std::min(n, max_size);
    std::vector<NodeSet> out;
    std::vector<int> idx;
    for (int k = 0; k <= limit; ++k) {
        idx.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            idx[static_cast<std::size_t>(i)] = i;
        for (;;) {
            NodeSet s;
            s.reserve(static_cast<std::size_t>(k));
            for (int i : idx)
                s.push_back(pool[static_cast<std::size_t>(i)]);
            out.push_back(std::move(s));
            int i = k - 1;
            while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i)
                --i;
            if (i < 0)
                break;
            ++idx[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j)
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

Sepsets find_sepsets(const CiTester& tester, const Skeleton& skel, const UnshieldedTriple& ut, const SepsetOptions& options) {
    auto pool_for = [&](NodeId end) {
        NodeSet pool;
        for (NodeId v : skel.neighbors(end))
            if (v != ut.t && v != ut.x && v != ut.y)
                pool.push_back(v);
        pool.push_back(ut.t);
        return make_node_set(std::move(pool));
    };
    auto limit_for = [&](const NodeSet& pool) {
        const int size = static_cast<int>(pool.size());
        return size <= options.exhaustive_limit ? size : options.max_size;
    };

    auto by_size_then_lex = [](const NodeSet& a, const NodeSet& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    };
    std::map<NodeSet, SepsetSide, decltype(by_size_then_lex)> candidates(by_size_then_lex);
    const NodeSet pool_x = pool_for(ut.x);
    const NodeSet pool_y = pool_for(ut.y);
    for (auto& s : subsets_up_to(pool_x, limit_for(pool_x)))
        candidates.emplace(std::move(s), SepsetSide::X);
    for (auto& s : subsets_up_to(pool_y, limit_for(pool_y))) {
        auto [it, inserted] = candidates.emplace(std::move(s), SepsetSide::Y);
        if (!inserted && it->second == SepsetSide::X)
            it->second = SepsetSide::Both;
    }

    Sepsets out;
    for (const auto& [set, side] : candidates) {
        if (tester.dependency(ut.x, ut.y, set) == 0.0) {
            out.sets.push_back(set);
            out.provenance.push_back(side);
        }
    }
    return out;
}

} // namespace ml4c
