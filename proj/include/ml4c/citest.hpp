#pragma once

// Conditional independence: the G^2 test on categorical data, the severity
// transform of p-values, and testers that answer "how dependent are x and y
// given z" either from data or from a known DAG.

#include "ml4c/graph.hpp"
#include "ml4c/synth.hpp"

#include <atomic>
#include <cstdint>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

namespace ml4c {

/// Severity of p underflowing to 0; sqrt(2) * erfc^-1 of the smallest
/// normal double is just below this.
inline constexpr double kSeverityCap = 37.5;

struct CiResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    double severity = 0.0;
    /// Set when the verdict was forced to "independent" because the reduced
    /// dof is zero or the sample is too small for the dof.
    bool degenerate = false;

    friend bool operator==(const CiResult&, const CiResult&) = default;
};

/// sqrt(2) * erfc^-1(p): the number of standard deviations whose two-sided
/// normal tail mass is p. severity(1) = 0, severity(0.0455) ~ 2.
/// Clamped to kSeverityCap.
double severity(double p);

struct G2Options {
    /// Tests with fewer than min_samples_per_dof * dof rows report p = 1.
    double min_samples_per_dof = 5.0;
};

/// G^2 = 2 * sum O ln(O / E) over the (x, y) tables within each stratum of z.
/// Zero cells contribute nothing. Each non-empty stratum contributes
/// (rows with data - 1) * (columns with data - 1) degrees of freedom; empty
/// strata contribute none. Throws InvalidNodes on overlapping arguments.
CiResult g2_test(const DiscreteDataset& data, NodeId x, NodeId y, std::span<const NodeId> z, const G2Options& options = {});

/// Both dependence channels of one query: 1 - p, and the severity of p
/// when the test rejects independence at level alpha (0 otherwise).
/// For the d-separation oracle both channels are 1 (connected) or 0.
struct Dependence {
    double one_minus_p = 0.0;
    double severity = 0.0;

    friend bool operator==(const Dependence&, const Dependence&) = default;
};

class CiTester {
public:
    virtual ~CiTester() = default;

    virtual int n_nodes() const = 0;
    virtual Dependence measure(NodeId x, NodeId y, std::span<const NodeId> z) const = 0;

    /// Non-negative; zero means "judged independent".
    double dependency(NodeId x, NodeId y, std::span<const NodeId> z) const { return measure(x, y, z).severity; }
};

/// G^2 backend with a thread-safe result cache keyed by (min(x,y),
/// max(x,y), sorted z). The dataset must outlive the tester.
class G2Tester final : public CiTester {
public:
    explicit G2Tester(const DiscreteDataset& data, double alpha = 0.05, G2Options options = {});

    int n_nodes() const override { return data_->n_cols(); }
    Dependence measure(NodeId x, NodeId y, std::span<const NodeId> z) const override;
    CiResult test(NodeId x, NodeId y, std::span<const NodeId> z) const;

    double alpha() const noexcept { return alpha_; }
    std::uint64_t cache_hits() const noexcept { return hits_.load(); }
    std::uint64_t cache_misses() const noexcept { return misses_.load(); }

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<NodeId>& k) const noexcept;
    };

    const DiscreteDataset* data_;
    double alpha_;
    G2Options options_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::vector<NodeId>, CiResult, KeyHash> cache_;
    mutable std::atomic<std::uint64_t> hits_{0};
    mutable std::atomic<std::uint64_t> misses_{0};
};

/// d-separation backend. The DAG must outlive the tester.
class OracleTester final : public CiTester {
public:
    explicit OracleTester(const Dag& dag) : dag_(&dag) {}

    int n_nodes() const override { return dag_->size(); }
    Dependence measure(NodeId x, NodeId y, std::span<const NodeId> z) const override;

private:
    const Dag* dag_;
};

enum class SepsetSide : std::uint8_t { X, Y, Both };

/// Conditioning sets within the vicinity that separate x and y.
struct Sepsets {
    std::vector<NodeSet> sets;
    std::vector<SepsetSide> provenance;

    bool empty() const noexcept { return sets.empty(); }
    std::size_t size() const noexcept { return sets.size(); }
};

struct SepsetOptions {
    /// Largest conditioning set tried; negative means unbounded.
    int max_size = 4;
    /// Candidate pools no larger than this are searched exhaustively.
    int exhaustive_limit = 8;
};

/// Tries every subset of PC_x + {t} and of PC_y + {t} (PC excluding t) within
/// the size limits and keeps those the tester judges separating. Sets are
/// unique, ordered by size then lexicographically.
Sepsets find_sepsets(const CiTester& tester, const Skeleton& skel, const UnshieldedTriple& ut, const SepsetOptions& options = {});

/// Every subset of `pool` with at most `max_size` elements, by size then
/// lexicographically; the empty set first.
std::vector<NodeSet> subsets_up_to(const NodeSet& pool, int max_size);

} // namespace ml4c
