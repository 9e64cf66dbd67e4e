#pragma once

// Fixed-length description of an unshielded triple <X, T, Y> built from its
// vicinity: conditional dependencies between {X, PC_X} and {Y, PC_Y} under
// five conditionals, overlaps between the neighbor sets and the sepsets,
// and a random-feature mean embedding of every variable-size dependency set.
//
// Layout of the 755 values:
//
//   [0, 5)     sizes: |PC_X|, |PC_Y|, |PC_T|, |S|, mean |S_i|
//   [5, 12)    overlaps: (PC_X,PC_Y) (PC_X,PC_T) (PC_X,S) (PC_Y,PC_T)
//              (PC_Y,S) (PC_T,S) ({T},S)
//   [12, 14)   X~Y|{T}: 1 - p, severity
//   [14, 755)  19 blocks of 39, bivariable-major over
//                bivariables  X~Y, X~PC_Y, PC_X~Y, PC_X~PC_Y
//                conditionals {0}, {T}, PC_T singletons, S, S v T
//              skipping X~Y|{T}. Each block is
//                size, (mean, std, max, min) of 1-p, (mean, std, max, min)
//                of severity, 15 embedding means of 1-p, 15 of severity.

#include "ml4c/citest.hpp"
#include "ml4c/graph.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ml4c {

inline constexpr int kFeatureDim = 755;
inline constexpr int kEmbeddingDim = 15;
inline constexpr int kBlockDim = 39;
inline constexpr const char* kFeatureSchema = "ml4c-ut-755-v1";

/// A set of conditioning sets.
using Ensemble = std::vector<NodeSet>;

struct VicinityContext {
    UnshieldedTriple ut;
    /// Neighbors of each member, excluding the other two members.
    NodeSet pc_x, pc_y, pc_t;
    NodeSet vicinity;
    Sepsets sepsets;
};

VicinityContext build_vicinity(const Skeleton& skel, const UnshieldedTriple& ut, const CiTester& tester,
                               const SepsetOptions& options = {});

/// {S u {v} : S in e}, duplicates removed.
Ensemble elementwise_union(const Ensemble& e, NodeId v);

enum class Conditional : int { Empty = 0, Center = 1, CenterNeighbors = 2, Sepsets = 3, SepsetsWithCenter = 4 };
inline constexpr int kConditionals = 5;
inline constexpr int kBivariables = 4;

/// The five conditionals of a context, indexed by Conditional.
std::array<Ensemble, kConditionals> conditional_domain(const VicinityContext& ctx);

/// One Dependence per (a, b, z) with a in A, b in B, z in Z, skipping
/// combinations where a == b or a or b lies in z.
std::vector<Dependence> extended_dependency(const CiTester& tester, const NodeSet& a, const NodeSet& b, const Ensemble& z);

/// |A n B| / min(|A|, |B|); 0 if either is empty.
double overlap(const NodeSet& a, const NodeSet& b);
/// Mean of overlap(A, S_i) over the ensemble; 0 for an empty ensemble.
double overlap(const NodeSet& a, const Ensemble& s);

std::array<double, 12> entanglement_features(const VicinityContext& ctx);

/// Random Fourier basis: w_j ~ N(0, 1), b_j ~ U[0, 2 pi).
struct EmbeddingBasis {
    std::uint64_t seed = 0;
    std::array<double, kEmbeddingDim> w{};
    std::array<double, kEmbeddingDim> b{};

    static EmbeddingBasis from_seed(std::uint64_t seed);
    friend bool operator==(const EmbeddingBasis&, const EmbeddingBasis&) = default;
};

/// mean, std (population), max, min, then the 15 means of cos(w_j z + b_j).
/// All zeros for an empty input.
std::array<double, 4 + kEmbeddingDim> embed_channel(std::span<const double> values, const EmbeddingBasis& basis);

/// One 39-value block for a dependency set (both channels).
std::array<double, kBlockDim> embed(std::span<const Dependence> values, const EmbeddingBasis& basis);

struct FeatureVector {
    std::vector<double> values;
    std::string schema = kFeatureSchema;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector featurize_context(const VicinityContext& ctx, const CiTester& tester, const EmbeddingBasis& basis);

FeatureVector featurize_ut(const Skeleton& skel, const UnshieldedTriple& ut, const CiTester& tester, const EmbeddingBasis& basis,
                           const SepsetOptions& options = {});

/// Column names matching the layout above.
const std::vector<std::string>& feature_names();

/// OpenMP fan-out over triples; the tester cache is the only shared state.
std::vector<FeatureVector> featurize_all(const Skeleton& skel, std::span<const UnshieldedTriple> uts, const CiTester& tester,
                                         const EmbeddingBasis& basis, const SepsetOptions& options = {});

/// Single-threaded reference for featurize_all.
std::vector<FeatureVector> featurize_all_serial(const Skeleton& skel, std::span<const UnshieldedTriple> uts, const CiTester& tester,
                                                const EmbeddingBasis& basis, const SepsetOptions& options = {});

} // namespace ml4c
