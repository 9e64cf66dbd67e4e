#pragma once

// Classifiers deciding whether an unshielded triple is a v-structure:
// fixed predicates over the vicinity context, or a trained tree ensemble
// over the feature vector.

#include "ml4c/featurize.hpp"
#include "ml4c/gbdt.hpp"
#include "ml4c/graph.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ml4c {

inline constexpr double kDefaultThreshold = 0.1;

/// (triple, 1 if both x->t and y->t in the DAG). Throws SkeletonMismatch
/// unless skel is the DAG's skeleton.
std::vector<std::pair<UnshieldedTriple, int>> label_uts(const Dag& dag, const Skeleton& skel);

enum class PredicateKind {
    /// olp({T}, S) = 0
    StrongCpc,
    /// olp({T}, S) < 0.5
    StrongMpc,
    /// olp({T}, S) < 1 and min{X~Y | S v T} > 0
    StrongGmb,
    /// min{X~Y | {T}} > 0; never 0 on a v-structure
    Weak1,
    /// max{X~Y | PC_T singletons} = 0; never 1 on a non-v-structure
    Weak2,
    /// min{PC_X~PC_Y | S v T} > 0; never 0 on a v-structure
    Weak3,
};

std::string to_string(PredicateKind k);
PredicateKind predicate_kind_from_string(const std::string& s);

struct PredicateOutcome {
    int score = 0;
    /// The predicate needs sepsets and none were found; score is 0.
    bool empty_sepsets = false;
};

PredicateOutcome evaluate_predicate(PredicateKind kind, const VicinityContext& ctx, const CiTester& tester);

/// Just the {0, 1} score.
int predicate_score(PredicateKind kind, const VicinityContext& ctx, const CiTester& tester);

struct Provenance {
    std::string corpus;
    int graph = 0;
    UnshieldedTriple triple;
};

struct UtExample {
    FeatureVector features;
    int label = 0;
    Provenance provenance;
};

/// Trained ensemble plus everything needed to featurize consistently.
struct UtModel {
    TreeEnsembleModel ensemble;
    EmbeddingBasis basis;
    std::string schema = kFeatureSchema;
    double threshold = kDefaultThreshold;
    BoostParams params;
};

/// Throws DegenerateLabels if either class is missing.
TreeEnsembleModel train(std::span<const UtExample> examples, const BoostParams& params);

/// Throws SchemaMismatch if the vector was built under another schema or
/// has the wrong length.
double score(const UtModel& model, const FeatureVector& fv);

/// Either a predicate or a trained model.
class Classifier {
public:
    explicit Classifier(PredicateKind kind) : impl_(kind) {}
    explicit Classifier(UtModel model) : impl_(std::move(model)) {}

    bool needs_features() const noexcept { return std::holds_alternative<UtModel>(impl_); }
    const UtModel* model() const noexcept { return std::get_if<UtModel>(&impl_); }
    std::optional<PredicateKind> predicate() const noexcept;

    /// Score in [0, 1]. `fv` is required for models and ignored by predicates.
    double score(const VicinityContext& ctx, const CiTester& tester, const FeatureVector* fv) const;

private:
    std::variant<PredicateKind, UtModel> impl_;
};

} // namespace ml4c
