#pragma once

// End-to-end inference: score every unshielded triple of a skeleton, keep
// the confident ones, drop conflicting candidates, orient and close under
// the Meek rules.

#include "ml4c/citest.hpp"
#include "ml4c/featurize.hpp"
#include "ml4c/graph.hpp"
#include "ml4c/learner.hpp"
#include "ml4c/synth.hpp"

#include <span>
#include <string>
#include <vector>

namespace ml4c {

struct VCandidate {
    UnshieldedTriple triple;
    double score = 0.0;

    friend bool operator==(const VCandidate&, const VCandidate&) = default;
};

/// True when one candidate orients some edge u->v and the other v->u.
bool conflicts(const VCandidate& a, const VCandidate& b);

/// Higher score first; equal scores by ascending (x, t, y).
bool higher_priority(const VCandidate& a, const VCandidate& b);

/// Removes every candidate that conflicts with a higher-priority one; this
/// is the fixpoint of repeatedly dropping the lowest-priority candidate in
/// conflict with a higher-priority survivor. Output is in priority order.
std::vector<VCandidate> conflict_resolve(std::vector<VCandidate> candidates);

/// Skeleton with x->t<-y for every candidate, everything else undirected.
/// Throws OrientationConflict if candidates disagree or form a directed
/// cycle.
Pdag orient(const Skeleton& skel, std::span<const VCandidate> survivors);

struct Admission {
    Pdag cpdag;
    std::vector<VCandidate> admitted;
};

/// Orients the survivors and closes under the Meek rules. If the full set
/// closes a directed cycle or makes the rules contradict themselves,
/// survivors are admitted one at a time in the given order and any that
/// would break consistency is skipped.
Admission admit(const Skeleton& skel, std::span<const VCandidate> survivors);

struct PipelineConfig {
    SepsetOptions sepsets;
    /// A triple is a candidate iff score >= threshold.
    double threshold = kDefaultThreshold;
    /// Score triples with OpenMP; the serial path is the reference.
    bool parallel = true;
};

struct PhaseTimings {
    double score_seconds = 0.0;
    double resolve_seconds = 0.0;
    double orient_seconds = 0.0;
};

struct PipelineResult {
    Pdag cpdag;
    /// Every triple with its score, in (x, t, y) order.
    std::vector<VCandidate> scored;
    /// Triples at or above the threshold.
    std::vector<VCandidate> candidates;
    /// Output of conflict_resolve.
    std::vector<VCandidate> survivors;
    /// The survivors actually oriented; see admit().
    std::vector<VCandidate> admitted;
    /// Triples a sepset-based predicate scored 0 for lack of sepsets.
    int empty_sepsets = 0;
    PhaseTimings timings;
};

/// Throws NodeMismatch when the tester and skeleton disagree on node count.
PipelineResult run_ml4c_detailed(const CiTester& tester, const Skeleton& skel, const Classifier& classifier,
                                 const PipelineConfig& config = {});

Pdag run_ml4c(const CiTester& tester, const Skeleton& skel, const Classifier& classifier, const PipelineConfig& config = {});

/// G^2 tester on `data` at level alpha. Throws NodeMismatch unless the
/// dataset columns are the skeleton nodes, in order.
Pdag run_ml4c(const DiscreteDataset& data, const Skeleton& skel, const Classifier& classifier, const PipelineConfig& config = {},
              double alpha = 0.05);

/// One labelled, featurized example per unshielded triple of every graph's
/// true skeleton, tested on that graph's data.
std::vector<UtExample> build_training_set(std::span<const CorpusItem> corpus, const EmbeddingBasis& basis,
                                          const SepsetOptions& sepsets = {}, double alpha = 0.05,
                                          const std::string& corpus_name = "");

} // namespace ml4c
