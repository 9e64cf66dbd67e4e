#pragma once

// Reader for the discrete subset of the Bayesian network interchange
// format: `variable` blocks with `type discrete [ k ] { states };` and
// `probability ( child | parents ) { ... }` blocks holding either one
// `table` or one `(parent states) values;` row per parent assignment.
//
// A `table` for a child with parents lists P(child = s | parents = a) with
// the child state varying slowest and, within it, the last parent fastest.

#include "ml4c/synth.hpp"

#include <filesystem>
#include <string>

namespace ml4c {

/// Rows must sum to 1 within 1e-6 and are then renormalized exactly.
/// Throws ParseError with the offending position, UnsupportedFeature for
/// non-discrete variables or `default` rows.
BayesNet parse_bif_text(const std::string& text);
BayesNet parse_bif(const std::filesystem::path& path);

} // namespace ml4c
