#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "percept/perturbation.hpp"

namespace percept {

struct AnchorOptions {
  double precision_target = 0.95;  // tau
  double delta = 0.05;             // confidence 1 - delta per candidate
  int beam_width = 2;
  int max_predicates = 4;
  int samples_per_candidate = 1000;
  // Candidates are sampled in batches of this size and dropped early once
  // their Hoeffding upper bound falls below the target.
  int sample_batch = 100;
  int coverage_samples = 1000;
  std::uint64_t seed = 0;
};

struct AnchorPredicate {
  int feature = 0;
  std::string text;
};

struct AnchorResult {
  int label = 0;
  std::string class_name;
  std::vector<AnchorPredicate> predicates;  // sorted by feature id
  double precision = 0.0;
  double precision_lower_bound = 0.0;
  double coverage = 0.0;
  int samples_used = 0;
  // No rule reached the target; the rule with the best lower bound is returned.
  bool below_target = false;
};

// One-sided Hoeffding lower bound: p_hat - sqrt(ln(1/delta) / (2n)).
double hoeffding_lower_bound(double p_hat, int n, double delta);

// Beam search for the shortest predicate conjunction whose precision lower
// bound reaches the target. Among passing rules of the same length the widest
// coverage wins.
AnchorResult anchors_explain(const InterpretableInstance& instance, int label, const AnchorOptions& options);

// Fraction of `n` fresh samples satisfying the rule that keep `label`.
double estimate_rule_precision(const InterpretableInstance& instance, std::span<const int> features, int label,
                               int n, std::uint64_t seed);

// Fraction of unconstrained samples that satisfy every predicate.
double estimate_rule_coverage(const AnchorSample& sample, std::span<const int> features);

}  // namespace percept
