#include "percept/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "percept/error.hpp"

namespace percept {

namespace {

struct Candidate {
  std::vector<int> features;  // sorted
  double precision = 0.0;
  double lower = 0.0;
  double coverage = 0.0;
};

// Higher lower bound first, then precision, coverage, and the rule itself.
bool better(const Candidate& a, const Candidate& b) {
  if (a.lower != b.lower) return a.lower > b.lower;
  if (a.precision != b.precision) return a.precision > b.precision;
  if (a.coverage != b.coverage) return a.coverage > b.coverage;
  return a.features < b.features;
}

}  // namespace

double hoeffding_lower_bound(double p_hat, int n, double delta) {
  return p_hat - std::sqrt(std::log(1.0 / delta) / (2.0 * n));
}

double estimate_rule_coverage(const AnchorSample& sample, std::span<const int> features) {
  const Eigen::Index n = sample.indicators.rows();
  if (n == 0) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool ok = true;
    for (int f : features) ok = ok && sample.indicators(i, f) != 0.0;
    hits += ok;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

double estimate_rule_precision(const InterpretableInstance& instance, std::span<const int> features, int label,
                               int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "precision estimate needs at least one sample");
  Rng rng(seed);
  const AnchorSample s = instance.sample_anchor(features, n, rng);
  return static_cast<double>(std::count(s.labels.begin(), s.labels.end(), label)) / n;
}

AnchorResult anchors_explain(const InterpretableInstance& instance, int label, const AnchorOptions& options) {
  if (!(options.precision_target > 0.0 && options.precision_target < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "precision target must lie in (0,1)");
  }
  if (!(options.delta > 0.0 && options.delta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0,1)");
  }
  if (options.beam_width < 1 || options.max_predicates < 0 || options.samples_per_candidate < 1 ||
      options.coverage_samples < 1 || options.sample_batch < 1) {
    throw Error(ErrorCode::kInvalidArgument, "anchor beam width and sample counts must be positive");
  }
  if (label < 0 || label >= instance.num_classes()) {
    throw Error(ErrorCode::kInvalidTarget, "label " + std::to_string(label) + " outside the predictor's classes");
  }

  Rng rng(options.seed);
  int used = 0;
  const AnchorSample coverage_sample = instance.sample_anchor({}, options.coverage_samples, rng);
  used += options.coverage_samples;

  auto evaluate = [&](std::vector<int> features) {
    Candidate c;
    c.features = std::move(features);
    int n = 0, hits = 0;
    while (n < options.samples_per_candidate) {
      const int m = std::min(options.sample_batch, options.samples_per_candidate - n);
      const AnchorSample s = instance.sample_anchor(c.features, m, rng);
      hits += static_cast<int>(std::count(s.labels.begin(), s.labels.end(), label));
      n += m;
      const double p = static_cast<double>(hits) / n;
      if (p + (p - hoeffding_lower_bound(p, n, options.delta)) < options.precision_target) break;
    }
    used += n;
    c.precision = static_cast<double>(hits) / n;
    c.lower = hoeffding_lower_bound(c.precision, n, options.delta);
    c.coverage = estimate_rule_coverage(coverage_sample, c.features);
    return c;
  };

  auto finish = [&](const Candidate& c, bool below) {
    AnchorResult r;
    r.label = label;
    r.class_name = instance.class_names().at(static_cast<std::size_t>(label));
    for (int f : c.features) r.predicates.push_back({f, instance.predicate_text(f)});
    r.precision = c.precision;
    r.precision_lower_bound = c.lower;
    r.coverage = c.coverage;
    r.samples_used = used;
    r.below_target = below;
    return r;
  };

  const Candidate empty = evaluate({});
  if (empty.lower >= options.precision_target) return finish(empty, false);

  Candidate best = empty;
  std::vector<Candidate> beam{empty};
  const int d = instance.dimension();
  for (int round = 1; round <= std::min(options.max_predicates, d); ++round) {
    std::set<std::vector<int>> seen;
    std::vector<Candidate> round_candidates;
    for (const Candidate& parent : beam) {
      for (int f = 0; f < d; ++f) {
        if (std::binary_search(parent.features.begin(), parent.features.end(), f)) continue;
        std::vector<int> rule = parent.features;
        rule.insert(std::upper_bound(rule.begin(), rule.end(), f), f);
        if (!seen.insert(rule).second) continue;
        round_candidates.push_back(evaluate(std::move(rule)));
      }
    }
    if (round_candidates.empty()) break;

    const Candidate* pick = nullptr;
    for (const Candidate& c : round_candidates) {
      if (c.lower < options.precision_target) continue;
      if (pick == nullptr || std::tie(c.coverage, c.lower) > std::tie(pick->coverage, pick->lower) ||
          (c.coverage == pick->coverage && c.lower == pick->lower && c.features < pick->features)) {
        pick = &c;
      }
    }
    if (pick != nullptr) return finish(*pick, false);

    std::sort(round_candidates.begin(), round_candidates.end(), better);
    if (better(round_candidates.front(), best)) best = round_candidates.front();
    round_candidates.resize(std::min<std::size_t>(round_candidates.size(), static_cast<std::size_t>(options.beam_width)));
    beam = std::move(round_candidates);
  }
  return finish(best, true);
}

}  // namespace percept
