#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "geohmm/estimation.hpp"
#include "geohmm/init.hpp"

namespace geohmm {

struct PipelineConfig {
  LearnConfig learn;
  std::size_t n_states = 1;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  BucketConfig buckets;
  /// Relative jitter applied to A and B of the tagging initialization.
  double init_jitter = 0.1;
  /// Used instead of the heuristic initialization when present.
  std::optional<GeoHmm> initial;
};

/// Starting point of one restart. With odometry: the bucketing/tagging
/// initialization, jittered. Without: a random model.
GeoHmm starting_model(const ExperienceSequence& e, std::span<const std::size_t> dims,
                      const PipelineConfig& cfg, Rng& rng);

struct RestartOutcome {
  std::uint64_t seed = 0;
  LearnResult result;
  double final_loglik() const { return result.report.loglik_trace.back(); }
};

struct PipelineResult {
  std::vector<RestartOutcome> runs;
  std::size_t best = 0;  // highest final log-likelihood, earliest on ties
  const GeoHmm& best_model() const { return runs[best].result.model; }
};

/// Restart r draws from Rng(Rng::derive_seed(cfg.seed, r)).
PipelineResult learn_restarts(const ExperienceSequence& e, std::span<const std::size_t> dims,
                              const PipelineConfig& cfg);

}  // namespace geohmm
