#pragma once

#include <cstddef>
#include <vector>

#include "geohmm/model.hpp"
#include "geohmm/rng.hpp"

namespace geohmm {

struct KlEstimate {
  double value = 0.0;  // nats per symbol
  std::size_t n_sequences = 0;
  std::size_t seq_length = 0;
  double std_error = 0.0;
  /// Set when the learned model gives some sampled sequence zero probability;
  /// value and std_error are then +inf.
  bool infinite = false;
  std::vector<double> per_sequence;
};

/// Throws InputError unless both models have identical alphabets.
void check_compatible(const GeoHmm& a, const GeoHmm& b);

/// Mean over n sampled sequences of (loglik_true - loglik_learned) / L with
/// odometry ignored. Sequences come from the true model's start state.
KlEstimate kl_sampled(const GeoHmm& true_model, const GeoHmm& learned, std::size_t length,
                      std::size_t n, Rng& rng);

/// Largest number of (string, path) terms kl_exact_small will enumerate.
inline constexpr double kExactTermLimit = 1e7;

/// Per-symbol KL divergence between the length-T observation distributions,
/// by summing every state path for every observation string.
double kl_exact_small(const GeoHmm& true_model, const GeoHmm& learned, std::size_t horizon);

}  // namespace geohmm
