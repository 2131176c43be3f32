#pragma once

#include <Eigen/Dense>
#include <vector>

#include "geohmm/model.hpp"

namespace geohmm {

struct InferenceOptions {
  /// Off: every relation density is replaced by 1 (plain HMM likelihood).
  bool use_odometry = true;
  /// When positive, relation densities below this value are raised to it.
  double density_floor = 0.0;
};

/// Scaled forward/backward tables. Row t of alpha sums to one; the
/// likelihood is recovered as sum_t (log scales[t] + log_offsets[t]), where
/// log_offsets[t] is the largest log relation density at step t that was
/// factored out before exponentiating.
struct Trellis {
  Eigen::MatrixXd alpha;  // T x N
  Eigen::MatrixXd beta;   // T x N
  std::vector<double> scales;
  std::vector<double> log_offsets;
  double loglik = 0.0;
};

struct Posteriors {
  Eigen::MatrixXd gamma;          // T x N
  std::vector<Eigen::MatrixXd> xi;  // T-1 slabs, xi[t](i, j) pairs q_t = i, q_{t+1} = j

  std::size_t length() const { return static_cast<std::size_t>(gamma.rows()); }
  std::size_t n_states() const { return static_cast<std::size_t>(gamma.cols()); }
};

/// b_t^j: product over dimensions of B[d](V[d], state).
double obs_prob(const GeoHmm& model, std::size_t state, const std::vector<int>& v);

/// Throws ImpossibleSequence if the sequence has zero probability.
Trellis forward_backward(const GeoHmm& model, const ExperienceSequence& e,
                         const InferenceOptions& opts = {});

Posteriors posteriors(const Trellis& trellis, const GeoHmm& model, const ExperienceSequence& e,
                      const InferenceOptions& opts = {});

/// Convenience: log P(E | model).
double log_likelihood(const GeoHmm& model, const ExperienceSequence& e,
                      const InferenceOptions& opts = {});

}  // namespace geohmm
