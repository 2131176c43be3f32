#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "geohmm/inference.hpp"
#include "geohmm/model.hpp"
#include "geohmm/relations.hpp"

namespace geohmm {

struct LearnConfig {
  ConstraintLevel constraint_level = ConstraintLevel::Additive;
  CoordinateMode mode = CoordinateMode::Relative;
  /// Off: plain Baum-Welch on the observations; R is left untouched.
  bool use_odometry = true;
  std::size_t max_iters = 200;
  /// Stop once (loglik - previous) < rel_tol * |previous|.
  double rel_tol = 1e-6;
  double var_floor = kVarFloor;
  double kappa_max = kKappaMax;
  /// Lower bound on every A and B entry (0 disables).
  double prob_floor = 0.0;
  double density_floor = 0.0;
  /// Expected-count threshold above which a heading estimate is held fixed.
  double held_weight_threshold = 1.0;
  /// With Additive level, iterations before this one use AntiSymmetric.
  std::size_t additive_from_iteration = 0;
  std::uint64_t rng_seed = 0;

  InferenceOptions inference() const { return {use_odometry, density_floor}; }
  RelationGuards guards() const { return {var_floor, kappa_max}; }
};

struct LearnReport {
  std::size_t iterations_run = 0;
  std::vector<double> loglik_trace;  // iterations_run + 1 entries
  bool converged = false;
  std::vector<std::pair<std::size_t, double>> monotonicity_violations;  // (iteration, drop)
};

struct LearnResult {
  GeoHmm model;
  LearnReport report;
};

/// Called after every M-step with the 1-based iteration number.
using IterationObserver = std::function<void(std::size_t, const GeoHmm&)>;

/// Expected transition frequencies. Rows without any expected departures keep
/// the corresponding row of `previous`.
Eigen::MatrixXd update_transitions(const Posteriors& post, const Eigen::MatrixXd& previous,
                                   double prob_floor = 0.0);

/// Expected symbol frequencies per state and dimension, normalized over the
/// state's own occupancy so every column is a distribution.
std::vector<Eigen::MatrixXd> update_observations(const Posteriors& post,
                                                 const ExperienceSequence& e,
                                                 const std::vector<Eigen::MatrixXd>& previous,
                                                 double prob_floor = 0.0);

/// Maximizes sum c_k log p_k over distributions with every p_k >= floor.
/// Returns false (and leaves `p` untouched) if all counts are zero.
bool fit_floored_distribution(std::span<const double> counts, double floor, std::span<double> p);

struct TwoNormalFit {
  double mu_p = 0.0;  // mu_q = -mu_p
  double var_p = 0.0;
  double var_q = 0.0;
};

/// Maximum-likelihood fit of N(mu, var_p) to `p` and N(-mu, var_q) to `q`,
/// found among the real roots of the cubic the stationarity conditions
/// reduce to. Exactly consistent constant samples (each of size >= 2) yield
/// floored variances; every other zero-variance configuration leaves the
/// likelihood unbounded and throws DegenerateSample.
TwoNormalFit constrained_two_normal_mle(std::span<const double> p, std::span<const double> q,
                                        double var_floor = kVarFloor);

/// One M-step at the given constraint level.
GeoHmm maximize(const Posteriors& post, const ExperienceSequence& e, const GeoHmm& model,
                const LearnConfig& cfg, ConstraintLevel level);

/// Generalized EM from `initial` until convergence or cfg.max_iters.
LearnResult em_learn(const ExperienceSequence& e, const GeoHmm& initial, const LearnConfig& cfg,
                     const IterationObserver& observer = {});

}  // namespace geohmm
