#pragma once

#include <vector>

#include "geohmm/circstats.hpp"
#include "geohmm/inference.hpp"
#include "geohmm/model.hpp"

namespace geohmm {

/// Clamps applied to every re-estimated variance and concentration.
struct RelationGuards {
  double var_floor = kVarFloor;
  double kappa_max = kKappaMax;
};

/// xi-weighted moments of the readings traversing one ordered state pair.
struct TransitionMoments {
  double w = 0.0;
  double sx = 0.0, sy = 0.0;
  double sxx = 0.0, syy = 0.0;
  double ssin = 0.0, scos = 0.0;

  void add(const Reading& r, double weight);
};

/// Moments for every ordered pair: xi_t(i, j) weights reading r_{t+1}.
class RelationMoments {
 public:
  RelationMoments() = default;
  explicit RelationMoments(std::size_t n) : n_(n), m_(n * n) {}

  static RelationMoments collect(const Posteriors& post, const ExperienceSequence& e);

  std::size_t size() const noexcept { return n_; }
  TransitionMoments& operator()(std::size_t i, std::size_t j) { return m_[i * n_ + j]; }
  const TransitionMoments& operator()(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<TransitionMoments> m_;
};

/// Expected log density of the moments' readings under `entry`.
double expected_log_density(const TransitionMoments& m, const RelationEntry& entry);

/// Each ordered pair estimated on its own data; only the diagonal mean is pinned.
RelationMatrix update_relations_unconstrained(const RelationMoments& moments,
                                              const RelationMatrix& old,
                                              const RelationGuards& guards = {});

/// Lag-behind update enforcing a zero diagonal and exact anti-symmetry. Means
/// use the previous variances and concentrations; variances and
/// concentrations are then re-fitted around the new means. Pairs without
/// data in either direction keep their old parameters.
RelationMatrix update_relations_antisym(const RelationMoments& moments, const RelationMatrix& old,
                                        CoordinateMode mode, const RelationGuards& guards = {});

RelationMatrix update_relations_antisym(const Posteriors& post, const ExperienceSequence& e,
                                        const RelationMatrix& old, CoordinateMode mode,
                                        const RelationGuards& guards = {});

struct AdditiveOptions {
  RelationGuards guards;
  double held_weight_threshold = 1.0;
};

/// Fully additive update: headings by projecting the anti-symmetric heading
/// estimates onto the additive set, positions by a weighted least-squares
/// embedding using the previous variances, then variances and concentrations
/// around the embedded means.
RelationMatrix update_relations_additive(const RelationMoments& moments, const RelationMatrix& old,
                                         CoordinateMode mode, const AdditiveOptions& opts = {});

RelationMatrix update_relations_additive(const Posteriors& post, const ExperienceSequence& e,
                                         const RelationMatrix& old, CoordinateMode mode,
                                         const AdditiveOptions& opts = {});

}  // namespace geohmm
