#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "geohmm/model.hpp"
#include "geohmm/rng.hpp"

namespace geohmm {

/// A closed polygonal loop of corridors traversed clockwise, turning by
/// 2 pi / K at each of the K corners.
struct LoopSpec {
  std::vector<double> corridor_lengths{1200.0, 800.0, 1200.0, 800.0};
  std::vector<std::size_t> states_per_corridor{4, 4, 4, 4};
  double obs_noise = 0.25;
  double sigma_x = 10.0;
  double sigma_y = 10.0;
  double kappa = 200.0;
  double p_forward = 0.85;
  double p_skip = 0.10;
  double p_stay = 0.05;
  CoordinateMode mode = CoordinateMode::Relative;

  std::size_t n_states() const;
};

/// Symbols of each observation dimension (front, left, right).
inline const std::vector<std::string> kLoopSymbols{"open", "door", "wall", "unknown"};
inline constexpr std::size_t kLoopDims = 3;

GeoHmm make_loop_model(const LoopSpec& spec);

ExperienceSequence sample_sequence(const GeoHmm& model, std::size_t length, Rng& rng);

/// Rows of A and columns of B drawn from a flat Dirichlet; poses drawn
/// uniformly in a box of side `extent`, unit-ish spreads.
GeoHmm random_model(std::size_t n, std::span<const std::size_t> obs_dims, CoordinateMode mode,
                    Rng& rng, double extent = 10.0);

/// Multiplies every A and B entry by (1 + jitter * u), u uniform in [0, 1),
/// and renormalizes. R is left as is.
GeoHmm perturb_model(const GeoHmm& model, double jitter, Rng& rng);

}  // namespace geohmm
