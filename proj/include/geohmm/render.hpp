#pragma once

#include <string>

#include "geohmm/model.hpp"

namespace geohmm {

/// Global poses of all states from a least-squares embedding of R, with
/// state 0 at the origin. Pairs are weighted by their transition
/// probabilities in both directions.
Poses embed_states(const GeoHmm& model);

struct RenderOptions {
  double width = 800.0;
  double height = 800.0;
  double margin = 60.0;
  double dashed_threshold = 0.2;
};

/// SVG map: states at their embedded positions (data-x / data-y hold the
/// model coordinates), a solid arrow to each state's most likely successor
/// and dashed arrows for other transitions at or above the threshold.
std::string render_svg(const GeoHmm& model, const RenderOptions& opts = {});

}  // namespace geohmm
