#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "geohmm/model.hpp"

namespace geohmm {

struct BucketConfig {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double sigma_theta = 0.1;  // radians
  double bucket_factor = 1.5;
  double tag_factor = 2.0;

  void check() const;
};

/// Bucket 0 always exists and stands for the zero displacement of a self
/// transition; its mean never moves.
struct Bucket {
  std::size_t id = 0;
  Reading mean;
  std::vector<std::size_t> members;  // indices into the reading list
};

struct Bucketing {
  std::vector<Bucket> buckets;
  std::vector<std::size_t> assignment;  // bucket id per reading
};

Bucketing bucketize(std::span<const Reading> readings, const BucketConfig& cfg);

struct TaggingResult {
  std::vector<std::size_t> state_sequence;  // one more entry than readings
  std::size_t states_used = 0;
  /// Poses of the allocated states; their embedding gives relation_means.
  Poses poses;
  RelationMatrix relation_means;
  /// populated(i, j) holds when both states were allocated.
  std::vector<char> populated;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> bucket_assoc;

  bool is_populated(std::size_t i, std::size_t j) const {
    return populated[i * relation_means.size() + j] != 0;
  }
};

TaggingResult tag_states(std::span<const Reading> readings, const Bucketing& bucketing,
                         std::size_t n_max, const BucketConfig& cfg,
                         CoordinateMode mode = CoordinateMode::Global);

/// Smoothing constant added to every transition and observation count.
inline constexpr double kInitSmoothing = 0.05;

GeoHmm init_model(const ExperienceSequence& e, std::size_t n,
                  std::span<const std::size_t> obs_dims, const BucketConfig& cfg,
                  CoordinateMode mode = CoordinateMode::Global);

}  // namespace geohmm
