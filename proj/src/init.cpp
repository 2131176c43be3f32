#include "geohmm/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"

namespace geohmm {

void BucketConfig::check() const {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !(sigma_theta > 0.0) || !(bucket_factor > 0.0) ||
      !(tag_factor > 0.0)) {
    throw InputError("bucket configuration values must be positive");
  }
}

namespace {

struct Deviation {
  double x, y, theta;
};

Deviation deviation(const Reading& r, const Reading& m, const BucketConfig& cfg) {
  return {std::abs(r.dx - m.dx) / cfg.sigma_x, std::abs(r.dy - m.dy) / cfg.sigma_y,
          std::abs(wrap_angle(r.dtheta - m.dtheta)) / cfg.sigma_theta};
}

bool within(const Deviation& d, double factor) {
  return d.x <= factor && d.y <= factor && d.theta <= factor;
}

double norm2(const Deviation& d) { return d.x * d.x + d.y * d.y + d.theta * d.theta; }

// Running sums so the bucket mean can be refreshed after every insertion.
struct BucketSums {
  double sx = 0.0, sy = 0.0, ssin = 0.0, scos = 0.0;
};

Reading entry_mean(const RelationEntry& e) { return {e.mu_x, e.mu_y, e.mu_theta}; }

}  // namespace

Bucketing bucketize(std::span<const Reading> readings, const BucketConfig& cfg) {
  cfg.check();
  Bucketing out;
  out.buckets.push_back(Bucket{0, {}, {}});
  std::vector<BucketSums> sums(1);
  out.assignment.reserve(readings.size());

  for (std::size_t k = 0; k < readings.size(); ++k) {
    const auto& r = readings[k];
    if (!std::isfinite(r.dx) || !std::isfinite(r.dy) || !std::isfinite(r.dtheta)) {
      throw InputError("non-finite odometric reading " + std::to_string(k + 1));
    }
    std::optional<std::size_t> hit;
    for (const auto& b : out.buckets) {
      if ((b.id == 0 || !b.members.empty()) && within(deviation(r, b.mean, cfg), cfg.bucket_factor)) {
        hit = b.id;
        break;
      }
    }
    if (!hit) {
      hit = out.buckets.size();
      out.buckets.push_back(Bucket{*hit, r, {}});
      sums.emplace_back();
    }
    auto& b = out.buckets[*hit];
    b.members.push_back(k);
    out.assignment.push_back(*hit);
    if (*hit == 0) continue;
    auto& s = sums[*hit];
    s.sx += r.dx;
    s.sy += r.dy;
    s.ssin += std::sin(r.dtheta);
    s.scos += std::cos(r.dtheta);
    const double n = static_cast<double>(b.members.size());
    b.mean = {s.sx / n, s.sy / n, std::atan2(s.ssin, s.scos)};
  }
  return out;
}

TaggingResult tag_states(std::span<const Reading> readings, const Bucketing& bucketing,
                         std::size_t n_max, const BucketConfig& cfg, CoordinateMode mode) {
  cfg.check();
  if (n_max < 1) throw InputError("at least one state is required");
  if (bucketing.assignment.size() != readings.size()) {
    throw InputError("bucket assignment does not match the readings");
  }

  TaggingResult out;
  out.poses.x.assign(n_max, 0.0);
  out.poses.y.assign(n_max, 0.0);
  out.poses.theta.assign(n_max, 0.0);
  out.states_used = 1;
  out.state_sequence.reserve(readings.size() + 1);
  out.state_sequence.push_back(0);
  for (std::size_t i = 0; i < n_max; ++i) out.bucket_assoc[{i, i}] = 0;

  auto rebuild = [&] {
    const auto u = static_cast<std::ptrdiff_t>(out.states_used);
    const auto sub = embed_relations({out.poses.x.data(), static_cast<std::size_t>(u)},
                                     {out.poses.y.data(), static_cast<std::size_t>(u)},
                                     {out.poses.theta.data(), static_cast<std::size_t>(u)}, mode);
    out.relation_means = RelationMatrix(n_max);
    out.populated.assign(n_max * n_max, 0);
    for (std::size_t i = 0; i < out.states_used; ++i) {
      for (std::size_t j = 0; j < out.states_used; ++j) {
        out.relation_means(i, j) = sub(i, j);
        out.populated[i * n_max + j] = 1;
      }
    }
  };
  rebuild();

  std::size_t cur = 0;
  for (std::size_t k = 0; k < readings.size(); ++k) {
    const auto& r = readings[k];
    const std::size_t bucket = bucketing.assignment[k];
    std::optional<std::size_t> next;

    for (std::size_t j = 0; j < out.states_used && !next; ++j) {
      const auto it = out.bucket_assoc.find({cur, j});
      if (it != out.bucket_assoc.end() && it->second == bucket) next = j;
    }

    if (!next) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < out.states_used; ++j) {
        const auto d = deviation(r, entry_mean(out.relation_means(cur, j)), cfg);
        if (within(d, cfg.tag_factor) && norm2(d) < best) {
          best = norm2(d);
          next = j;
        }
      }
      if (next) out.bucket_assoc.try_emplace({cur, *next}, bucket);
    }

    if (!next && out.states_used < n_max) {
      const std::size_t s = out.states_used++;
      const Reading& m = bucketing.buckets[bucket].mean;
      Point2 step{m.dx, m.dy};
      if (mode == CoordinateMode::Relative) step = transform_point(-out.poses.theta[cur], step);
      out.poses.x[s] = out.poses.x[cur] + step.x;
      out.poses.y[s] = out.poses.y[cur] + step.y;
      out.poses.theta[s] = wrap_angle(out.poses.theta[cur] + m.dtheta);
      rebuild();
      out.bucket_assoc[{cur, s}] = bucket;
      next = s;
    }

    if (!next) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < out.states_used; ++j) {
        const double d = norm2(deviation(r, entry_mean(out.relation_means(cur, j)), cfg));
        if (d < best) {
          best = d;
          next = j;
        }
      }
    }

    cur = *next;
    out.state_sequence.push_back(cur);
  }
  return out;
}

GeoHmm init_model(const ExperienceSequence& e, std::size_t n,
                  std::span<const std::size_t> obs_dims, const BucketConfig& cfg,
                  CoordinateMode mode) {
  if (e.length() < 2) throw InputError("initialization needs at least two steps");
  if (n < 1) throw InputError("at least one state is required");
  e.check_alphabet(obs_dims);

  const auto& readings = e.readings();
  const auto bucketing = bucketize(readings, cfg);
  const auto tags = tag_states(readings, bucketing, n, cfg, mode);
  const auto& seq = tags.state_sequence;
  const auto N = static_cast<Eigen::Index>(n);

  GeoHmm model;
  model.mode = mode;
  model.start_state = 0;

  model.A = Eigen::MatrixXd::Constant(N, N, kInitSmoothing);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    model.A(static_cast<Eigen::Index>(seq[t - 1]), static_cast<Eigen::Index>(seq[t])) += 1.0;
  }
  for (Eigen::Index i = 0; i < N; ++i) model.A.row(i) /= model.A.row(i).sum();

  for (std::size_t d = 0; d < obs_dims.size(); ++d) {
    Eigen::MatrixXd b =
        Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(obs_dims[d]), N, kInitSmoothing);
    for (std::size_t t = 0; t < e.length(); ++t) {
      b(e.observation(t)[d], static_cast<Eigen::Index>(seq[t])) += 1.0;
    }
    for (Eigen::Index j = 0; j < N; ++j) b.col(j) /= b.col(j).sum();
    model.B.push_back(std::move(b));
  }

  // States never reached by the walk sit on state 0 with uninformative spreads.
  auto x = tags.poses.x, y = tags.poses.y, theta = tags.poses.theta;
  model.R = embed_relations(x, y, theta, mode);

  struct Spread {
    double n = 0.0, dxx = 0.0, dyy = 0.0, dtt = 0.0;
  };
  std::vector<Spread> spread(n * n);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const auto& r = e.reading(t);
    const auto& m = model.R(seq[t - 1], seq[t]);
    auto& s = spread[seq[t - 1] * n + seq[t]];
    s.n += 1.0;
    s.dxx += (r.dx - m.mu_x) * (r.dx - m.mu_x);
    s.dyy += (r.dy - m.mu_y) * (r.dy - m.mu_y);
    const double dt = wrap_angle(r.dtheta - m.mu_theta);
    s.dtt += dt * dt;
  }

  const double vx = cfg.sigma_x * cfg.sigma_x;
  const double vy = cfg.sigma_y * cfg.sigma_y;
  const double vt = cfg.sigma_theta * cfg.sigma_theta;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto& entry = model.R(i, j);
      if (!tags.is_populated(i, j)) {
        entry.var_x = 1e4 * vx;
        entry.var_y = 1e4 * vy;
        entry.kappa = 0.0;
        continue;
      }
      const auto& s = spread[i * n + j];
      entry.var_x = std::max(kVarFloor, (s.dxx + vx) / (s.n + 1.0));
      entry.var_y = std::max(kVarFloor, (s.dyy + vy) / (s.n + 1.0));
      entry.kappa = std::min(kKappaMax, (s.n + 1.0) / (s.dtt + vt));
    }
  }
  validate(model, 1e-9);
  return model;
}

}  // namespace geohmm
