#include "geohmm/simgen.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"

namespace geohmm {

std::size_t LoopSpec::n_states() const {
  return std::accumulate(states_per_corridor.begin(), states_per_corridor.end(), std::size_t{0});
}

namespace {

enum Symbol : int { kOpen = 0, kDoor = 1, kWall = 2 };

// Features seen from state m of corridor k with s states in that corridor.
// Most places look alike: walls on both sides, one door per corridor.
std::array<int, kLoopDims> loop_features(std::size_t k, std::size_t m, std::size_t s) {
  const int front = m + 1 == s ? kWall : kOpen;
  const std::size_t door = s > 2 ? 1 + k % (s - 2) : s;
  const int left = m == door ? kDoor : kWall;
  // Turns are clockwise, so the inside of the loop is on the right.
  const int right = m == 0 ? kOpen : kWall;
  return {front, left, right};
}

}  // namespace

GeoHmm make_loop_model(const LoopSpec& spec) {
  const auto K = spec.corridor_lengths.size();
  if (K < 3) throw InputError("a loop needs at least 3 corridors");
  if (spec.states_per_corridor.size() != K) {
    throw InputError("states_per_corridor must list one count per corridor");
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!(spec.corridor_lengths[k] > 0.0)) throw InputError("corridor lengths must be positive");
    if (spec.states_per_corridor[k] < 1) throw InputError("every corridor needs a state");
  }
  if (!(spec.obs_noise >= 0.0 && spec.obs_noise < 1.0)) {
    throw InputError("observation noise must lie in [0, 1)");
  }
  if (!(spec.sigma_x > 0.0) || !(spec.sigma_y > 0.0) || !(spec.kappa >= 0.0) ||
      spec.kappa > kKappaMax) {
    throw InputError("odometric noise parameters out of range");
  }
  if (spec.p_forward < 0.0 || spec.p_skip < 0.0 || spec.p_stay < 0.0 ||
      std::abs(spec.p_forward + spec.p_skip + spec.p_stay - 1.0) > 1e-9) {
    throw InputError("forward, skip and stay probabilities must sum to one");
  }

  const double turn = kTwoPi / static_cast<double>(K);
  double perimeter = 0.0, cx = 0.0, cy = 0.0;
  std::vector<double> x, y, theta;
  std::vector<std::array<int, kLoopDims>> features;
  for (std::size_t k = 0; k < K; ++k) {
    const double heading = static_cast<double>(k) * turn;
    const double L = spec.corridor_lengths[k];
    const auto s = spec.states_per_corridor[k];
    for (std::size_t m = 0; m < s; ++m) {
      const double along = L * static_cast<double>(m) / static_cast<double>(s);
      x.push_back(cx + along * std::sin(heading));
      y.push_back(cy + along * std::cos(heading));
      theta.push_back(wrap_angle(heading));
      features.push_back(loop_features(k, m, s));
    }
    cx += L * std::sin(heading);
    cy += L * std::cos(heading);
    perimeter += L;
  }
  if (std::hypot(cx, cy) > 1e-9 * perimeter) {
    throw InputError("corridor lengths do not close the loop");
  }

  const auto n = x.size();
  const auto N = static_cast<Eigen::Index>(n);
  GeoHmm model;
  model.mode = spec.mode;
  model.start_state = 0;
  model.A = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    model.A(i, i) += spec.p_stay;
    model.A(i, (i + 1) % N) += spec.p_forward;
    model.A(i, (i + 2) % N) += spec.p_skip;
  }

  const auto alphabet = static_cast<Eigen::Index>(kLoopSymbols.size());
  const double off = spec.obs_noise / static_cast<double>(alphabet - 1);
  for (std::size_t d = 0; d < kLoopDims; ++d) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Constant(alphabet, N, off);
    for (std::size_t j = 0; j < n; ++j) {
      b(features[j][d], static_cast<Eigen::Index>(j)) = 1.0 - spec.obs_noise;
    }
    model.B.push_back(std::move(b));
  }

  model.R = embed_relations(x, y, theta, spec.mode);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto& e = model.R(i, j);
      e.var_x = spec.sigma_x * spec.sigma_x;
      e.var_y = spec.sigma_y * spec.sigma_y;
      e.kappa = spec.kappa;
    }
  }
  validate(model);
  return model;
}

ExperienceSequence sample_sequence(const GeoHmm& model, std::size_t length, Rng& rng) {
  if (length < 1) throw InputError("sequence length must be at least 1");
  validate(model, 1e-6);
  const auto n = model.n_states();
  std::vector<std::vector<int>> obs;
  std::vector<Reading> readings;
  obs.reserve(length);
  readings.reserve(length - 1);

  std::vector<double> weights;
  auto emit = [&](std::size_t state) {
    std::vector<int> v(model.n_dims());
    for (std::size_t d = 0; d < model.n_dims(); ++d) {
      const auto& b = model.B[d];
      weights.resize(static_cast<std::size_t>(b.rows()));
      for (Eigen::Index o = 0; o < b.rows(); ++o) {
        weights[static_cast<std::size_t>(o)] = b(o, static_cast<Eigen::Index>(state));
      }
      v[d] = static_cast<int>(rng.categorical(weights));
    }
    obs.push_back(std::move(v));
  };

  std::size_t q = model.start_state;
  emit(q);
  for (std::size_t t = 1; t < length; ++t) {
    weights.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = model.A(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j));
    }
    const std::size_t next = rng.categorical(weights);
    const auto& e = model.R(q, next);
    Reading r;
    r.dx = rng.normal(e.mu_x, e.var_x);
    r.dy = rng.normal(e.mu_y, e.var_y);
    r.dtheta = vm_sample(e.mu_theta, e.kappa, rng);
    readings.push_back(r);
    q = next;
    emit(q);
  }
  return ExperienceSequence(std::move(obs), std::move(readings));
}

namespace {

void fill_dirichlet(Eigen::Ref<Eigen::VectorXd> v, Rng& rng) {
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = -std::log(rng.uniform_open());
  v /= v.sum();
}

}  // namespace

GeoHmm random_model(std::size_t n, std::span<const std::size_t> obs_dims, CoordinateMode mode,
                    Rng& rng, double extent) {
  if (n < 1) throw InputError("at least one state is required");
  const auto N = static_cast<Eigen::Index>(n);
  GeoHmm model;
  model.mode = mode;
  model.A.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::VectorXd row(N);
    fill_dirichlet(row, rng);
    model.A.row(i) = row.transpose();
  }
  for (auto k : obs_dims) {
    if (k < 1) throw InputError("alphabets must be non-empty");
    Eigen::MatrixXd b(static_cast<Eigen::Index>(k), N);
    for (Eigen::Index j = 0; j < N; ++j) fill_dirichlet(b.col(j), rng);
    model.B.push_back(std::move(b));
  }
  std::vector<double> x(n), y(n), theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = extent * (rng.uniform() - 0.5);
    y[i] = extent * (rng.uniform() - 0.5);
    theta[i] = wrap_angle(kTwoPi * rng.uniform());
  }
  model.R = embed_relations(x, y, theta, mode);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto& e = model.R(i, j);
      e.var_x = 0.5 + rng.uniform();
      e.var_y = 0.5 + rng.uniform();
      e.kappa = 1.0 + 9.0 * rng.uniform();
    }
  }
  return model;
}

GeoHmm perturb_model(const GeoHmm& model, double jitter, Rng& rng) {
  if (!(jitter >= 0.0)) throw InputError("jitter must be non-negative");
  GeoHmm out = model;
  for (Eigen::Index i = 0; i < out.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.A.cols(); ++j) out.A(i, j) *= 1.0 + jitter * rng.uniform();
    out.A.row(i) /= out.A.row(i).sum();
  }
  for (auto& b : out.B) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      for (Eigen::Index o = 0; o < b.rows(); ++o) b(o, j) *= 1.0 + jitter * rng.uniform();
      b.col(j) /= b.col(j).sum();
    }
  }
  return out;
}

}  // namespace geohmm
