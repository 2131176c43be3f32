#include "geohmm/estimation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "geohmm/errors.hpp"

namespace geohmm {

using Eigen::Index;

bool fit_floored_distribution(std::span<const double> counts, double floor, std::span<double> p) {
  const auto k = counts.size();
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) return false;
  floor = std::clamp(floor, 0.0, 1.0 / static_cast<double>(k));
  // Entries whose count share falls below the floor are pinned to it; the
  // rest share the remaining mass in proportion to their counts.
  std::vector<bool> pinned(k, false);
  for (;;) {
    double free_mass = 1.0;
    double free_count = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      if (pinned[o]) {
        free_mass -= floor;
      } else {
        free_count += counts[o];
      }
    }
    bool changed = false;
    for (std::size_t o = 0; o < k; ++o) {
      if (pinned[o]) continue;
      const double v = free_count > 0.0 ? free_mass * counts[o] / free_count : 0.0;
      if (v < floor) {
        pinned[o] = true;
        changed = true;
      }
    }
    if (changed) continue;
    for (std::size_t o = 0; o < k; ++o) {
      p[o] = pinned[o] ? floor : free_mass * counts[o] / free_count;
    }
    return true;
  }
}

Eigen::MatrixXd update_transitions(const Posteriors& post, const Eigen::MatrixXd& previous,
                                   double prob_floor) {
  const auto n = static_cast<Index>(post.n_states());
  if (previous.rows() != n || previous.cols() != n) throw InputError("previous A has wrong shape");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& xi : post.xi) counts += xi;

  Eigen::MatrixXd A = previous;
  std::vector<double> c(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) c[static_cast<std::size_t>(j)] = counts(i, j);
    if (fit_floored_distribution(c, prob_floor, p)) {
      for (Index j = 0; j < n; ++j) A(i, j) = p[static_cast<std::size_t>(j)];
    }
  }
  return A;
}

std::vector<Eigen::MatrixXd> update_observations(const Posteriors& post,
                                                 const ExperienceSequence& e,
                                                 const std::vector<Eigen::MatrixXd>& previous,
                                                 double prob_floor) {
  const auto n = static_cast<Index>(post.n_states());
  if (previous.size() != e.n_dims()) throw InputError("previous B has wrong dimension count");
  std::vector<Eigen::MatrixXd> B = previous;
  for (std::size_t d = 0; d < B.size(); ++d) {
    const Index k = previous[d].rows();
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, n);
    for (std::size_t t = 0; t < e.length(); ++t) {
      counts.row(e.observation(t)[d]) += post.gamma.row(static_cast<Index>(t));
    }
    std::vector<double> c(static_cast<std::size_t>(k)), p(static_cast<std::size_t>(k));
    for (Index j = 0; j < n; ++j) {
      for (Index o = 0; o < k; ++o) c[static_cast<std::size_t>(o)] = counts(o, j);
      if (fit_floored_distribution(c, prob_floor, p)) {
        for (Index o = 0; o < k; ++o) B[d](o, j) = p[static_cast<std::size_t>(o)];
      }
    }
  }
  return B;
}

namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, polished by Newton steps.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(0, 0) = -c2 / c3;
  companion(0, 1) = -c1 / c3;
  companion(0, 2) = -c0 / c3;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  const Eigen::Vector3cd eig = companion.eigenvalues();
  std::vector<double> roots;
  for (const auto& z : eig) {
    if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z.real()))) continue;
    double x = z.real();
    for (int it = 0; it < 20; ++it) {
      const double f = ((c3 * x + c2) * x + c1) * x + c0;
      const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
      if (df == 0.0) break;
      const double step = f / df;
      x -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    roots.push_back(x);
  }
  return roots;
}

}  // namespace

TwoNormalFit constrained_two_normal_mle(std::span<const double> p, std::span<const double> q,
                                        double var_floor) {
  if (p.empty() || q.empty()) throw InputError("both samples must be non-empty");
  const double n = static_cast<double>(p.size());
  const double k = static_cast<double>(q.size());
  const bool p_flat = p.size() == 1 || is_constant(p);
  const bool q_flat = q.size() == 1 || is_constant(q);
  if (p_flat || q_flat) {
    const bool consistent = is_constant(p) && is_constant(q) && q.front() == -p.front();
    if (consistent && p.size() >= 2 && q.size() >= 2) {
      return {p.front(), var_floor, var_floor};
    }
    throw DegenerateSample("a zero-variance sample makes the constrained likelihood unbounded");
  }

  const double a = std::accumulate(p.begin(), p.end(), 0.0);
  const double b = std::accumulate(q.begin(), q.end(), 0.0);
  const double a2 = std::inner_product(p.begin(), p.end(), p.begin(), 0.0);
  const double b2 = std::inner_product(q.begin(), q.end(), q.begin(), 0.0);

  auto sp = [&](double mu) { return a2 - 2.0 * mu * a + n * mu * mu; };
  auto sq = [&](double mu) { return b2 + 2.0 * mu * b + k * mu * mu; };
  auto profile = [&](double mu) {
    return -0.5 * n * std::log(sp(mu) / n) - 0.5 * k * std::log(sq(mu) / k);
  };

  // n SQ(mu) (a - n mu) - k SP(mu) (b + k mu) = 0
  const double c3 = -n * k * (n + k);
  const double c2 = n * a * k - 2.0 * n * n * b + 2.0 * a * k * k - n * k * b;
  const double c1 = 2.0 * n * a * b - n * n * b2 - k * k * a2 + 2.0 * k * a * b;
  const double c0 = n * b2 * a - k * a2 * b;

  double best_mu = std::numeric_limits<double>::quiet_NaN();
  double best = -std::numeric_limits<double>::infinity();
  for (double mu : cubic_real_roots(c3, c2, c1, c0)) {
    if (!(sp(mu) > 0.0) || !(sq(mu) > 0.0)) continue;
    const double v = profile(mu);
    if (v > best) {
      best = v;
      best_mu = mu;
    }
  }
  if (!std::isfinite(best_mu)) throw DegenerateSample("no admissible stationary point");
  return {best_mu, std::max(var_floor, sp(best_mu) / n), std::max(var_floor, sq(best_mu) / k)};
}

GeoHmm maximize(const Posteriors& post, const ExperienceSequence& e, const GeoHmm& model,
                const LearnConfig& cfg, ConstraintLevel level) {
  GeoHmm next = model;
  next.A = update_transitions(post, model.A, cfg.prob_floor);
  next.B = update_observations(post, e, model.B, cfg.prob_floor);
  if (!cfg.use_odometry) return next;

  const auto moments = RelationMoments::collect(post, e);
  switch (level) {
    case ConstraintLevel::Unconstrained:
      next.R = update_relations_unconstrained(moments, model.R, cfg.guards());
      break;
    case ConstraintLevel::AntiSymmetric:
      next.R = update_relations_antisym(moments, model.R, model.mode, cfg.guards());
      break;
    case ConstraintLevel::Additive:
      next.R = update_relations_additive(moments, model.R, model.mode,
                                         {cfg.guards(), cfg.held_weight_threshold});
      break;
  }
  return next;
}

LearnResult em_learn(const ExperienceSequence& e, const GeoHmm& initial, const LearnConfig& cfg,
                     const IterationObserver& observer) {
  if (cfg.max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(cfg.rel_tol > 0.0)) throw InputError("rel_tol must be positive");
  if (cfg.mode != initial.mode) {
    throw InputError("learning configured for " + std::string(to_string(cfg.mode)) +
                     " coordinates but the initial model uses " +
                     std::string(to_string(initial.mode)));
  }
  validate(initial, 1e-6);
  e.check_alphabet(initial.obs_dims());

  const auto io = cfg.inference();
  LearnResult result{initial, {}};
  auto& report = result.report;
  Trellis trellis = forward_backward(result.model, e, io);
  report.loglik_trace.push_back(trellis.loglik);

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const auto post = posteriors(trellis, result.model, e, io);
    const auto level = cfg.constraint_level == ConstraintLevel::Additive &&
                               it - 1 < cfg.additive_from_iteration
                           ? ConstraintLevel::AntiSymmetric
                           : cfg.constraint_level;
    result.model = maximize(post, e, result.model, cfg, level);
    trellis = forward_backward(result.model, e, io);
    report.iterations_run = it;
    const double previous = report.loglik_trace.back();
    const double current = trellis.loglik;
    report.loglik_trace.push_back(current);
    if (observer) observer(it, result.model);

    const double scale = std::max(std::abs(previous), 1e-300);
    if (current < previous - 1e-8 * scale) {
      report.monotonicity_violations.emplace_back(it, previous - current);
    }
    if (current - previous < cfg.rel_tol * scale) {
      report.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace geohmm
