#include "geohmm/relations.hpp"

#include <algorithm>
#include <cmath>

#include "geohmm/errors.hpp"
#include "geohmm/headings.hpp"
#include "geohmm/positions.hpp"

namespace geohmm {

void TransitionMoments::add(const Reading& r, double weight) {
  w += weight;
  sx += weight * r.dx;
  sy += weight * r.dy;
  sxx += weight * r.dx * r.dx;
  syy += weight * r.dy * r.dy;
  ssin += weight * std::sin(r.dtheta);
  scos += weight * std::cos(r.dtheta);
}

RelationMoments RelationMoments::collect(const Posteriors& post, const ExperienceSequence& e) {
  const auto n = post.n_states();
  if (post.length() != e.length()) throw InputError("posteriors do not match the sequence");
  RelationMoments m(n);
  for (std::size_t t = 0; t + 1 < e.length(); ++t) {
    const auto& r = e.reading(t + 1);
    const auto& xi = post.xi[t];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double w = xi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (w > 0.0) m(i, j).add(r, w);
      }
    }
  }
  return m;
}

namespace {

double squared_deviation(double s2, double s1, double w, double mu) {
  return std::max(0.0, s2 - 2.0 * mu * s1 + mu * mu * w);
}

double fit_variance(double s2, double s1, double w, double mu, const RelationGuards& g) {
  return std::max(g.var_floor, squared_deviation(s2, s1, w, mu) / w);
}

double fit_kappa(const TransitionMoments& m, double mu_theta, const RelationGuards& g) {
  const double mean_cos = (std::cos(mu_theta) * m.scos + std::sin(mu_theta) * m.ssin) / m.w;
  return std::min(g.kappa_max, resultant_to_kappa(std::max(mean_cos, 0.0)));
}

// Re-fits spread parameters of `e` around its (already set) means.
void refit_spread(RelationEntry& e, const TransitionMoments& m, const RelationGuards& g) {
  if (!(m.w > 0.0)) return;
  e.var_x = fit_variance(m.sxx, m.sx, m.w, e.mu_x, g);
  e.var_y = fit_variance(m.syy, m.sy, m.w, e.mu_y, g);
  e.kappa = fit_kappa(m, e.mu_theta, g);
}

void update_diagonal(RelationMatrix& R, const RelationMoments& moments, const RelationGuards& g) {
  for (std::size_t i = 0; i < R.size(); ++i) {
    auto& e = R(i, i);
    e.mu_x = e.mu_y = e.mu_theta = 0.0;
    refit_spread(e, moments(i, i), g);
  }
}

Eigen::Matrix2d rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Matrix2d precision(const RelationEntry& e) {
  return Eigen::Vector2d(1.0 / e.var_x, 1.0 / e.var_y).asDiagonal();
}

// Heading mean of pair (i, j) from both directions, weighting each direction
// by the previous concentration.
double lagged_heading(const TransitionMoments& fwd, const TransitionMoments& bwd,
                      double kappa_fwd, double kappa_bwd, double fallback) {
  if (kappa_fwd == 0.0 && kappa_bwd == 0.0) kappa_fwd = kappa_bwd = 1.0;
  const double s = fwd.ssin * kappa_fwd - bwd.ssin * kappa_bwd;
  const double c = fwd.scos * kappa_fwd + bwd.scos * kappa_bwd;
  if (s == 0.0 && c == 0.0) return fallback;
  return std::atan2(s, c);
}

double pair_objective(const TransitionMoments& fwd, const TransitionMoments& bwd,
                      const RelationEntry& ij, const RelationEntry& ji) {
  return expected_log_density(fwd, ij) + expected_log_density(bwd, ji);
}

struct PairUpdate {
  RelationEntry ij, ji;
};

PairUpdate antisym_global(const TransitionMoments& fwd, const TransitionMoments& bwd,
                          const RelationEntry& old_ij, const RelationEntry& old_ji,
                          const RelationGuards& g) {
  PairUpdate u{old_ij, old_ji};
  auto lagged_mean = [&](double sf, double sb, double vf, double vb) {
    const double den = fwd.w / vf + bwd.w / vb;
    return (sf / vf - sb / vb) / den;
  };
  u.ij.mu_x = lagged_mean(fwd.sx, bwd.sx, old_ij.var_x, old_ji.var_x);
  u.ij.mu_y = lagged_mean(fwd.sy, bwd.sy, old_ij.var_y, old_ji.var_y);
  u.ij.mu_theta = wrap_angle(lagged_heading(fwd, bwd, old_ij.kappa, old_ji.kappa, old_ij.mu_theta));
  u.ji.mu_x = -u.ij.mu_x;
  u.ji.mu_y = -u.ij.mu_y;
  u.ji.mu_theta = wrap_angle(-u.ij.mu_theta);
  refit_spread(u.ij, fwd, g);
  refit_spread(u.ji, bwd, g);
  return u;
}

// Relative frames: mu_ji = -T_ij[mu_ij], so the backward readings constrain
// mu_ij through a rotation by the pair's heading change. The planar mean is
// the exact weighted least-squares solution for that heading.
PairUpdate antisym_relative_for_heading(const TransitionMoments& fwd, const TransitionMoments& bwd,
                                        const RelationEntry& old_ij, const RelationEntry& old_ji,
                                        double heading, const RelationGuards& g) {
  PairUpdate u{old_ij, old_ji};
  const Eigen::Matrix2d M = -rotation(heading);
  const Eigen::Matrix2d Df = precision(old_ij);
  const Eigen::Matrix2d Db = precision(old_ji);
  const Eigen::Matrix2d H = fwd.w * Df + bwd.w * M.transpose() * Db * M;
  const Eigen::Vector2d rhs =
      Df * Eigen::Vector2d(fwd.sx, fwd.sy) + M.transpose() * Db * Eigen::Vector2d(bwd.sx, bwd.sy);
  const Eigen::Vector2d m = H.ldlt().solve(rhs);
  const Eigen::Vector2d back = M * m;
  u.ij.mu_x = m.x();
  u.ij.mu_y = m.y();
  u.ij.mu_theta = wrap_angle(heading);
  u.ji.mu_x = back.x();
  u.ji.mu_y = back.y();
  u.ji.mu_theta = wrap_angle(-heading);
  refit_spread(u.ij, fwd, g);
  refit_spread(u.ji, bwd, g);
  return u;
}

PairUpdate antisym_relative(const TransitionMoments& fwd, const TransitionMoments& bwd,
                            const RelationEntry& old_ij, const RelationEntry& old_ji,
                            const RelationGuards& g) {
  const double heading =
      lagged_heading(fwd, bwd, old_ij.kappa, old_ji.kappa, old_ij.mu_theta);
  auto moved = antisym_relative_for_heading(fwd, bwd, old_ij, old_ji, heading, g);
  // Heading and planar means are coupled here; keeping the old heading and
  // re-fitting the rest is always an ascent step, so fall back to it when the
  // coupled move scores lower.
  auto kept = antisym_relative_for_heading(fwd, bwd, old_ij, old_ji, old_ij.mu_theta, g);
  return pair_objective(fwd, bwd, moved.ij, moved.ji) >= pair_objective(fwd, bwd, kept.ij, kept.ji)
             ? moved
             : kept;
}

}  // namespace

double expected_log_density(const TransitionMoments& m, const RelationEntry& e) {
  if (!(m.w > 0.0)) return 0.0;
  const double quad = squared_deviation(m.sxx, m.sx, m.w, e.mu_x) / e.var_x +
                      squared_deviation(m.syy, m.sy, m.w, e.mu_y) / e.var_y;
  const double align = std::cos(e.mu_theta) * m.scos + std::sin(e.mu_theta) * m.ssin;
  return -0.5 * m.w * (std::log(kTwoPi * e.var_x) + std::log(kTwoPi * e.var_y)) - 0.5 * quad +
         e.kappa * align - m.w * vm_log_normalizer(e.kappa);
}

RelationMatrix update_relations_unconstrained(const RelationMoments& moments,
                                              const RelationMatrix& old,
                                              const RelationGuards& guards) {
  const auto n = old.size();
  if (moments.size() != n) throw InputError("moments do not match relation matrix");
  RelationMatrix R = old;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& m = moments(i, j);
      if (!(m.w > 0.0)) continue;
      auto& e = R(i, j);
      e.mu_x = m.sx / m.w;
      e.mu_y = m.sy / m.w;
      if (m.ssin != 0.0 || m.scos != 0.0) e.mu_theta = std::atan2(m.ssin, m.scos);
      refit_spread(e, m, guards);
    }
  }
  update_diagonal(R, moments, guards);
  return R;
}

RelationMatrix update_relations_antisym(const RelationMoments& moments, const RelationMatrix& old,
                                        CoordinateMode mode, const RelationGuards& guards) {
  const auto n = old.size();
  if (moments.size() != n) throw InputError("moments do not match relation matrix");
  RelationMatrix R = old;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& fwd = moments(i, j);
      const auto& bwd = moments(j, i);
      if (!(fwd.w + bwd.w > 0.0)) continue;
      const auto u = mode == CoordinateMode::Global
                         ? antisym_global(fwd, bwd, old(i, j), old(j, i), guards)
                         : antisym_relative(fwd, bwd, old(i, j), old(j, i), guards);
      R(i, j) = u.ij;
      R(j, i) = u.ji;
    }
  }
  update_diagonal(R, moments, guards);
  return R;
}

RelationMatrix update_relations_antisym(const Posteriors& post, const ExperienceSequence& e,
                                        const RelationMatrix& old, CoordinateMode mode,
                                        const RelationGuards& guards) {
  return update_relations_antisym(RelationMoments::collect(post, e), old, mode, guards);
}

namespace {

// Coordinate ascent on sum kappa_ij * E[cos(r - (theta_j - theta_i))] with the
// concentrations held at their previous values. State 0 stays put.
std::vector<double> ascend_headings(const RelationMoments& moments, const RelationMatrix& old,
                                    std::vector<double> theta, int sweeps) {
  const auto n = old.size();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t k = 1; k < n; ++k) {
      double a = 0.0, b = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        const auto& out = moments(k, j);
        const double ko = old(k, j).kappa;
        if (out.w > 0.0 && ko > 0.0) {
          const double c = ko * out.scos, s = ko * out.ssin;
          a += c * std::cos(theta[j]) + s * std::sin(theta[j]);
          b += c * std::sin(theta[j]) - s * std::cos(theta[j]);
        }
        const auto& in = moments(j, k);
        const double ki = old(j, k).kappa;
        if (in.w > 0.0 && ki > 0.0) {
          const double c = ki * in.scos, s = ki * in.ssin;
          a += c * std::cos(theta[j]) - s * std::sin(theta[j]);
          b += c * std::sin(theta[j]) + s * std::cos(theta[j]);
        }
      }
      if (a != 0.0 || b != 0.0) theta[k] = std::atan2(b, a);
    }
  }
  return theta;
}

double relation_objective(const RelationMoments& moments, const RelationMatrix& R) {
  double q = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    for (std::size_t j = 0; j < R.size(); ++j) {
      if (moments(i, j).w > 0.0) q += expected_log_density(moments(i, j), R(i, j));
    }
  }
  return q;
}

}  // namespace

RelationMatrix update_relations_additive(const RelationMoments& moments, const RelationMatrix& old,
                                         CoordinateMode mode, const AdditiveOptions& opts) {
  const auto n = old.size();
  if (moments.size() != n) throw InputError("moments do not match relation matrix");
  const auto& g = opts.guards;
  const auto reference = poses_from_row(old);

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && moments(i, j).w > 0.0) edges.emplace_back(i, j);
    }
  }
  const auto comp = connected_components(n, edges);

  // Positions by weighted least squares with the previous (lagging) spreads,
  // given headings; then spreads refit around the embedded means.
  auto assemble = [&](const std::vector<double>& theta) {
    std::vector<double> px(n, 0.0), py(n, 0.0);
    if (mode == CoordinateMode::Global) {
      std::vector<PositionTarget> tx, ty;
      for (const auto& [i, j] : edges) {
        const auto& m = moments(i, j);
        tx.push_back({i, j, m.sx / m.w, m.w / old(i, j).var_x});
        ty.push_back({i, j, m.sy / m.w, m.w / old(i, j).var_y});
      }
      px = solve_positions(tx, n, 0);
      py = solve_positions(ty, n, 0);
    } else {
      std::vector<PlanarTarget> targets;
      for (const auto& [i, j] : edges) {
        const auto& m = moments(i, j);
        const Eigen::Matrix2d rot = rotation(theta[i]);
        const Point2 global = transform_point(-theta[i], {m.sx / m.w, m.sy / m.w});
        targets.push_back({i, j, global, m.w * rot.transpose() * precision(old(i, j)) * rot});
      }
      const auto p = solve_planar_positions(targets, n, 0);
      for (std::size_t v = 0; v < n; ++v) {
        px[v] = p[v].x;
        py[v] = p[v].y;
      }
    }

    // Components that never connect to state 0 keep their previous placement.
    std::vector<double> shift_x(n, 0.0), shift_y(n, 0.0), size(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      shift_x[comp[v]] += reference.x[v] - px[v];
      shift_y[comp[v]] += reference.y[v] - py[v];
      size[comp[v]] += 1.0;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (comp[v] == comp[0]) continue;
      px[v] += shift_x[comp[v]] / size[comp[v]];
      py[v] += shift_y[comp[v]] / size[comp[v]];
    }

    RelationMatrix R = embed_relations(px, py, theta, mode);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto& e = R(i, j);
        const auto& prev = old(i, j);
        e.var_x = prev.var_x;
        e.var_y = prev.var_y;
        e.kappa = prev.kappa;
        refit_spread(e, moments(i, j), g);
      }
    }
    return R;
  };

  // Headings: lag-behind pairwise estimates projected onto the additive set.
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd counts = raw;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      counts(i, j) = moments(i, j).w;
      if (i < j) {
        raw(i, j) = lagged_heading(moments(i, j), moments(j, i), old(i, j).kappa, old(j, i).kappa,
                                   old(i, j).mu_theta);
        raw(j, i) = -raw(i, j);
      }
    }
  }
  const auto projected =
      project_headings(raw, counts, opts.held_weight_threshold, reference.theta).theta;

  // The projection is not guaranteed to raise the likelihood, so it competes
  // with an ascent from the previous headings and with the previous headings
  // themselves; the last can never do worse than the previous model.
  RelationMatrix best = assemble(projected);
  double best_q = relation_objective(moments, best);
  for (const auto& theta : {ascend_headings(moments, old, reference.theta, 20), reference.theta}) {
    auto R = assemble(theta);
    const double q = relation_objective(moments, R);
    if (q > best_q) {
      best_q = q;
      best = std::move(R);
    }
  }
  return best;
}

RelationMatrix update_relations_additive(const Posteriors& post, const ExperienceSequence& e,
                                         const RelationMatrix& old, CoordinateMode mode,
                                         const AdditiveOptions& opts) {
  return update_relations_additive(RelationMoments::collect(post, e), old, mode, opts);
}

}  // namespace geohmm
