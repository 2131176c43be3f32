#include "geohmm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"

namespace geohmm {

namespace {

using Eigen::Index;

// Per-entry constants so each density costs two squares, a cosine and an exp.
struct DensityTable {
  std::size_t n = 0;
  std::vector<double> constant;  // log normalizers summed over x, y, theta

  explicit DensityTable(const RelationMatrix& R) : n(R.size()), constant(n * n) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const auto& e = R(i, j);
        constant[i * n + j] = -0.5 * std::log(kTwoPi * e.var_x) -
                              0.5 * std::log(kTwoPi * e.var_y) -
                              std::log(kTwoPi * bessel_i0_scaled(e.kappa)) - e.kappa;
      }
    }
  }
};

double entry_log_density(const Reading& r, const RelationEntry& e, double constant) {
  const double dx = r.dx - e.mu_x;
  const double dy = r.dy - e.mu_y;
  return constant - 0.5 * (dx * dx / e.var_x + dy * dy / e.var_y) +
         e.kappa * std::cos(r.dtheta - e.mu_theta);
}

void emission_column(const GeoHmm& model, const std::vector<int>& v, Eigen::VectorXd& out) {
  const auto n = model.n_states();
  out.resize(static_cast<Index>(n));
  for (std::size_t j = 0; j < n; ++j) out[static_cast<Index>(j)] = obs_prob(model, j, v);
}

// Fills step(i, j) = A_ij f(r_t | R_ij) e^{-offset}; returns the offset.
double transition_factors(const GeoHmm& model, const DensityTable& table, const Reading& r,
                          const InferenceOptions& opts, Eigen::MatrixXd& step) {
  const auto n = model.n_states();
  step.resize(static_cast<Index>(n), static_cast<Index>(n));
  if (!opts.use_odometry) {
    step = model.A;
    return 0.0;
  }
  const double log_floor = opts.density_floor > 0.0 ? std::log(opts.density_floor)
                                                     : -std::numeric_limits<double>::infinity();
  double offset = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double lf = entry_log_density(r, model.R(i, j), table.constant[i * n + j]);
      lf = std::max(lf, log_floor);
      step(i, j) = lf;
      if (model.A(i, j) > 0.0) offset = std::max(offset, lf);
    }
  }
  if (!std::isfinite(offset)) offset = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      step(i, j) = model.A(i, j) > 0.0 ? model.A(i, j) * std::exp(step(i, j) - offset) : 0.0;
    }
  }
  return offset;
}

void check_inputs(const GeoHmm& model, const ExperienceSequence& e) {
  if (e.length() == 0) throw InputError("empty experience sequence");
  const auto dims = model.obs_dims();
  e.check_alphabet(dims);
}

}  // namespace

double obs_prob(const GeoHmm& model, std::size_t state, const std::vector<int>& v) {
  if (v.size() != model.B.size()) throw InputError("observation vector has wrong length");
  double p = 1.0;
  for (std::size_t d = 0; d < v.size(); ++d) {
    const auto& b = model.B[d];
    if (v[d] < 0 || v[d] >= b.rows()) {
      throw InputError("observation symbol " + std::to_string(v[d]) + " outside alphabet " +
                       std::to_string(d));
    }
    p *= b(v[d], static_cast<Index>(state));
  }
  return p;
}

Trellis forward_backward(const GeoHmm& model, const ExperienceSequence& e,
                         const InferenceOptions& opts) {
  check_inputs(model, e);
  const auto n = static_cast<Index>(model.n_states());
  const auto T = e.length();
  const DensityTable table(model.R);

  Trellis tr;
  tr.alpha = Eigen::MatrixXd::Zero(static_cast<Index>(T), n);
  tr.beta = Eigen::MatrixXd::Zero(static_cast<Index>(T), n);
  tr.scales.assign(T, 0.0);
  tr.log_offsets.assign(T, 0.0);

  Eigen::VectorXd b;
  Eigen::MatrixXd step;

  emission_column(model, e.observation(0), b);
  const auto s0 = static_cast<Index>(model.start_state);
  tr.alpha(0, s0) = b[s0];
  tr.scales[0] = b[s0];
  if (!(tr.scales[0] > 0.0)) throw ImpossibleSequence(0);
  tr.alpha.row(0) /= tr.scales[0];

  for (std::size_t t = 1; t < T; ++t) {
    tr.log_offsets[t] = transition_factors(model, table, e.reading(t), opts, step);
    emission_column(model, e.observation(t), b);
    const Eigen::RowVectorXd next =
        (tr.alpha.row(static_cast<Index>(t - 1)) * step).cwiseProduct(b.transpose());
    const double c = next.sum();
    if (!(c > 0.0) || !std::isfinite(c)) throw ImpossibleSequence(t);
    tr.scales[t] = c;
    tr.alpha.row(static_cast<Index>(t)) = next / c;
  }

  tr.beta.row(static_cast<Index>(T - 1)).setOnes();
  for (std::size_t t = T - 1; t > 0; --t) {
    transition_factors(model, table, e.reading(t), opts, step);
    emission_column(model, e.observation(t), b);
    const Eigen::VectorXd weighted = b.cwiseProduct(tr.beta.row(static_cast<Index>(t)).transpose());
    tr.beta.row(static_cast<Index>(t - 1)) = (step * weighted).transpose() / tr.scales[t];
  }

  double ll = 0.0;
  for (std::size_t t = 0; t < T; ++t) ll += std::log(tr.scales[t]) + tr.log_offsets[t];
  tr.loglik = ll;
  return tr;
}

Posteriors posteriors(const Trellis& tr, const GeoHmm& model, const ExperienceSequence& e,
                      const InferenceOptions& opts) {
  const auto n = static_cast<Index>(model.n_states());
  const auto T = e.length();
  if (tr.alpha.rows() != static_cast<Index>(T) || tr.alpha.cols() != n ||
      tr.beta.rows() != static_cast<Index>(T) || tr.scales.size() != T) {
    throw InputError("trellis does not match model and sequence");
  }
  const DensityTable table(model.R);

  Posteriors post;
  post.gamma = tr.alpha.cwiseProduct(tr.beta);
  for (Index t = 0; t < static_cast<Index>(T); ++t) {
    const double s = post.gamma.row(t).sum();
    if (s > 0.0) post.gamma.row(t) /= s;
  }

  post.xi.resize(T - 1);
  Eigen::VectorXd b;
  Eigen::MatrixXd step;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const double offset = transition_factors(model, table, e.reading(t + 1), opts, step);
    if (opts.use_odometry && offset != tr.log_offsets[t + 1]) {
      throw InputError("trellis was computed under different options");
    }
    emission_column(model, e.observation(t + 1), b);
    const Eigen::VectorXd right =
        b.cwiseProduct(tr.beta.row(static_cast<Index>(t + 1)).transpose());
    Eigen::MatrixXd x = tr.alpha.row(static_cast<Index>(t)).transpose().asDiagonal() * step *
                        right.asDiagonal();
    const double s = x.sum();
    if (s > 0.0) x /= s;
    post.xi[t] = std::move(x);
  }
  return post;
}

double log_likelihood(const GeoHmm& model, const ExperienceSequence& e,
                      const InferenceOptions& opts) {
  return forward_backward(model, e, opts).loglik;
}

}  // namespace geohmm
