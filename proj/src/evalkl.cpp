#include "geohmm/evalkl.hpp"

#include <cmath>
#include <limits>

#include "geohmm/errors.hpp"
#include "geohmm/inference.hpp"
#include "geohmm/simgen.hpp"

namespace geohmm {

void check_compatible(const GeoHmm& a, const GeoHmm& b) {
  if (a.obs_dims() != b.obs_dims()) {
    throw InputError("models have different observation alphabets");
  }
}

KlEstimate kl_sampled(const GeoHmm& true_model, const GeoHmm& learned, std::size_t length,
                      std::size_t n, Rng& rng) {
  if (length < 1) throw InputError("sequence length must be at least 1");
  if (n < 1) throw InputError("at least one sequence is required");
  check_compatible(true_model, learned);
  const InferenceOptions plain{false, 0.0};

  KlEstimate est;
  est.n_sequences = n;
  est.seq_length = length;
  for (std::size_t k = 0; k < n; ++k) {
    const auto seq = sample_sequence(true_model, length, rng);
    const double lt = log_likelihood(true_model, seq, plain);
    double ll;
    try {
      ll = log_likelihood(learned, seq, plain);
    } catch (const ImpossibleSequence&) {
      est.infinite = true;
      est.per_sequence.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    est.per_sequence.push_back((lt - ll) / static_cast<double>(length));
  }
  if (est.infinite) {
    est.value = est.std_error = std::numeric_limits<double>::infinity();
    return est;
  }
  double sum = 0.0;
  for (double v : est.per_sequence) sum += v;
  est.value = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : est.per_sequence) ss += (v - est.value) * (v - est.value);
    est.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return est;
}

namespace {

// Probability of one observation string (as per-dimension symbol indices) by
// summing over every state path.
double string_probability(const GeoHmm& m, const std::vector<std::vector<int>>& obs) {
  const auto n = m.n_states();
  const auto T = obs.size();
  std::vector<std::size_t> path(T, 0);
  path[0] = m.start_state;
  double total = 0.0;
  for (;;) {
    double p = 1.0;
    for (std::size_t t = 0; t < T && p > 0.0; ++t) {
      if (t > 0) {
        p *= m.A(static_cast<Eigen::Index>(path[t - 1]), static_cast<Eigen::Index>(path[t]));
      }
      for (std::size_t d = 0; d < obs[t].size(); ++d) {
        p *= m.B[d](obs[t][d], static_cast<Eigen::Index>(path[t]));
      }
    }
    total += p;
    std::size_t t = T;
    while (t > 1) {
      --t;
      if (++path[t] < n) break;
      path[t] = 0;
      if (t == 1) return total;
    }
    if (T == 1) return total;
  }
}

}  // namespace

double kl_exact_small(const GeoHmm& true_model, const GeoHmm& learned, std::size_t horizon) {
  if (horizon < 1) throw InputError("horizon must be at least 1");
  check_compatible(true_model, learned);
  const auto dims = true_model.obs_dims();
  double symbols = 1.0;
  for (auto k : dims) symbols *= static_cast<double>(k);
  const double n = static_cast<double>(std::max(true_model.n_states(), learned.n_states()));
  const double terms = std::pow(symbols * n, static_cast<double>(horizon));
  if (terms > kExactTermLimit) {
    throw InputError("exact KL would enumerate too many terms; use the sampled estimate");
  }

  std::vector<std::vector<int>> obs(horizon, std::vector<int>(dims.size(), 0));
  double kl = 0.0;
  for (;;) {
    const double p = string_probability(true_model, obs);
    if (p > 0.0) {
      const double q = string_probability(learned, obs);
      if (q <= 0.0) return std::numeric_limits<double>::infinity();
      kl += p * (std::log(p) - std::log(q));
    }
    // Odometer increment over (step, dimension) digits.
    bool carried = true;
    for (std::size_t t = 0; t < horizon && carried; ++t) {
      for (std::size_t d = 0; d < dims.size() && carried; ++d) {
        if (static_cast<std::size_t>(++obs[t][d]) < dims[d]) {
          carried = false;
        } else {
          obs[t][d] = 0;
        }
      }
    }
    if (carried) break;
  }
  return kl / static_cast<double>(horizon);
}

}  // namespace geohmm
