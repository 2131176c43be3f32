#include "geohmm/circstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "geohmm/rng.hpp"

namespace geohmm {

namespace {

constexpr double kSeriesSeam = 15.0;

void require_nonnegative(double kappa) {
  if (!(kappa >= 0.0)) {
    throw std::domain_error("Bessel function argument must be nonnegative");
  }
}

// sum_k (x/2)^{2k+order} / (k! (k+order)!)
double bessel_series(int order, double x) {
  const double half = 0.5 * x;
  double term = order == 0 ? 1.0 : half;
  double sum = term;
  const double q = half * half;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// e^{-x} I_order(x) from the large-argument expansion; valid for x >= 15.
double bessel_asymptotic_scaled(int order, double x) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) >= previous) break;  // series starts diverging
    sum += term;
    previous = std::abs(term);
    if (previous < 1e-17) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double scaled(int order, double kappa) {
  require_nonnegative(kappa);
  if (kappa < kSeriesSeam) return bessel_series(order, kappa) * std::exp(-kappa);
  return bessel_asymptotic_scaled(order, kappa);
}

double unscaled(int order, double kappa) {
  require_nonnegative(kappa);
  if (kappa < kSeriesSeam) return bessel_series(order, kappa);
  return bessel_asymptotic_scaled(order, kappa) * std::exp(kappa);
}

}  // namespace

double wrap_angle(double theta) {
  double r = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  double out = r - std::numbers::pi;
  if (out <= -std::numbers::pi) out += kTwoPi;
  return out;
}

double degrees_to_radians(double deg) { return deg * (std::numbers::pi / 180.0); }
double radians_to_degrees(double rad) { return rad * (180.0 / std::numbers::pi); }

double bessel_i0(double kappa) { return unscaled(0, kappa); }
double bessel_i1(double kappa) { return unscaled(1, kappa); }
double bessel_i0_scaled(double kappa) { return scaled(0, kappa); }
double bessel_i1_scaled(double kappa) { return scaled(1, kappa); }

double mean_resultant(double kappa) {
  if (kappa == 0.0) return 0.0;
  return bessel_i1_scaled(kappa) / bessel_i0_scaled(kappa);
}

double resultant_to_kappa(double r) {
  if (!(r > 0.0)) return 0.0;
  if (r >= 1.0 - 1e-9 || r >= mean_resultant(kKappaMax)) return kKappaMax;
  // A(kappa) is strictly increasing; bisect in log-space for the upper range.
  double lo = 0.0;
  double hi = kKappaMax;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo < 1.0) ? 0.5 * (lo + hi) : std::sqrt(lo * hi);
    if (mean_resultant(mid) < r) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-14 * hi) break;
  }
  return 0.5 * (lo + hi);
}

double vm_log_normalizer(double kappa) {
  return std::log(kTwoPi) + std::log(bessel_i0_scaled(kappa)) + kappa;
}

double vm_log_density(double theta, double mu, double kappa) {
  // kappa*(cos - 1) keeps the exponent bounded for large kappa.
  return kappa * (std::cos(theta - mu) - 1.0) - std::log(kTwoPi) -
         std::log(bessel_i0_scaled(kappa));
}

double vm_density(double theta, double mu, double kappa) {
  return std::exp(vm_log_density(theta, mu, kappa));
}

double vm_sample(double mu, double kappa, Rng& rng) {
  if (kappa < 1e-8) {
    return wrap_angle(mu + std::numbers::pi * (2.0 * rng.uniform() - 1.0));
  }
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  double f;
  for (;;) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform_open();
    const double z = std::cos(std::numbers::pi * u1);
    f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0) break;
    if (std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  f = std::clamp(f, -1.0, 1.0);
  const double offset = std::acos(f);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return wrap_angle(mu + sign * offset);
}

}  // namespace geohmm
