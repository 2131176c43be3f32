#pragma once

#include <numbers>

namespace geohmm {

class Rng;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Largest concentration the library represents; beyond it a von Mises is a
/// point mass for all practical purposes.
inline constexpr double kKappaMax = 1e4;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

double degrees_to_radians(double deg);
double radians_to_degrees(double rad);

/// Modified Bessel functions of the first kind. The unscaled forms overflow
/// to +inf past kappa ~ 713; the `_scaled` forms return e^{-kappa} I_n(kappa)
/// and are finite over the whole [0, kKappaMax] range.
double bessel_i0(double kappa);
double bessel_i1(double kappa);
double bessel_i0_scaled(double kappa);
double bessel_i1_scaled(double kappa);

/// Mean resultant length of a von Mises with concentration kappa,
/// I1(kappa) / I0(kappa).
double mean_resultant(double kappa);

/// Inverse of mean_resultant. r < 0 maps to 0, r close to 1 to kKappaMax.
double resultant_to_kappa(double r);

double vm_density(double theta, double mu, double kappa);
double vm_log_density(double theta, double mu, double kappa);

/// log(2 pi I0(kappa)) evaluated without overflow.
double vm_log_normalizer(double kappa);

/// Best-Fisher wrapped rejection sampler. Result in (-pi, pi].
double vm_sample(double mu, double kappa, Rng& rng);

}  // namespace geohmm
