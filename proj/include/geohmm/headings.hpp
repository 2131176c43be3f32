#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

namespace geohmm {

struct HeadingProjection {
  std::vector<double> theta;  // state headings, theta[0] == 0
  Eigen::MatrixXd mu_theta;   // wrap(theta_j - theta_i)
  std::vector<std::pair<std::size_t, std::size_t>> held;     // reproduced exactly
  std::vector<std::pair<std::size_t, std::size_t>> demoted;  // held-weight but conflicting
};

/// Maps pairwise heading estimates onto the additive set {theta_j - theta_i}.
///
/// Pairs are taken from the upper triangle of `raw`; a pair's weight is
/// weights(i,j) + weights(j,i). Pairs weighing at least `tau` are held fixed,
/// added strongest first, and a held pair that closes an inconsistent cycle is
/// demoted to a soft one (it is the weakest in that cycle by construction).
/// Soft pairs between rigid held groups are fitted by weighted least squares
/// after unwrapping each raw angle to the branch nearest the current fit.
/// Pairs with zero weight carry no information. Components not connected to
/// state 0 are aligned to `reference` headings when those are given.
HeadingProjection project_headings(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& weights,
                                   double tau, std::span<const double> reference = {});

}  // namespace geohmm
