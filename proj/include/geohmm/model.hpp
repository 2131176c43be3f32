#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geohmm {

/// Smallest variance any relation entry may carry.
inline constexpr double kVarFloor = 1e-6;

enum class CoordinateMode { Global, Relative };

/// Additive implies AntiSymmetric implies a zero diagonal.
enum class ConstraintLevel { Unconstrained, AntiSymmetric, Additive };

std::string_view to_string(CoordinateMode mode);
std::string_view to_string(ConstraintLevel level);
CoordinateMode parse_mode(std::string_view text);
ConstraintLevel parse_level(std::string_view text);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// An odometric reading: displacement and heading change between two
/// consecutive states. Headings are measured clockwise; in Relative mode the
/// displacement is expressed in the origin state's frame (y forward, x right).
struct Reading {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

struct RelationEntry {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double mu_theta = 0.0;
  double var_x = 1.0;
  double var_y = 1.0;
  double kappa = 0.0;

  bool operator==(const RelationEntry&) const = default;
};

/// Dense N x N table of relation entries, row = origin state.
class RelationMatrix {
 public:
  RelationMatrix() = default;
  explicit RelationMatrix(std::size_t n, const RelationEntry& fill = {})
      : n_(n), entries_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }

  RelationEntry& operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
  const RelationEntry& operator()(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j];
  }

  bool operator==(const RelationMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<RelationEntry> entries_;
};

/// The learned object: an HMM with factored discrete observations, a
/// designated start state and an odometric relation for every state pair.
struct GeoHmm {
  Eigen::MatrixXd A;               // N x N, row stochastic
  std::vector<Eigen::MatrixXd> B;  // one |O_i| x N matrix per dimension, column stochastic
  std::size_t start_state = 0;
  RelationMatrix R;
  CoordinateMode mode = CoordinateMode::Global;

  std::size_t n_states() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t n_dims() const { return B.size(); }
  std::vector<std::size_t> obs_dims() const;
};

/// Throws InputError describing the first broken invariant.
void validate(const GeoHmm& model, double tol = 1e-9);

/// Observation vectors V_0..V_{T-1} and readings r_1..r_{T-1}.
class ExperienceSequence {
 public:
  ExperienceSequence() = default;
  ExperienceSequence(std::vector<std::vector<int>> observations, std::vector<Reading> readings);

  std::size_t length() const noexcept { return observations_.size(); }
  std::size_t n_dims() const { return observations_.empty() ? 0 : observations_.front().size(); }

  const std::vector<int>& observation(std::size_t t) const { return observations_[t]; }
  /// Reading r_t recorded on the move into step t; requires t >= 1.
  const Reading& reading(std::size_t t) const { return readings_[t - 1]; }

  const std::vector<std::vector<int>>& observations() const noexcept { return observations_; }
  const std::vector<Reading>& readings() const noexcept { return readings_; }

  /// First `length` steps.
  ExperienceSequence prefix(std::size_t length) const;

  /// Throws InputError if any symbol lies outside its alphabet.
  void check_alphabet(std::span<const std::size_t> dims) const;

 private:
  std::vector<std::vector<int>> observations_;
  std::vector<Reading> readings_;
};

/// Rotation used for frame changes between states: maps a point expressed in
/// state a's frame into state b's frame when given the heading change a -> b.
Point2 transform_point(double mu_theta, Point2 p);

double normal_log_density(double x, double mean, double variance);
double relation_log_density(const Reading& r, const RelationEntry& entry);
double relation_density(const Reading& r, const RelationEntry& entry);

/// Relation means induced by state poses (x_i, y_i, theta_i). Variances and
/// concentrations of the result are left at their defaults.
RelationMatrix embed_relations(std::span<const double> x, std::span<const double> y,
                               std::span<const double> theta, CoordinateMode mode);

enum class ViolationKind { ZeroDiagonal, AntiSymmetry, Additivity };
enum class Component { X, Y, Theta };

std::string_view to_string(ViolationKind kind);
std::string_view to_string(Component c);

struct Violation {
  ViolationKind kind;
  Component component;
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;  // only meaningful for Additivity
  double magnitude = 0.0;
};

std::vector<Violation> check_consistency(const RelationMatrix& R, CoordinateMode mode,
                                         ConstraintLevel level, double tol);

inline std::vector<Violation> check_consistency(const GeoHmm& model, ConstraintLevel level,
                                                double tol) {
  return check_consistency(model.R, model.mode, level, tol);
}

/// Poses recovered from row `origin` of an (assumed additive) relation table,
/// with the origin state at (0, 0, 0).
struct Poses {
  std::vector<double> x, y, theta;
};
Poses poses_from_row(const RelationMatrix& R, std::size_t origin = 0);

}  // namespace geohmm
