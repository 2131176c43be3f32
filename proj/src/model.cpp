#include "geohmm/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"

namespace geohmm {

std::string_view to_string(CoordinateMode mode) {
  return mode == CoordinateMode::Global ? "global" : "relative";
}

std::string_view to_string(ConstraintLevel level) {
  switch (level) {
    case ConstraintLevel::Unconstrained: return "none";
    case ConstraintLevel::AntiSymmetric: return "antisym";
    case ConstraintLevel::Additive: return "additive";
  }
  return "?";
}

CoordinateMode parse_mode(std::string_view text) {
  if (text == "global") return CoordinateMode::Global;
  if (text == "relative") return CoordinateMode::Relative;
  throw InputError("unknown coordinate mode '" + std::string(text) + "'");
}

ConstraintLevel parse_level(std::string_view text) {
  if (text == "none" || text == "unconstrained") return ConstraintLevel::Unconstrained;
  if (text == "antisym" || text == "antisymmetric") return ConstraintLevel::AntiSymmetric;
  if (text == "additive") return ConstraintLevel::Additive;
  throw InputError("unknown constraint level '" + std::string(text) + "'");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::ZeroDiagonal: return "zero-diagonal";
    case ViolationKind::AntiSymmetry: return "anti-symmetry";
    case ViolationKind::Additivity: return "additivity";
  }
  return "?";
}

std::string_view to_string(Component c) {
  switch (c) {
    case Component::X: return "x";
    case Component::Y: return "y";
    case Component::Theta: return "theta";
  }
  return "?";
}

std::vector<std::size_t> GeoHmm::obs_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(B.size());
  for (const auto& b : B) dims.push_back(static_cast<std::size_t>(b.rows()));
  return dims;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw InputError("invalid model: " + what); }

}  // namespace

void validate(const GeoHmm& model, double tol) {
  const auto n = model.n_states();
  if (n == 0) fail("no states");
  if (static_cast<std::size_t>(model.A.cols()) != n) fail("transition matrix is not square");
  if (model.start_state >= n) fail("start state out of range");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = model.A(i, j);
      if (!(a >= 0.0) || !std::isfinite(a)) fail("negative or non-finite transition probability");
      sum += a;
    }
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << "row " << i << " of A sums to " << sum;
      fail(os.str());
    }
  }
  for (std::size_t d = 0; d < model.B.size(); ++d) {
    const auto& b = model.B[d];
    if (b.rows() < 1 || static_cast<std::size_t>(b.cols()) != n) {
      fail("observation matrix " + std::to_string(d) + " has wrong shape");
    }
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (Eigen::Index o = 0; o < b.rows(); ++o) {
        if (!(b(o, j) >= 0.0) || !std::isfinite(b(o, j))) fail("negative observation probability");
        sum += b(o, j);
      }
      if (std::abs(sum - 1.0) > tol) {
        std::ostringstream os;
        os << "column " << j << " of B[" << d << "] sums to " << sum;
        fail(os.str());
      }
    }
  }
  if (model.R.size() != n) fail("relation matrix size does not match state count");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& e = model.R(i, j);
      if (!std::isfinite(e.mu_x) || !std::isfinite(e.mu_y) || !std::isfinite(e.mu_theta)) {
        fail("non-finite relation mean");
      }
      if (!(e.var_x > 0.0) || !(e.var_y > 0.0) || !std::isfinite(e.var_x) ||
          !std::isfinite(e.var_y)) {
        fail("relation variances must be positive");
      }
      if (!(e.kappa >= 0.0) || e.kappa > kKappaMax) fail("concentration out of range");
    }
    const auto& d = model.R(i, i);
    if (std::abs(d.mu_x) > tol || std::abs(d.mu_y) > tol || std::abs(wrap_angle(d.mu_theta)) > tol) {
      fail("diagonal relation of state " + std::to_string(i) + " has nonzero mean");
    }
  }
}

ExperienceSequence::ExperienceSequence(std::vector<std::vector<int>> observations,
                                       std::vector<Reading> readings)
    : observations_(std::move(observations)), readings_(std::move(readings)) {
  if (observations_.empty()) throw InputError("experience sequence is empty");
  if (readings_.size() + 1 != observations_.size()) {
    throw InputError("experience sequence needs exactly one reading per step after the first");
  }
  const auto l = observations_.front().size();
  for (const auto& v : observations_) {
    if (v.size() != l) throw InputError("observation vectors differ in length");
  }
}

ExperienceSequence ExperienceSequence::prefix(std::size_t length) const {
  if (length == 0 || length > observations_.size()) {
    throw InputError("prefix length out of range");
  }
  return ExperienceSequence(
      {observations_.begin(), observations_.begin() + static_cast<std::ptrdiff_t>(length)},
      {readings_.begin(), readings_.begin() + static_cast<std::ptrdiff_t>(length - 1)});
}

void ExperienceSequence::check_alphabet(std::span<const std::size_t> dims) const {
  if (n_dims() != dims.size()) {
    throw InputError("experience has " + std::to_string(n_dims()) +
                     " observation dimensions, model has " + std::to_string(dims.size()));
  }
  for (std::size_t t = 0; t < observations_.size(); ++t) {
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const int v = observations_[t][d];
      if (v < 0 || static_cast<std::size_t>(v) >= dims[d]) {
        throw InputError("symbol " + std::to_string(v) + " at step " + std::to_string(t) +
                         " is outside alphabet " + std::to_string(d));
      }
    }
  }
}

Point2 transform_point(double mu_theta, Point2 p) {
  const double c = std::cos(mu_theta);
  const double s = std::sin(mu_theta);
  return {p.x * c - p.y * s, p.x * s + p.y * c};
}

double normal_log_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(kTwoPi * variance) + d * d / variance);
}

double relation_log_density(const Reading& r, const RelationEntry& e) {
  return normal_log_density(r.dx, e.mu_x, e.var_x) + normal_log_density(r.dy, e.mu_y, e.var_y) +
         vm_log_density(r.dtheta, e.mu_theta, e.kappa);
}

double relation_density(const Reading& r, const RelationEntry& entry) {
  return std::exp(relation_log_density(r, entry));
}

RelationMatrix embed_relations(std::span<const double> x, std::span<const double> y,
                               std::span<const double> theta, CoordinateMode mode) {
  const auto n = x.size();
  if (y.size() != n || theta.size() != n) throw InputError("pose arrays differ in length");
  RelationMatrix R(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto& e = R(i, j);
      if (i == j) {
        e.mu_x = e.mu_y = e.mu_theta = 0.0;
        continue;
      }
      Point2 d{x[j] - x[i], y[j] - y[i]};
      if (mode == CoordinateMode::Relative) d = transform_point(theta[i], d);
      e.mu_x = d.x;
      e.mu_y = d.y;
      e.mu_theta = wrap_angle(theta[j] - theta[i]);
    }
  }
  return R;
}

namespace {

void report(std::vector<Violation>& out, ViolationKind kind, Component comp, std::size_t a,
            std::size_t b, std::size_t c, double residual, double tol) {
  if (std::abs(residual) > tol) out.push_back({kind, comp, a, b, c, std::abs(residual)});
}

}  // namespace

std::vector<Violation> check_consistency(const RelationMatrix& R, CoordinateMode mode,
                                         ConstraintLevel level, double tol) {
  std::vector<Violation> out;
  if (level == ConstraintLevel::Unconstrained) return out;
  const auto n = R.size();
  const bool relative = mode == CoordinateMode::Relative;

  for (std::size_t a = 0; a < n; ++a) {
    const auto& e = R(a, a);
    report(out, ViolationKind::ZeroDiagonal, Component::X, a, a, a, e.mu_x, tol);
    report(out, ViolationKind::ZeroDiagonal, Component::Y, a, a, a, e.mu_y, tol);
    report(out, ViolationKind::ZeroDiagonal, Component::Theta, a, a, a, wrap_angle(e.mu_theta), tol);
  }

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& ab = R(a, b);
      const auto& ba = R(b, a);
      Point2 back{ba.mu_x, ba.mu_y};
      if (relative) back = transform_point(ba.mu_theta, back);
      report(out, ViolationKind::AntiSymmetry, Component::X, a, b, b, ab.mu_x + back.x, tol);
      report(out, ViolationKind::AntiSymmetry, Component::Y, a, b, b, ab.mu_y + back.y, tol);
      report(out, ViolationKind::AntiSymmetry, Component::Theta, a, b, b,
             wrap_angle(ab.mu_theta + ba.mu_theta), tol);
    }
  }

  if (level != ConstraintLevel::Additive) return out;

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        const auto& ab = R(a, b);
        const auto& bc = R(b, c);
        const auto& ac = R(a, c);
        Point2 leg{bc.mu_x, bc.mu_y};
        if (relative) leg = transform_point(R(b, a).mu_theta, leg);
        report(out, ViolationKind::Additivity, Component::X, a, b, c, ac.mu_x - ab.mu_x - leg.x, tol);
        report(out, ViolationKind::Additivity, Component::Y, a, b, c, ac.mu_y - ab.mu_y - leg.y, tol);
        report(out, ViolationKind::Additivity, Component::Theta, a, b, c,
               wrap_angle(ac.mu_theta - ab.mu_theta - bc.mu_theta), tol);
      }
    }
  }
  return out;
}

Poses poses_from_row(const RelationMatrix& R, std::size_t origin) {
  // With the origin pose at (0, 0, 0) its frame coincides with the global one,
  // so the row reads off positions directly in either mode.
  const auto n = R.size();
  Poses p;
  p.x.resize(n);
  p.y.resize(n);
  p.theta.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& e = R(origin, j);
    p.x[j] = j == origin ? 0.0 : e.mu_x;
    p.y[j] = j == origin ? 0.0 : e.mu_y;
    p.theta[j] = j == origin ? 0.0 : e.mu_theta;
  }
  return p;
}

}  // namespace geohmm
