#include "geohmm/headings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <numeric>

#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"
#include "geohmm/positions.hpp"

namespace geohmm {

namespace {

constexpr double kHeldTolerance = 1e-9;

// Union-find that tracks each node's offset from its set root.
class OffsetSets {
 public:
  explicit OffsetSets(std::size_t n) : parent_(n), offset_(n, 0.0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t v) {
    if (parent_[v] == v) return v;
    const auto p = parent_[v];
    const auto r = find(p);
    offset_[v] += offset_[p];
    parent_[v] = r;
    return r;
  }

  double offset(std::size_t v) {
    find(v);
    return offset_[v];
  }

  // Imposes value(j) - value(i) = a. Returns false, leaving the sets untouched,
  // if i and j are already joined and disagree by more than tol (mod 2 pi).
  bool join(std::size_t i, std::size_t j, double a, double tol) {
    const auto ri = find(i);
    const auto rj = find(j);
    if (ri == rj) return std::abs(wrap_angle(offset_[j] - offset_[i] - a)) <= tol;
    parent_[rj] = ri;
    offset_[rj] = a + offset_[i] - offset_[j];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<double> offset_;
};

struct Edge {
  std::size_t i, j;
  double angle;
  double weight;
};

}  // namespace

HeadingProjection project_headings(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& weights,
                                   double tau, std::span<const double> reference) {
  const auto n = static_cast<std::size_t>(raw.rows());
  if (raw.cols() != raw.rows() || weights.rows() != raw.rows() || weights.cols() != raw.cols()) {
    throw InputError("heading and weight tables must be square and of equal size");
  }
  if (!reference.empty() && reference.size() != n) throw InputError("reference has wrong size");

  HeadingProjection out;
  if (n == 0) return out;

  std::vector<Edge> held, soft;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = weights(i, j) + weights(j, i);
      if (!std::isfinite(w)) throw InputError("non-finite heading weight");
      if (!(w > 0.0)) continue;
      Edge e{i, j, wrap_angle(raw(i, j)), w};
      (w >= tau ? held : soft).push_back(e);
    }
  }
  auto by_weight = [](const Edge& a, const Edge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  };
  std::sort(held.begin(), held.end(), by_weight);

  OffsetSets rigid(n);
  for (const auto& e : held) {
    if (rigid.join(e.i, e.j, e.angle, kHeldTolerance)) {
      out.held.emplace_back(e.i, e.j);
    } else {
      out.demoted.emplace_back(e.i, e.j);
      soft.push_back(e);
    }
  }
  std::sort(soft.begin(), soft.end(), by_weight);

  // Rigid groups become the unknowns of the soft fit.
  std::vector<std::size_t> group(n);
  std::vector<std::size_t> group_of_root(n, n);
  std::size_t n_groups = 0;
  std::vector<double> local(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto r = rigid.find(v);
    if (group_of_root[r] == n) group_of_root[r] = n_groups++;
    group[v] = group_of_root[r];
    local[v] = rigid.offset(v);
  }

  std::vector<Edge> links;  // soft edges between different groups
  for (const auto& e : soft) {
    if (group[e.i] != group[e.j]) links.push_back(e);
  }

  // Initial group offsets from a maximum-weight spanning forest of the links.
  std::vector<double> phi(n_groups, 0.0);
  {
    OffsetSets tree(n_groups);
    for (const auto& e : links) {
      tree.join(group[e.i], group[e.j], e.angle - local[e.j] + local[e.i],
                std::numeric_limits<double>::infinity());
    }
    for (std::size_t g = 0; g < n_groups; ++g) phi[g] = tree.offset(g);
  }

  const auto anchor_group = group[0];
  std::vector<long> branch(links.size(), 0);
  std::vector<PositionTarget> targets;
  for (int pass = 0; pass < 50 && !links.empty(); ++pass) {
    targets.clear();
    bool changed = pass == 0;
    for (std::size_t k = 0; k < links.size(); ++k) {
      const auto& e = links[k];
      const double pred = phi[group[e.j]] + local[e.j] - phi[group[e.i]] - local[e.i];
      const double unwrapped = pred + wrap_angle(e.angle - pred);
      const long br = std::lround((unwrapped - e.angle) / kTwoPi);
      if (br != branch[k]) changed = true;
      branch[k] = br;
      targets.push_back({group[e.i], group[e.j], unwrapped - local[e.j] + local[e.i], e.weight});
    }
    if (!changed) break;
    phi = solve_positions(targets, n_groups, anchor_group);
  }

  std::vector<double> theta(n);
  for (std::size_t v = 0; v < n; ++v) theta[v] = phi[group[v]] + local[v];

  if (!reference.empty()) {
    // Align every component not containing state 0 with the reference.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : held) edges.emplace_back(e.i, e.j);
    for (const auto& e : soft) edges.emplace_back(e.i, e.j);
    const auto comp = connected_components(n, edges);
    const auto home = comp[0];
    std::vector<double> s(n, 0.0), c(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      const double target = reference[v] - reference[0] + theta[0];
      s[comp[v]] += std::sin(target - theta[v]);
      c[comp[v]] += std::cos(target - theta[v]);
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (comp[v] == home) continue;
      theta[v] += std::atan2(s[comp[v]], c[comp[v]]);
    }
  }

  const double base = theta[0];
  out.theta.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.theta[v] = wrap_angle(theta[v] - base);
  out.mu_theta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) out.mu_theta(i, j) = wrap_angle(out.theta[j] - out.theta[i]);
    }
  }
  return out;
}

}  // namespace geohmm
