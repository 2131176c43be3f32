#include "geohmm/positions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geohmm/errors.hpp"

namespace geohmm {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Groups nodes by component and picks the node held at the origin in each.
struct Layout {
  std::vector<std::size_t> component;                // node -> component index
  std::vector<std::vector<std::size_t>> members;     // component -> nodes, sorted
  std::vector<std::size_t> root;                     // component -> anchored node
};

Layout make_layout(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges,
                   std::size_t anchor) {
  const auto labels = connected_components(n, edges);
  Layout L;
  L.component = labels;
  const std::size_t k = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  L.members.resize(k);
  for (std::size_t v = 0; v < n; ++v) L.members[labels[v]].push_back(v);
  L.root.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    L.root[c] = labels[anchor] == c ? anchor : L.members[c].front();
  }
  return L;
}

void check_nodes(std::size_t n, std::size_t i, std::size_t j) {
  if (i >= n || j >= n) throw InputError("position target refers to a node out of range");
}

}  // namespace

std::vector<std::size_t> connected_components(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  DisjointSets ds(n);
  for (auto [a, b] : edges) ds.unite(a, b);
  std::vector<std::size_t> label(n);
  std::vector<std::size_t> id(n, n);
  std::size_t next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto r = ds.find(v);
    if (id[r] == n) id[r] = next++;
    label[v] = id[r];
  }
  return label;
}

std::vector<double> solve_positions(std::span<const PositionTarget> targets, std::size_t n,
                                    std::size_t anchor) {
  if (n == 0) throw InputError("solve_positions needs at least one node");
  if (anchor >= n) throw InputError("anchor out of range");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& t : targets) {
    check_nodes(n, t.i, t.j);
    if (!(t.weight > 0.0) || !std::isfinite(t.weight) || !std::isfinite(t.value)) {
      throw InputError("position targets need finite positive weights");
    }
    if (t.i != t.j) edges.emplace_back(t.i, t.j);
  }
  const auto L = make_layout(n, edges, anchor);

  // Local index of each node inside its component's reduced system (root removed).
  std::vector<Eigen::Index> local(n, -1);
  std::vector<Eigen::MatrixXd> lap(L.members.size());
  std::vector<Eigen::VectorXd> rhs(L.members.size());
  for (std::size_t c = 0; c < L.members.size(); ++c) {
    Eigen::Index k = 0;
    for (auto v : L.members[c]) {
      if (v != L.root[c]) local[v] = k++;
    }
    lap[c] = Eigen::MatrixXd::Zero(k, k);
    rhs[c] = Eigen::VectorXd::Zero(k);
  }
  for (const auto& t : targets) {
    if (t.i == t.j) continue;
    const auto c = L.component[t.i];
    auto& M = lap[c];
    auto& b = rhs[c];
    const auto li = local[t.i];
    const auto lj = local[t.j];
    if (li >= 0) {
      M(li, li) += t.weight;
      b[li] -= t.weight * t.value;
    }
    if (lj >= 0) {
      M(lj, lj) += t.weight;
      b[lj] += t.weight * t.value;
    }
    if (li >= 0 && lj >= 0) {
      M(li, lj) -= t.weight;
      M(lj, li) -= t.weight;
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t c = 0; c < L.members.size(); ++c) {
    if (lap[c].rows() == 0) continue;
    const Eigen::VectorXd sol = lap[c].ldlt().solve(rhs[c]);
    for (auto v : L.members[c]) {
      if (local[v] >= 0) x[v] = sol[local[v]];
    }
  }
  return x;
}

std::vector<Point2> solve_planar_positions(std::span<const PlanarTarget> targets, std::size_t n,
                                           std::size_t anchor) {
  if (n == 0) throw InputError("solve_planar_positions needs at least one node");
  if (anchor >= n) throw InputError("anchor out of range");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& t : targets) {
    check_nodes(n, t.i, t.j);
    if (!t.information.allFinite()) throw InputError("non-finite information matrix");
    if (t.i != t.j) edges.emplace_back(t.i, t.j);
  }
  const auto L = make_layout(n, edges, anchor);

  std::vector<Eigen::Index> local(n, -1);
  std::vector<Eigen::MatrixXd> H(L.members.size());
  std::vector<Eigen::VectorXd> g(L.members.size());
  for (std::size_t c = 0; c < L.members.size(); ++c) {
    Eigen::Index k = 0;
    for (auto v : L.members[c]) {
      if (v != L.root[c]) local[v] = k++;
    }
    H[c] = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    g[c] = Eigen::VectorXd::Zero(2 * k);
  }
  for (const auto& t : targets) {
    if (t.i == t.j) continue;
    const auto c = L.component[t.i];
    const Eigen::Vector2d val(t.value.x, t.value.y);
    const Eigen::Vector2d iv = t.information * val;
    const auto li = local[t.i];
    const auto lj = local[t.j];
    if (li >= 0) {
      H[c].block<2, 2>(2 * li, 2 * li) += t.information;
      g[c].segment<2>(2 * li) -= iv;
    }
    if (lj >= 0) {
      H[c].block<2, 2>(2 * lj, 2 * lj) += t.information;
      g[c].segment<2>(2 * lj) += iv;
    }
    if (li >= 0 && lj >= 0) {
      H[c].block<2, 2>(2 * li, 2 * lj) -= t.information;
      H[c].block<2, 2>(2 * lj, 2 * li) -= t.information;
    }
  }
  std::vector<Point2> p(n);
  for (std::size_t c = 0; c < L.members.size(); ++c) {
    if (H[c].rows() == 0) continue;
    const Eigen::VectorXd sol = H[c].ldlt().solve(g[c]);
    for (auto v : L.members[c]) {
      if (local[v] >= 0) p[v] = {sol[2 * local[v]], sol[2 * local[v] + 1]};
    }
  }
  return p;
}

}  // namespace geohmm
