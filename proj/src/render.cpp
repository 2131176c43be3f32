#include "geohmm/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "geohmm/headings.hpp"
#include "geohmm/model_io.hpp"
#include "geohmm/positions.hpp"

namespace geohmm {

Poses embed_states(const GeoHmm& model) {
  const auto n = model.n_states();
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd raw(N, N), weights = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      raw(i, j) = model.R(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).mu_theta;
      if (i != j) weights(i, j) = model.A(i, j) + 1e-9;
    }
  }
  const auto headings =
      project_headings(raw, weights, std::numeric_limits<double>::infinity());

  std::vector<PlanarTarget> targets;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& e = model.R(i, j);
      Point2 g{e.mu_x, e.mu_y};
      if (model.mode == CoordinateMode::Relative) g = transform_point(-headings.theta[i], g);
      const double w = model.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + 1e-9;
      targets.push_back({i, j, g, w * Eigen::Matrix2d::Identity()});
    }
  }
  const auto p = solve_planar_positions(targets, n);
  Poses out;
  for (std::size_t i = 0; i < n; ++i) {
    out.x.push_back(p[i].x);
    out.y.push_back(p[i].y);
    out.theta.push_back(headings.theta[i]);
  }
  return out;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg(const GeoHmm& model, const RenderOptions& opts) {
  const auto poses = embed_states(model);
  const auto n = model.n_states();

  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xmin = std::min(xmin, poses.x[i]);
    xmax = std::max(xmax, poses.x[i]);
    ymin = std::min(ymin, poses.y[i]);
    ymax = std::max(ymax, poses.y[i]);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  const double scale = std::min(opts.width, opts.height) - 2.0 * opts.margin;
  auto sx = [&](double x) { return opts.margin + (x - xmin) / span * scale; };
  // Screen y grows downwards.
  auto sy = [&](double y) { return opts.margin + (ymax - y) / span * scale; };

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << num(opts.width)
      << R"(" height=")" << num(opts.height) << R"(" viewBox="0 0 )" << num(opts.width) << ' '
      << num(opts.height) << R"(">)" << '\n';
  svg << R"(  <defs><marker id="head" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" )"
      << R"(markerHeight="8" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#333"/></marker></defs>)"
      << '\n';
  svg << R"(  <rect width="100%" height="100%" fill="white"/>)" << '\n';

  const double radius = 8.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto I = static_cast<Eigen::Index>(i);
    Eigen::Index best = 0;
    model.A.row(I).maxCoeff(&best);
    for (std::size_t j = 0; j < n; ++j) {
      const auto J = static_cast<Eigen::Index>(j);
      if (i == j) continue;
      const bool solid = J == best;
      if (!solid && model.A(I, J) < opts.dashed_threshold) continue;
      double x1 = sx(poses.x[i]), y1 = sy(poses.y[i]);
      double x2 = sx(poses.x[j]), y2 = sy(poses.y[j]);
      const double len = std::hypot(x2 - x1, y2 - y1);
      if (len > 2.0 * radius) {
        const double ux = (x2 - x1) / len, uy = (y2 - y1) / len;
        x1 += ux * radius;
        y1 += uy * radius;
        x2 -= ux * radius;
        y2 -= uy * radius;
      }
      svg << R"(  <line class="transition" data-from=")" << i << R"(" data-to=")" << j
          << R"(" data-p=")" << format_double(model.A(I, J)) << R"(" x1=")" << num(x1)
          << R"(" y1=")" << num(y1) << R"(" x2=")" << num(x2) << R"(" y2=")" << num(y2)
          << R"svg(" stroke="#333" stroke-width="1.5" marker-end="url(#head)")svg"
          << (solid ? "" : R"( stroke-dasharray="6,4")") << "/>\n";
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = sx(poses.x[i]), cy = sy(poses.y[i]);
    // Heading tick: clockwise from screen-up.
    const double hx = cx + 1.6 * radius * std::sin(poses.theta[i]);
    const double hy = cy - 1.6 * radius * std::cos(poses.theta[i]);
    svg << R"(  <g class="state" data-state=")" << i << R"(" data-x=")" << format_double(poses.x[i])
        << R"(" data-y=")" << format_double(poses.y[i]) << R"(" data-theta=")"
        << format_double(poses.theta[i]) << R"(">)";
    svg << R"(<circle cx=")" << num(cx) << R"(" cy=")" << num(cy) << R"(" r=")"
        << num(i == model.start_state ? 1.5 * radius : radius)
        << R"(" fill="#9cf" stroke="#036"/>)";
    svg << R"(<line x1=")" << num(cx) << R"(" y1=")" << num(cy) << R"(" x2=")" << num(hx)
        << R"(" y2=")" << num(hy) << R"(" stroke="#036" stroke-width="2"/>)";
    svg << R"(<text x=")" << num(cx + radius + 2.0) << R"(" y=")" << num(cy - radius - 2.0)
        << R"(" font-family="sans-serif" font-size="11">)" << i << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace geohmm
