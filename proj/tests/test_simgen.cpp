#include <cmath>

#include "doctest.h"
#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"
#include "geohmm/inference.hpp"
#include "geohmm/simgen.hpp"

using namespace geohmm;

TEST_SUITE("simgen") {
  TEST_CASE("loop model is consistent and follows the loop") {
    LoopSpec spec;
    spec.obs_noise = 0.0;
    const auto m = make_loop_model(spec);
    CHECK(m.n_states() == 16);
    CHECK(check_consistency(m, ConstraintLevel::Additive, 1e-12).empty());
    for (Eigen::Index i = 0; i < 16; ++i) {
      Eigen::Index best = 0;
      m.A.row(i).maxCoeff(&best);
      CHECK(best == (i + 1) % 16);
    }
    // Walking the forward relations returns to the start.
    double x = 0, y = 0, th = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      const auto& e = m.R(i, (i + 1) % 16);
      const auto g = transform_point(-th, {e.mu_x, e.mu_y});
      x += g.x;
      y += g.y;
      th += e.mu_theta;
    }
    CHECK(std::abs(x) < 1e-9);
    CHECK(std::abs(y) < 1e-9);
    CHECK(std::abs(wrap_angle(th)) < 1e-12);
    CHECK(std::abs(th - kTwoPi) < 1e-9);
  }

  TEST_CASE("observation noise sets the true-symbol mass") {
    LoopSpec spec;
    spec.obs_noise = 0.1;
    const auto m = make_loop_model(spec);
    for (const auto& b : m.B) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) CHECK(b.col(j).maxCoeff() == doctest::Approx(0.9));
    }
  }

  TEST_CASE("inconsistent specs are rejected") {
    LoopSpec spec;
    spec.corridor_lengths = {100, 200, 300, 400};
    CHECK_THROWS_AS(make_loop_model(spec), InputError);
    spec = LoopSpec{};
    spec.corridor_lengths = {100, 100};
    spec.states_per_corridor = {2, 2};
    CHECK_THROWS_AS(make_loop_model(spec), InputError);
    spec = LoopSpec{};
    spec.p_skip = 0.5;
    CHECK_THROWS_AS(make_loop_model(spec), InputError);
    spec = LoopSpec{};
    spec.corridor_lengths = {300, 300, 300};
    spec.states_per_corridor = {2, 3, 1};
    CHECK_NOTHROW(make_loop_model(spec));
  }

  TEST_CASE("deterministic model yields exact symbols and tight readings") {
    LoopSpec spec;
    spec.obs_noise = 0.0;
    spec.p_forward = 1.0;
    spec.p_skip = spec.p_stay = 0.0;
    spec.sigma_x = spec.sigma_y = 1e-3;
    spec.kappa = kKappaMax;
    const auto m = make_loop_model(spec);
    Rng rng(7);
    const auto e = sample_sequence(m, 64, rng);
    for (std::size_t t = 0; t < e.length(); ++t) {
      const auto s = t % 16;
      for (std::size_t d = 0; d < 3; ++d) {
        Eigen::Index sym = 0;
        m.B[d].col(static_cast<Eigen::Index>(s)).maxCoeff(&sym);
        CHECK(e.observation(t)[d] == sym);
      }
      if (t > 0) {
        const auto& mu = m.R((t - 1) % 16, s);
        CHECK(std::abs(e.reading(t).dx - mu.mu_x) < 5e-3);
        CHECK(std::abs(e.reading(t).dy - mu.mu_y) < 5e-3);
        CHECK(std::abs(wrap_angle(e.reading(t).dtheta - mu.mu_theta)) < 5.0 / std::sqrt(kKappaMax));
      }
    }
  }

  TEST_CASE("empirical frequencies match the model") {
    GeoHmm m;
    m.A.resize(2, 2);
    m.A << 0.7, 0.3, 0.4, 0.6;
    // Each state announces itself so the path can be read off the symbols.
    m.B = {Eigen::MatrixXd::Identity(2, 2)};
    std::vector<double> x{0.0, 3.0}, y{0.0, -1.0}, th{0.0, 1.0};
    m.R = embed_relations(x, y, th, CoordinateMode::Relative);
    m.mode = CoordinateMode::Relative;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        m.R(i, j).var_x = 0.25;
        m.R(i, j).var_y = 4.0;
        m.R(i, j).kappa = 5.0;
      }
    }
    Rng rng(99);
    const std::size_t T = 100000;
    const auto e = sample_sequence(m, T, rng);
    std::size_t counts[2][2] = {{0, 0}, {0, 0}};
    double sx[2][2] = {}, ss[2][2] = {}, sc[2][2] = {};
    for (std::size_t t = 1; t < T; ++t) {
      const auto q = static_cast<std::size_t>(e.observation(t - 1)[0]);
      const auto next = static_cast<std::size_t>(e.observation(t)[0]);
      ++counts[q][next];
      sx[q][next] += e.reading(t).dx;
      ss[q][next] += std::sin(e.reading(t).dtheta);
      sc[q][next] += std::cos(e.reading(t).dtheta);
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const double n = static_cast<double>(counts[i][0] + counts[i][1]);
      for (std::size_t j = 0; j < 2; ++j) {
        const double p = m.A(i, j);
        const double se = std::sqrt(p * (1 - p) / n);
        CHECK(std::abs(counts[i][j] / n - p) < 3 * se);
        const double c = static_cast<double>(counts[i][j]);
        CHECK(std::abs(sx[i][j] / c - m.R(i, j).mu_x) < 3 * std::sqrt(0.25 / c));
        CHECK(std::abs(wrap_angle(std::atan2(ss[i][j], sc[i][j]) - m.R(i, j).mu_theta)) < 0.05);
      }
    }
  }

  TEST_CASE("same seed, same sequence; finite likelihood") {
    const auto m = make_loop_model(LoopSpec{});
    Rng a(5), b(5);
    const auto e1 = sample_sequence(m, 800, a);
    const auto e2 = sample_sequence(m, 800, b);
    CHECK(e1.observations() == e2.observations());
    for (std::size_t t = 1; t < 800; ++t) CHECK(e1.reading(t).dx == e2.reading(t).dx);
    CHECK(std::isfinite(log_likelihood(m, e1)));
    Rng c(5);
    CHECK(sample_sequence(m, 1, c).readings().empty());
  }
}
