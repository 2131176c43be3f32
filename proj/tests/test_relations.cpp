#include <cmath>

#include "doctest.h"
#include "geohmm/circstats.hpp"
#include "geohmm/relations.hpp"
#include "geohmm/rng.hpp"
#include "geohmm/simgen.hpp"

using namespace geohmm;

namespace {

double total_objective(const RelationMoments& m, const RelationMatrix& R) {
  double s = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    for (std::size_t j = 0; j < R.size(); ++j) {
      if (m(i, j).w > 0.0) s += expected_log_density(m(i, j), R(i, j));
    }
  }
  return s;
}

// Moments from noisy readings drawn around R's means with random weights.
RelationMoments noisy_moments(const RelationMatrix& R, Rng& rng, double noise, double density) {
  const auto n = R.size();
  RelationMoments m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() > density) continue;
      const auto& e = R(i, j);
      for (int k = 0; k < 6; ++k) {
        Reading r{e.mu_x + noise * rng.normal(), e.mu_y + noise * rng.normal(),
                  wrap_angle(e.mu_theta + 0.1 * noise * rng.normal())};
        m(i, j).add(r, 0.2 + rng.uniform());
      }
    }
  }
  return m;
}

RelationMatrix random_relations(std::size_t n, CoordinateMode mode, Rng& rng) {
  const std::vector<std::size_t> dims{1};
  return random_model(n, dims, mode, rng).R;
}

}  // namespace

TEST_SUITE("relations") {
  TEST_CASE("unconstrained update gives per-pair sample moments") {
    RelationMoments m(2);
    m(0, 1).add({1.0, 2.0, 0.1}, 1.0);
    m(0, 1).add({3.0, 2.0, 0.3}, 1.0);
    const RelationMatrix old(2);
    const auto R = update_relations_unconstrained(m, old);
    CHECK(R(0, 1).mu_x == doctest::Approx(2.0));
    CHECK(R(0, 1).var_x == doctest::Approx(1.0));
    CHECK(R(0, 1).var_y == kVarFloor);
    CHECK(R(0, 1).mu_theta == doctest::Approx(0.2));
    CHECK(R(1, 0) == old(1, 0));
  }

  TEST_CASE("anti-symmetric update output is anti-symmetric and never lowers the objective") {
    Rng rng(12);
    for (auto mode : {CoordinateMode::Global, CoordinateMode::Relative}) {
      for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + rep % 5;
        const auto truth = random_relations(n, mode, rng);
        const auto m = noisy_moments(truth, rng, 1.0, 0.7);
        auto old = random_relations(n, mode, rng);
        const auto R = update_relations_antisym(m, old, mode);
        CHECK(check_consistency(R, mode, ConstraintLevel::AntiSymmetric, 1e-9).empty());
        CHECK(total_objective(m, R) >= total_objective(m, old) - 1e-9);
      }
    }
  }

  TEST_CASE("additive update realizes an embedding") {
    Rng rng(13);
    for (auto mode : {CoordinateMode::Global, CoordinateMode::Relative}) {
      for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 3 + rep % 4;
        const auto truth = random_relations(n, mode, rng);
        const auto m = noisy_moments(truth, rng, 1.0, 0.6);
        const auto R = update_relations_additive(m, random_relations(n, mode, rng), mode);
        CHECK(check_consistency(R, mode, ConstraintLevel::Additive, 1e-9).empty());
      }
    }
  }

  TEST_CASE("additive update never lowers the objective from an additive start") {
    Rng rng(23);
    for (int rep = 0; rep < 40; ++rep) {
      const auto mode = rep % 2 ? CoordinateMode::Relative : CoordinateMode::Global;
      const auto n = 3 + static_cast<std::size_t>(rep % 5);
      const auto old = random_relations(n, mode, rng);
      // Readings from an unrelated geometry so the projection has real work to do.
      const auto m = noisy_moments(random_relations(n, mode, rng), rng, 2.0, 0.6);
      const auto R = update_relations_additive(m, old, mode);
      CHECK(total_objective(m, R) >= total_objective(m, old) - 1e-9);
      CHECK(check_consistency(R, mode, ConstraintLevel::Additive, 1e-9).empty());
    }
  }

  TEST_CASE("noise-free readings recover the embedding") {
    Rng rng(14);
    for (auto mode : {CoordinateMode::Global, CoordinateMode::Relative}) {
      const std::size_t n = 5;
      const auto truth = random_relations(n, mode, rng);
      RelationMoments m(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const auto& e = truth(i, j);
          m(i, j).add({e.mu_x, e.mu_y, e.mu_theta}, 1.0 + rng.uniform());
        }
      }
      auto old = truth;
      const auto R = update_relations_additive(m, old, mode);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          CHECK(std::abs(R(i, j).mu_x - truth(i, j).mu_x) < 1e-9);
          CHECK(std::abs(R(i, j).mu_y - truth(i, j).mu_y) < 1e-9);
          CHECK(std::abs(wrap_angle(R(i, j).mu_theta - truth(i, j).mu_theta)) < 1e-9);
        }
      }
    }
  }

  TEST_CASE("two global states: additive equals anti-symmetric") {
    Rng rng(15);
    const auto truth = random_relations(2, CoordinateMode::Global, rng);
    const auto m = noisy_moments(truth, rng, 1.0, 1.0);
    const auto old = random_relations(2, CoordinateMode::Global, rng);
    const auto a = update_relations_antisym(m, old, CoordinateMode::Global);
    const auto b = update_relations_additive(m, old, CoordinateMode::Global, {{}, 1e300});
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(b(i, j).mu_x == doctest::Approx(a(i, j).mu_x).epsilon(1e-9));
        CHECK(b(i, j).mu_y == doctest::Approx(a(i, j).mu_y).epsilon(1e-9));
        CHECK(std::abs(wrap_angle(b(i, j).mu_theta - a(i, j).mu_theta)) < 1e-9);
        CHECK(b(i, j).var_x == doctest::Approx(a(i, j).var_x).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("corrupted weak relation in a loop follows the strong legs") {
    // Square loop 0 -> 1 -> 2 -> 3 -> 0 in global coordinates.
    std::vector<double> x{0, 10, 10, 0}, y{0, 0, 10, 10}, th{0, 0, 0, 0};
    auto truth = embed_relations(x, y, th, CoordinateMode::Global);
    RelationMoments m(4);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& e = truth(i, i + 1);
      m(i, i + 1).add({e.mu_x, e.mu_y, 0.0}, 50.0);
    }
    // Weak, wrong reading for 3 -> 0.
    m(3, 0).add({4.0, -13.0, 0.0}, 0.01);
    RelationMatrix old = truth;
    const auto R = update_relations_additive(m, old, CoordinateMode::Global);
    CHECK(std::abs(R(3, 0).mu_x) < 1e-2);
    CHECK(std::abs(R(3, 0).mu_y + 10.0) < 1e-2);
  }

  TEST_CASE("pairs without data keep their parameters") {
    Rng rng(16);
    const auto old = random_relations(3, CoordinateMode::Relative, rng);
    RelationMoments m(3);
    m(0, 1).add({1.0, 1.0, 0.2}, 1.0);
    const auto R = update_relations_antisym(m, old, CoordinateMode::Relative);
    CHECK(R(1, 2) == old(1, 2));
    CHECK(R(2, 0) == old(2, 0));
  }
}
