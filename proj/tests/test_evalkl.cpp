#include <cmath>

#include "doctest.h"
#include "geohmm/errors.hpp"
#include "geohmm/evalkl.hpp"
#include "geohmm/simgen.hpp"

using namespace geohmm;

namespace {

GeoHmm bernoulli(double p) {
  GeoHmm m;
  m.A = Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd b(2, 1);
  b << p, 1.0 - p;
  m.B = {b};
  m.R = RelationMatrix(1);
  return m;
}

}  // namespace

TEST_SUITE("evalkl") {
  TEST_CASE("exact bernoulli divergence") {
    const double expected = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
    CHECK(expected == doctest::Approx(0.143841).epsilon(1e-6));
    for (std::size_t T : {1, 3, 6}) {
      CHECK(kl_exact_small(bernoulli(0.5), bernoulli(0.25), T) == doctest::Approx(expected));
    }
    CHECK(kl_exact_small(bernoulli(0.3), bernoulli(0.3), 4) == 0.0);
  }

  TEST_CASE("sampled bernoulli divergence brackets the exact value") {
    Rng rng(10);
    const auto est = kl_sampled(bernoulli(0.5), bernoulli(0.25), 1000, 20, rng);
    CHECK(std::abs(est.value - 0.143841) < 3.0 * est.std_error);
    CHECK(est.per_sequence.size() == 20);
  }

  TEST_CASE("identical models give zero") {
    const auto m = make_loop_model(LoopSpec{});
    Rng rng(1);
    const auto est = kl_sampled(m, m, 500, 5, rng);
    CHECK(est.value == 0.0);
    CHECK_FALSE(est.infinite);
  }

  TEST_CASE("a perturbed emission column yields a positive divergence") {
    const auto m = make_loop_model(LoopSpec{});
    auto learned = m;
    learned.B[0].col(3).setConstant(0.25);
    Rng rng(2);
    const auto est = kl_sampled(m, learned, 2000, 10, rng);
    CHECK(est.value > 3.0 * est.std_error);
  }

  TEST_CASE("small models: sampled estimate agrees with enumeration") {
    Rng rng(3);
    const std::vector<std::size_t> dims{2};
    for (int rep = 0; rep < 4; ++rep) {
      const auto a = random_model(2, dims, CoordinateMode::Global, rng);
      const auto b = random_model(2, dims, CoordinateMode::Global, rng);
      const std::size_t T = 8;
      const double exact = kl_exact_small(a, b, T);
      CHECK(exact >= 0.0);
      const auto est = kl_sampled(a, b, T, 4000, rng);
      CHECK(std::abs(est.value - exact) < 3.0 * est.std_error + 1e-12);
    }
  }

  TEST_CASE("std error shrinks with more data") {
    const auto m = make_loop_model(LoopSpec{});
    auto learned = m;
    learned.B[1].col(5).setConstant(0.25);
    Rng r1(8), r2(8);
    const auto small = kl_sampled(m, learned, 500, 10, r1);
    const auto large = kl_sampled(m, learned, 1000, 20, r2);
    CHECK(large.std_error < small.std_error);
  }

  TEST_CASE("zero probability is flagged, guard and alphabets are enforced") {
    Rng rng(4);
    const auto est = kl_sampled(bernoulli(0.5), bernoulli(1.0), 50, 3, rng);
    CHECK(est.infinite);
    CHECK(std::isinf(est.value));
    CHECK(std::isinf(kl_exact_small(bernoulli(0.5), bernoulli(1.0), 2)));
    const auto loop = make_loop_model(LoopSpec{});
    CHECK_THROWS_AS(kl_exact_small(loop, loop, 10), InputError);
    CHECK_THROWS_AS(kl_sampled(loop, bernoulli(0.5), 10, 1, rng), InputError);
  }
}
