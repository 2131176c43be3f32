#include <cmath>
#include <numbers>

#include "doctest.h"
#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"
#include "geohmm/model.hpp"
#include "geohmm/rng.hpp"
#include "geohmm/simgen.hpp"

using namespace geohmm;

namespace {

struct RandomPoses {
  std::vector<double> x, y, theta;
};

RandomPoses random_poses(std::size_t n, Rng& rng) {
  RandomPoses p;
  for (std::size_t i = 0; i < n; ++i) {
    p.x.push_back(100.0 * rng.uniform() - 50.0);
    p.y.push_back(100.0 * rng.uniform() - 50.0);
    p.theta.push_back(wrap_angle(kTwoPi * rng.uniform()));
  }
  return p;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("embedded relations are consistent in both modes") {
    Rng rng(3);
    for (auto mode : {CoordinateMode::Global, CoordinateMode::Relative}) {
      const auto p = random_poses(6, rng);
      const auto R = embed_relations(p.x, p.y, p.theta, mode);
      CHECK(check_consistency(R, mode, ConstraintLevel::Additive, 1e-9).empty());
    }
  }

  TEST_CASE("relative relation uses the origin's frame") {
    // Heading 90 degrees clockwise: facing +x, so +x displacement is straight ahead.
    std::vector<double> x{0.0, 5.0}, y{0.0, 0.0}, th{std::numbers::pi / 2.0, std::numbers::pi};
    const auto R = embed_relations(x, y, th, CoordinateMode::Relative);
    CHECK(R(0, 1).mu_x == doctest::Approx(0.0).scale(1.0));
    CHECK(R(0, 1).mu_y == doctest::Approx(5.0));
    CHECK(R(0, 1).mu_theta == doctest::Approx(std::numbers::pi / 2.0));
    // From state 1 (facing -y) state 0 lies 5 units to the right.
    CHECK(R(1, 0).mu_x == doctest::Approx(5.0));
    CHECK(R(1, 0).mu_y == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("violations are reported per kind") {
    Rng rng(4);
    const auto p = random_poses(4, rng);
    auto R = embed_relations(p.x, p.y, p.theta, CoordinateMode::Relative);
    R(2, 2).mu_x = 0.5;
    auto v = check_consistency(R, CoordinateMode::Relative, ConstraintLevel::AntiSymmetric, 1e-9);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::ZeroDiagonal);
    CHECK(v[0].magnitude == doctest::Approx(0.5));

    R(2, 2).mu_x = 0.0;
    R(1, 3).mu_theta += 0.1;
    v = check_consistency(R, CoordinateMode::Relative, ConstraintLevel::AntiSymmetric, 1e-9);
    CHECK_FALSE(v.empty());
    for (const auto& x : v) CHECK(x.kind == ViolationKind::AntiSymmetry);
    CHECK(check_consistency(R, CoordinateMode::Relative, ConstraintLevel::Unconstrained, 1e-9)
              .empty());

    // Anti-symmetric but not additive.
    auto S = embed_relations(p.x, p.y, p.theta, CoordinateMode::Global);
    S(0, 1).mu_x += 1.0;
    S(1, 0).mu_x -= 1.0;
    CHECK(check_consistency(S, CoordinateMode::Global, ConstraintLevel::AntiSymmetric, 1e-9).empty());
    v = check_consistency(S, CoordinateMode::Global, ConstraintLevel::Additive, 1e-9);
    CHECK_FALSE(v.empty());
    for (const auto& x : v) CHECK(x.kind == ViolationKind::Additivity);
  }

  TEST_CASE("poses recovered from row zero re-embed exactly") {
    Rng rng(8);
    for (auto mode : {CoordinateMode::Global, CoordinateMode::Relative}) {
      auto p = random_poses(5, rng);
      const auto R = embed_relations(p.x, p.y, p.theta, mode);
      const auto q = poses_from_row(R);
      const auto R2 = embed_relations(q.x, q.y, q.theta, mode);
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
          CHECK(R2(i, j).mu_x == doctest::Approx(R(i, j).mu_x).scale(100.0));
          CHECK(R2(i, j).mu_y == doctest::Approx(R(i, j).mu_y).scale(100.0));
          CHECK(std::abs(wrap_angle(R2(i, j).mu_theta - R(i, j).mu_theta)) < 1e-12);
        }
      }
    }
  }

  TEST_CASE("validate rejects broken models") {
    Rng rng(1);
    const std::vector<std::size_t> dims{2};
    auto m = random_model(3, dims, CoordinateMode::Global, rng);
    CHECK_NOTHROW(validate(m));
    auto bad = m;
    bad.A(0, 0) += 0.1;
    CHECK_THROWS_AS(validate(bad), InputError);
    bad = m;
    bad.B[0](0, 1) = -0.1;
    CHECK_THROWS_AS(validate(bad), InputError);
    bad = m;
    bad.R(1, 1).mu_y = 0.3;
    CHECK_THROWS_AS(validate(bad), InputError);
    bad = m;
    bad.R(0, 2).var_x = 0.0;
    CHECK_THROWS_AS(validate(bad), InputError);
    bad = m;
    bad.start_state = 3;
    CHECK_THROWS_AS(validate(bad), InputError);
  }

  TEST_CASE("experience sequence shape checks") {
    CHECK_THROWS_AS(ExperienceSequence({}, {}), InputError);
    CHECK_THROWS_AS(ExperienceSequence({{0}, {1}}, {}), InputError);
    CHECK_THROWS_AS(ExperienceSequence({{0}, {1, 1}}, {Reading{}}), InputError);
    ExperienceSequence e({{0}, {1}, {0}}, {Reading{1, 2, 0.1}, Reading{3, 4, 0.2}});
    CHECK(e.length() == 3);
    CHECK(e.reading(1).dx == 1.0);
    CHECK(e.reading(2).dy == 4.0);
    const auto p = e.prefix(2);
    CHECK(p.length() == 2);
    CHECK(p.readings().size() == 1);
    const std::vector<std::size_t> ok{2}, small{1};
    CHECK_NOTHROW(e.check_alphabet(ok));
    CHECK_THROWS_AS(e.check_alphabet(small), InputError);
  }

  TEST_CASE("parse and print levels and modes") {
    CHECK(parse_level("none") == ConstraintLevel::Unconstrained);
    CHECK(parse_level("antisym") == ConstraintLevel::AntiSymmetric);
    CHECK(parse_level("additive") == ConstraintLevel::Additive);
    CHECK_THROWS_AS(parse_level("strong"), InputError);
    CHECK(parse_mode(to_string(CoordinateMode::Relative)) == CoordinateMode::Relative);
    CHECK_THROWS_AS(parse_mode("polar"), InputError);
  }
}
