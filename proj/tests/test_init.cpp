#include <chrono>

#include "doctest.h"
#include "example2.hpp"
#include "geohmm/errors.hpp"
#include "geohmm/inference.hpp"
#include "geohmm/init.hpp"
#include "geohmm/rng.hpp"
#include "geohmm/simgen.hpp"

using namespace geohmm;

TEST_SUITE("init") {
  TEST_CASE("example 2 buckets") {
    const auto readings = example2_readings();
    const auto b = bucketize(readings, example2_config());
    REQUIRE(b.buckets.size() == 5);
    CHECK(b.buckets[0].members.empty());
    const std::vector<std::vector<std::size_t>> members{{0, 4}, {1, 5}, {2, 6}, {3, 7}};
    const double means[4][3] = {{-1, 98, 91.5}, {1996, -2.5, 89}, {0.5, -99.5, 88.5},
                                {-2001, 4, 90.5}};
    for (std::size_t k = 0; k < 4; ++k) {
      CAPTURE(k);
      CHECK(b.buckets[k + 1].members == members[k]);
      CHECK(b.buckets[k + 1].mean.dx == doctest::Approx(means[k][0]));
      CHECK(b.buckets[k + 1].mean.dy == doctest::Approx(means[k][1]));
      CHECK(radians_to_degrees(b.buckets[k + 1].mean.dtheta) == doctest::Approx(means[k][2]));
    }
  }

  TEST_CASE("bucket members lie close to the mean at insertion") {
    Rng rng(1);
    std::vector<Reading> r;
    for (int k = 0; k < 300; ++k) {
      r.push_back({100.0 * std::floor(4 * rng.uniform()) + 10.0 * rng.normal(), 5.0 * rng.normal(),
                   wrap_angle(0.05 * rng.normal())});
    }
    BucketConfig cfg;
    cfg.sigma_x = cfg.sigma_y = 10.0;
    cfg.sigma_theta = 0.1;
    const auto b = bucketize(r, cfg);
    // Replay the running means to check the insertion-time property.
    std::vector<std::vector<Reading>> seen(b.buckets.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
      const auto id = b.assignment[k];
      if (id != 0 && !seen[id].empty()) {
        double sx = 0, sy = 0, ss = 0, sc = 0;
        for (const auto& v : seen[id]) {
          sx += v.dx;
          sy += v.dy;
          ss += std::sin(v.dtheta);
          sc += std::cos(v.dtheta);
        }
        const double n = static_cast<double>(seen[id].size());
        CHECK(std::abs(r[k].dx - sx / n) <= 1.5 * cfg.sigma_x + 1e-9);
        CHECK(std::abs(r[k].dy - sy / n) <= 1.5 * cfg.sigma_y + 1e-9);
        CHECK(std::abs(wrap_angle(r[k].dtheta - std::atan2(ss, sc))) <= 1.5 * cfg.sigma_theta + 1e-9);
      }
      seen[id].push_back(r[k]);
    }
  }

  TEST_CASE("identical readings share a bucket") {
    const std::vector<Reading> r(5, Reading{50.0, 1.0, 0.3});
    const auto b = bucketize(r, example2_config());
    REQUIRE(b.buckets.size() == 2);
    CHECK(b.buckets[1].members.size() == 5);
  }

  TEST_CASE("example 2 state sequence") {
    const auto readings = example2_readings();
    const auto cfg = example2_config();
    const auto b = bucketize(readings, cfg);
    const auto tags = tag_states(readings, b, 4, cfg);
    CHECK(tags.state_sequence == std::vector<std::size_t>{0, 1, 2, 3, 0, 1, 2, 3, 0});
    CHECK(check_consistency(tags.relation_means, CoordinateMode::Global, ConstraintLevel::Additive,
                            1e-9)
              .empty());
    // mu[3][0] closes the loop of the first three bucket means.
    const auto& back = tags.relation_means(3, 0);
    CHECK(back.mu_x == doctest::Approx(-(-1.0 + 1996.0 + 0.5)));
    CHECK(back.mu_y == doctest::Approx(-(98.0 - 2.5 - 99.5)));
    CHECK(std::abs(wrap_angle(back.mu_theta + degrees_to_radians(91.5 + 89 + 88.5))) < 1e-12);
    // Reading 4 sits within one sigma of it.
    CHECK(std::abs(readings[3].dx - back.mu_x) < 20.0);
    CHECK(std::abs(readings[3].dy - back.mu_y) < 20.0);
    CHECK(tags.bucket_assoc.at({3, 0}) == 4);
    CHECK(tags.bucket_assoc.at({0, 1}) == 1);
  }

  TEST_CASE("zero readings stay in state 0") {
    const std::vector<Reading> r(6, Reading{1.0, -2.0, 0.01});
    const auto cfg = example2_config();
    const auto tags = tag_states(r, bucketize(r, cfg), 3, cfg);
    for (auto s : tags.state_sequence) CHECK(s == 0);
  }

  TEST_CASE("exhausted states follow the nearest entry") {
    const auto readings = example2_readings();
    const auto cfg = example2_config();
    const auto tags = tag_states(readings, bucketize(readings, cfg), 2, cfg);
    CHECK(tags.states_used == 2);
    CHECK(tags.state_sequence.size() == 9);
  }

  TEST_CASE("example 2 initial model cycles through the states") {
    const auto readings = example2_readings();
    std::vector<std::vector<int>> obs(9, std::vector<int>{0});
    ExperienceSequence e(obs, readings);
    const std::vector<std::size_t> dims{1};
    const auto m = init_model(e, 4, dims, example2_config());
    for (Eigen::Index i = 0; i < 4; ++i) {
      Eigen::Index best = 0;
      m.A.row(i).maxCoeff(&best);
      CHECK(best == (i + 1) % 4);
      for (Eigen::Index j = 0; j < 4; ++j) CHECK(m.A(i, j) > 0.0);
    }
    CHECK(check_consistency(m, ConstraintLevel::Additive, 1e-9).empty());
    CHECK_THROWS_AS(init_model(e.prefix(1), 4, dims, example2_config()), InputError);
  }

  TEST_CASE("initial model beats a uniform one and is deterministic") {
    auto spec = LoopSpec{};
    spec.p_forward = 1.0;
    spec.p_skip = 0.0;
    spec.p_stay = 0.0;
    spec.obs_noise = 0.0;
    const auto truth = make_loop_model(spec);
    Rng rng(4);
    const auto e = sample_sequence(truth, 200, rng);
    BucketConfig cfg;
    cfg.sigma_x = cfg.sigma_y = 20.0;
    cfg.sigma_theta = 0.15;
    const auto dims = truth.obs_dims();
    const auto m = init_model(e, truth.n_states(), dims, cfg, truth.mode);
    const auto m2 = init_model(e, truth.n_states(), dims, cfg, truth.mode);
    CHECK(m.A == m2.A);
    CHECK(m.R == m2.R);

    GeoHmm uniform = m;
    const auto n = static_cast<Eigen::Index>(truth.n_states());
    uniform.A = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    for (auto& b : uniform.B) b.setConstant(1.0 / b.rows());
    const InferenceOptions plain{false, 0.0};
    CHECK(log_likelihood(m, e, plain) >= log_likelihood(uniform, e, plain));

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    for (int k = 0; k < 5; ++k) init_model(e, truth.n_states(), dims, cfg, truth.mode);
    const auto t1 = clock::now();
    for (int k = 0; k < 5; ++k) forward_backward(m, e);
    const auto t2 = clock::now();
    CHECK((t1 - t0) <= 2 * (t2 - t1));
  }
}
