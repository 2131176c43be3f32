#include <regex>

#include "doctest.h"
#include "geohmm/render.hpp"
#include "geohmm/simgen.hpp"

using namespace geohmm;

TEST_SUITE("render") {
  TEST_CASE("embedding recovers the loop geometry") {
    const auto m = make_loop_model(LoopSpec{});
    const auto p = embed_states(m);
    // Corners of the default loop: states 0, 4, 8, 12.
    CHECK(p.x[4] == doctest::Approx(0.0).scale(1.0));
    CHECK(p.y[4] == doctest::Approx(1200.0));
    CHECK(p.x[8] == doctest::Approx(800.0));
    CHECK(p.y[8] == doctest::Approx(1200.0));
    CHECK(p.x[12] == doctest::Approx(800.0));
    CHECK(p.y[12] == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("svg carries states and both arrow styles") {
    const auto m = make_loop_model(LoopSpec{});
    const auto svg = render_svg(m);
    CHECK(svg.rfind("<svg", 0) == 0);
    const std::regex state(R"re(class="state" data-state="(\d+)" data-x="([-0-9.e]+)" data-y="([-0-9.e]+)")re");
    const auto n = std::distance(std::sregex_iterator(svg.begin(), svg.end(), state), std::sregex_iterator());
    CHECK(n == 16);
    const std::regex solid(R"re(class="transition"[^/]*marker-end="url\(#head\)"/>)re");
    CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), solid), std::sregex_iterator()) == 16);
    CHECK(svg.find("stroke-dasharray") == std::string::npos);

    auto branchy = m;
    branchy.A.row(0).setZero();
    branchy.A(0, 1) = 0.6;
    branchy.A(0, 2) = 0.4;
    CHECK(render_svg(branchy).find("stroke-dasharray") != std::string::npos);
  }
}
