#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "geohmm/errors.hpp"
#include "geohmm/model_io.hpp"
#include "geohmm/rng.hpp"
#include "geohmm/simgen.hpp"

using namespace geohmm;

TEST_SUITE("model_io") {
  TEST_CASE("model text round-trips bit for bit") {
    Rng rng(21);
    const std::vector<std::size_t> dims{3, 2};
    const auto m = random_model(4, dims, CoordinateMode::Relative, rng);
    const auto text = format_model(m);
    const auto back = parse_model(text);
    CHECK(back.A == m.A);
    REQUIRE(back.B.size() == 2);
    CHECK(back.B[0] == m.B[0]);
    CHECK(back.B[1] == m.B[1]);
    CHECK(back.R == m.R);
    CHECK(back.mode == m.mode);
    CHECK(format_model(back) == text);
  }

  TEST_CASE("units convert on the way in and out") {
    const auto m = make_loop_model(LoopSpec{});
    const Units mm{AngleUnit::Degrees, LengthUnit::Millimeters};
    const auto back = parse_model(format_model(m, mm));
    for (std::size_t i = 0; i < m.n_states(); ++i) {
      for (std::size_t j = 0; j < m.n_states(); ++j) {
        CHECK(back.R(i, j).mu_x == doctest::Approx(m.R(i, j).mu_x).scale(1000.0));
        CHECK(back.R(i, j).var_y == doctest::Approx(m.R(i, j).var_y));
        CHECK(back.R(i, j).kappa == m.R(i, j).kappa);
      }
    }
  }

  TEST_CASE("malformed model files are input errors") {
    CHECK_THROWS_AS(parse_model("{"), InputError);
    CHECK_THROWS_AS(parse_model(R"({"format":"other"})"), InputError);
    CHECK_THROWS_AS(parse_model(R"({"format":"geohmm-model","n_states":1})"), InputError);
  }

  TEST_CASE("experience files parse with units and comments") {
    const char* text =
        "# two steps\n"
        "geohmm-experience l=2 angle=degrees length=mm alphabet=2,3\n"
        "0 2\n"
        "1 1 1000 -500 90  # turn\n";
    const auto f = parse_experience(text);
    CHECK(f.sequence.length() == 2);
    CHECK(f.alphabet == std::vector<std::size_t>{2, 3});
    CHECK(f.sequence.reading(1).dx == doctest::Approx(1.0));
    CHECK(f.sequence.reading(1).dy == doctest::Approx(-0.5));
    CHECK(f.sequence.reading(1).dtheta == doctest::Approx(std::numbers::pi / 2.0));
    CHECK(effective_alphabet(f) == std::vector<std::size_t>{2, 3});

    const auto again = parse_experience(format_experience(f.sequence, f.units, f.alphabet));
    CHECK(again.sequence.reading(1).dx == doctest::Approx(1.0));
    CHECK(again.sequence.observations() == f.sequence.observations());
  }

  TEST_CASE("experience errors") {
    CHECK_THROWS_AS(parse_experience("0 1\n"), InputError);
    CHECK_THROWS_AS(parse_experience("geohmm-experience l=1\n0\n1 2 3\n"), InputError);
    CHECK_THROWS_AS(parse_experience("geohmm-experience l=1\n0\n1 2 x 3\n"), InputError);
    CHECK_THROWS_AS(parse_experience("geohmm-experience l=1 alphabet=2\n0\n2 0 0 0\n"), InputError);
    CHECK_THROWS_AS(parse_experience("geohmm-experience l=1\n"), InputError);
    const auto f = parse_experience("geohmm-experience l=1\n0\n3 0 0 0\n");
    CHECK(effective_alphabet(f) == std::vector<std::size_t>{4});
  }

  TEST_CASE("atomic write replaces the file") {
    const auto dir = std::filesystem::temp_directory_path() / "geohmm_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "x.txt";
    write_text_file_atomic(path, "first");
    write_text_file_atomic(path, "second");
    CHECK(read_text_file(path) == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "x.txt.tmp"));
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_text_file(dir / "missing"), InputError);
  }

  TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  }
}
