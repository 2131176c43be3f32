#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "geohmm/model.hpp"

namespace geohmm {

enum class AngleUnit { Radians, Degrees };
enum class LengthUnit { Meters, Millimeters, Abstract };

/// Unit tags carried by files. In memory everything is radians and meters;
/// "units" (Abstract) lengths are taken as-is.
struct Units {
  AngleUnit angle = AngleUnit::Radians;
  LengthUnit length = LengthUnit::Meters;

  double angle_scale() const;   // file value * scale = radians
  double length_scale() const;  // file value * scale = canonical length
};

std::string_view to_string(AngleUnit u);
std::string_view to_string(LengthUnit u);
AngleUnit parse_angle_unit(std::string_view text);
LengthUnit parse_length_unit(std::string_view text);

std::string format_model(const GeoHmm& model, const Units& units = {});
GeoHmm parse_model(std::string_view text);

struct ExperienceFile {
  ExperienceSequence sequence;
  std::vector<std::size_t> alphabet;  // empty when the header does not declare it
  Units units;
};

std::string format_experience(const ExperienceSequence& seq, const Units& units = {},
                              const std::vector<std::size_t>& alphabet = {});
ExperienceFile parse_experience(std::string_view text);

/// Alphabet sizes: declared ones if present, else one past the largest symbol.
std::vector<std::size_t> effective_alphabet(const ExperienceFile& file);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

GeoHmm load_model(const std::filesystem::path& path);
ExperienceFile load_experience(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace geohmm
