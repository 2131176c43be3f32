#include "geohmm/model_io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <system_error>

#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"

namespace geohmm {

using nlohmann::json;

double Units::angle_scale() const {
  return angle == AngleUnit::Degrees ? degrees_to_radians(1.0) : 1.0;
}

double Units::length_scale() const { return length == LengthUnit::Millimeters ? 1e-3 : 1.0; }

std::string_view to_string(AngleUnit u) { return u == AngleUnit::Degrees ? "degrees" : "radians"; }

std::string_view to_string(LengthUnit u) {
  switch (u) {
    case LengthUnit::Meters: return "m";
    case LengthUnit::Millimeters: return "mm";
    case LengthUnit::Abstract: return "units";
  }
  return "?";
}

AngleUnit parse_angle_unit(std::string_view text) {
  if (text == "radians" || text == "rad") return AngleUnit::Radians;
  if (text == "degrees" || text == "deg") return AngleUnit::Degrees;
  throw InputError("unknown angle unit '" + std::string(text) + "'");
}

LengthUnit parse_length_unit(std::string_view text) {
  if (text == "m") return LengthUnit::Meters;
  if (text == "mm") return LengthUnit::Millimeters;
  if (text == "units") return LengthUnit::Abstract;
  throw InputError("unknown length unit '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double to_angle(double canonical, const Units& u) {
  return u.angle == AngleUnit::Degrees ? radians_to_degrees(canonical) : canonical;
}
double from_angle(double v, const Units& u) {
  return u.angle == AngleUnit::Degrees ? degrees_to_radians(v) : v;
}
double to_length(double canonical, const Units& u) { return canonical / u.length_scale(); }
double from_length(double v, const Units& u) { return v * u.length_scale(); }

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("model file is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("model file field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_model(const GeoHmm& model, const Units& units) {
  const auto n = model.n_states();
  json j;
  j["format"] = "geohmm-model";
  j["version"] = 1;
  j["n_states"] = n;
  j["obs_dims"] = model.obs_dims();
  j["start_state"] = model.start_state;
  j["mode"] = std::string(to_string(model.mode));
  j["units"] = {{"angle", std::string(to_string(units.angle))},
                {"length", std::string(to_string(units.length))}};

  json a = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < n; ++k) row.push_back(model.A(i, k));
    a.push_back(std::move(row));
  }
  j["A"] = std::move(a);

  json b = json::array();
  for (const auto& m : model.B) {
    json dim = json::array();
    for (Eigen::Index o = 0; o < m.rows(); ++o) {
      json row = json::array();
      for (std::size_t s = 0; s < n; ++s) row.push_back(m(o, static_cast<Eigen::Index>(s)));
      dim.push_back(std::move(row));
    }
    b.push_back(std::move(dim));
  }
  j["B"] = std::move(b);

  const double l2 = units.length_scale() * units.length_scale();
  json r = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& e = model.R(i, k);
      row.push_back({to_length(e.mu_x, units), to_length(e.mu_y, units),
                     to_angle(e.mu_theta, units), e.var_x / l2, e.var_y / l2, e.kappa});
    }
    r.push_back(std::move(row));
  }
  j["R"] = std::move(r);
  return j.dump(1) + "\n";
}

GeoHmm parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "geohmm-model") {
    throw InputError("not a geohmm model file");
  }
  Units units;
  if (j.contains("units")) {
    units.angle = parse_angle_unit(j["units"].value("angle", "radians"));
    units.length = parse_length_unit(j["units"].value("length", "m"));
  }
  const auto n = get<std::size_t>(j, "n_states");
  const auto dims = get<std::vector<std::size_t>>(j, "obs_dims");

  GeoHmm model;
  model.start_state = get<std::size_t>(j, "start_state");
  model.mode = parse_mode(get<std::string>(j, "mode"));

  const auto a = get<std::vector<std::vector<double>>>(j, "A");
  if (a.size() != n) throw InputError("A has wrong number of rows");
  model.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw InputError("A row " + std::to_string(i) + " has wrong length");
    for (std::size_t k = 0; k < n; ++k) model.A(i, k) = a[i][k];
  }

  const auto b = get<std::vector<std::vector<std::vector<double>>>>(j, "B");
  if (b.size() != dims.size()) throw InputError("B does not match obs_dims");
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (b[d].size() != dims[d]) throw InputError("B[" + std::to_string(d) + "] has wrong row count");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dims[d]), static_cast<Eigen::Index>(n));
    for (std::size_t o = 0; o < dims[d]; ++o) {
      if (b[d][o].size() != n) throw InputError("B row has wrong length");
      for (std::size_t s = 0; s < n; ++s) m(o, s) = b[d][o][s];
    }
    model.B.push_back(std::move(m));
  }

  const auto r = get<std::vector<std::vector<std::vector<double>>>>(j, "R");
  if (r.size() != n) throw InputError("R has wrong number of rows");
  const double l2 = units.length_scale() * units.length_scale();
  model.R = RelationMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i].size() != n) throw InputError("R row has wrong length");
    for (std::size_t k = 0; k < n; ++k) {
      const auto& t = r[i][k];
      if (t.size() != 6) throw InputError("R entries must be 6-tuples");
      auto& e = model.R(i, k);
      e.mu_x = from_length(t[0], units);
      e.mu_y = from_length(t[1], units);
      e.mu_theta = wrap_angle(from_angle(t[2], units));
      e.var_x = t[3] * l2;
      e.var_y = t[4] * l2;
      e.kappa = t[5];
    }
  }
  validate(model, 1e-6);
  return model;
}

std::string format_experience(const ExperienceSequence& seq, const Units& units,
                              const std::vector<std::size_t>& alphabet) {
  std::ostringstream os;
  os << "geohmm-experience l=" << seq.n_dims() << " angle=" << to_string(units.angle)
     << " length=" << to_string(units.length);
  if (!alphabet.empty()) {
    os << " alphabet=";
    for (std::size_t d = 0; d < alphabet.size(); ++d) os << (d ? "," : "") << alphabet[d];
  }
  os << "\n";
  for (std::size_t t = 0; t < seq.length(); ++t) {
    const auto& v = seq.observation(t);
    for (std::size_t d = 0; d < v.size(); ++d) os << (d ? " " : "") << v[d];
    if (t > 0) {
      const auto& r = seq.reading(t);
      os << ' ' << format_double(to_length(r.dx, units)) << ' '
         << format_double(to_length(r.dy, units)) << ' '
         << format_double(to_angle(r.dtheta, units));
    }
    os << "\n";
  }
  return os.str();
}

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream is{std::string(line)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, std::size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw InputError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  }
  return v;
}

int parse_symbol(const std::string& tok, std::size_t line_no) {
  int v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || v < 0) {
    throw InputError("line " + std::to_string(line_no) + ": bad observation symbol '" + tok + "'");
  }
  return v;
}

}  // namespace

ExperienceFile parse_experience(std::string_view text) {
  ExperienceFile file;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::size_t l = 0;
  bool have_header = false;
  std::vector<std::vector<int>> obs;
  std::vector<Reading> readings;

  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (!have_header) {
      if (toks[0] != "geohmm-experience") throw InputError("not a geohmm experience file");
      for (std::size_t k = 1; k < toks.size(); ++k) {
        const auto eq = toks[k].find('=');
        if (eq == std::string::npos) throw InputError("bad header field '" + toks[k] + "'");
        const auto key = toks[k].substr(0, eq);
        const auto val = toks[k].substr(eq + 1);
        if (key == "l") {
          l = static_cast<std::size_t>(parse_symbol(val, line_no));
        } else if (key == "angle") {
          file.units.angle = parse_angle_unit(val);
        } else if (key == "length") {
          file.units.length = parse_length_unit(val);
        } else if (key == "alphabet") {
          std::istringstream as(val);
          std::string part;
          while (std::getline(as, part, ',')) {
            file.alphabet.push_back(static_cast<std::size_t>(parse_symbol(part, line_no)));
          }
        } else {
          throw InputError("unknown header field '" + key + "'");
        }
      }
      if (l == 0) throw InputError("header must declare l >= 1");
      if (!file.alphabet.empty() && file.alphabet.size() != l) {
        throw InputError("alphabet list length differs from l");
      }
      have_header = true;
      continue;
    }
    const bool first = obs.empty();
    const std::size_t expected = first ? l : l + 3;
    if (toks.size() != expected) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected) + " fields, got " + std::to_string(toks.size()));
    }
    std::vector<int> v(l);
    for (std::size_t d = 0; d < l; ++d) v[d] = parse_symbol(toks[d], line_no);
    obs.push_back(std::move(v));
    if (!first) {
      Reading r;
      r.dx = from_length(parse_number(toks[l], line_no), file.units);
      r.dy = from_length(parse_number(toks[l + 1], line_no), file.units);
      r.dtheta = wrap_angle(from_angle(parse_number(toks[l + 2], line_no), file.units));
      readings.push_back(r);
    }
  }
  if (!have_header) throw InputError("experience file has no header");
  if (obs.empty()) throw InputError("experience file has no steps");
  file.sequence = ExperienceSequence(std::move(obs), std::move(readings));
  if (!file.alphabet.empty()) file.sequence.check_alphabet(file.alphabet);
  return file;
}

std::vector<std::size_t> effective_alphabet(const ExperienceFile& file) {
  if (!file.alphabet.empty()) return file.alphabet;
  std::vector<std::size_t> dims(file.sequence.n_dims(), 1);
  for (const auto& v : file.sequence.observations()) {
    for (std::size_t d = 0; d < v.size(); ++d) {
      dims[d] = std::max(dims[d], static_cast<std::size_t>(v[d]) + 1);
    }
  }
  return dims;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

GeoHmm load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

ExperienceFile load_experience(const std::filesystem::path& path) {
  return parse_experience(read_text_file(path));
}

}  // namespace geohmm
