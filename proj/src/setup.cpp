#include "spdc/setup.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw config_error("setup:" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& token, int line, std::size_t* consumed) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) fail(line, "expected a number in '" + token + "'");
  *consumed = static_cast<std::size_t>(end - begin);
  return v;
}

double parse_length(const std::string& token, int line) {
  std::size_t consumed = 0;
  const double v = parse_number(token, line, &consumed);
  const std::string unit = trim(token.substr(consumed));
  if (unit == "nm") return v * 1e-9;
  if (unit == "um") return v * 1e-6;
  if (unit == "mm") return v * 1e-3;
  if (unit == "cm") return v * 1e-2;
  if (unit == "m") return v;
  if (unit.empty()) fail(line, "missing length unit on '" + token + "' (use nm|um|mm|cm|m)");
  fail(line, "malformed unit '" + unit + "' in '" + token + "'");
}

double parse_real(const std::string& token, int line) {
  std::size_t consumed = 0;
  const double v = parse_number(token, line, &consumed);
  if (!trim(token.substr(consumed)).empty()) fail(line, "trailing junk in number '" + token + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& token, int line) {
  const std::string t = trim(token);
  if (t.empty() || t[0] == '-') fail(line, "expected a non-negative integer, got '" + token + "'");
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) fail(line, "expected an integer, got '" + token + "'");
  return v;
}

bool parse_bool(const std::string& token, int line) {
  if (token == "true") return true;
  if (token == "false") return false;
  fail(line, "expected true or false, got '" + token + "'");
}

std::vector<double> parse_length_list(const std::string& token, int line) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(token);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty entry in list '" + token + "'");
    out.push_back(parse_length(item, line));
  }
  if (out.empty()) fail(line, "empty list");
  return out;
}

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Calibration: return "Calibration";
    case Experiment::FixedD1: return "FixedD1";
    case Experiment::SameSense: return "SameSense";
    case Experiment::OppositeSense: return "OppositeSense";
    case Experiment::FullMap: return "FullMap";
    case Experiment::AntibunchReport: return "AntibunchReport";
    case Experiment::HomogeneityReport: return "HomogeneityReport";
  }
  return "?";
}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Analytic: return "analytic";
    case Mode::MonteCarlo: return "montecarlo";
    case Mode::Both: return "both";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::Calibration, Experiment::FixedD1, Experiment::SameSense,
                 Experiment::OppositeSense, Experiment::FullMap, Experiment::AntibunchReport,
                 Experiment::HomogeneityReport}) {
    if (s == to_string(e)) return e;
  }
  throw config_error("unknown experiment '" + s +
                     "' (expected Calibration|FixedD1|SameSense|OppositeSense|FullMap|"
                     "AntibunchReport|HomogeneityReport)");
}

Mode mode_from_string(const std::string& s) {
  for (auto m : {Mode::Analytic, Mode::MonteCarlo, Mode::Both}) {
    if (s == to_string(m)) return m;
  }
  throw config_error("unknown mode '" + s + "' (expected analytic|montecarlo|both)");
}

void RunSpec::validate() const {
  bench.validate();
  if (mode != Mode::Analytic && n_pairs < 1)
    throw config_error("montecarlo mode needs n_pairs >= 1");
  if (experiment == Experiment::FixedD1 && d1_offsets.empty())
    throw config_error("FixedD1 needs a non-empty d1_offsets list");
  if (!(analysis_window > 0)) throw config_error("analysis_window must be > 0");
  if (output_dir.empty()) throw config_error("output_dir must not be empty");
}

RunSpec parse_setup(const std::string& text) {
  RunSpec spec;
  bool calibration_enabled = spec.bench.calibration_wire.has_value();
  bench::CalibrationWire cal =
      spec.bench.calibration_wire.value_or(bench::CalibrationWire{});

  using Handler = std::function<void(const std::string&, int)>;
  const std::map<std::string, Handler> handlers = {
      {"pump_wavelength", [&](const std::string& v, int l) { spec.bench.pump_wavelength = parse_length(v, l); }},
      {"downconverted_wavelength", [&](const std::string& v, int l) { spec.bench.downconverted_wavelength = parse_length(v, l); }},
      {"pump_waist", [&](const std::string& v, int l) { spec.bench.pump_waist = parse_length(v, l); }},
      {"wire_width", [&](const std::string& v, int l) { spec.bench.wire_width = parse_length(v, l); }},
      {"wire_center", [&](const std::string& v, int l) { spec.bench.wire_center = parse_length(v, l); }},
      {"wire_to_lens", [&](const std::string& v, int l) { spec.bench.wire_to_lens = parse_length(v, l); }},
      {"lens_focal", [&](const std::string& v, int l) { spec.bench.lens_focal = parse_length(v, l); }},
      {"lens_to_crystal", [&](const std::string& v, int l) { spec.bench.lens_to_crystal = parse_length(v, l); }},
      {"crystal_to_detectors", [&](const std::string& v, int l) { spec.bench.crystal_to_detectors = parse_length(v, l); }},
      {"dove_prism", [&](const std::string& v, int l) { spec.bench.dove_prism = parse_bool(v, l); }},
      {"slit_width", [&](const std::string& v, int l) { spec.bench.slit_width = parse_length(v, l); }},
      {"mu_s", [&](const std::string& v, int l) { spec.bench.mu_s = parse_real(v, l); }},
      {"mu_i", [&](const std::string& v, int l) { spec.bench.mu_i = parse_real(v, l); }},
      {"calibration_wire", [&](const std::string& v, int l) { calibration_enabled = parse_bool(v, l); }},
      {"calibration_wire_width", [&](const std::string& v, int l) { cal.width = parse_length(v, l); }},
      {"calibration_wire_center", [&](const std::string& v, int l) { cal.center = parse_length(v, l); }},
      {"calibration_wire_distance", [&](const std::string& v, int l) { cal.distance_to_detectors = parse_length(v, l); }},
      {"grid_n", [&](const std::string& v, int l) { spec.bench.grid_n = static_cast<std::size_t>(parse_u64(v, l)); }},
      {"grid_dx", [&](const std::string& v, int l) { spec.bench.grid_dx = parse_length(v, l); }},
      {"grid_pad_factor", [&](const std::string& v, int l) { spec.bench.pad_factor = static_cast<std::size_t>(parse_u64(v, l)); }},
      {"singles_envelope_factor", [&](const std::string& v, int l) { spec.bench.singles_envelope_factor = parse_real(v, l); }},
      {"experiment", [&](const std::string& v, int l) {
         try { spec.experiment = experiment_from_string(v); }
         catch (const config_error& e) { fail(l, e.what()); }
       }},
      {"mode", [&](const std::string& v, int l) {
         try { spec.mode = mode_from_string(v); }
         catch (const config_error& e) { fail(l, e.what()); }
       }},
      {"d1_offsets", [&](const std::string& v, int l) { spec.d1_offsets = parse_length_list(v, l); }},
      {"n_pairs", [&](const std::string& v, int l) { spec.n_pairs = static_cast<std::size_t>(parse_u64(v, l)); }},
      {"seed", [&](const std::string& v, int l) { spec.seed = parse_u64(v, l); }},
      {"output_dir", [&](const std::string& v, int l) {
         if (v.empty()) fail(l, "output_dir must not be empty");
         spec.output_dir = v;
       }},
      {"emit_svg", [&](const std::string& v, int l) { spec.emit_svg = parse_bool(v, l); }},
      {"analysis_window", [&](const std::string& v, int l) { spec.analysis_window = parse_length(v, l); }},
  };

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "missing key before '='");
    if (value.empty()) fail(line, "missing value for key '" + key + "'");

    const auto it = handlers.find(key);
    if (it == handlers.end()) fail(line, "unknown key '" + key + "'");
    it->second(value, line);
  }

  spec.bench.calibration_wire =
      calibration_enabled ? std::optional<bench::CalibrationWire>(cal) : std::nullopt;
  spec.validate();
  return spec;
}

std::string serialize_setup(const RunSpec& spec) {
  std::ostringstream os;
  const auto& b = spec.bench;
  const auto cal = b.calibration_wire.value_or(bench::CalibrationWire{});

  os << "# bench\n";
  os << "pump_wavelength = " << fmt_g(b.pump_wavelength) << "m\n";
  os << "downconverted_wavelength = " << fmt_g(b.downconverted_wavelength) << "m\n";
  os << "pump_waist = " << fmt_g(b.pump_waist) << "m\n";
  os << "wire_width = " << fmt_g(b.wire_width) << "m\n";
  os << "wire_center = " << fmt_g(b.wire_center) << "m\n";
  os << "wire_to_lens = " << fmt_g(b.wire_to_lens) << "m\n";
  os << "lens_focal = " << fmt_g(b.lens_focal) << "m\n";
  os << "lens_to_crystal = " << fmt_g(b.lens_to_crystal) << "m\n";
  os << "crystal_to_detectors = " << fmt_g(b.crystal_to_detectors) << "m\n";
  os << "dove_prism = " << (b.dove_prism ? "true" : "false") << '\n';
  os << "slit_width = " << fmt_g(b.slit_width) << "m\n";
  os << "mu_s = " << fmt_g(b.mu_s) << '\n';
  os << "mu_i = " << fmt_g(b.mu_i) << '\n';
  os << "calibration_wire = " << (b.calibration_wire ? "true" : "false") << '\n';
  os << "calibration_wire_width = " << fmt_g(cal.width) << "m\n";
  os << "calibration_wire_center = " << fmt_g(cal.center) << "m\n";
  os << "calibration_wire_distance = " << fmt_g(cal.distance_to_detectors) << "m\n";
  os << "grid_n = " << b.grid_n << '\n';
  os << "grid_dx = " << fmt_g(b.grid_dx) << "m\n";
  os << "grid_pad_factor = " << b.pad_factor << '\n';
  os << "singles_envelope_factor = " << fmt_g(b.singles_envelope_factor) << '\n';

  os << "# run\n";
  os << "experiment = " << to_string(spec.experiment) << '\n';
  os << "mode = " << to_string(spec.mode) << '\n';
  os << "d1_offsets = ";
  for (std::size_t i = 0; i < spec.d1_offsets.size(); ++i) {
    if (i) os << ", ";
    os << fmt_g(spec.d1_offsets[i]) << 'm';
  }
  os << '\n';
  os << "n_pairs = " << spec.n_pairs << '\n';
  os << "seed = " << spec.seed << '\n';
  os << "output_dir = " << spec.output_dir << '\n';
  os << "emit_svg = " << (spec.emit_svg ? "true" : "false") << '\n';
  os << "analysis_window = " << fmt_g(spec.analysis_window) << "m\n";
  return os.str();
}

}  // namespace spdc::cli
