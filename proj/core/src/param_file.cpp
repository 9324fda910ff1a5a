#include "spdcbell/param_file.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace spdcbell {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(const std::string& what) { throw ValidationError(what); }

double to_double(std::string_view value, const std::string& key) {
  const std::string v(value);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    bad(key + ": not a number: '" + v + "'");
  return d;
}

long to_long(std::string_view value, const std::string& key) {
  const std::string v(value);
  char* end = nullptr;
  const long n = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    bad(key + ": not an integer: '" + v + "'");
  return n;
}

}  // namespace

std::string format_param_file(const EvalSpec& spec) {
  std::ostringstream out;
  out << "# spdc-bell parameters\n";
  out << "eta = " << fmt17(spec.config.detectors.eta) << "\n";
  out << "pdc = " << fmt17(spec.config.detectors.pdc) << "\n";
  if (const auto* fin =
          std::get_if<FiniteEmission>(&spec.config.source.emission)) {
    out << "modes = " << fin->modes << "\n";
    out << "g = " << fmt17(fin->g) << "\n";
    out << "g_bar = " << fmt17(fin->g_bar) << "\n";
  } else {
    const auto& poi = std::get<PoissonEmission>(spec.config.source.emission);
    out << "modes = poisson\n";
    out << "gamma = " << fmt17(poi.gamma) << "\n";
    out << "gamma_bar = " << fmt17(poi.gamma_bar) << "\n";
  }
  static constexpr const char* kAngleKeys[4] = {"alpha0", "alpha1", "beta0",
                                                "beta1"};
  static constexpr const char* kPhaseKeys[4] = {"phi_alpha0", "phi_alpha1",
                                                "phi_beta0", "phi_beta1"};
  const MeasurementSetting settings[4] = {spec.config.alice[0],
                                          spec.config.alice[1],
                                          spec.config.bob[0],
                                          spec.config.bob[1]};
  for (int i = 0; i < 4; ++i)
    out << kAngleKeys[i] << " = " << fmt17(settings[i].angle) << "\n";
  for (int i = 0; i < 4; ++i)
    out << kPhaseKeys[i] << " = " << fmt17(settings[i].phase) << "\n";
  if (spec.binning) out << "binning = " << *spec.binning << "\n";
  return out.str();
}

EvalSpec parse_param_text(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line =
        nl == std::string_view::npos ? text : text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;

    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      bad("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty())
      bad("line " + std::to_string(line_no) + ": expected 'key = value'");
    if (!kv.emplace(key, value).second) bad(key + ": duplicate key");
  }

  EvalSpec spec;
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("eta")) spec.config.detectors.eta = to_double(*v, "eta");
  if (auto v = take("pdc")) spec.config.detectors.pdc = to_double(*v, "pdc");

  bool poisson = false;
  int modes = 1;
  if (auto v = take("modes")) {
    if (*v == "poisson")
      poisson = true;
    else {
      const long n = to_long(*v, "modes");
      if (n < 1) bad("modes: must be poisson or a positive integer");
      modes = static_cast<int>(n);
    }
  }
  if (poisson) {
    PoissonEmission poi;
    if (auto v = take("gamma")) poi.gamma = to_double(*v, "gamma");
    if (auto v = take("gamma_bar")) poi.gamma_bar = to_double(*v, "gamma_bar");
    if (kv.count("g") || kv.count("g_bar"))
      bad("g/g_bar: use gamma/gamma_bar with modes = poisson");
    spec.config.source.emission = poi;
  } else {
    FiniteEmission fin;
    fin.modes = modes;
    if (auto v = take("g")) fin.g = to_double(*v, "g");
    if (auto v = take("g_bar")) fin.g_bar = to_double(*v, "g_bar");
    if (kv.count("gamma") || kv.count("gamma_bar"))
      bad("gamma/gamma_bar: only valid with modes = poisson");
    spec.config.source.emission = fin;
  }

  static constexpr const char* kAngleKeys[4] = {"alpha0", "alpha1", "beta0",
                                                "beta1"};
  static constexpr const char* kPhaseKeys[4] = {"phi_alpha0", "phi_alpha1",
                                                "phi_beta0", "phi_beta1"};
  MeasurementSetting settings[4];
  for (int i = 0; i < 4; ++i) {
    if (auto v = take(kAngleKeys[i]))
      settings[i].angle = to_double(*v, kAngleKeys[i]);
    if (auto v = take(kPhaseKeys[i]))
      settings[i].phase = to_double(*v, kPhaseKeys[i]);
  }
  spec.config.alice = {settings[0], settings[1]};
  spec.config.bob = {settings[2], settings[3]};

  if (auto v = take("binning")) {
    const long b = to_long(*v, "binning");
    if (b < 0 || b > 255) bad("binning: must be in [0, 255]");
    spec.binning = static_cast<unsigned>(b);
  }

  if (!kv.empty()) bad(kv.begin()->first + ": unknown key");
  return spec;
}

EvalSpec read_param_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open parameter file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_param_text(buf.str());
}

void write_param_file(const std::string& path, const EvalSpec& spec) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write parameter file: " + path);
  out << format_param_file(spec);
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace spdcbell
