#ifndef SFBM_IO_HPP
#define SFBM_IO_HPP

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfbm/slnd.hpp"
#include "sfbm/spectrum.hpp"
#include "sfbm/sphere.hpp"

namespace sfbm {

inline constexpr int spectrum_cache_format_version = 1;
inline constexpr const char* tool_version = "sfbm 1.0.0";

/// A persisted file failed validation (bad schema, stale version, parse error).
class integrity_error : public std::runtime_error {
 public:
  explicit integrity_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shortest text that round-trips a binary64 exactly.
inline std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// ISO-8601 UTC timestamp; SFBM_TIMESTAMP overrides it so replayed runs can
/// be compared byte for byte.
inline std::string timestamp_utc() {
  if (const char* env = std::getenv("SFBM_TIMESTAMP")) return env;
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

/// write-temp-then-rename so readers never observe partial files
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.good()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Spectrum cache
// ---------------------------------------------------------------------------

inline void write_spectrum_cache(const std::filesystem::path& path, const PowerSpectrum& s) {
  nlohmann::json j;
  j["format_version"] = spectrum_cache_format_version;
  j["H"] = s.H.value();
  j["L"] = s.L;
  j["method"] = to_string(s.method);
  j["tol"] = s.tol;
  j["values"] = s.values;
  j["build_timestamp"] = timestamp_utc();
  write_text_atomic(path, j.dump(2) + "\n");
}

inline PowerSpectrum read_spectrum_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw integrity_error("spectrum cache not readable: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw integrity_error("spectrum cache is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != spectrum_cache_format_version)
      throw integrity_error("spectrum cache has an unsupported format_version");
    const double h = j.at("H").get<double>();
    if (!(h > 0.0 && h <= 0.5))
      throw integrity_error("spectrum cache: H outside the existence range (0, 1/2]");
    const int L = j.at("L").get<int>();
    PowerSpectrum s{HurstIndex(h), L, j.at("values").get<std::vector<double>>(),
                    spectrum_method_from_string(j.at("method").get<std::string>()),
                    j.at("tol").get<double>(), 0.0};
    if (static_cast<int>(s.values.size()) != L + 1)
      throw integrity_error("spectrum cache: values length does not match L");
    return s;
  } catch (const integrity_error&) {
    throw;
  } catch (const std::exception& e) {
    throw integrity_error("spectrum cache is malformed: " + std::string(e.what()));
  }
}

inline void write_spectrum_csv(const std::filesystem::path& path, const PowerSpectrum& s) {
  std::ostringstream out;
  out << "ell,d_ell,abs_d_ell,ell_scaled\n";
  const double expo = s.H.two_h() + 2.0;
  for (int l = 0; l <= s.L; ++l) {
    const double scaled = (l == 0) ? 0.0 : s.magnitude(l) * std::pow(static_cast<double>(l), expo);
    out << l << ',' << format_double17(s.values[l]) << ',' << format_double17(s.magnitude(l))
        << ',' << format_double17(scaled) << '\n';
  }
  write_text_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Point lists and realizations
// ---------------------------------------------------------------------------

inline void write_points_csv(const std::filesystem::path& path,
                             const std::vector<SpherePoint>& pts) {
  std::ostringstream out;
  out << "theta,phi\n";
  for (const auto& p : pts) out << format_double17(p.theta) << ',' << format_double17(p.phi) << '\n';
  write_text_atomic(path, out.str());
}

inline std::vector<SpherePoint> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw integrity_error("points file not readable: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "theta,phi")
    throw integrity_error("points file must start with header 'theta,phi'");
  std::vector<SpherePoint> pts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw integrity_error("points file: missing comma on line " + std::to_string(line_no));
    try {
      const double theta = std::stod(line.substr(0, comma));
      const double phi = std::stod(line.substr(comma + 1));
      pts.push_back(from_angles(theta, phi));
    } catch (const std::exception& e) {
      throw integrity_error("points file: bad row on line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return pts;
}

inline void write_realization_csv(const std::filesystem::path& path,
                                  const std::vector<SpherePoint>& pts,
                                  const std::vector<double>& values) {
  std::ostringstream out;
  out << "theta,phi,value\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    out << format_double17(pts[i].theta) << ',' << format_double17(pts[i].phi) << ','
        << format_double17(values[i]) << '\n';
  write_text_atomic(path, out.str());
}

struct RealizationRow {
  double theta = 0.0, phi = 0.0, value = 0.0;
};

inline std::vector<RealizationRow> read_realization_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw integrity_error("realization file not readable: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "theta,phi,value")
    throw integrity_error("realization file must start with header 'theta,phi,value'");
  std::vector<RealizationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw integrity_error("realization file: malformed row");
    rows.push_back({std::stod(line.substr(0, c1)), std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                    std::stod(line.substr(c2 + 1))});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Experiment output
// ---------------------------------------------------------------------------

inline nlohmann::json point_to_json(const SpherePoint& p) {
  return nlohmann::json{{"theta", p.theta}, {"phi", p.phi}};
}

inline void write_experiment_json(const std::filesystem::path& path, HurstIndex H, int trials,
                                  int n_max, double eps_min, double eps_max,
                                  const K2Estimate& est, std::uint64_t seed) {
  nlohmann::json j;
  j["H"] = H.value();
  j["trials"] = trials;
  j["n_max"] = n_max;
  j["eps_range"] = {eps_min, eps_max};
  j["min_ratio"] = est.min_ratio;
  j["quantiles"] = {{"p1", est.p1}, {"p5", est.p5}, {"p50", est.p50}};
  nlohmann::json worst;
  worst["target"] = point_to_json(est.worst_config.target);
  worst["points"] = nlohmann::json::array();
  for (const auto& p : est.worst_config.points) worst["points"].push_back(point_to_json(p));
  j["worst_config"] = worst;
  j["seed"] = seed;
  write_text_atomic(path, j.dump(2) + "\n");
}

inline void write_trials_csv(const std::filesystem::path& path,
                             const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << "n,epsilon,cv,ratio\n";
  for (const auto& t : trials)
    out << t.n << ',' << format_double17(t.epsilon) << ',' << format_double17(t.cv) << ','
        << format_double17(t.ratio) << '\n';
  write_text_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string command;
  nlohmann::json parameters;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
  std::string version;
  std::string timestamp;
};

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["parameters"] = m.parameters;
  j["seed"] = m.seed;
  j["artifacts"] = m.artifacts;
  j["tool_version"] = m.version.empty() ? tool_version : m.version;
  j["timestamp"] = m.timestamp.empty() ? timestamp_utc() : m.timestamp;
  write_text_atomic(path, j.dump(2) + "\n");
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw integrity_error("manifest not readable: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw integrity_error("manifest is not valid JSON: " + std::string(e.what()));
  }
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.parameters = j.at("parameters");
  m.seed = j.at("seed").get<std::uint64_t>();
  m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  m.version = j.at("tool_version").get<std::string>();
  m.timestamp = j.at("timestamp").get<std::string>();
  return m;
}

}  // namespace sfbm

#endif  // SFBM_IO_HPP
