// Command-line surface: compute/cache spectra, run verification suites,
// simulate realizations, and run conditional-variance experiments.
// Exit codes: 0 success, 2 usage/validation, 3 numerical/integrity failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfbm/field.hpp"
#include "sfbm/io.hpp"
#include "sfbm/slnd.hpp"
#include "sfbm/spectrum.hpp"
#include "sfbm/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

fs::path default_outdir() {
  if (const char* env = std::getenv("SFBM_OUTDIR")) return fs::path(env);
  return fs::path(".");
}

std::vector<double> parse_hurst_set(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw sfbm::usage_error("empty --hurst-set");
  return out;
}

struct SpectrumArgs {
  double hurst = 0.5;
  int lmax = 128;
  double tol = 1e-10;
  std::string method = "quadrature";
  std::string out;
};

int run_spectrum(const SpectrumArgs& a) {
  const sfbm::HurstIndex H(a.hurst);  // throws domain_error outside (0, 1/2]
  const sfbm::SpectrumMethod method = sfbm::spectrum_method_from_string(a.method);
  const fs::path out =
      a.out.empty() ? default_outdir() / "spectrum.json" : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());

  const sfbm::PowerSpectrum s = sfbm::build_spectrum(H, a.lmax, a.tol, method);
  fs::path csv = out;
  csv.replace_extension(".csv");
  sfbm::write_spectrum_cache(out, s);
  sfbm::write_spectrum_csv(csv, s);

  sfbm::RunManifest m;
  m.command = "spectrum";
  m.parameters = {{"hurst", a.hurst},
                  {"lmax", a.lmax},
                  {"tol", a.tol},
                  {"method", a.method},
                  {"out", out.string()}};
  m.artifacts = {out.string(), csv.string()};
  sfbm::write_manifest(out.string() + ".manifest.json", m);
  std::cout << "spectrum written: " << out.string() << " (max err estimate "
            << s.max_err_estimate << ")\n";
  return exit_ok;
}

struct VerifyArgs {
  std::string suite = "all";
  std::string hurst_set = "0.1,0.25,0.4,0.5";
  int lmax = 512;
  double tol = 1e-10;
  std::string report;
  std::string cache;
};

int run_verify(const VerifyArgs& a) {
  if (a.suite != "harmonics" && a.suite != "spectrum" && a.suite != "field" &&
      a.suite != "slnd" && a.suite != "all")
    throw sfbm::usage_error("unknown suite: " + a.suite);

  const std::vector<double> hs = parse_hurst_set(a.hurst_set);
  const fs::path report =
      a.report.empty() ? default_outdir() / "verify_report.json" : fs::path(a.report);
  if (report.has_parent_path()) fs::create_directories(report.parent_path());

  const bool need_spectra = a.suite != "harmonics";
  std::vector<sfbm::PowerSpectrum> spectra;
  if (need_spectra) {
    std::optional<sfbm::PowerSpectrum> cached;
    if (!a.cache.empty()) cached = sfbm::read_spectrum_cache(a.cache);  // may throw integrity
    for (double h : hs) {
      if (cached && cached->H.value() == h && cached->L >= a.lmax &&
          cached->method == sfbm::SpectrumMethod::quadrature) {
        spectra.push_back(*cached);
        std::cout << "using cached spectrum for H=" << h << "\n";
        continue;
      }
      spectra.push_back(sfbm::build_spectrum(sfbm::HurstIndex(h), a.lmax, a.tol));
    }
  }

  std::vector<sfbm::SuiteReport> reports;
  if (a.suite == "harmonics" || a.suite == "all") reports.push_back(sfbm::verify_harmonics());
  if (a.suite == "spectrum" || a.suite == "all") reports.push_back(sfbm::verify_spectrum(spectra));
  if (a.suite == "field" || a.suite == "all") reports.push_back(sfbm::verify_field(spectra));
  if (a.suite == "slnd" || a.suite == "all") reports.push_back(sfbm::verify_slnd(spectra));

  bool all_ok = true;
  nlohmann::json j;
  j["tool_version"] = sfbm::tool_version;
  j["timestamp"] = sfbm::timestamp_utc();
  j["hurst_set"] = hs;
  j["lmax"] = a.lmax;
  j["suites"] = nlohmann::json::array();
  for (const auto& r : reports) {
    j["suites"].push_back(sfbm::suite_report_to_json(r));
    all_ok = all_ok && r.ok();
    for (const auto& c : r.checks) {
      std::cout << (c.assertable ? (c.passed ? "[pass] " : "[FAIL] ") : "[info] ") << r.suite
                << "/" << c.name << "  measured=" << c.measured;
      if (c.assertable) std::cout << "  tolerance=" << c.tolerance;
      std::cout << "\n";
    }
  }
  j["passed"] = all_ok;
  sfbm::write_text_atomic(report, j.dump(2) + "\n");

  sfbm::RunManifest m;
  m.command = "verify";
  m.parameters = {{"suite", a.suite},
                  {"hurst_set", a.hurst_set},
                  {"lmax", a.lmax},
                  {"tol", a.tol},
                  {"report", report.string()},
                  {"cache", a.cache}};
  m.artifacts = {report.string()};
  sfbm::write_manifest(report.string() + ".manifest.json", m);

  std::cout << (all_ok ? "verify: all assertable checks passed\n"
                       : "verify: FAILURES recorded\n");
  return all_ok ? exit_ok : exit_numerical;
}

struct SimulateArgs {
  double hurst = 0.5;
  int lmax = 128;
  std::uint64_t seed = 0;
  std::string grid;
  std::string points_file;
  int samples = 1;
  double tol = 1e-10;
  std::string out;
  std::string cache;
};

int run_simulate(const SimulateArgs& a) {
  const sfbm::HurstIndex H(a.hurst);
  if (a.samples < 1) throw sfbm::usage_error("--samples must be >= 1");
  if (a.grid.empty() == a.points_file.empty())
    throw sfbm::usage_error("exactly one of --grid or --points is required");

  std::vector<sfbm::SpherePoint> pts;
  if (!a.grid.empty()) {
    const std::string prefix = "fibonacci:";
    if (a.grid.rfind(prefix, 0) != 0)
      throw sfbm::usage_error("--grid must be of the form fibonacci:<n>");
    const long n = std::stol(a.grid.substr(prefix.size()));
    if (n < 1) throw sfbm::usage_error("--grid point count must be >= 1");
    pts = sfbm::fibonacci_grid(static_cast<std::size_t>(n));
  } else {
    if (!fs::exists(a.points_file))
      throw sfbm::usage_error("points file does not exist: " + a.points_file);
    pts = sfbm::read_points_csv(a.points_file);
    if (pts.empty()) throw sfbm::usage_error("points file contains no points");
  }

  const fs::path outdir = a.out.empty() ? default_outdir() / "simulation" : fs::path(a.out);
  fs::create_directories(outdir);

  sfbm::PowerSpectrum spectrum = [&] {
    if (!a.cache.empty()) {
      sfbm::PowerSpectrum s = sfbm::read_spectrum_cache(a.cache);
      if (s.H.value() != a.hurst)
        throw sfbm::usage_error("cached spectrum H does not match --hurst");
      if (s.L < a.lmax) throw sfbm::usage_error("cached spectrum is shorter than --lmax");
      if (s.method != sfbm::SpectrumMethod::quadrature)
        throw sfbm::usage_error("simulation requires a quadrature-method spectrum");
      return s;
    }
    return sfbm::build_spectrum(H, a.lmax, a.tol);
  }();

  std::vector<std::string> artifacts;
  const sfbm::RandomStream base{a.seed, 0};
  std::vector<double> values(pts.size());
  for (int k = 0; k < a.samples; ++k) {
    const sfbm::KLRealization real =
        sfbm::draw_coefficients(H, a.lmax, spectrum, base.child(k));
    for (std::size_t i = 0; i < pts.size(); ++i) values[i] = real.evaluate(pts[i]);
    char name[64];
    std::snprintf(name, sizeof name, "realization_%05d.csv", k);
    const fs::path file = outdir / name;
    sfbm::write_realization_csv(file, pts, values);
    artifacts.push_back(file.string());
  }

  sfbm::RunManifest m;
  m.command = "simulate";
  m.parameters = {{"hurst", a.hurst},
                  {"lmax", a.lmax},
                  {"seed", a.seed},
                  {"grid", a.grid},
                  {"points", a.points_file},
                  {"samples", a.samples},
                  {"tol", a.tol},
                  {"spectrum_file", a.cache.empty() ? std::string("(built)") : a.cache},
                  {"out", outdir.string()}};
  m.seed = a.seed;
  m.artifacts = artifacts;
  sfbm::write_manifest(outdir / "manifest.json", m);
  std::cout << "simulate: wrote " << a.samples << " realization(s) to " << outdir.string()
            << "\n";
  return exit_ok;
}

struct SlndArgs {
  double hurst = 0.5;
  int trials = 200;
  int nmax = 6;
  double eps_min = 0.01;
  double eps_max = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_slnd(const SlndArgs& a) {
  const sfbm::HurstIndex H(a.hurst);
  if (a.trials < 1) throw sfbm::usage_error("--trials must be >= 1");
  if (!(a.eps_min > 0.0)) throw sfbm::usage_error("--eps-min must be > 0");
  if (!(a.eps_max >= a.eps_min)) throw sfbm::usage_error("--eps-max must be >= --eps-min");

  const fs::path outdir = a.out.empty() ? default_outdir() / "slnd" : fs::path(a.out);
  fs::create_directories(outdir);

  const sfbm::K2Estimate est = sfbm::estimate_K2(H, a.trials, a.nmax, a.eps_min, a.eps_max,
                                                 sfbm::RandomStream{a.seed, 1});
  sfbm::write_experiment_json(outdir / "experiment.json", H, a.trials, a.nmax, a.eps_min,
                              a.eps_max, est, a.seed);
  sfbm::write_trials_csv(outdir / "trials.csv", est.trials);

  sfbm::RunManifest m;
  m.command = "slnd";
  m.parameters = {{"hurst", a.hurst},   {"trials", a.trials},   {"nmax", a.nmax},
                  {"eps_min", a.eps_min}, {"eps_max", a.eps_max}, {"seed", a.seed},
                  {"out", outdir.string()}};
  m.seed = a.seed;
  m.artifacts = {(outdir / "experiment.json").string(), (outdir / "trials.csv").string()};
  sfbm::write_manifest(outdir / "manifest.json", m);

  bool all_positive = true;
  for (const auto& t : est.trials)
    if (t.degenerate || !(t.ratio > 0.0)) all_positive = false;
  std::cout << "slnd: min_ratio=" << est.min_ratio << " p5=" << est.p5 << " over " << a.trials
            << " trials\n";
  if (!all_positive) {
    std::cerr << "slnd: nonpositive conditional-variance ratio encountered\n";
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherical fractional Brownian motion: spectra, simulation, verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sfbm::tool_version));

  SpectrumArgs sa;
  auto* sp = app.add_subcommand("spectrum", "compute and cache an angular power spectrum");
  sp->add_option("--hurst", sa.hurst, "Hurst index in (0, 1/2]")->required();
  sp->add_option("--lmax", sa.lmax, "truncation degree")->check(CLI::Range(1, 4096));
  sp->add_option("--tol", sa.tol, "per-degree error tolerance");
  sp->add_option("--method", sa.method, "quadrature | mehler | closed-form");
  sp->add_option("--out", sa.out, "output cache path (.json; a .csv sits next to it)");

  VerifyArgs va;
  auto* vp = app.add_subcommand("verify", "run verification suites and write a JSON report");
  vp->add_option("--suite", va.suite, "harmonics | spectrum | field | slnd | all");
  vp->add_option("--hurst-set", va.hurst_set, "comma-separated Hurst indices");
  vp->add_option("--lmax", va.lmax, "spectrum truncation used by the suites");
  vp->add_option("--tol", va.tol, "spectrum build tolerance");
  vp->add_option("--report", va.report, "report path");
  vp->add_option("--cache", va.cache, "optional spectrum cache to reuse");

  SimulateArgs ma;
  auto* mp = app.add_subcommand("simulate", "draw field realizations on a point set");
  mp->add_option("--hurst", ma.hurst, "Hurst index in (0, 1/2]")->required();
  mp->add_option("--lmax", ma.lmax, "truncation degree");
  mp->add_option("--seed", ma.seed, "random seed");
  mp->add_option("--grid", ma.grid, "fibonacci:<n>");
  mp->add_option("--points", ma.points_file, "CSV with header theta,phi (radians)");
  mp->add_option("--samples", ma.samples, "number of realizations");
  mp->add_option("--tol", ma.tol, "spectrum build tolerance");
  mp->add_option("--cache", ma.cache, "optional spectrum cache to reuse");
  mp->add_option("--out", ma.out, "output directory");

  SlndArgs la;
  auto* lp = app.add_subcommand("slnd", "conditional-variance ratio experiment");
  lp->add_option("--hurst", la.hurst, "Hurst index in (0, 1/2]")->required();
  lp->add_option("--trials", la.trials, "number of sampled configurations");
  lp->add_option("--nmax", la.nmax, "max conditioning points per configuration");
  lp->add_option("--eps-min", la.eps_min, "smallest separation scale");
  lp->add_option("--eps-max", la.eps_max, "largest separation scale");
  lp->add_option("--seed", la.seed, "random seed");
  lp->add_option("--out", la.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (sp->parsed()) return run_spectrum(sa);
    if (vp->parsed()) return run_verify(va);
    if (mp->parsed()) return run_simulate(ma);
    if (lp->parsed()) return run_slnd(la);
    std::cerr << "no subcommand given\n";
    return exit_usage;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return exit_usage;
  } catch (const sfbm::usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const sfbm::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_usage;
  } catch (const sfbm::integrity_error& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const sfbm::convergence_error& e) {
    std::cerr << "convergence failure: " << e.what() << " (best estimate " << e.best_value()
              << ", err " << e.err_estimate() << ")\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}
