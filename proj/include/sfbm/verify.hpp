#ifndef SFBM_VERIFY_HPP
#define SFBM_VERIFY_HPP

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfbm/field.hpp"
#include "sfbm/harmonics.hpp"
#include "sfbm/numerics.hpp"
#include "sfbm/slnd.hpp"
#include "sfbm/spectrum.hpp"
#include "sfbm/sphere.hpp"

namespace sfbm {

/// One measured property. Report-only diagnostics (assertable = false) are
/// recorded but never fail a run.
struct CheckResult {
  std::string name;
  bool assertable = true;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (c.assertable && !c.passed) return false;
    return true;
  }
};

namespace detail {
inline CheckResult check_leq(std::string name, double measured, double tolerance,
                             std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tolerance;
  c.passed = measured <= tolerance;
  c.detail = std::move(detail);
  return c;
}
inline CheckResult report_only(std::string name, double measured, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.assertable = false;
  c.passed = true;
  c.measured = measured;
  c.detail = std::move(detail);
  return c;
}
}  // namespace detail

inline nlohmann::json suite_report_to_json(const SuiteReport& r) {
  nlohmann::json j;
  j["suite"] = r.suite;
  j["passed"] = r.ok();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"assertable", c.assertable},
                           {"passed", c.passed},
                           {"measured", c.measured},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Harmonics suite
// ---------------------------------------------------------------------------

inline SuiteReport verify_harmonics() {
  SuiteReport rep;
  rep.suite = "harmonics";

  rep.checks.push_back(
      detail::check_leq("orthonormality_defect_lmax16", orthonormality_defect(16, 32, 64), 1e-10));
  rep.checks.push_back(
      detail::check_leq("orthonormality_defect_lmax32", orthonormality_defect(32, 64, 128), 1e-9));

  {  // addition theorem against the Legendre route
    double worst = 0.0;
    const auto pairs_a = sample_uniform(RandomStream{11, 1}, 25);
    const auto pairs_b = sample_uniform(RandomStream{11, 2}, 25);
    for (int l : {1, 8, 64, 128}) {
      for (std::size_t i = 0; i < pairs_a.size(); ++i) {
        const std::complex<double> s = addition_sum(l, pairs_a[i], pairs_b[i]);
        const double expected = (2.0 * l + 1.0) / (4.0 * pi) *
                                legendre_p(l, std::cos(geodesic_distance(pairs_a[i], pairs_b[i])));
        worst = std::max(worst, std::abs(s - expected));
        worst = std::max(worst, std::abs(s.imag()));
      }
    }
    rep.checks.push_back(detail::check_leq("addition_theorem", worst, 1e-10));
  }

  {  // conjugation symmetry of produced bands
    double worst = 0.0;
    for (const auto& p : sample_uniform(RandomStream{11, 3}, 10)) {
      for (int l : {1, 4, 17, 32}) {
        const HarmonicBand b = band_at(l, p);
        for (int m = 1; m <= l; ++m) {
          const std::complex<double> expect =
              (m % 2 == 0) ? std::conj(b.at(m)) : -std::conj(b.at(m));
          worst = std::max(worst, std::abs(b.at(-m) - expect));
        }
      }
    }
    rep.checks.push_back(detail::check_leq("conjugation_symmetry", worst, 1e-12));
  }

  {  // low-degree closed forms and the |P_l| <= 1 bound
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double x = -1.0 + 0.05 * i;
      worst = std::max(worst, std::abs(legendre_p(0, x) - 1.0));
      worst = std::max(worst, std::abs(legendre_p(1, x) - x));
      worst = std::max(worst, std::abs(legendre_p(2, x) - 0.5 * (3.0 * x * x - 1.0)));
      worst = std::max(worst, std::abs(legendre_p(3, x) - 0.5 * (5.0 * x * x * x - 3.0 * x)));
    }
    rep.checks.push_back(detail::check_leq("legendre_closed_forms", worst, 1e-14));

    double excess = 0.0;
    for (int l : {5, 32, 128, 512})
      for (int i = 0; i <= 100; ++i)
        excess = std::max(excess, std::abs(legendre_p(l, -1.0 + 0.02 * i)) - 1.0);
    rep.checks.push_back(detail::check_leq("legendre_unit_bound", excess, 1e-13));
  }

  return rep;
}

// ---------------------------------------------------------------------------
// Spectrum suite
// ---------------------------------------------------------------------------

inline std::string format_hurst_value(double h) {
  std::string s = std::to_string(h);
  while (s.size() > 3 && s.back() == '0') s.pop_back();
  return s;
}

/// Per-degree comparison of the closed form against the Mehler and defining
/// quadrature values. Generated and recorded; agreement is never asserted.
/// At H = 1/2 the closed form vanishes identically while the integrals do
/// not, and that discrepancy is part of the record.
struct DiscrepancyRow {
  double hurst = 0.0;
  int l = 0;
  double closed_form = 0.0;
  double mehler = 0.0;
  double quadrature = 0.0;
};

inline std::vector<DiscrepancyRow> closed_form_discrepancy_report(const PowerSpectrum& quad,
                                                                  int lmax) {
  if (lmax > quad.L) throw usage_error("closed_form_discrepancy_report: lmax exceeds spectrum");
  std::vector<DiscrepancyRow> rows;
  rows.reserve(lmax);
  for (int l = 1; l <= lmax; ++l) {
    DiscrepancyRow r;
    r.hurst = quad.H.value();
    r.l = l;
    r.closed_form = dl_closed_form(l, quad.H);
    r.mehler = dl_mehler(l, quad.H, 1e-10);
    r.quadrature = quad.values[l];
    rows.push_back(r);
  }
  return rows;
}

inline SuiteReport verify_spectrum(const std::vector<PowerSpectrum>& spectra) {
  SuiteReport rep;
  rep.suite = "spectrum";
  for (const auto& s : spectra) {
    const std::string tag = "_H=" + format_hurst_value(s.H.value());
    const HurstIndex H = s.H;

    {  // sign pattern of the defining integral: strictly negative below the
       // boundary; at H = 1/2 the even degrees are exact zeros (noise scale)
      double bad = (s.values[0] > 0.0) ? 0.0 : 1.0;
      const bool boundary = s.H.value() == 0.5;
      const double noise = std::max(1e-12, 8.0 * s.max_err_estimate);
      for (int l = 1; l <= s.L; ++l) {
        if (boundary && l % 2 == 0) {
          if (std::abs(s.values[l]) > noise) bad += 1.0;
        } else if (!(s.values[l] < 0.0)) {
          bad += 1.0;
        }
      }
      rep.checks.push_back(detail::check_leq("sign_pattern" + tag, bad, 0.0));
    }

    {  // decay flatness over [16, min(512, L)]
      const auto d = decay_check(s, 16, std::min(512, s.L));
      rep.checks.push_back(
          detail::check_leq("decay_spread" + tag, d.max_ratio / d.min_ratio, 2.0));
      rep.checks.push_back(detail::check_leq("decay_top_octave_drift" + tag,
                                             d.top_octave_drift, 0.05));
    }

    {  // contour route reproduces the oscillatory integral
      double worst = 0.0;
      for (int l = 0; l <= 16; ++l) {
        const double ci = contour_imag(l, H, 64 * (l + 1));
        const double osc = oscillatory_integral(l, H, 1e-10);
        worst = std::max(worst, std::abs(ci - osc));
      }
      rep.checks.push_back(detail::check_leq("contour_identity" + tag, worst, 1e-6));
    }

    {  // inner Beta reduction
      double worst = 0.0;
      for (double phi : {0.1, 0.5, 1.0, 2.0, 3.0, pi})
        worst = std::max(worst,
                         std::abs(inner_integral(phi, H) - inner_integral_closed_form(phi, H)));
      rep.checks.push_back(detail::check_leq("inner_integral_identity" + tag, worst, 1e-9));
    }

    rep.checks.push_back(
        detail::check_leq("dtilde0_bound" + tag, std::abs(dl_mehler(0, H, 1e-10)), 8.0));

    {  // batch builder vs per-degree adaptive quadrature
      double worst = 0.0;
      for (int l : {0, 1, 7, 33}) {
        if (l > s.L) continue;
        worst = std::max(worst, std::abs(s.values[l] - dl_quadrature(l, H, 1e-11)));
      }
      rep.checks.push_back(detail::check_leq("batch_vs_adaptive" + tag, worst, 1e-9));
    }

    {  // bracketing record (diagnostic: magnitude reading expected, sign reading not)
      int magnitude_failures = 0, signed_failures = 0;
      for (int l = 0; l <= std::min(16, s.L); ++l) {
        const SandwichReport sw = sandwich_report(l, H);
        if (!sw.magnitude_ok) ++magnitude_failures;
        if (!sw.signed_ok) ++signed_failures;
      }
      rep.checks.push_back(detail::report_only(
          "sandwich_magnitude_failures" + tag, magnitude_failures,
          "signed-reading failures (recorded, not asserted): " + std::to_string(signed_failures)));
    }

    {  // closed form vs integrals: recorded only
      const auto rows = closed_form_discrepancy_report(s, std::min(32, s.L));
      double worst_rel = 0.0;
      for (const auto& r : rows)
        worst_rel = std::max(worst_rel, std::abs(r.closed_form - std::abs(r.mehler)) /
                                            std::abs(r.mehler));
      rep.checks.push_back(detail::report_only(
          "closed_form_vs_mehler_rel_discrepancy" + tag, worst_rel,
          "closed form is nonnegative and vanishes at H=1/2; recorded, not asserted"));
    }

    {  // asymptotic constant of the closed form against its own limit
      const double c = asymptotic_constant(H);
      if (c > 0.0) {
        const double at512 = dl_closed_form(512, H) * std::pow(512.0, H.two_h() + 2.0);
        rep.checks.push_back(
            detail::check_leq("closed_form_asymptotic" + tag, std::abs(at512 / c - 1.0), 0.01));
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Field suite
// ---------------------------------------------------------------------------

struct FieldSuiteOptions {
  int mc_realizations = 20000;
  int mc_truncation = 128;
  double mc_hurst = 0.25;
  int psd_sets = 50;
  int psd_max_points = 40;
};

inline SuiteReport verify_field(const std::vector<PowerSpectrum>& spectra,
                                FieldSuiteOptions opt = {}) {
  SuiteReport rep;
  rep.suite = "field";

  {  // polarization: variogram from covariances
    double worst = 0.0;
    const auto xs = sample_uniform(RandomStream{21, 1}, 50);
    const auto ys = sample_uniform(RandomStream{21, 2}, 50);
    for (const auto& s : spectra) {
      const HurstIndex H = s.H;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lhs = variogram(xs[i], ys[i], H);
        const double rhs = covariance(xs[i], xs[i], H) + covariance(ys[i], ys[i], H) -
                           2.0 * covariance(xs[i], ys[i], H);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    rep.checks.push_back(detail::check_leq("polarization_identity", worst, 1e-12));
  }

  {  // covariance matrices stay PSD up to roundoff
    double worst = 0.0;  // most negative eigenvalue relative to max diagonal
    RandomStream base{22, 0};
    for (const auto& s : spectra) {
      for (int k = 0; k < opt.psd_sets; ++k) {
        Rng rng(base.child(k));
        const int n = 2 + static_cast<int>(rng.next_unit() * (opt.psd_max_points - 2));
        const auto pts = sample_uniform(base.child(1000 + k), n);
        const SymMatrix cov = covariance_matrix(pts, s.H);
        const auto eig = symmetric_eigenvalues(cov);
        worst = std::max(worst, -eig.front() / cov.max_diag());
      }
    }
    rep.checks.push_back(detail::check_leq("psd_min_eigenvalue", worst, 1e-8));
  }

  // Monte Carlo law at the standard configuration
  {
    const PowerSpectrum* chosen = nullptr;
    for (const auto& s : spectra)
      if (s.H.value() == opt.mc_hurst && s.L >= opt.mc_truncation) chosen = &s;
    if (chosen != nullptr) {
      const HurstIndex H = chosen->H;
      const int L = opt.mc_truncation;
      const int R = opt.mc_realizations;
      std::vector<std::pair<SpherePoint, SpherePoint>> pairs = {
          {from_angles(0.4, 0.3), from_angles(0.9, 0.3)},
          {from_angles(1.2, 1.0), from_angles(1.2, 2.2)},
          {from_angles(0.7, 5.1), from_angles(2.3, 5.1)},
          {from_angles(1.5707963267948966, 0.0), from_angles(1.5707963267948966, 3.0)},
          {from_angles(2.8, 0.2), from_angles(0.3, 3.3)}};
      std::vector<double> sq_sum(pairs.size(), 0.0);
      std::vector<double> mean_sum(2 * pairs.size(), 0.0);
      double worst_north = 0.0;
      RandomStream base{23, 0};
      for (int r = 0; r < R; ++r) {
        const KLRealization real = draw_coefficients(H, L, *chosen, base.child(r));
        worst_north = std::max(worst_north, std::abs(real.evaluate(north())));
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          const double va = real.evaluate(pairs[p].first);
          const double vb = real.evaluate(pairs[p].second);
          sq_sum[p] += (va - vb) * (va - vb);
          mean_sum[2 * p] += va;
          mean_sum[2 * p + 1] += vb;
        }
      }
      double worst_se = 0.0;
      double worst_mean_se = 0.0;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double target =
            variogram_truncated(geodesic_distance(pairs[p].first, pairs[p].second), *chosen, L);
        const double est = sq_sum[p] / R;
        const double se = target * std::sqrt(2.0 / R);  // Var of a chi^2_1 sample mean
        worst_se = std::max(worst_se, std::abs(est - target) / se);
        const double var_a =
            variogram_truncated(geodesic_distance(pairs[p].first, north()), *chosen, L);
        const double var_b =
            variogram_truncated(geodesic_distance(pairs[p].second, north()), *chosen, L);
        worst_mean_se = std::max(
            worst_mean_se, std::abs(mean_sum[2 * p] / R) / std::sqrt(var_a / R));
        worst_mean_se = std::max(
            worst_mean_se, std::abs(mean_sum[2 * p + 1] / R) / std::sqrt(var_b / R));
      }
      rep.checks.push_back(detail::check_leq("monte_carlo_variogram_se", worst_se, 4.0));
      rep.checks.push_back(detail::check_leq("monte_carlo_mean_se", worst_mean_se, 4.0));
      rep.checks.push_back(detail::check_leq("north_pinning", worst_north, 1e-10));
    }
  }

  {  // truncation error decays at the variogram rate
    double worst_factor = 0.0;
    for (const auto& s : spectra) {
      if (s.L < 512) continue;
      const double expect = std::pow(2.0, -s.H.two_h());
      for (int L : {128, 256}) {
        const double e1 = std::abs(std::pow(1.0, s.H.two_h()) - variogram_truncated(1.0, s, L));
        const double e2 =
            std::abs(std::pow(1.0, s.H.two_h()) - variogram_truncated(1.0, s, 2 * L));
        const double f = (e2 / e1) / expect;
        worst_factor = std::max(worst_factor, std::max(f, 1.0 / f));
      }
    }
    rep.checks.push_back(detail::check_leq("variogram_tail_rate_factor", worst_factor, 1.5));
  }

  return rep;
}

// ---------------------------------------------------------------------------
// SLND suite
// ---------------------------------------------------------------------------

struct SlndSuiteOptions {
  int trials = 200;
  int n_max = 6;
  double eps_min = 0.01;
  double eps_max = 1.0;
  std::uint64_t seed = 424242;
};

inline SuiteReport verify_slnd(const std::vector<PowerSpectrum>& spectra,
                               SlndSuiteOptions opt = {}) {
  SuiteReport rep;
  rep.suite = "slnd";

  for (const auto& s : spectra) {
    const HurstIndex H = s.H;
    const std::string tag = "_H=" + format_hurst_value(s.H.value());

    {  // positivity over the standard experiment
      const K2Estimate est =
          estimate_K2(H, opt.trials, opt.n_max, opt.eps_min, opt.eps_max,
                      RandomStream{opt.seed, 7});
      double min_ratio = est.min_ratio;
      for (const auto& t : est.trials)
        if (t.degenerate) min_ratio = 0.0;
      CheckResult c;
      c.name = "ratio_positivity" + tag;
      c.measured = min_ratio;
      c.tolerance = 0.0;
      c.passed = min_ratio > 0.0;
      c.detail = "empirical minimum of cv / eps^{2H}; must stay strictly positive";
      rep.checks.push_back(c);
    }

    {  // conditioning can only shrink the variance, and never past zero
      double worst_growth = 0.0, worst_upper = 0.0;
      RandomStream base{31, 5};
      for (int k = 0; k < 25; ++k) {
        const auto pts = sample_uniform(base.child(k), 6);
        Configuration c;
        c.target = pts[0];
        double prev = conditional_variance_exact(c, H).conditional_variance;
        const double unconditional = prev;
        for (std::size_t j = 1; j < pts.size(); ++j) {
          c.points.push_back(pts[j]);
          const double cv = conditional_variance_exact(c, H).conditional_variance;
          worst_growth = std::max(worst_growth, cv - prev);
          worst_upper = std::max(worst_upper, cv - unconditional);
          prev = cv;
        }
      }
      rep.checks.push_back(detail::check_leq("monotonicity" + tag, worst_growth, 1e-9));
      rep.checks.push_back(detail::check_leq("upper_bound" + tag, worst_upper, 1e-10));
    }

    if ((s.H.value() == 0.25 || s.H.value() == 0.5) && s.L >= 512) {
      // truncated quadratic form agrees with the exact conditional variance
      // at moderate separations
      double worst_rel = 0.0;
      RandomStream base{32, 9};
      int used = 0;
      for (int k = 0; used < 20 && k < 200; ++k) {
        Rng rng(base.child(k));
        const int n = 1 + static_cast<int>(rng.next_unit() * 4.0);
        Configuration c;
        c.target = sample_uniform(base.child(1000 + k), 1)[0];
        for (const auto& p : sample_uniform(base.child(2000 + k), n)) c.points.push_back(p);
        if (config_epsilon(c) < 0.2) continue;
        ++used;
        const double exact = conditional_variance_exact(c, H).conditional_variance;
        const double trunc = conditional_variance_truncated(c, s, 512).conditional_variance;
        worst_rel = std::max(worst_rel, std::abs(trunc - exact) / exact);
      }
      rep.checks.push_back(detail::check_leq("truncated_consistency" + tag, worst_rel, 0.10));
    }

    {  // duplicate conditioning points change nothing
      double worst = 0.0;
      RandomStream base{33, 2};
      for (int k = 0; k < 10; ++k) {
        const auto pts = sample_uniform(base.child(k), 4);
        Configuration c;
        c.target = pts[0];
        c.points = {pts[1], pts[2], pts[3]};
        const double cv = conditional_variance_exact(c, H).conditional_variance;
        c.points.push_back(pts[2]);  // exact duplicate
        const double cv_dup = conditional_variance_exact(c, H).conditional_variance;
        worst = std::max(worst, std::abs(cv - cv_dup));
      }
      rep.checks.push_back(detail::check_leq("duplicate_invariance" + tag, worst, 1e-9));
    }
  }
  return rep;
}

}  // namespace sfbm

#endif  // SFBM_VERIFY_HPP
