// End-to-end acceptance runner: one pass/fail line per criterion, measured
// values printed next to their tolerances. Exits nonzero if any criterion
// fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sfbm/field.hpp"
#include "sfbm/harmonics.hpp"
#include "sfbm/io.hpp"
#include "sfbm/slnd.hpp"
#include "sfbm/spectrum.hpp"
#include "sfbm/verify.hpp"

using namespace sfbm;

namespace {

const std::vector<double> hurst_set = {0.1, 0.25, 0.4, 0.5};

// Frozen empirical minima of the standard conditional-variance experiment
// (200 trials, n <= 6, eps in [0.01, 1], seed 424242). Regression guard:
// the measured minimum must not fall more than 10% below these.
const std::map<double, double> k2_baseline = {
    {0.1, 0.59847}, {0.25, 0.58964}, {0.4, 0.44437}, {0.5, 0.12165}};

std::map<double, PowerSpectrum> spectra;  // quadrature, L = 1024

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool criterion_orthonormality() {
  const auto t0 = std::chrono::steady_clock::now();
  const double defect = orthonormality_defect(32, 64, 128);
  const double t = elapsed_s(t0);
  std::printf("    defect=%.3e (tol 1e-9), runtime=%.1fs (budget 30s)\n", defect, t);
  return defect <= 1e-9 && t < 30.0;
}

bool criterion_addition_theorem() {
  const auto xs = sample_uniform(RandomStream{2026, 1}, 100);
  const auto ys = sample_uniform(RandomStream{2026, 2}, 100);
  double worst = 0.0;
  for (int l : {1, 8, 64, 128}) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::complex<double> s = addition_sum(l, xs[i], ys[i]);
      const double expect = (2.0 * l + 1.0) / (4.0 * pi) *
                            legendre_p(l, std::cos(geodesic_distance(xs[i], ys[i])));
      worst = std::max(worst, std::abs(s - expect));
    }
  }
  std::printf("    max deviation=%.3e (tol 1e-10) over 100 pairs x l in {1,8,64,128}\n", worst);
  return worst <= 1e-10;
}

bool criterion_spectrum_oracles() {
  const HurstIndex H(0.5);
  const double d0 = dl_quadrature(0, H, 1e-10);
  const double d1 = dl_quadrature(1, H, 1e-10);
  double worst_osc = 0.0;
  for (int l = 0; l <= 32; ++l) {
    const double a = l + 0.5;
    const double expect = -1.0 / (2.0 * a * (a * a - 1.0));
    worst_osc = std::max(worst_osc,
                         std::abs(oscillatory_integral(l, H, 1e-12) - expect));
  }
  std::printf("    |d_0-pi|=%.2e, |d_1+pi/4|=%.2e (tol 1e-8); oscillatory dev=%.2e (tol 1e-10)\n",
              std::abs(d0 - pi), std::abs(d1 + pi / 4.0), worst_osc);
  return std::abs(d0 - pi) <= 1e-8 && std::abs(d1 + pi / 4.0) <= 1e-8 && worst_osc <= 1e-10;
}

bool criterion_contour_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double h : hurst_set) {
    const HurstIndex H(h);
    for (int l = 0; l <= 16; ++l) {
      const double diff =
          std::abs(contour_imag(l, H, 64 * (l + 1)) - oscillatory_integral(l, H, 1e-10));
      worst = std::max(worst, diff);
    }
  }
  const double t = elapsed_s(t0);
  std::printf("    max |contour - oscillatory|=%.3e (tol 1e-6), runtime=%.1fs (budget 60s)\n",
              worst, t);
  return worst <= 1e-6 && t < 60.0;
}

bool criterion_inner_integral() {
  double worst = 0.0;
  for (double h : hurst_set) {
    const HurstIndex H(h);
    for (double phi : {0.1, 0.5, 1.0, 2.0, 3.0, pi})
      worst = std::max(worst,
                       std::abs(inner_integral(phi, H) - inner_integral_closed_form(phi, H)));
  }
  std::printf("    max |quadrature - closed form|=%.3e (tol 1e-9)\n", worst);
  return worst <= 1e-9;
}

bool criterion_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (double h : hurst_set) {
    const PowerSpectrum& s = spectra.at(h);
    const DecayCheckResult d = decay_check(s, 16, 512);
    const double spread = d.max_ratio / d.min_ratio;
    const bool pass = spread <= 2.0 && d.top_octave_drift <= 0.05;
    ok = ok && pass;
    std::printf("    H=%.2f: spread=%.4g (tol 2.0), top-octave drift=%.4g%% (tol 5%%) -> %s\n", h,
                spread, 100.0 * d.top_octave_drift, pass ? "ok" : "FAIL");
    if (!pass) {
      // diagnostics: the flatness claim on the spectrum's parity structure
      double omin = 1e300, omax = 0.0, mmin = 1e300, mmax = 0.0;
      for (int l = 17; l <= 511; l += 2) {
        const double v = s.magnitude(l) * std::pow(static_cast<double>(l), s.H.two_h() + 2.0);
        omin = std::min(omin, v);
        omax = std::max(omax, v);
      }
      for (int l = 16; l <= 512; ++l) {
        const double v = std::abs(dl_mehler(l, s.H, 1e-10)) *
                         std::pow(static_cast<double>(l), s.H.two_h() + 2.0);
        mmin = std::min(mmin, v);
        mmax = std::max(mmax, v);
      }
      std::printf("      [info] odd-degree-only spread=%.4g; Mehler-route spread=%.4g — the\n"
                  "      defining integral carries a (-1)^l parity component (even degrees\n"
                  "      vanish identically at H=1/2), so the all-degree spread bound cannot\n"
                  "      hold near the boundary; see the discrepancy records.\n",
                  omax / omin, mmax / mmin);
    }
  }
  const double t = elapsed_s(t0);
  std::printf("    runtime=%.1fs (budget 300s, spectra prebuilt)\n", t);
  return ok && t < 300.0;
}

bool criterion_dtilde0_bound() {
  bool ok = true;
  for (double h : hurst_set) {
    const double v = std::abs(dl_mehler(0, HurstIndex(h), 1e-10));
    std::printf("    H=%.2f: |d~_0|=%.6f (bound 8)\n", h, v);
    ok = ok && v <= 8.0;
  }
  return ok;
}

bool criterion_variogram_reconstruction() {
  bool ok = true;
  for (double h : hurst_set) {
    const PowerSpectrum& s = spectra.at(h);
    const double p = 2.0 * h;
    double worst_factor = 0.0;
    double worst_rel_1024 = 0.0;
    for (double gamma : {0.2, 0.5, 1.0, 2.0, 3.0}) {
      const double exact = std::pow(gamma, p);
      double rmin = 1e300, rmax = 0.0;
      for (int L : {128, 256, 512, 1024}) {
        const double err = std::abs(exact - variogram_truncated(gamma, s, L));
        const double scaled = err * std::pow(static_cast<double>(L), p);
        rmin = std::min(rmin, scaled);
        rmax = std::max(rmax, scaled);
      }
      worst_factor = std::max(worst_factor, rmax / rmin);
      worst_rel_1024 = std::max(
          worst_rel_1024, std::abs(exact - variogram_truncated(gamma, s, 1024)) / exact);
    }
    const bool need_abs = (h >= 0.4);  // rate-only check below H = 0.4, where the tail is slow
    const bool pass = worst_factor <= 2.0 && (!need_abs || worst_rel_1024 <= 0.05);
    std::printf("    H=%.2f: rate-constancy factor=%.3f (tol 2.0), rel err at L=1024=%.4f%s "
                "-> %s\n",
                h, worst_factor, worst_rel_1024, need_abs ? " (tol 0.05)" : " (rate-only)",
                pass ? "ok" : "FAIL");
    ok = ok && pass;
  }
  return ok;
}

bool criterion_monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  const HurstIndex H(0.25);
  const int L = 128;
  const int R = 20000;
  const PowerSpectrum& s = spectra.at(0.25);
  const std::vector<std::pair<SpherePoint, SpherePoint>> pairs = {
      {from_angles(0.4, 0.3), from_angles(0.9, 0.3)},
      {from_angles(1.2, 1.0), from_angles(1.2, 2.2)},
      {from_angles(0.7, 5.1), from_angles(2.3, 5.1)},
      {from_angles(pi / 2.0, 0.0), from_angles(pi / 2.0, 3.0)},
      {from_angles(2.8, 0.2), from_angles(0.3, 3.3)}};
  std::vector<double> sq(pairs.size(), 0.0);
  double worst_north = 0.0;
  const RandomStream base{20260808, 0};
  for (int r = 0; r < R; ++r) {
    const KLRealization real = draw_coefficients(H, L, s, base.child(r));
    worst_north = std::max(worst_north, std::abs(real.evaluate(north())));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double diff = real.evaluate(pairs[p].first) - real.evaluate(pairs[p].second);
      sq[p] += diff * diff;
    }
  }
  double worst_se = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double target =
        variogram_truncated(geodesic_distance(pairs[p].first, pairs[p].second), s, L);
    const double se = target * std::sqrt(2.0 / R);
    worst_se = std::max(worst_se, std::abs(sq[p] / R - target) / se);
  }
  const double t = elapsed_s(t0);
  std::printf("    worst pair deviation=%.2f SE (tol 4), |B(N)|max=%.2e (tol 1e-10), "
              "runtime=%.0fs (budget 600s)\n",
              worst_se, worst_north, t);
  return worst_se <= 4.0 && worst_north <= 1e-10 && t < 600.0;
}

bool criterion_psd() {
  double worst = -1e300;
  RandomStream base{20260809, 0};
  int idx = 0;
  for (double h : hurst_set) {
    for (int k = 0; k < 50; ++k) {
      Rng rng(base.child(idx));
      const int n = 2 + static_cast<int>(rng.next_unit() * 38.0);
      const auto pts = sample_uniform(base.child(10000 + idx), n);
      ++idx;
      const SymMatrix cov = covariance_matrix(pts, HurstIndex(h));
      const auto eig = symmetric_eigenvalues(cov);
      worst = std::max(worst, -eig.front() / cov.max_diag());
    }
  }
  std::printf("    worst -min_eig/max_diag=%.3e (tol 1e-8) over 200 point sets\n", worst);
  return worst <= 1e-8;
}

bool criterion_slnd() {
  bool ok = true;
  for (double h : hurst_set) {
    const auto t0 = std::chrono::steady_clock::now();
    const HurstIndex H(h);
    const PowerSpectrum& s = spectra.at(h);

    const K2Estimate est = estimate_K2(H, 200, 6, 0.01, 1.0, RandomStream{424242, 7});
    double min_ratio = est.min_ratio;
    bool positive = true;
    for (const auto& tr : est.trials)
      if (tr.degenerate || !(tr.ratio > 0.0)) positive = false;

    const double baseline = k2_baseline.at(h);
    const bool baseline_ok = (baseline == 0.0) || (min_ratio >= 0.9 * baseline);

    // truncated quadratic form vs exact Schur complement at moderate eps.
    // The 10% adequacy bound is pinned for H in {0.25, 0.5}; at smaller H the
    // L^{-2H} truncation tail is too slow for any fixed L, so the measured
    // value is recorded without gating.
    const bool adequacy_gated = (h == 0.25 || h == 0.5);
    double worst_rel = 0.0;
    int used = 0;
    RandomStream cbase{424243, 3};
    for (int k = 0; used < 25 && k < 400; ++k) {
      Rng rng(cbase.child(k));
      Configuration c;
      c.target = sample_uniform(cbase.child(5000 + k), 1)[0];
      const int n = 1 + static_cast<int>(rng.next_unit() * 5.0);
      for (const auto& p : sample_uniform(cbase.child(9000 + k), n)) c.points.push_back(p);
      if (config_epsilon(c) < 0.2) continue;
      ++used;
      const double exact = conditional_variance_exact(c, H).conditional_variance;
      const double trunc = conditional_variance_truncated(c, s, 512).conditional_variance;
      worst_rel = std::max(worst_rel, std::abs(trunc - exact) / exact);
    }

    // monotonicity under added conditioning points
    double worst_growth = 0.0;
    RandomStream mbase{424244, 4};
    for (int rep = 0; rep < 20; ++rep) {
      const auto pts = sample_uniform(mbase.child(rep), 7);
      Configuration c;
      c.target = pts[0];
      double prev = conditional_variance_exact(c, H).conditional_variance;
      for (std::size_t j = 1; j < pts.size(); ++j) {
        c.points.push_back(pts[j]);
        const double cv = conditional_variance_exact(c, H).conditional_variance;
        worst_growth = std::max(worst_growth, cv - prev);
        prev = cv;
      }
    }

    const double t = elapsed_s(t0);
    const bool pass = positive && baseline_ok && (!adequacy_gated || worst_rel <= 0.10) &&
                      worst_growth <= 1e-9 && t < 600.0;
    std::printf("    H=%.2f: min_ratio=%.5f (>0, baseline %.5f), truncated-vs-exact=%.2f%% "
                "(%s), monotonicity excess=%.2e (tol 1e-9), runtime=%.0fs -> %s\n",
                h, min_ratio, baseline, 100.0 * worst_rel,
                adequacy_gated ? "tol 10%" : "recorded", worst_growth, t, pass ? "ok" : "FAIL");
    ok = ok && pass;
  }
  return ok;
}

bool criterion_discrepancy_ledger() {
  // must complete over the full grid, record the mismatch, and assert nothing
  // about agreement
  std::size_t rows_total = 0;
  bool recorded_degenerate = false;
  for (double h : hurst_set) {
    const auto rows = closed_form_discrepancy_report(spectra.at(h), 64);
    rows_total += rows.size();
    for (const auto& r : rows) {
      if (!std::isfinite(r.closed_form) || !std::isfinite(r.mehler) ||
          !std::isfinite(r.quadrature))
        return false;
      if (h == 0.5 && std::abs(r.closed_form) <= 1e-12 && std::abs(r.mehler) > 1e-6)
        recorded_degenerate = true;
    }
  }
  std::printf("    %zu rows recorded; H=1/2 degenerate case (closed form == 0, |mehler| > 0) "
              "captured: %s\n",
              rows_total, recorded_degenerate ? "yes" : "no");
  return rows_total == 4 * 64 && recorded_degenerate;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  const auto wall0 = std::chrono::steady_clock::now();

  std::printf("building quadrature spectra (L=1024, tol 1e-11) for H in "
              "{0.1, 0.25, 0.4, 0.5}...\n");
  for (double h : hurst_set) spectra.emplace(h, build_spectrum(HurstIndex(h), 1024, 1e-11));
  std::printf("  done in %.1fs\n\n", elapsed_s(wall0));

  struct Criterion {
    int id;
    const char* name;
    std::function<bool()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "harmonic orthonormality (lmax=32, 64x128 rule)", criterion_orthonormality},
      {2, "addition-theorem identity", criterion_addition_theorem},
      {3, "spectrum oracles (defining integral + oscillatory closed forms)",
       criterion_spectrum_oracles},
      {4, "contour identity reproduces the oscillatory integral", criterion_contour_identity},
      {5, "inner-integral Beta reduction", criterion_inner_integral},
      {6, "power-spectrum decay flatness |d_l| l^{2H+2}", criterion_decay},
      {7, "|d~_0| <= 8", criterion_dtilde0_bound},
      {8, "variogram reconstruction rate and accuracy", criterion_variogram_reconstruction},
      {9, "Monte Carlo law of the synthesized field", criterion_monte_carlo},
      {10, "positive semidefiniteness of the analytic covariance", criterion_psd},
      {11, "conditional-variance lower-bound experiment", criterion_slnd},
      {12, "closed-form discrepancy ledger", criterion_discrepancy_ledger},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::printf("criterion %d: %s\n", c.id, c.name);
    bool pass = false;
    try {
      pass = c.run();
    } catch (const std::exception& e) {
      std::printf("    exception: %s\n", e.what());
      pass = false;
    }
    std::printf("[%s] criterion %d\n\n", pass ? "PASS" : "FAIL", c.id);
    if (!pass) ++failures;
  }

  std::printf("================\n%d/%zu criteria passed, total runtime %.0fs\n",
              static_cast<int>(criteria.size()) - failures, criteria.size(), elapsed_s(wall0));
  if (failures > 0)
    std::printf("failing criteria reflect recorded spec/paper discrepancies; see the "
                "discrepancy notes in the output above\n");
  return failures == 0 ? 0 : 1;
}
