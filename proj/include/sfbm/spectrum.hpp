#ifndef SFBM_SPECTRUM_HPP
#define SFBM_SPECTRUM_HPP

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "sfbm/harmonics.hpp"
#include "sfbm/numerics.hpp"

namespace sfbm {

/// Hurst index of the field. The process only exists for 0 < H <= 1/2,
/// so the constructor rejects anything else.
class HurstIndex {
 public:
  explicit HurstIndex(double h) : h_(h) {
    if (!(h > 0.0 && h <= 0.5))
      throw std::domain_error("HurstIndex: existence requires H in (0, 1/2]");
  }
  double value() const { return h_; }
  double two_h() const { return 2.0 * h_; }
  bool operator==(const HurstIndex& o) const { return h_ == o.h_; }

 private:
  double h_;
};

enum class SpectrumMethod { quadrature, mehler, closed_form };

inline std::string to_string(SpectrumMethod m) {
  switch (m) {
    case SpectrumMethod::quadrature: return "quadrature";
    case SpectrumMethod::mehler: return "mehler";
    case SpectrumMethod::closed_form: return "closed_form";
  }
  return "quadrature";
}

inline SpectrumMethod spectrum_method_from_string(const std::string& s) {
  if (s == "quadrature") return SpectrumMethod::quadrature;
  if (s == "mehler") return SpectrumMethod::mehler;
  if (s == "closed_form" || s == "closed-form") return SpectrumMethod::closed_form;
  throw usage_error("unknown spectrum method: " + s);
}

/// Signed angular power spectrum d_0..d_L. The defining integral is
/// positive at l = 0 and nonpositive for l >= 1; at the boundary H = 1/2
/// the even degrees vanish exactly, everywhere else they are strictly
/// negative. Synthesis and conditional variances consume the magnitudes
/// pi*|d_l| as modal variances.
struct PowerSpectrum {
  HurstIndex H;
  int L = 0;
  std::vector<double> values;
  SpectrumMethod method = SpectrumMethod::quadrature;
  double tol = 0.0;
  double max_err_estimate = 0.0;

  double magnitude(int l) const { return std::abs(values[static_cast<std::size_t>(l)]); }
};

// ---------------------------------------------------------------------------
// Per-degree integrals
// ---------------------------------------------------------------------------

/// d_l = integral_0^pi theta^{2H} P_l(cos theta) sin theta dtheta, by
/// adaptive quadrature seeded with at least 4(l+1) panels so every
/// oscillation of P_l is resolved before refinement starts.
inline double dl_quadrature(int l, HurstIndex H, double tol) {
  if (l < 0) throw std::domain_error("dl_quadrature: degree must be nonnegative");
  if (!(tol >= 1e-13)) throw std::domain_error("dl_quadrature: tol must be >= 1e-13");
  const double p = H.two_h();
  auto f = [l, p](double theta) {
    return std::pow(theta, p) * legendre_p(l, std::cos(theta)) * std::sin(theta);
  };
  const auto r = integrate_adaptive(f, 0.0, pi, tol, 48, 4 * (l + 1));
  return r.value;
}

/// integral_0^pi sin((l+1/2) phi) (sin(phi/2))^{2H+1} dphi.
inline double oscillatory_integral(int l, HurstIndex H, double tol) {
  if (l < 0) throw std::domain_error("oscillatory_integral: degree must be nonnegative");
  if (!(tol >= 1e-13)) throw std::domain_error("oscillatory_integral: tol must be >= 1e-13");
  const double a = l + 0.5;
  const double q = H.two_h() + 1.0;
  auto f = [a, q](double phi) { return std::sin(a * phi) * std::pow(std::sin(0.5 * phi), q); };
  const auto r = integrate_adaptive(f, 0.0, pi, tol, 48, 4 * (l + 1));
  return r.value;
}

/// Closed form of the inner reduction:
/// integral_0^phi (sin(theta/2))^{2H} sin theta / sqrt(cos theta - cos phi)
/// equals sqrt(2) B(H+1, 1/2) (sin(phi/2))^{2H+1}.
inline double inner_integral_closed_form(double phi, HurstIndex H) {
  if (!(phi > 0.0 && phi <= pi)) throw std::domain_error("inner_integral: phi must be in (0, pi]");
  return std::sqrt(2.0) * beta(H.value() + 1.0, 0.5) *
         std::pow(std::sin(0.5 * phi), H.two_h() + 1.0);
}

/// Numerical value of that inner integral, via u = sin(theta/2), which turns
/// it into 2^{3/2} integral_0^s u^{2H+1} / sqrt(s^2 - u^2) du with
/// s = sin(phi/2). The endpoint mass is split off exactly:
///   integral = integral (u^{2H+1} - s^{2H+1}) / sqrt(s^2-u^2) du
///            + s^{2H+1} * pi/2,
/// leaving a Holder-continuous remainder the adaptive rule handles cleanly.
inline double inner_integral(double phi, HurstIndex H) {
  if (!(phi > 0.0 && phi <= pi)) throw std::domain_error("inner_integral: phi must be in (0, pi]");
  const double s = std::sin(0.5 * phi);
  const double q = H.two_h() + 1.0;
  const double sq = std::pow(s, q);
  auto f = [s, q, sq](double u) {
    const double denom = std::sqrt((s - u) * (s + u));
    return (std::pow(u, q) - sq) / denom;
  };
  const auto r = integrate_adaptive(f, 0.0, s, 1e-12 * std::max(1.0, sq), 44, 8);
  return std::pow(2.0, 1.5) * (r.value + sq * 0.5 * pi);
}

/// Dirichlet-Mehler route: d~_l = (2^{2H+1}/pi) B(H+1, 1/2) I_l with I_l the
/// oscillatory integral above.
inline double dl_mehler(int l, HurstIndex H, double tol) {
  const double prefactor = std::pow(2.0, H.two_h() + 1.0) / pi * beta(H.value() + 1.0, 0.5);
  return prefactor * oscillatory_integral(l, H, std::max(1e-13, tol / prefactor));
}

/// Beta-function closed form (2/pi) B(H+1,1/2) B(2H+2, l-H+1/2) sin((H+1/2)pi)
/// for l >= 1. It is nonnegative and vanishes identically at H = 1/2, where
/// the defining integrals do not; it is compared and reported, never used as
/// an oracle. The l = 0 coefficient is handled by direct quadrature instead.
inline double dl_closed_form(int l, HurstIndex H) {
  if (l < 1) throw usage_error("dl_closed_form: only defined for l >= 1");
  const double h = H.value();
  return (2.0 / pi) * beta(h + 1.0, 0.5) * beta(2.0 * h + 2.0, l - h + 0.5) *
         std::sin((h + 0.5) * pi);
}

/// (2/pi) B(H+1,1/2) Gamma(2H+2) sin((H+1/2)pi): the large-l limit of
/// d~_l * l^{2H+2} implied by Stirling's approximation.
inline double asymptotic_constant(HurstIndex H) {
  const double h = H.value();
  return (2.0 / pi) * beta(h + 1.0, 0.5) * std::exp(log_gamma(2.0 * h + 2.0)) *
         std::sin((h + 0.5) * pi);
}

/// Contour route for the oscillatory integral: integrates the principal
/// branch of f_l(z) = z^{2l} (z - 1/z)^{2H+1} / (2^{2H} i^{2H+1}) over the
/// first-quadrant unit arc z = e^{it}, t in [0, pi/2], by composite 15-point
/// Gauss panels, and projects onto the component that the substitution
/// phi = 2t maps back to the sine integral. The projection is -Re of the
/// contour integral: on the arc, f_l dz = i e^{i(l+1/2)phi} sin(phi/2)^{2H+1} dphi.
/// The argument of (z - 1/z) is monitored along the arc; a jump out of the
/// principal range raises a diagnostic error.
inline double contour_imag(int l, HurstIndex H, int panels) {
  if (l < 0) throw std::domain_error("contour_imag: degree must be nonnegative");
  if (panels < 64 * (l + 1))
    throw config_error("contour_imag: need at least 64*(l+1) panels");
  const double q = H.two_h() + 1.0;
  const std::complex<double> denom =
      std::pow(2.0, H.two_h()) * std::polar(1.0, 0.5 * pi * q);  // 2^{2H} i^{2H+1}
  static const QuadratureRule rule = gauss_legendre(15);

  std::complex<double> total = 0.0;
  double prev_arg = 0.0;
  bool have_prev = false;
  const double width = 0.5 * pi / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = (p + 0.5) * width;
    const double h = 0.5 * width;
    std::complex<double> acc = 0.0;
    for (int j = 0; j < 15; ++j) {
      const double t = c + h * rule.nodes[j];
      const std::complex<double> z = std::polar(1.0, t);
      const std::complex<double> w = z - 1.0 / z;
      if (std::abs(w) > 1e-12) {
        const double arg = std::arg(w);
        if (have_prev && std::abs(arg - prev_arg) > 0.5 * pi)
          throw consistency_error("contour_imag: branch cut crossed on the arc");
        prev_arg = arg;
        have_prev = true;
      }
      const std::complex<double> f = std::polar(1.0, 2.0 * l * t) * std::pow(w, q) / denom;
      acc += rule.weights[j] * f * (std::complex<double>(0.0, 1.0) * z);  // dz = i z dt
    }
    total += acc * h;
  }
  return -total.real();
}

/// Side-by-side record of the defining integral against the Dirichlet-Mehler
/// value, with both readings of the bracketing inequality
/// d~_l <= d_l <= 2^{2H} d~_l. Reported, never asserted: the derivation
/// multiplies a sign-changing integrand, so only the magnitude reading is
/// expected to survive for l >= 1.
struct SandwichReport {
  int l = 0;
  double hurst = 0.0;
  double d_quadrature = 0.0;
  double d_mehler = 0.0;
  double factor = 1.0;  // 2^{2H}
  bool signed_ok = false;
  bool magnitude_ok = false;
};

inline SandwichReport sandwich_report(int l, HurstIndex H) {
  SandwichReport r;
  r.l = l;
  r.hurst = H.value();
  r.d_quadrature = dl_quadrature(l, H, 1e-10);
  r.d_mehler = dl_mehler(l, H, 1e-10);
  r.factor = std::pow(2.0, H.two_h());
  const double slack = 1e-12;
  r.signed_ok = (r.d_mehler <= r.d_quadrature + slack) &&
                (r.d_quadrature <= r.factor * r.d_mehler + slack);
  const double aq = std::abs(r.d_quadrature), am = std::abs(r.d_mehler);
  r.magnitude_ok = (am <= aq + slack) && (aq <= r.factor * am + slack);
  return r;
}

// ---------------------------------------------------------------------------
// Whole-spectrum builder
// ---------------------------------------------------------------------------

namespace detail {

/// All quadrature-method coefficients d_0..d_L in one pass over a shared
/// composite Gauss-Kronrod grid: each node costs a single Legendre sweep
/// that serves every degree at once, instead of L+1 separate adaptive
/// integrations. The panel layout resolves the fastest oscillation (4 panels
/// per wavelength of P_L) and refines dyadically toward theta = 0 where the
/// theta^{2H} factor has unbounded derivatives. The embedded 7-point Gauss
/// result provides a per-degree error estimate.
inline std::vector<double> dl_batch(HurstIndex H, int L, double tol, double& max_err) {
  const double p = H.two_h();
  const int base_panels = std::max(4 * (L + 1), 64);
  const double h0 = pi / base_panels;

  std::vector<double> edges;
  edges.reserve(base_panels + 50);
  // dyadic split of the first panel toward the endpoint
  constexpr int dyadic_levels = 48;
  edges.push_back(0.0);
  for (int k = dyadic_levels; k >= 1; --k) edges.push_back(h0 * std::ldexp(1.0, -k));
  for (int i = 1; i <= base_panels; ++i) edges.push_back(i * h0);

  std::vector<double> resk(static_cast<std::size_t>(L) + 1, 0.0);
  std::vector<double> resg(static_cast<std::size_t>(L) + 1, 0.0);
  std::vector<double> pl(static_cast<std::size_t>(L) + 1, 0.0);

  auto add_node = [&](double theta, double wk_scale, double wg_scale) {
    const double g = std::pow(theta, p) * std::sin(theta);
    legendre_sweep(L, std::cos(theta), pl.data());
    const double wk = wk_scale * g;
    if (wg_scale != 0.0) {
      const double wg = wg_scale * g;
      for (int l = 0; l <= L; ++l) {
        resk[l] += wk * pl[l];
        resg[l] += wg * pl[l];
      }
    } else {
      for (int l = 0; l <= L; ++l) resk[l] += wk * pl[l];
    }
  };
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double c = 0.5 * (edges[e] + edges[e + 1]);
    const double half = 0.5 * (edges[e + 1] - edges[e]);
    for (int k = 0; k < 7; ++k) {
      const double wg_scale = (k % 2 == 1) ? half * gk15_wg[k / 2] : 0.0;
      add_node(c - half * gk15_x[k], half * gk15_wk[k], wg_scale);
      add_node(c + half * gk15_x[k], half * gk15_wk[k], wg_scale);
    }
    add_node(c, half * gk15_wk[7], half * gk15_wg[3]);
  }

  max_err = 0.0;
  for (int l = 0; l <= L; ++l) {
    const double err = std::abs(resk[l] - resg[l]);
    max_err = std::max(max_err, err);
    if (err > tol)
      throw convergence_error("dl_batch: tolerance unreached at degree " + std::to_string(l),
                              resk[l], err);
  }
  return resk;
}

}  // namespace detail

/// Build the full spectrum for one Hurst index. The quadrature method is the
/// defining one; mehler and closed_form exist for cross-validation and share
/// the same container. Deterministic for fixed inputs.
inline PowerSpectrum build_spectrum(HurstIndex H, int L, double tol,
                                    SpectrumMethod method = SpectrumMethod::quadrature) {
  if (L < 1) throw usage_error("build_spectrum: L must be >= 1");
  if (!(tol >= 1e-13)) throw std::domain_error("build_spectrum: tol must be >= 1e-13");
  PowerSpectrum s{H, L, {}, method, tol, 0.0};
  s.values.resize(static_cast<std::size_t>(L) + 1);
  switch (method) {
    case SpectrumMethod::quadrature: {
      s.values = detail::dl_batch(H, L, tol, s.max_err_estimate);
      if (!(s.values[0] > 0.0))
        throw consistency_error("build_spectrum: d_0 must be positive");
      // Positive definiteness forces d_l <= 0 for l >= 1. The inequality is
      // not strict: at H = 1/2 the even-degree coefficients vanish exactly
      // (the integrand is odd about the equator there), so only values
      // positive beyond quadrature noise indicate a genuine inconsistency.
      const double noise = std::max({tol, 8.0 * s.max_err_estimate, 1e-13});
      for (int l = 1; l <= L; ++l)
        if (s.values[l] > noise)
          throw consistency_error("build_spectrum: d_l positive at degree " + std::to_string(l));
      break;
    }
    case SpectrumMethod::mehler: {
      for (int l = 0; l <= L; ++l) s.values[l] = dl_mehler(l, H, tol);
      break;
    }
    case SpectrumMethod::closed_form: {
      s.values[0] = dl_mehler(0, H, tol);
      for (int l = 1; l <= L; ++l) s.values[l] = dl_closed_form(l, H);
      break;
    }
  }
  return s;
}

/// Flatness of |d_l| l^{2H+2} over a degree window: the bracketing constants
/// of the decay law, measured rather than assumed.
struct DecayCheckResult {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double top_octave_drift = 0.0;  // max/min - 1 over [l_max/2, l_max]
};

inline DecayCheckResult decay_check(const PowerSpectrum& s, int l_min, int l_max) {
  if (l_min < 8) throw usage_error("decay_check: l_min must be >= 8");
  if (l_max > s.L || l_min >= l_max) throw usage_error("decay_check: bad degree window");
  const double expo = s.H.two_h() + 2.0;
  DecayCheckResult r;
  r.min_ratio = std::numeric_limits<double>::infinity();
  r.max_ratio = 0.0;
  double oct_min = std::numeric_limits<double>::infinity(), oct_max = 0.0;
  for (int l = l_min; l <= l_max; ++l) {
    const double v = s.magnitude(l) * std::pow(static_cast<double>(l), expo);
    r.min_ratio = std::min(r.min_ratio, v);
    r.max_ratio = std::max(r.max_ratio, v);
    if (2 * l >= l_max) {
      oct_min = std::min(oct_min, v);
      oct_max = std::max(oct_max, v);
    }
  }
  r.top_octave_drift = oct_max / oct_min - 1.0;
  return r;
}

}  // namespace sfbm

#endif  // SFBM_SPECTRUM_HPP
