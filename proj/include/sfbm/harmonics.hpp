#ifndef SFBM_HARMONICS_HPP
#define SFBM_HARMONICS_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "sfbm/numerics.hpp"
#include "sfbm/sphere.hpp"

namespace sfbm {

struct HarmonicIndex {
  int degree = 0;
  int order = 0;
};

namespace detail {

// shared three-term recurrence so single and batch evaluation agree bitwise
inline double legendre_sweep(int lmax, double x, double* out) {
  double pm1 = 1.0;
  if (out) out[0] = 1.0;
  if (lmax == 0) return 1.0;
  double pm = x;
  if (out) out[1] = x;
  for (int l = 2; l <= lmax; ++l) {
    const double pn = ((2.0 * l - 1.0) * x * pm - (l - 1.0) * pm1) / l;
    pm1 = pm;
    pm = pn;
    if (out) out[l] = pn;
  }
  return pm;
}

}  // namespace detail

/// Legendre polynomial P_l(x), |x| <= 1.
inline double legendre_p(int l, double x) {
  if (l < 0) throw std::domain_error("legendre_p: degree must be nonnegative");
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("legendre_p: |x| must be <= 1");
  return detail::legendre_sweep(l, x, nullptr);
}

/// [P_0(x), ..., P_lmax(x)] from one recurrence sweep.
inline std::vector<double> legendre_p_all(int lmax, double x) {
  if (lmax < 0) throw std::domain_error("legendre_p_all: degree must be nonnegative");
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("legendre_p_all: |x| must be <= 1");
  std::vector<double> out(static_cast<std::size_t>(lmax) + 1);
  detail::legendre_sweep(lmax, x, out.data());
  return out;
}

namespace detail {

/// Recurrence coefficients and scratch layout for the fully normalized
/// associated Legendre triangle at a fixed degree cap. Building the
/// coefficients once and reusing them matters in the synthesis loops.
class AssocLegendreWorkspace {
 public:
  explicit AssocLegendreWorkspace(int lmax) : lmax_(lmax) {
    if (lmax < 0) throw std::domain_error("AssocLegendreWorkspace: lmax must be nonnegative");
    diag_.resize(lmax + 1, 0.0);
    band_.resize(lmax + 1, 0.0);
    a_.resize(size(), 0.0);
    c_.resize(size(), 0.0);
    for (int m = 1; m <= lmax; ++m) diag_[m] = std::sqrt(1.0 + 0.5 / m);
    for (int m = 0; m < lmax; ++m) band_[m] = std::sqrt(2.0 * m + 3.0);
    for (int m = 0; m <= lmax; ++m) {
      double prev_a = 0.0;
      for (int l = m + 2; l <= lmax; ++l) {
        const double al =
            std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
        a_[idx(l, m)] = al;
        c_[idx(l, m)] = (l == m + 2) ? al / band_[m] : al / prev_a;
        prev_a = al;
      }
    }
  }

  int lmax() const { return lmax_; }
  std::size_t size() const {
    return static_cast<std::size_t>(lmax_ + 1) * (lmax_ + 2) / 2;
  }
  static std::size_t idx(int l, int m) {
    return static_cast<std::size_t>(l) * (l + 1) / 2 + m;
  }

  /// Fill the packed triangle out[idx(l,m)] = normalized P_lm(x) for
  /// 0 <= m <= l <= lmax, Condon-Shortley phase included.
  void compute(double x, std::vector<double>& out) const {
    out.resize(size());
    const double sx = std::sqrt((1.0 - x) * (1.0 + x));  // sin(theta) >= 0
    out[idx(0, 0)] = 1.0 / std::sqrt(4.0 * pi);
    for (int m = 1; m <= lmax_; ++m)
      out[idx(m, m)] = -diag_[m] * sx * out[idx(m - 1, m - 1)];
    for (int m = 0; m < lmax_; ++m) out[idx(m + 1, m)] = band_[m] * x * out[idx(m, m)];
    for (int m = 0; m <= lmax_; ++m) {
      for (int l = m + 2; l <= lmax_; ++l) {
        out[idx(l, m)] = a_[idx(l, m)] * x * out[idx(l - 1, m)] - c_[idx(l, m)] * out[idx(l - 2, m)];
      }
    }
  }

 private:
  int lmax_;
  std::vector<double> diag_;  // P_mm from P_{m-1,m-1}
  std::vector<double> band_;  // P_{m+1,m} from P_mm
  std::vector<double> a_, c_;
};

}  // namespace detail

/// Fully normalized associated Legendre function
/// sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_lm(x), 0 <= m <= l.
inline double assoc_legendre_norm(int l, int m, double x) {
  if (l < 0 || m < 0 || m > l) throw std::domain_error("assoc_legendre_norm: need 0 <= m <= l");
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("assoc_legendre_norm: |x| must be <= 1");
  const double sx = std::sqrt((1.0 - x) * (1.0 + x));
  double pmm = 1.0 / std::sqrt(4.0 * pi);
  for (int k = 1; k <= m; ++k) pmm *= -std::sqrt(1.0 + 0.5 / k) * sx;
  if (l == m) return pmm;
  double pm1 = pmm;
  double pm = std::sqrt(2.0 * m + 3.0) * x * pmm;
  double prev_a = std::sqrt(2.0 * m + 3.0);
  for (int k = m + 2; k <= l; ++k) {
    const double ak =
        std::sqrt((4.0 * k * k - 1.0) / (static_cast<double>(k) * k - static_cast<double>(m) * m));
    const double pn = ak * x * pm - (ak / prev_a) * pm1;
    pm1 = pm;
    pm = pn;
    prev_a = ak;
  }
  return pm;
}

/// Complex spherical harmonic Y_lm(theta, phi); negative orders via
/// Y_{l,-m} = (-1)^m conj(Y_lm).
inline std::complex<double> sph_harm(int l, int m, const SpherePoint& p) {
  if (l < 0 || std::abs(m) > l) throw std::domain_error("sph_harm: need |m| <= l");
  const int ma = std::abs(m);
  const double plm = assoc_legendre_norm(l, ma, std::cos(p.theta));
  const std::complex<double> val(plm * std::cos(ma * p.phi), plm * std::sin(ma * p.phi));
  if (m >= 0) return val;
  return (ma % 2 == 0) ? std::conj(val) : -std::conj(val);
}

/// All 2l+1 harmonics of one degree at one point, indexed m = -l..l.
struct HarmonicBand {
  int degree = 0;
  std::vector<std::complex<double>> values;
  const std::complex<double>& at(int m) const { return values[static_cast<std::size_t>(m + degree)]; }
};

namespace detail {

inline HarmonicBand band_from_triangle(int l, const std::vector<double>& tri, double phi) {
  HarmonicBand band;
  band.degree = l;
  band.values.resize(2 * l + 1);
  band.values[l] = AssocLegendreWorkspace::idx(l, 0) < tri.size()
                       ? std::complex<double>(tri[AssocLegendreWorkspace::idx(l, 0)], 0.0)
                       : 0.0;
  for (int m = 1; m <= l; ++m) {
    const double plm = tri[AssocLegendreWorkspace::idx(l, m)];
    const std::complex<double> val(plm * std::cos(m * phi), plm * std::sin(m * phi));
    band.values[l + m] = val;
    band.values[l - m] = (m % 2 == 0) ? std::conj(val) : -std::conj(val);
  }
  return band;
}

}  // namespace detail

inline HarmonicBand band_at(int l, const SpherePoint& p) {
  if (l < 0) throw std::domain_error("band_at: degree must be nonnegative");
  detail::AssocLegendreWorkspace ws(l);
  std::vector<double> tri;
  ws.compute(std::cos(p.theta), tri);
  return detail::band_from_triangle(l, tri, p.phi);
}

/// All bands 0..lmax at one point in a single O(lmax^2) sweep.
inline std::vector<HarmonicBand> band_table(int lmax, const SpherePoint& p) {
  detail::AssocLegendreWorkspace ws(lmax);
  std::vector<double> tri;
  ws.compute(std::cos(p.theta), tri);
  std::vector<HarmonicBand> bands;
  bands.reserve(lmax + 1);
  for (int l = 0; l <= lmax; ++l) bands.push_back(detail::band_from_triangle(l, tri, p.phi));
  return bands;
}

/// sum_m Y_lm(x) conj(Y_lm(y)); equals (2l+1)/(4 pi) P_l(cos d(x,y)).
inline std::complex<double> addition_sum(int l, const SpherePoint& x, const SpherePoint& y) {
  const HarmonicBand bx = band_at(l, x);
  const HarmonicBand by = band_at(l, y);
  std::complex<double> s = 0.0;
  for (int m = -l; m <= l; ++m) s += bx.at(m) * std::conj(by.at(m));
  return s;
}

/// Max deviation of the discrete inner products <Y_lm, Y_l'm'> from the
/// identity matrix, using Gauss-Legendre in cos(theta) and an equispaced
/// longitude rule. Both rules are exact for band-limited products, so the
/// defect measures the harmonics, not the quadrature.
inline double orthonormality_defect(int lmax, int theta_order, int phi_count) {
  if (lmax < 0) throw std::domain_error("orthonormality_defect: lmax must be nonnegative");
  if (theta_order < lmax + 1)
    throw config_error("orthonormality_defect: theta_order must be at least lmax+1");
  if (phi_count < 2 * lmax + 2)
    throw config_error("orthonormality_defect: phi_count must be at least 2*lmax+2");

  const QuadratureRule rule = gauss_legendre(theta_order);
  const int n_modes = (lmax + 1) * (lmax + 1);

  // radial factors per node: columns are modes (l, m), m = -l..l, where the
  // negative-order radial part is (-1)^m times the positive one
  std::vector<double> radial(static_cast<std::size_t>(theta_order) * n_modes);
  detail::AssocLegendreWorkspace ws(lmax);
  std::vector<double> tri;
  for (int q = 0; q < theta_order; ++q) {
    ws.compute(rule.nodes[q], tri);
    double* row = radial.data() + static_cast<std::size_t>(q) * n_modes;
    int col = 0;
    for (int l = 0; l <= lmax; ++l) {
      for (int m = -l; m <= l; ++m) {
        const int ma = std::abs(m);
        double v = tri[detail::AssocLegendreWorkspace::idx(l, ma)];
        if (m < 0 && ma % 2 == 1) v = -v;
        row[col++] = v;
      }
    }
  }

  // longitude factor depends only on m - m'
  std::vector<std::complex<double>> phi_factor(4 * lmax + 1);
  for (int k = -2 * lmax; k <= 2 * lmax; ++k) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < phi_count; ++j) {
      const double ang = k * 2.0 * pi * j / phi_count;
      s += std::complex<double>(std::cos(ang), std::sin(ang));
    }
    phi_factor[k + 2 * lmax] = s * (2.0 * pi / phi_count);
  }

  std::vector<int> mode_l(n_modes), mode_m(n_modes);
  {
    int col = 0;
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) {
        mode_l[col] = l;
        mode_m[col] = m;
        ++col;
      }
  }

  double defect = 0.0;
  for (int i = 0; i < n_modes; ++i) {
    for (int j = i; j < n_modes; ++j) {
      double t = 0.0;
      for (int q = 0; q < theta_order; ++q) {
        const double* row = radial.data() + static_cast<std::size_t>(q) * n_modes;
        t += rule.weights[q] * row[i] * row[j];
      }
      const std::complex<double> inner = t * phi_factor[mode_m[i] - mode_m[j] + 2 * lmax];
      const double expected = (i == j) ? 1.0 : 0.0;
      defect = std::max(defect, std::abs(inner - expected));
    }
  }
  return defect;
}

}  // namespace sfbm

#endif  // SFBM_HARMONICS_HPP
