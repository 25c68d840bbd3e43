#ifndef SFBM_FIELD_HPP
#define SFBM_FIELD_HPP

#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "sfbm/harmonics.hpp"
#include "sfbm/numerics.hpp"
#include "sfbm/spectrum.hpp"
#include "sfbm/sphere.hpp"

namespace sfbm {

/// Defining variogram E[(B(x)-B(y))^2] = d(x,y)^{2H}.
inline double variogram(const SpherePoint& x, const SpherePoint& y, HurstIndex H) {
  return std::pow(geodesic_distance(x, y), H.two_h());
}

/// Covariance by polarization of the variogram against the pinning B(N) = 0:
/// R(x,y) = (d(x,N)^{2H} + d(y,N)^{2H} - d(x,y)^{2H}) / 2.
inline double covariance(const SpherePoint& x, const SpherePoint& y, HurstIndex H) {
  const SpherePoint n = north();
  const double p = H.two_h();
  return 0.5 * (std::pow(geodesic_distance(x, n), p) + std::pow(geodesic_distance(y, n), p) -
                std::pow(geodesic_distance(x, y), p));
}

/// Analytic second-order model, convenient as a kernel object.
struct CovarianceModel {
  HurstIndex H;
  double operator()(const SpherePoint& x, const SpherePoint& y) const {
    return covariance(x, y, H);
  }
};

inline SymMatrix covariance_matrix(const std::vector<SpherePoint>& pts, HurstIndex H) {
  SymMatrix m(static_cast<int>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      m.at(static_cast<int>(i), static_cast<int>(j)) = covariance(pts[i], pts[j], H);
  return m;
}

/// One sampled set of modal coefficients up to the truncation degree,
/// evaluable anywhere on the sphere.
///
/// Coefficients follow the real-field convention: eps_{l,0} real standard
/// normal, eps_{l,m} = (u + iv)/sqrt(2) for m >= 1, and
/// eps_{l,-m} = (-1)^m conj(eps_{l,m}), so E|eps|^2 = 1 for every mode and
/// the synthesized sum is real up to roundoff.
class KLRealization {
 public:
  KLRealization(HurstIndex H, int L, PowerSpectrum spectrum, RandomStream stream)
      : hurst_(H), L_(L), spectrum_(std::move(spectrum)), stream_(stream) {
    if (spectrum_.method != SpectrumMethod::quadrature)
      throw usage_error("KLRealization: simulation requires a quadrature-method spectrum");
    if (!(spectrum_.H == H))
      throw usage_error("KLRealization: spectrum Hurst index does not match");
    if (spectrum_.L < L) throw usage_error("KLRealization: spectrum shorter than truncation");
    coeff_.assign(static_cast<std::size_t>(L + 1) * (L + 1), {0.0, 0.0});
    Rng rng(stream);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int l = 0; l <= L; ++l) {
      at(l, 0) = {rng.next_normal(), 0.0};
      for (int m = 1; m <= l; ++m) {
        const double u = rng.next_normal();
        const double v = rng.next_normal();
        const std::complex<double> eps(u * inv_sqrt2, v * inv_sqrt2);
        at(l, m) = eps;
        at(l, -m) = (m % 2 == 0) ? std::conj(eps) : -std::conj(eps);
      }
    }
    amplitude_.resize(L + 1);
    for (int l = 0; l <= L; ++l) amplitude_[l] = std::sqrt(pi * spectrum_.magnitude(l));
    north_l0_.resize(L + 1);
    for (int l = 0; l <= L; ++l) north_l0_[l] = std::sqrt((2.0 * l + 1.0) / (4.0 * pi));
    workspace_ = std::make_shared<detail::AssocLegendreWorkspace>(L);
  }

  HurstIndex hurst() const { return hurst_; }
  int truncation() const { return L_; }
  const PowerSpectrum& spectrum() const { return spectrum_; }
  RandomStream stream() const { return stream_; }

  const std::complex<double>& coefficient(int l, int m) const {
    if (l < 0 || l > L_ || std::abs(m) > l)
      throw usage_error("KLRealization: coefficient index out of range");
    return coeff_[static_cast<std::size_t>(l) * l + l + m];
  }

  /// B(x) = sum_{l=1}^{L} sqrt(pi |d_l|) sum_m eps_{lm} (Y_lm(x) - Y_lm(N)).
  /// The sum is accumulated in full complex arithmetic; a residual imaginary
  /// part beyond roundoff scale signals broken coefficient symmetry.
  double evaluate(const SpherePoint& x) const {
    std::vector<double> tri;
    workspace_->compute(std::cos(x.theta), tri);
    std::complex<double> total = 0.0;
    for (int l = 1; l <= L_; ++l) {
      std::complex<double> band = 0.0;
      // m = 0 term, with the North-pole value subtracted
      band += coefficient(l, 0) *
              (tri[detail::AssocLegendreWorkspace::idx(l, 0)] - north_l0_[l]);
      for (int m = 1; m <= l; ++m) {
        const double plm = tri[detail::AssocLegendreWorkspace::idx(l, m)];
        const std::complex<double> ylm(plm * std::cos(m * x.phi), plm * std::sin(m * x.phi));
        const std::complex<double> ylnegm = (m % 2 == 0) ? std::conj(ylm) : -std::conj(ylm);
        band += coefficient(l, m) * ylm + coefficient(l, -m) * ylnegm;
      }
      total += amplitude_[l] * band;
    }
    if (std::abs(total.imag()) > 1e-10 * (1.0 + std::abs(total.real())))
      throw consistency_error("KLRealization::evaluate: imaginary residue above threshold");
    return total.real();
  }

 private:
  std::complex<double>& at(int l, int m) {
    return coeff_[static_cast<std::size_t>(l) * l + l + m];
  }
  HurstIndex hurst_;
  int L_;
  PowerSpectrum spectrum_;
  RandomStream stream_;
  std::vector<std::complex<double>> coeff_;
  std::vector<double> amplitude_;  // sqrt(pi |d_l|)
  std::vector<double> north_l0_;   // Y_l0(N)
  std::shared_ptr<detail::AssocLegendreWorkspace> workspace_;
};

inline KLRealization draw_coefficients(HurstIndex H, int L, const PowerSpectrum& spectrum,
                                       RandomStream stream) {
  return KLRealization(H, L, spectrum, stream);
}

/// Partial sum sum_{l=1}^{L} (2l+1)/2 |d_l| (1 - P_l(cos gamma)) of the
/// Legendre expansion of the variogram at angular separation gamma.
/// Nondecreasing in L; converges to gamma^{2H}.
inline double variogram_truncated(double gamma, const PowerSpectrum& spectrum, int L) {
  if (!(gamma >= 0.0 && gamma <= pi))
    throw std::domain_error("variogram_truncated: gamma must be in [0, pi]");
  if (L > spectrum.L) throw usage_error("variogram_truncated: L exceeds spectrum length");
  const std::vector<double> pl = legendre_p_all(L, std::cos(gamma));
  double sum = 0.0;
  for (int l = 1; l <= L; ++l)
    sum += 0.5 * (2.0 * l + 1.0) * spectrum.magnitude(l) * (1.0 - pl[l]);
  return sum;
}

/// Ground-truth sampler: joint draws from N(0, R) over a finite point set by
/// Cholesky factorization of the analytic covariance. Returns
/// samples[k][i] = value of draw k at point i.
inline std::vector<std::vector<double>> exact_gaussian_oracle(const std::vector<SpherePoint>& points,
                                                              HurstIndex H, RandomStream stream,
                                                              std::size_t n_samples) {
  const int n = static_cast<int>(points.size());
  if (n < 1) throw usage_error("exact_gaussian_oracle: need at least one point");
  const CholeskyFactor f = cholesky_psd(covariance_matrix(points, H), 0.0);
  Rng rng(stream);
  std::vector<std::vector<double>> samples(n_samples, std::vector<double>(n, 0.0));
  std::vector<double> z(n);
  for (auto& row : samples) {
    for (auto& v : z) v = rng.next_normal();
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j <= i; ++j) s += f.at(i, j) * z[j];
      row[i] = s;
    }
  }
  return samples;
}

struct RecoveredCoefficient {
  std::complex<double> value{0.0, 0.0};
  bool defined = false;  // false for l = 0, whose modal amplitude vanishes
};

/// Analysis round trip: integrates the synthesized field against conj(Y_lm)
/// over the sphere (Gauss-Legendre in cos theta x equispaced longitude) and
/// rescales by the modal amplitude sqrt(pi |d_l|).
inline RecoveredCoefficient recover_coefficient(const KLRealization& r, int l, int m,
                                                int theta_order, int phi_count) {
  if (l < 0 || std::abs(m) > l) throw std::domain_error("recover_coefficient: need |m| <= l");
  if (l > r.spectrum().L)
    throw usage_error("recover_coefficient: degree beyond the available spectrum");
  const int band_limit = std::max(r.truncation(), l);
  if (theta_order < band_limit + 1 || phi_count < 2 * band_limit + 2)
    throw config_error("recover_coefficient: quadrature must resolve degree 2*L");
  if (l == 0) return {};  // 0/0: the constant mode carries no amplitude

  const QuadratureRule rule = gauss_legendre(theta_order);
  std::complex<double> acc = 0.0;
  for (int q = 0; q < theta_order; ++q) {
    const double theta = std::acos(std::clamp(rule.nodes[q], -1.0, 1.0));
    std::complex<double> ring = 0.0;
    for (int j = 0; j < phi_count; ++j) {
      const double phi = 2.0 * pi * j / phi_count;
      const SpherePoint p = from_angles(theta, phi);
      ring += r.evaluate(p) * std::conj(sph_harm(l, m, p));
    }
    acc += rule.weights[q] * ring;
  }
  acc *= 2.0 * pi / phi_count;
  RecoveredCoefficient out;
  out.defined = true;
  out.value = acc / std::sqrt(pi * r.spectrum().magnitude(l));
  return out;
}

}  // namespace sfbm

#endif  // SFBM_FIELD_HPP
