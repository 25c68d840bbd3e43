#ifndef SFBM_NUMERICS_HPP
#define SFBM_NUMERICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfbm {

inline constexpr double pi = std::numbers::pi;

// Error taxonomy shared by all modules.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class usage_error : public std::runtime_error {
 public:
  explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

class not_psd_error : public std::runtime_error {
 public:
  explicit not_psd_error(const std::string& msg) : std::runtime_error(msg) {}
};

class consistency_error : public std::runtime_error {
 public:
  explicit consistency_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when adaptive quadrature cannot reach the requested tolerance.
/// Carries the best available estimate and its error bound.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& msg, double best_value, double err_estimate)
      : std::runtime_error(msg), best_value_(best_value), err_estimate_(err_estimate) {}
  double best_value() const { return best_value_; }
  double err_estimate() const { return err_estimate_; }

 private:
  double best_value_;
  double err_estimate_;
};

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// ln Gamma(y) for y > 0, Lanczos approximation (g = 7, 9 terms) with
/// reflection below 1/2.
inline double log_gamma(double y) {
  if (!(y > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  static constexpr std::array<double, 9> coeff = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,    12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;
  if (y < 0.5) {
    // Gamma(y) Gamma(1-y) = pi / sin(pi y)
    return std::log(pi / std::sin(pi * y)) - log_gamma(1.0 - y);
  }
  const double z = y - 1.0;
  double x = coeff[0];
  for (int i = 1; i < 9; ++i) x += coeff[i] / (z + static_cast<double>(i));
  const double t = z + g + 0.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

/// Euler Beta function B(a,b) = Gamma(a)Gamma(b)/Gamma(a+b).
inline double beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta: arguments must be positive");
  return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing in (-1,1)
  std::vector<double> weights;  // positive, sum to 2
  int order = 0;
};

/// Gauss-Legendre rule on [-1,1]. Nodes by Newton iteration, halves mirrored
/// so symmetry about 0 is exact.
inline QuadratureRule gauss_legendre(int order) {
  if (order < 1 || order > 4096) throw config_error("gauss_legendre: order must be in [1,4096]");
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 0.0);
  // P_order and P_{order-1} at x, by the three-term recurrence.
  auto eval_pair = [order](double x, double& pm, double& pm1) {
    pm1 = 1.0;
    pm = x;
    for (int j = 2; j <= order; ++j) {
      const double pn = ((2.0 * j - 1.0) * x * pm - (j - 1.0) * pm1) / j;
      pm1 = pm;
      pm = pn;
    }
  };
  const int half = (order + 1) / 2;
  for (int k = 0; k < half; ++k) {
    double x = std::cos(pi * (k + 0.75) / (order + 0.5));
    if (order % 2 == 1 && k == half - 1) x = 0.0;
    double pm = 0.0, pm1 = 0.0, dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      eval_pair(x, pm, pm1);
      dp = order * (x * pm - pm1) / (x * x - 1.0);
      const double dx = pm / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    eval_pair(x, pm, pm1);
    dp = order * (x * pm - pm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[k] = -x;  // guesses descend from +1; store ascending from -1
    rule.weights[k] = w;
    rule.nodes[order - 1 - k] = x;
    rule.weights[order - 1 - k] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = std::abs(rule.nodes[order / 2]);
  return rule;
}

struct IntegralResult {
  double value = 0.0;
  double err_estimate = 0.0;
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1,1] (QUADPACK abscissae/weights).
inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = gk15_wk[7] * f(c);
  double resg = gk15_wg[3] * f(c);
  for (int j = 0; j < 7; ++j) {
    const double x = h * gk15_x[j];
    const double fsum = f(c - x) + f(c + x);
    resk += gk15_wk[j] * fsum;
    if (j % 2 == 1) resg += gk15_wg[j / 2] * fsum;
  }
  value = resk * h;
  err = std::abs((resk - resg) * h);
}

struct Panel {
  double err;
  double value;
  double a, b;
  int depth;
  bool operator<(const Panel& other) const { return err < other.err; }
};

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration: the panel with the largest
/// error estimate is bisected until the summed estimate drops below abs_tol.
/// Panels stop splitting at max_depth; if the tolerance is still unreached
/// once every panel is frozen, a convergence_error carries the best estimate.
/// initial_panels pre-splits [a,b] uniformly (oscillatory integrands).
template <class F>
inline IntegralResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                                         int max_depth, int initial_panels = 1) {
  if (!(a < b)) throw std::domain_error("integrate_adaptive: requires a < b");
  if (!(abs_tol > 0.0)) throw std::domain_error("integrate_adaptive: abs_tol must be positive");
  if (max_depth < 1) throw std::domain_error("integrate_adaptive: max_depth must be >= 1");
  if (initial_panels < 1) initial_panels = 1;

  std::priority_queue<detail::Panel> active;
  double frozen_value = 0.0, frozen_err = 0.0;
  double active_value = 0.0, active_err = 0.0;

  auto push_panel = [&](double pa, double pb, int depth) {
    detail::Panel p;
    p.a = pa;
    p.b = pb;
    p.depth = depth;
    detail::gk15(f, pa, pb, p.value, p.err);
    if (!std::isfinite(p.value))
      throw std::domain_error("integrate_adaptive: integrand produced a non-finite value");
    active_value += p.value;
    active_err += p.err;
    active.push(p);
  };

  const double width = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double pa = a + i * width;
    const double pb = (i + 1 == initial_panels) ? b : a + (i + 1) * width;
    push_panel(pa, pb, 0);
  }

  constexpr int max_panels = 200000;
  int n_panels = initial_panels;
  while (frozen_err + active_err > abs_tol) {
    if (active.empty() || n_panels >= max_panels) {
      const double v = frozen_value + active_value;
      const double e = frozen_err + active_err;
      throw convergence_error("integrate_adaptive: tolerance unreached", v, e);
    }
    detail::Panel worst = active.top();
    active.pop();
    active_value -= worst.value;
    active_err -= worst.err;
    if (worst.depth >= max_depth) {
      frozen_value += worst.value;
      frozen_err += worst.err;
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    push_panel(worst.a, mid, worst.depth + 1);
    push_panel(mid, worst.b, worst.depth + 1);
    ++n_panels;
  }
  return {frozen_value + active_value, frozen_err + active_err};
}

// ---------------------------------------------------------------------------
// Dense symmetric linear algebra
// ---------------------------------------------------------------------------

/// Dense symmetric matrix, single stored lower triangle.
class SymMatrix {
 public:
  explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {
    if (n < 1) throw usage_error("SymMatrix: dimension must be positive");
  }
  int dim() const { return n_; }
  double& at(int i, int j) { return a_[index(i, j)]; }
  double at(int i, int j) const { return a_[index(i, j)]; }
  double max_diag() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(at(i, i)));
    return m;
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t index(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw usage_error("SymMatrix: index out of range");
    const int r = std::max(i, j), c = std::min(i, j);
    return static_cast<std::size_t>(r) * (r + 1) / 2 + c;
  }
  int n_;
  std::vector<double> a_;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Small dense matrices only; used for definiteness diagnostics.
inline std::vector<double> symmetric_eigenvalues(const SymMatrix& m);

struct CholeskyFactor {
  int n = 0;
  std::vector<double> lower;  // packed row-major lower triangle
  double jitter = 0.0;        // diagonal shift actually applied
  int zero_pivots = 0;        // semidefinite directions accepted as exact zeros

  double at(int i, int j) const {
    return (j > i) ? 0.0 : lower[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
  }
};

/// Cholesky factorization for matrices that are PSD up to roundoff.
/// Exactly-redundant directions (zero pivot with a consistent zero column)
/// are accepted; genuinely negative pivots trigger geometric jitter
/// escalation, capped at 1e-6 * max diagonal.
inline CholeskyFactor cholesky_psd(const SymMatrix& m, double jitter_start = 0.0) {
  const int n = m.dim();
  const double dmax = std::max(m.max_diag(), std::numeric_limits<double>::min());
  const double zero_tol = 1e-12 * dmax;
  const double jitter_cap = 1e-6 * dmax;

  double jitter = std::max(jitter_start, 0.0);
  for (;;) {
    CholeskyFactor f;
    f.n = n;
    f.lower.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
    f.jitter = jitter;
    f.zero_pivots = 0;
    auto L = [&](int i, int j) -> double& {
      return f.lower[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
    };
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      double d = m.at(j, j) + jitter;
      for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
      if (d > zero_tol) {
        const double ljj = std::sqrt(d);
        L(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
          double s = m.at(i, j);
          for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
          L(i, j) = s / ljj;
        }
      } else if (d >= -zero_tol) {
        // candidate null direction: the rest of the column must vanish too
        L(j, j) = 0.0;
        ++f.zero_pivots;
        for (int i = j + 1; i < n; ++i) {
          double s = m.at(i, j);
          for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
          if (std::abs(s) > 1e-7 * std::sqrt(dmax) * (1.0 + std::sqrt(dmax))) {
            ok = false;
            break;
          }
          L(i, j) = 0.0;
        }
      } else {
        ok = false;
      }
    }
    if (ok) return f;
    const double next = (jitter == 0.0) ? 1e-14 * dmax : jitter * 10.0;
    if (next > jitter_cap)
      throw not_psd_error("cholesky_psd: jitter cap exceeded; matrix is not PSD up to roundoff");
    jitter = next;
  }
}

/// Solve (L L^T) x = rhs from a (possibly semidefinite) Cholesky factor.
/// Zero-pivot coordinates get weight 0.
inline std::vector<double> cholesky_solve(const CholeskyFactor& f, std::span<const double> rhs) {
  if (static_cast<int>(rhs.size()) != f.n) throw usage_error("cholesky_solve: dimension mismatch");
  const int n = f.n;
  std::vector<double> y(rhs.begin(), rhs.end());
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int k = 0; k < i; ++k) s -= f.at(i, k) * y[k];
    y[i] = (f.at(i, i) == 0.0) ? 0.0 : s / f.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= f.at(k, i) * y[k];
    y[i] = (f.at(i, i) == 0.0) ? 0.0 : s / f.at(i, i);
  }
  return y;
}

struct RegressionResult {
  double residual = 0.0;        // var_target - cross' cov^{-1} cross, clamped at 0
  double clamp_applied = 0.0;   // magnitude removed by the clamp
  std::vector<double> weights;  // cov^{-1} cross
  double jitter = 0.0;
};

/// Prediction-error residual of the best linear predictor, via Cholesky.
inline RegressionResult regression_residual(const SymMatrix& cov, std::span<const double> cross,
                                            double var_target, double jitter_start = 0.0) {
  if (static_cast<int>(cross.size()) != cov.dim())
    throw usage_error("regression_residual: cross size must match covariance dimension");
  const CholeskyFactor f = cholesky_psd(cov, jitter_start);
  RegressionResult r;
  r.jitter = f.jitter;
  r.weights = cholesky_solve(f, cross);
  double explained = 0.0;
  for (std::size_t i = 0; i < r.weights.size(); ++i) explained += r.weights[i] * cross[i];
  double residual = var_target - explained;
  if (residual < 0.0) {
    r.clamp_applied = -residual;
    residual = 0.0;
  }
  r.residual = residual;
  return r;
}

inline std::vector<double> symmetric_eigenvalues(const SymMatrix& m) {
  const int n = m.dim();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m.at(i, j);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30 * (1.0 + m.max_abs() * m.max_abs())) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace detail

/// Identifies a reproducible random sequence. Identical (seed, stream_id)
/// pairs replay identical draws; child streams derive fresh ids so parallel
/// loops stay reproducible under any scheduling.
struct RandomStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RandomStream child(std::uint64_t index) const {
    std::uint64_t s = stream_id ^ 0xD1B54A32D192ED03ULL;
    s += 0x8CB92BA72F3D8DD7ULL * (index + 1);
    std::uint64_t tmp = s;
    const std::uint64_t mixed = detail::splitmix64(tmp) ^ detail::splitmix64(tmp);
    return RandomStream{seed, mixed};
  }
};

/// xoshiro256++ with splitmix64 seeding and Box-Muller normals.
class Rng {
 public:
  explicit Rng(RandomStream s) {
    std::uint64_t sm = s.seed ^ (0xA0761D6478BD642FULL * (s.stream_id + 1));
    for (auto& w : state_) w = detail::splitmix64(sm);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// uniform in (0,1]
  double next_unit() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * pi * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  bool has_cached_ = false;
  double cached_ = 0.0;
};

inline std::vector<double> draw_standard_normal(RandomStream stream, std::size_t n) {
  Rng rng(stream);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.next_normal();
  return out;
}

}  // namespace sfbm

#endif  // SFBM_NUMERICS_HPP
