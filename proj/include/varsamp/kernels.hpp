#ifndef VARSAMP_KERNELS_HPP
#define VARSAMP_KERNELS_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "numerics.hpp"

namespace varsamp {

struct CompactSupport {
  double radius = 0.0;
};

using KernelSupport = std::variant<CompactSupport, DecayEnvelope>;

/// A sampling kernel chi together with the metadata the operators need:
/// where it lives (compact radius or decay envelope), where it is not smooth,
/// and what is known about its L1 norm.
struct Kernel {
  std::string id;
  std::function<double(double)> fn;
  std::function<double(double)> antiderivative;  // optional; any primitive of fn
  KernelSupport support = CompactSupport{};
  std::vector<double> breakpoints;  // ascending
  std::optional<double> l1_norm_hint;
  bool nonnegative = false;
  bool continuous = true;
  std::optional<int> bspline_order;

  double operator()(double x) const { return fn(x); }

  bool is_compact() const { return std::holds_alternative<CompactSupport>(support); }
  double radius() const {
    return is_compact() ? std::get<CompactSupport>(support).radius : std::numeric_limits<double>::infinity();
  }
  const DecayEnvelope& envelope() const { return std::get<DecayEnvelope>(support); }

  TruncationPolicy truncation(double tol) const {
    if (is_compact()) return TruncationPolicy::compact(radius(), tol);
    return TruncationPolicy::polynomial(envelope(), tol);
  }

  /// Upper bound for int_{x}^{inf} |chi| (and, by evenness of the envelope, the left tail).
  double tail_mass(double x) const {
    if (is_compact()) return x >= radius() ? 0.0 : std::numeric_limits<double>::infinity();
    return envelope().tail_mass(x);
  }

  /// Half-width of a symmetric window outside of which the L1 mass of |chi| is at most `tail_tol`.
  double window_half_width(double tail_tol) const {
    if (is_compact()) return radius();
    const auto& env = envelope();
    const double t = env.shift + std::pow(2.0 * env.constant / ((env.exponent - 1.0) * tail_tol),
                                          1.0 / (env.exponent - 1.0));
    return std::max(t, env.valid_from);
  }
};

// ---------------------------------------------------------------------------
// Central B-splines
// ---------------------------------------------------------------------------

namespace detail {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// (u)_+^p, with (u)_+^0 = 1 for u > 0 and 0 otherwise.
inline double positive_power(double u, int p) {
  if (u <= 0.0) return 0.0;
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= u;
  return r;
}

inline void check_order(int n) {
  if (n < 1) throw std::invalid_argument("bspline: order must be >= 1");
}

}  // namespace detail

/// Central B-spline M_n from the truncated-power sum. M_1 is the indicator of
/// (-1/2, 1/2].
inline double bspline_eval(int n, double x) {
  detail::check_order(n);
  const double half = 0.5 * n;
  if (x < -half || x > half) return 0.0;
  if (n == 1) return x > -half ? 1.0 : 0.0;
  x = -std::abs(x);  // left half only: fewer terms, less cancellation
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double term = detail::binomial(n, i) * detail::positive_power(half + x - i, n - 1);
    sum += (i % 2 == 0) ? term : -term;
  }
  return sum / detail::factorial(n - 1);
}

/// Primitive of M_n vanishing at -inf; equals 1 to the right of the support.
inline double bspline_antiderivative(int n, double x) {
  detail::check_order(n);
  const double half = 0.5 * n;
  if (x <= -half) return 0.0;
  if (x >= half) return 1.0;
  if (x > 0.0) return 1.0 - bspline_antiderivative(n, -x);
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double term = detail::binomial(n, i) * detail::positive_power(half + x - i, n);
    sum += (i % 2 == 0) ? term : -term;
  }
  return sum / detail::factorial(n);
}

inline double bspline_derivative_eval(int n, double x) {
  if (n < 2) throw std::domain_error("bspline_derivative_eval: order must be >= 2");
  if (n == 2) {
    // Midpoint value at the jumps of M_1, so the kinks of M_2 get the mean slope.
    const auto indicator = [](double u) { return std::abs(u) < 0.5 ? 1.0 : std::abs(u) == 0.5 ? 0.5 : 0.0; };
    return indicator(x + 0.5) - indicator(x - 0.5);
  }
  return bspline_eval(n - 1, x + 0.5) - bspline_eval(n - 1, x - 0.5);
}

inline Kernel bspline_kernel(int n) {
  detail::check_order(n);
  Kernel k;
  k.id = "bspline:" + std::to_string(n);
  k.fn = [n](double x) { return bspline_eval(n, x); };
  k.antiderivative = [n](double x) { return bspline_antiderivative(n, x); };
  k.support = CompactSupport{0.5 * n};
  for (int i = 0; i <= n; ++i) k.breakpoints.push_back(-0.5 * n + i);
  k.l1_norm_hint = 1.0;
  k.nonnegative = true;
  k.continuous = n >= 2;
  k.bspline_order = n;
  return k;
}

// ---------------------------------------------------------------------------
// Fejer kernel
// ---------------------------------------------------------------------------

inline double fejer_eval(double x) {
  const double s = sinc(0.5 * x);
  return 0.5 * s * s;
}

/// Primitive of the Fejer kernel with value 0 at the origin.
inline double fejer_antiderivative(double x) {
  constexpr double pi = std::numbers::pi;
  if (std::abs(x) < 1e-3) return 0.5 * x - pi * pi * x * x * x / 72.0;
  const double s = std::sin(0.5 * pi * x);
  return sine_integral(pi * x) / pi - 2.0 * s * s / (pi * pi * x);
}

inline Kernel fejer_kernel() {
  Kernel k;
  k.id = "fejer";
  k.fn = fejer_eval;
  k.antiderivative = fejer_antiderivative;
  k.support = DecayEnvelope{2.0, 2.0 / (std::numbers::pi * std::numbers::pi), 0.0, 1.0};
  k.l1_norm_hint = 1.0;
  k.nonnegative = true;
  return k;
}

// ---------------------------------------------------------------------------
// Bochner-Riesz kernels
// ---------------------------------------------------------------------------

namespace detail {

inline int check_bochner_riesz_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("bochner_riesz: gamma must be positive");
  if (gamma != std::floor(gamma) || gamma > 5.0)
    throw std::invalid_argument("bochner_riesz: only integer gamma in 1..5 is supported");
  return static_cast<int>(gamma);
}

}  // namespace detail

/// b_gamma(x) = 2^gamma Gamma(gamma+1) / sqrt(2 pi) |x|^{-1/2-gamma} J_{1/2+gamma}(|x|),
/// the inverse Fourier transform of (1 - v^2)_+^gamma.
inline double bochner_riesz_eval(double gamma, double x) {
  const int g = detail::check_bochner_riesz_gamma(gamma);
  const double c = std::pow(2.0, g) * gamma_fn(g + 1.0) / std::sqrt(2.0 * std::numbers::pi);
  return c * bessel_j_half_scaled(2 * g + 1, std::abs(x));
}

inline Kernel bochner_riesz_kernel(double gamma) {
  const int g = detail::check_bochner_riesz_gamma(gamma);
  Kernel k;
  k.id = "bochner-riesz:" + std::to_string(g);
  k.fn = [g](double x) { return bochner_riesz_eval(g, x); };
  // Envelope constant fitted on [10, 100] with a 5% margin.
  const double p = 1.0 + g;
  double fitted = 0.0;
  for (double x = 10.0; x <= 100.0; x += 0.01)
    fitted = std::max(fitted, std::abs(bochner_riesz_eval(g, x)) * std::pow(x, p));
  k.support = DecayEnvelope{p, 1.05 * fitted, 0.0, 10.0};
  return k;
}

// ---------------------------------------------------------------------------
// Averaged kernels
// ---------------------------------------------------------------------------

enum class EvaluationMode { analytic, quadrature };

/// chi_bar_m(t) = (1/m) int_{-m/2}^{m/2} chi(t + v) dv.
///
/// Analytic evaluation uses M_{n+1} for a B-spline base with m = 1 and the
/// base primitive otherwise; quadrature integrates the base directly with its
/// breakpoints registered. An optional pre-populated grid cache with linear
/// interpolation trades accuracy (bound recorded) for speed.
class AveragedKernel {
 public:
  AveragedKernel(Kernel base, int m) : AveragedKernel(base, m, default_mode(base, m)) {}

  AveragedKernel(Kernel base, int m, EvaluationMode mode) : base_(std::move(base)), m_(m), mode_(mode) {
    if (m < 1) throw std::invalid_argument("AveragedKernel: m must be a positive integer");
    if (mode == EvaluationMode::analytic && !has_analytic(base_, m_))
      throw std::invalid_argument("AveragedKernel: no analytic form for base " + base_.id);
  }

  const Kernel& base() const { return base_; }
  int m() const { return m_; }
  EvaluationMode mode() const { return mode_; }

  double operator()(double t) const {
    if (cache_) {
      const double r = cache_->lookup(t);
      if (!std::isnan(r)) return r;
    }
    return exact(t);
  }

  double exact(double t) const {
    const double h = 0.5 * m_;
    if (mode_ == EvaluationMode::analytic) {
      if (base_.bspline_order && m_ == 1) return bspline_eval(*base_.bspline_order + 1, t);
      return (base_.antiderivative(t + h) - base_.antiderivative(t - h)) / m_;
    }
    auto r = adaptive_quadrature(base_.fn, t - h, t + h, 1e-14, base_.breakpoints);
    return r.value / m_;
  }

  /// (1/m) [chi(t + m/2) - chi(t - m/2)]
  double derivative(double t) const {
    const double h = 0.5 * m_;
    return (base_(t + h) - base_(t - h)) / m_;
  }

  double radius() const { return base_.radius() + 0.5 * m_; }

  TruncationPolicy truncation(double tol) const {
    if (base_.is_compact()) return TruncationPolicy::compact(radius(), tol);
    auto env = base_.envelope();
    env.shift += 0.5 * m_;
    env.valid_from += 0.5 * m_;
    return TruncationPolicy::polynomial(env, tol);
  }

  /// Copy with a linear-interpolation table of the given step.
  AveragedKernel with_grid_cache(double step = 1e-3, double unbounded_extent = 64.0) const {
    AveragedKernel out = *this;
    out.cache_ = std::make_shared<const GridCache>(*this, step, unbounded_extent);
    return out;
  }
  bool cached() const { return static_cast<bool>(cache_); }
  double cache_error_bound() const { return cache_ ? cache_->error_bound : 0.0; }

  /// The averaged kernel as a kernel in its own right.
  Kernel as_kernel() const {
    Kernel k;
    k.id = "avg:" + std::to_string(m_) + ":" + base_.id;
    AveragedKernel self = *this;
    k.fn = [self](double t) { return self(t); };
    const double h = 0.5 * m_;
    if (base_.is_compact()) {
      k.support = CompactSupport{radius()};
    } else {
      auto env = base_.envelope();
      env.shift += h;
      env.valid_from += h;
      k.support = env;
    }
    if (!(base_.bspline_order && m_ == 1)) {
      for (double b : base_.breakpoints) {
        k.breakpoints.push_back(b - h);
        k.breakpoints.push_back(b + h);
      }
      std::sort(k.breakpoints.begin(), k.breakpoints.end());
      k.breakpoints.erase(std::unique(k.breakpoints.begin(), k.breakpoints.end()), k.breakpoints.end());
    } else {
      const int n = *base_.bspline_order + 1;
      for (int i = 0; i <= n; ++i) k.breakpoints.push_back(-0.5 * n + i);
    }
    k.nonnegative = base_.nonnegative;
    if (base_.nonnegative && base_.l1_norm_hint) k.l1_norm_hint = base_.l1_norm_hint;
    k.continuous = true;
    if (base_.bspline_order && m_ == 1) k.bspline_order = *base_.bspline_order + 1;
    return k;
  }

  static bool has_analytic(const Kernel& base, int m) {
    return (base.bspline_order && m == 1) || static_cast<bool>(base.antiderivative);
  }

 private:
  static EvaluationMode default_mode(const Kernel& base, int m) {
    return has_analytic(base, m) ? EvaluationMode::analytic : EvaluationMode::quadrature;
  }

  struct GridCache {
    GridCache(const AveragedKernel& k, double step_, double unbounded_extent) : step(step_) {
      if (!(step > 0.0)) throw std::invalid_argument("grid cache: step must be positive");
      extent = std::isfinite(k.radius()) ? k.radius() : unbounded_extent;
      const auto n = static_cast<std::size_t>(std::ceil(2.0 * extent / step)) + 1;
      values.resize(n);
      for (std::size_t i = 0; i < n; ++i) values[i] = k.exact(-extent + step * static_cast<double>(i));
      // Linear interpolation error is about h^2 |f''| / 8 ~ |second difference| / 8.
      for (std::size_t i = 1; i + 1 < n; ++i)
        error_bound = std::max(error_bound, std::abs(values[i + 1] - 2.0 * values[i] + values[i - 1]) / 8.0);
    }
    double lookup(double t) const {
      if (t < -extent || t > extent) return std::numeric_limits<double>::quiet_NaN();
      const double pos = (t + extent) / step;
      auto i = static_cast<std::size_t>(pos);
      if (i + 1 >= values.size()) return values.back();
      const double frac = pos - static_cast<double>(i);
      return values[i] + frac * (values[i + 1] - values[i]);
    }
    double step;
    double extent = 0.0;
    double error_bound = 0.0;
    std::vector<double> values;
  };

  Kernel base_;
  int m_;
  EvaluationMode mode_;
  std::shared_ptr<const GridCache> cache_;
};

inline AveragedKernel average(const Kernel& base, int m) { return AveragedKernel(base, m); }

inline double averaged_derivative_eval(const AveragedKernel& ak, double t) { return ak.derivative(t); }

// ---------------------------------------------------------------------------
// Admissibility checks
// ---------------------------------------------------------------------------

inline constexpr double kDefaultCheckTruncationTol = 1e-6;

struct LatticeSums {
  double sum = 0.0;      // sum_k chi(u - k)
  double abs_sum = 0.0;  // sum_k |chi(u - k)|
};

inline LatticeSums lattice_sums(const Kernel& k, double u, long K) {
  CompensatedSum s, a;
  const long lo = static_cast<long>(std::floor(u)) - K;
  const long hi = static_cast<long>(std::ceil(u)) + K;
  // Far terms first on each side, so the small tail is accumulated before the bulk.
  auto add = [&](long j) {
    const double v = k(u - static_cast<double>(j));
    s.add(v);
    a.add(std::abs(v));
  };
  const long mid = static_cast<long>(std::floor(u));
  for (long j = lo; j < mid; ++j) add(j);
  for (long j = hi; j >= mid; --j) add(j);
  return {s.value(), a.value()};
}

struct PartitionOfUnityReport {
  double max_deviation = 0.0;
  double truncation_tolerance = 0.0;
  long radius = 0;
  bool pass = false;
};

/// max_u |sum_k chi(u - k) - 1| over `grid`, with the series cut at the
/// truncation radius certified for `truncation_tol`.
inline PartitionOfUnityReport check_partition_of_unity(const Kernel& k, std::span<const double> grid, double tol,
                                                      double truncation_tol = kDefaultCheckTruncationTol) {
  PartitionOfUnityReport rep;
  rep.radius = series_truncation_radius(k.truncation(truncation_tol));
  rep.truncation_tolerance = k.is_compact() ? 0.0 : truncation_tol;
  for (double u : grid) rep.max_deviation = std::max(rep.max_deviation, std::abs(lattice_sums(k, u, rep.radius).sum - 1.0));
  rep.pass = rep.max_deviation <= tol + rep.truncation_tolerance;
  return rep;
}

/// A_chi = sup_u sum_k |chi(u - k)|, sampled on `grid`.
inline double absolute_moment_sup(const Kernel& k, std::span<const double> grid,
                                  double truncation_tol = kDefaultCheckTruncationTol) {
  const long K = series_truncation_radius(k.truncation(truncation_tol));
  double best = 0.0;
  for (double u : grid) best = std::max(best, lattice_sums(k, u, K).abs_sum);
  return best;
}

/// ||chi||_1: `value` integrates |chi| over the support, or over a window
/// whose neglected mass is at most `tail_bound`.
struct L1Norm {
  double value = 0.0;
  double tail_bound = 0.0;
  double upper() const { return value + tail_bound; }
};

inline L1Norm l1_norm(const Kernel& k, double tail_tol = 1e-5, double quad_tol = 1e-11) {
  const double T = k.window_half_width(tail_tol);
  const double scan = k.is_compact() ? 0.125 : 0.25;
  auto r = integrate_abs(k.fn, -T, T, k.breakpoints, scan, quad_tol);
  return {r.value, k.is_compact() ? 0.0 : 2.0 * k.tail_mass(T)};
}

/// Best available upper estimate of ||chi||_1.
inline double l1_norm_upper(const Kernel& k) {
  if (k.l1_norm_hint) return *k.l1_norm_hint;
  return l1_norm(k).upper();
}

struct FourierValue {
  std::complex<double> value;
  double tail_bound = 0.0;
};

/// chi_hat(v) = int chi(u) e^{-i u v} du, as cosine and sine quadratures over
/// the support or a decay window.
inline FourierValue fourier_transform(const Kernel& k, double v, double tail_tol = 1e-5, double quad_tol = 1e-12) {
  const double T = k.window_half_width(tail_tol);
  std::vector<double> cuts = k.breakpoints;
  if (!k.is_compact()) {
    // Unit panels keep each quadrature piece to a few oscillations.
    for (double x = -std::floor(T); x <= T; x += 1.0) cuts.push_back(x);
  }
  QuadratureOptions opts;
  opts.abs_tol = quad_tol;
  opts.max_segments = 20000 + 32 * cuts.size();
  auto re = adaptive_quadrature([&](double u) { return k(u) * std::cos(v * u); }, -T, T, opts, cuts);
  auto im = adaptive_quadrature([&](double u) { return -k(u) * std::sin(v * u); }, -T, T, opts, cuts);
  return {{re.value, im.value}, k.is_compact() ? 0.0 : 2.0 * k.tail_mass(T)};
}

struct FourierCheck {
  std::complex<double> value;
  double deviation = 0.0;
  double tail_bound = 0.0;
};

/// |chi_hat(2 pi kk) - delta_{kk,0}|.
inline FourierCheck fourier_check(const Kernel& k, int kk, double tail_tol = 1e-5) {
  if (std::abs(kk) > 5) throw std::invalid_argument("fourier_check: |k| must be at most 5");
  auto ft = fourier_transform(k, 2.0 * std::numbers::pi * kk, tail_tol);
  const double target = kk == 0 ? 1.0 : 0.0;
  return {ft.value, std::abs(ft.value - target), ft.tail_bound};
}

/// |chi_bar_m_hat(v) - chi_hat(v) sin(mv/2)/(mv/2)|, both transforms by
/// independent quadratures.
inline double averaged_fourier_identity_check(const Kernel& base, int m, double v, double tail_tol = 1e-5) {
  if (v == 0.0) throw std::invalid_argument("averaged_fourier_identity_check: v must be nonzero");
  const auto averaged = AveragedKernel(base, m).as_kernel();
  const auto lhs = fourier_transform(averaged, v, tail_tol);
  const auto rhs = fourier_transform(base, v, tail_tol);
  const double x = 0.5 * m * v;
  return std::abs(lhs.value - rhs.value * (std::sin(x) / x));
}

}  // namespace varsamp

#endif  // VARSAMP_KERNELS_HPP
