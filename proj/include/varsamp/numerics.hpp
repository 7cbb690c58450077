#ifndef VARSAMP_NUMERICS_HPP
#define VARSAMP_NUMERICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace varsamp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
  Interval grown(double margin) const { return {lo - margin, hi + margin}; }
};

/// Shortest "%g" rendering, used for ids such as "hat:1".
inline std::string format_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Adaptive quadrature
// ---------------------------------------------------------------------------

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // absolute
  std::size_t evaluations = 0;
};

/// Raised when the subdivision budget runs out; carries the partial estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadratureResult partial)
      : std::runtime_error(what), partial_(partial) {}
  const QuadratureResult& partial() const { return partial_; }

 private:
  QuadratureResult partial_;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_segments = 20000;  // refinements beyond the breakpoint pieces
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  double floor = 0.0;  // roundoff part of error; splitting cannot reduce it
  double reducible() const { return error - floor; }
  bool operator<(const Segment& o) const { return reducible() < o.reducible(); }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double s = f1[j] + f2[j];
    resk += kWgk[j] * s;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

  const double h = std::abs(half);
  double err = std::abs((resk - resg) * half);
  resasc *= h;
  resabs *= h;
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
  double floor = 0.0;
  if (resabs > std::numeric_limits<double>::min() / (50.0 * std::numeric_limits<double>::epsilon())) {
    floor = std::min(roundoff, std::max(err, roundoff));
    err = std::max(roundoff, err);
  }
  return {a, b, resk * half, err, floor};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
///
/// Interior breakpoints split the interval before any adaptive refinement, so
/// piecewise-smooth integrands should list their kinks and jumps there. The
/// subdivision stops once the summed error estimate is below
/// max(abs_tol, rel_tol * |value|); exhausting `max_segments` throws
/// QuadratureError with the partial result.
template <class F>
QuadratureResult adaptive_quadrature(F&& f, double a, double b, const QuadratureOptions& opts,
                                     std::span<const double> breakpoints = {}) {
  if (!(a < b)) {
    if (a == b) return {0.0, 0.0, 1};
    throw std::invalid_argument("adaptive_quadrature: requires a < b");
  }
  if (!(opts.abs_tol > 0.0) && !(opts.rel_tol > 0.0))
    throw std::invalid_argument("adaptive_quadrature: tolerance must be positive");

  std::vector<double> cuts{a};
  for (double x : breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<detail::Segment> heap;
  const std::size_t segment_limit = cuts.size() + opts.max_segments;
  double total = 0.0, total_err = 0.0, total_floor = 0.0;
  std::size_t evals = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto s = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
    evals += 15;
    total += s.value;
    total_err += s.error;
    total_floor += s.floor;
    heap.push(s);
  }

  const double min_width = 1e-15 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  while (total_err - total_floor > target()) {
    if (heap.size() >= segment_limit)
      throw QuadratureError("adaptive_quadrature: subdivision limit reached", {total, total_err, evals});
    auto worst = heap.top();
    if (worst.b - worst.a < min_width) {
      // Segment cannot be split further; remaining error is roundoff-level.
      if (worst.reducible() <= 1e3 * target()) break;
      throw QuadratureError("adaptive_quadrature: integrand not resolvable", {total, total_err, evals});
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_floor += left.floor + right.floor - worst.floor;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift accumulated by incremental updates.
  double value = 0.0, err = 0.0;
  std::vector<detail::Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
  for (const auto& s : segs) {
    value += s.value;
    err += s.error;
  }
  return {value, err, evals};
}

template <class F>
QuadratureResult adaptive_quadrature(F&& f, double a, double b, double tol,
                                     std::span<const double> breakpoints = {}) {
  QuadratureOptions opts;
  opts.abs_tol = tol;
  return adaptive_quadrature(std::forward<F>(f), a, b, opts, breakpoints);
}

/// Bisection on a bracketed sign change of f, to an absolute width of `xtol`.
template <class F>
double bisect_root(F& f, double a, double b, double fa, double xtol = 1e-10) {
  for (int it = 0; it < 200 && b - a > xtol; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

/// Integral of |f| over [a, b].
///
/// Each piece between consecutive breakpoints is scanned with step at most
/// `scan_step`; sign changes found by the scan are located by bisection and
/// the integrand is split there, so every quadrature panel sees a smooth
/// function. The tolerance is shared among pieces in proportion to length.
template <class F>
QuadratureResult integrate_abs(F&& f, double a, double b, std::span<const double> breakpoints,
                               double scan_step, double tol) {
  if (!(a < b)) return {0.0, 0.0, 0};
  std::vector<double> cuts{a};
  for (double x : breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto abs_f = [&f](double x) { return std::abs(f(x)); };
  QuadratureResult out;
  const double total_len = b - a;
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    const double len = hi - lo;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / scan_step)));
    roots.clear();
    // Interior scan points only: the ends may sit on a kink.
    double prev_x = lo + 1e-12 * len;
    double prev_f = f(prev_x);
    ++out.evaluations;
    for (std::size_t j = 1; j <= n; ++j) {
      const double x = (j == n) ? hi - 1e-12 * len : lo + len * static_cast<double>(j) / static_cast<double>(n);
      const double fx = f(x);
      ++out.evaluations;
      if ((fx < 0.0 && prev_f > 0.0) || (fx > 0.0 && prev_f < 0.0))
        roots.push_back(bisect_root(f, prev_x, x, prev_f));
      prev_x = x;
      prev_f = fx;
    }
    QuadratureOptions opts;
    opts.abs_tol = tol * len / total_len;
    opts.max_segments = QuadratureOptions{}.max_segments + 16 * n;
    auto r = adaptive_quadrature(abs_f, lo, hi, opts, roots);
    out.value += r.value;
    out.error_estimate += r.error_estimate;
    out.evaluations += r.evaluations;
  }
  return out;
}

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Normalized sinc, sin(pi t) / (pi t), with sinc(0) = 1.
inline double sinc(double t) {
  const double x = std::numbers::pi * t;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
  return std::tgamma(x);
}

/// Sine integral Si(x) = int_0^x sin(s)/s ds.
inline double sine_integral(double x) {
  const double ax = std::abs(x);
  const double sign = x < 0.0 ? -1.0 : 1.0;
  if (ax < 2.0) {
    // Power series; terms alternate and shrink fast for |x| < 2.
    double term = ax;
    double sum = ax;
    const double x2 = ax * ax;
    for (int k = 1; k < 40; ++k) {
      term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      const double add = term / (2.0 * k + 1.0);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return sign * sum;
  }
  // Continued fraction for E1(i x), evaluated with the modified Lentz method.
  using cplx = std::complex<double>;
  constexpr double tiny = 1e-300;
  cplx b(1.0, ax);
  cplx c(1.0 / tiny, 0.0);
  cplx d = 1.0 / b;
  cplx h = d;
  for (int i = 2; i < 200; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cplx del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
  }
  h *= cplx(std::cos(ax), -std::sin(ax));
  return sign * (0.5 * std::numbers::pi + h.imag());
}

namespace detail {

inline void check_half_order(int order_num) {
  if (order_num < 1 || order_num % 2 == 0)
    throw std::invalid_argument("bessel_j_half: order numerator must be an odd positive integer");
}

}  // namespace detail

/// J_nu(x) / x^nu for nu = order_num / 2 from the ascending series.
/// Accurate for small and moderate x (used below the crossover).
inline double bessel_j_half_series_scaled(int order_num, double x) {
  detail::check_half_order(order_num);
  const double nu = 0.5 * order_num;
  const double q = -0.25 * x * x;
  // Leading coefficient 1 / (2^nu Gamma(nu + 1)).
  double term = 1.0 / (std::pow(2.0, nu) * gamma_fn(nu + 1.0));
  double sum = term;
  for (int j = 1; j < 80; ++j) {
    term *= q / (static_cast<double>(j) * (nu + j));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

inline double bessel_j_half_series(int order_num, double x) {
  if (x < 0.0) throw std::domain_error("bessel_j_half: x must be non-negative");
  return std::pow(x, 0.5 * order_num) * bessel_j_half_series_scaled(order_num, x);
}

/// Forward recurrence J_{nu+1} = (2 nu / x) J_nu - J_{nu-1}, seeded with the
/// elementary J_{1/2} and J_{-1/2}. Requires x > 0.
inline double bessel_j_half_recurrence(int order_num, double x) {
  detail::check_half_order(order_num);
  if (!(x > 0.0)) throw std::domain_error("bessel_j_half: recurrence needs x > 0");
  const double s = std::sqrt(2.0 / (std::numbers::pi * x));
  double prev = s * std::cos(x);  // J_{-1/2}
  double cur = s * std::sin(x);   // J_{1/2}
  for (int twice_nu = 1; twice_nu < order_num; twice_nu += 2) {
    const double next = (static_cast<double>(twice_nu) / x) * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

inline constexpr double kBesselCrossover = 1.0;

/// Series below max(1, 2 nu): forward recurrence loses digits while x < nu.
inline double bessel_crossover(int order_num) { return std::max(kBesselCrossover, static_cast<double>(order_num)); }

/// Bessel function of half-integer order order_num / 2.
inline double bessel_j_half(int order_num, double x) {
  detail::check_half_order(order_num);
  if (x < 0.0) throw std::domain_error("bessel_j_half: x must be non-negative");
  if (x < bessel_crossover(order_num)) return bessel_j_half_series(order_num, x);
  return bessel_j_half_recurrence(order_num, x);
}

/// J_nu(x) / x^nu with the removable singularity at 0 handled by the series.
inline double bessel_j_half_scaled(int order_num, double x) {
  if (x < 0.0) throw std::domain_error("bessel_j_half: x must be non-negative");
  if (x < bessel_crossover(order_num)) return bessel_j_half_series_scaled(order_num, x);
  return bessel_j_half_recurrence(order_num, x) / std::pow(x, 0.5 * order_num);
}

// ---------------------------------------------------------------------------
// Series truncation
// ---------------------------------------------------------------------------

/// |chi(x)| <= constant / (|x| - shift)^exponent for |x| >= valid_from.
struct DecayEnvelope {
  double exponent = 2.0;
  double constant = 1.0;
  double shift = 0.0;
  double valid_from = 0.0;

  double operator()(double x) const { return constant / std::pow(std::abs(x) - shift, exponent); }

  /// Upper bound for int_x^inf |chi|; infinite where the envelope does not apply.
  double tail_mass(double x) const {
    if (x < valid_from || x <= shift) return std::numeric_limits<double>::infinity();
    return constant / ((exponent - 1.0) * std::pow(x - shift, exponent - 1.0));
  }
};

class TruncationPolicy {
 public:
  enum class Mode { compact_support, polynomial_decay };

  static TruncationPolicy compact(double radius, double tolerance) {
    if (!(radius >= 0.0)) throw std::invalid_argument("TruncationPolicy: radius must be >= 0");
    TruncationPolicy p(Mode::compact_support, tolerance);
    p.radius_ = radius;
    return p;
  }

  static TruncationPolicy polynomial(const DecayEnvelope& env, double tolerance) {
    if (!(env.exponent > 1.0))
      throw std::invalid_argument("TruncationPolicy: decay exponent must exceed 1 for a summable tail");
    if (!(env.constant > 0.0)) throw std::invalid_argument("TruncationPolicy: decay constant must be positive");
    TruncationPolicy p(Mode::polynomial_decay, tolerance);
    p.envelope_ = env;
    return p;
  }

  Mode mode() const { return mode_; }
  double tolerance() const { return tolerance_; }
  double radius() const { return radius_; }
  const DecayEnvelope& envelope() const { return envelope_; }

  /// Bound on sum_{|k - u| > K} |chi(u - k)|, uniform in u.
  double tail_bound(long K) const {
    if (mode_ == Mode::compact_support) return static_cast<double>(K) > radius_ ? 0.0 : std::numeric_limits<double>::infinity();
    const double x = static_cast<double>(K);
    if (x < envelope_.valid_from || x - envelope_.shift < 1.0) return std::numeric_limits<double>::infinity();
    // Per side: first neglected term plus the integral comparison for the rest.
    const double first = envelope_(x);
    return 2.0 * (first + envelope_.tail_mass(x));
  }

 private:
  TruncationPolicy(Mode mode, double tolerance) : mode_(mode), tolerance_(tolerance) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("TruncationPolicy: tolerance must be positive");
  }

  Mode mode_;
  double tolerance_;
  double radius_ = 0.0;
  DecayEnvelope envelope_{};
};

/// Smallest K whose neglected tail sum_{|k - u| > K} |chi(u - k)| is within
/// the policy tolerance. The bound is uniform in u, hence in w and t.
inline long series_truncation_radius(const TruncationPolicy& policy) {
  if (policy.mode() == TruncationPolicy::Mode::compact_support)
    return static_cast<long>(std::ceil(policy.radius())) + 1;

  long lo = static_cast<long>(std::ceil(std::max(policy.envelope().valid_from,
                                                 policy.envelope().shift + 1.0)));
  if (policy.tail_bound(lo) <= policy.tolerance()) return lo;
  long hi = std::max(2 * lo, 2L);
  while (policy.tail_bound(hi) > policy.tolerance()) {
    if (hi > (1L << 40)) throw std::invalid_argument("series_truncation_radius: tolerance unreachable");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (policy.tail_bound(mid) <= policy.tolerance())
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace varsamp

#endif  // VARSAMP_NUMERICS_HPP
