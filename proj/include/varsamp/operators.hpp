#ifndef VARSAMP_OPERATORS_HPP
#define VARSAMP_OPERATORS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "kernels.hpp"
#include "numerics.hpp"
#include "signals.hpp"

namespace varsamp {

inline constexpr double kDefaultTruncationTol = 1e-6;

struct OperatorParams {
  double w = 1.0;  // sampling rate
  int m = 1;       // averaging order
  double truncation_tol = kDefaultTruncationTol;

  void validate() const {
    if (!(w > 0.0)) throw std::invalid_argument("OperatorParams: w must be positive");
    if (m < 1) throw std::invalid_argument("OperatorParams: m must be >= 1");
    if (!(truncation_tol > 0.0)) throw std::invalid_argument("OperatorParams: truncation_tol must be positive");
  }
};

struct IndexRange {
  long lo = 0;
  long hi = -1;
  bool empty() const { return hi < lo; }
};

namespace detail {

inline void check_rate(double w) {
  if (!(w > 0.0)) throw std::invalid_argument("sampling rate w must be positive");
}

inline long floor_l(double x) { return static_cast<long>(std::floor(x)); }
inline long ceil_l(double x) { return static_cast<long>(std::ceil(x)); }

}  // namespace detail

/// Samples f(k/w), tabulated over an index range. Outside the table a sample
/// is the constant extension when f has one there, else f is evaluated.
class SampleTable {
 public:
  SampleTable(const Signal& f, double w, IndexRange range) : f_(&f), w_(w) {
    detail::check_rate(w);
    range = clip(range);
    lo_ = range.lo;
    if (!range.empty()) {
      values_.resize(static_cast<std::size_t>(range.hi - range.lo + 1));
      for (long k = range.lo; k <= range.hi; ++k) values_[static_cast<std::size_t>(k - lo_)] = raw(k);
    }
  }

  double operator()(long k) const {
    const long i = k - lo_;
    if (i >= 0 && i < static_cast<long>(values_.size())) return values_[static_cast<std::size_t>(i)];
    return raw(k);
  }

  /// Restrict `r` to indices whose sample can be nonzero.
  IndexRange clip(IndexRange r) const {
    if (f_->constant_outside) {
      if (f_->left_value == 0.0) r.lo = std::max(r.lo, detail::ceil_l(f_->essential_window.lo * w_) - 1);
      if (f_->right_value == 0.0) r.hi = std::min(r.hi, detail::floor_l(f_->essential_window.hi * w_) + 1);
    }
    return r;
  }

  double w() const { return w_; }

 private:
  double raw(long k) const {
    const double x = static_cast<double>(k) / w_;
    if (f_->constant_outside) {
      if (x < f_->essential_window.lo) return f_->left_value;
      if (x > f_->essential_window.hi) return f_->right_value;
    }
    return f_->value(x);
  }

  const Signal* f_;
  double w_;
  long lo_ = 0;
  std::vector<double> values_;
};

/// Sample index range needed to evaluate a sampling sum for t in `t_range`
/// with kernel arguments shifted by up to +-shift.
inline IndexRange sampling_index_range(double w, const Interval& t_range, long K, double shift = 0.0) {
  return {detail::floor_l(w * t_range.lo - shift) - K, detail::ceil_l(w * t_range.hi + shift) + K};
}

/// S_w f, S_bar^m_w f and its derivative for one signal, kernel and rate,
/// with samples tabulated for t in a given range.
class SamplingOperators {
 public:
  SamplingOperators(const Signal& f, const AveragedKernel& ak, double w, const Interval& t_range,
                    double truncation_tol = kDefaultTruncationTol)
      : ak_(ak),
        w_(w),
        base_radius_(series_truncation_radius(ak.base().truncation(truncation_tol))),
        averaged_radius_(series_truncation_radius(ak.truncation(truncation_tol))),
        samples_(f, w, sampling_index_range(w, t_range, std::max(base_radius_, averaged_radius_), 0.5 * ak.m() + 1.0)) {}

  /// S_w f(t) with the base kernel.
  double sampling(double t) const {
    const double u = w_ * t;
    return sum(u, base_radius_, [this](double x) { return ak_.base()(x); });
  }

  /// S_bar^m_w f(t).
  double averaged(double t) const {
    const double u = w_ * t;
    return sum(u, averaged_radius_, [this](double x) { return ak_(x); });
  }

  /// (S_bar^m_w f)'(t) = (w/m) sum_k f(k/w) [chi(wt-k+m/2) - chi(wt-k-m/2)].
  double averaged_derivative(double t) const {
    const double u = w_ * t;
    const double h = 0.5 * ak_.m();
    const auto r = samples_.clip({detail::floor_l(u - h) - base_radius_, detail::ceil_l(u + h) + base_radius_});
    const auto& chi = ak_.base();
    double s = 0.0;
    for (long k = r.lo; k <= r.hi; ++k) {
      const double x = u - static_cast<double>(k);
      s += samples_(k) * (chi(x + h) - chi(x - h));
    }
    return w_ / ak_.m() * s;
  }

  const SampleTable& samples() const { return samples_; }
  const AveragedKernel& kernel() const { return ak_; }
  double w() const { return w_; }

 private:
  template <class Chi>
  double sum(double u, long K, Chi&& chi) const {
    const auto r = samples_.clip({detail::floor_l(u) - K, detail::ceil_l(u) + K});
    double s = 0.0;
    for (long k = r.lo; k <= r.hi; ++k) s += samples_(k) * chi(u - static_cast<double>(k));
    return s;
  }

  AveragedKernel ak_;
  double w_;
  long base_radius_;
  long averaged_radius_;
  SampleTable samples_;
};

/// (S_w f)(t) = sum_k f(k/w) chi(wt - k), truncated at the certified radius.
inline double sampling_series(const Signal& f, const Kernel& chi, double w, double t,
                              double truncation_tol = kDefaultTruncationTol) {
  detail::check_rate(w);
  const long K = series_truncation_radius(chi.truncation(truncation_tol));
  const double u = w * t;
  SampleTable samples(f, w, {});
  const auto r = samples.clip({detail::floor_l(u) - K, detail::ceil_l(u) + K});
  double s = 0.0;
  for (long k = r.lo; k <= r.hi; ++k) s += samples(k) * chi(u - static_cast<double>(k));
  return s;
}

inline double averaged_sampling_series(const Signal& f, const AveragedKernel& ak, double w, double t,
                                       double truncation_tol = kDefaultTruncationTol) {
  return SamplingOperators(f, ak, w, {t, t}, truncation_tol).averaged(t);
}

inline double averaged_sampling_derivative(const Signal& f, const AveragedKernel& ak, double w, double t,
                                           double truncation_tol = kDefaultTruncationTol) {
  return SamplingOperators(f, ak, w, {t, t}, truncation_tol).averaged_derivative(t);
}

/// Sampling-Kantorovich series (K_w f)(t) = sum_k [w int_{k/w}^{(k+1)/w} f] chi(wt - k).
///
/// Cell means are computed once for every cell reachable from `t_range`;
/// cells lying entirely in a constant region of f take that constant without
/// quadrature. Jumps and kinks of f split the cell quadrature.
class KantorovichSeries {
 public:
  KantorovichSeries(const Signal& f, const Kernel& chi, double w, const Interval& t_range,
                    double truncation_tol = kDefaultTruncationTol)
      : f_(f), chi_(chi), w_(w), K_(series_truncation_radius(chi.truncation(truncation_tol))) {
    detail::check_rate(w);
    breaks_ = f_.breakpoints();
    IndexRange r{detail::floor_l(w * t_range.lo) - K_ - 1, detail::ceil_l(w * t_range.hi) + K_ + 1};
    if (f_.constant_outside) {
      r.lo = std::max(r.lo, detail::floor_l(f_.essential_window.lo * w) - 1);
      r.hi = std::min(r.hi, detail::ceil_l(f_.essential_window.hi * w) + 1);
    }
    lo_ = r.lo;
    if (!r.empty()) {
      means_.resize(static_cast<std::size_t>(r.hi - r.lo + 1));
      for (long k = r.lo; k <= r.hi; ++k) means_[static_cast<std::size_t>(k - lo_)] = compute_mean(k);
    }
  }

  double cell_mean(long k) const {
    const long i = k - lo_;
    if (i >= 0 && i < static_cast<long>(means_.size())) return means_[static_cast<std::size_t>(i)];
    return compute_mean(k);
  }

  double operator()(double t) const {
    const double u = w_ * t;
    IndexRange r{detail::floor_l(u) - K_, detail::ceil_l(u) + K_};
    if (f_.constant_outside) {
      if (f_.left_value == 0.0) r.lo = std::max(r.lo, detail::floor_l(f_.essential_window.lo * w_) - 1);
      if (f_.right_value == 0.0) r.hi = std::min(r.hi, detail::ceil_l(f_.essential_window.hi * w_) + 1);
    }
    double s = 0.0;
    for (long k = r.lo; k <= r.hi; ++k) s += cell_mean(k) * chi_(u - static_cast<double>(k));
    return s;
  }

  double w() const { return w_; }
  long truncation_radius() const { return K_; }

 private:
  double compute_mean(long k) const {
    const double a = static_cast<double>(k) / w_;
    const double b = static_cast<double>(k + 1) / w_;
    if (f_.constant_outside) {
      if (b <= f_.essential_window.lo) return f_.left_value;
      if (a >= f_.essential_window.hi) return f_.right_value;
    }
    QuadratureOptions opts;
    opts.abs_tol = 1e-15;
    opts.rel_tol = 1e-13;
    return w_ * adaptive_quadrature(f_.value, a, b, opts, breaks_).value;
  }

  Signal f_;
  Kernel chi_;
  double w_;
  long K_;
  std::vector<double> breaks_;
  long lo_ = 0;
  std::vector<double> means_;
};

inline double kantorovich(const Signal& f, const Kernel& chi, double w, double t,
                          double truncation_tol = kDefaultTruncationTol) {
  return KantorovichSeries(f, chi, w, {t, t}, truncation_tol)(t);
}

namespace detail {

inline void check_ac(const Signal& f) {
  if (!f.is_ac || !f.has_derivative())
    throw std::domain_error("signal " + f.id + " is not absolutely continuous with a known derivative");
}

}  // namespace detail

/// |(S_bar^m_w f)'(t) - (1/m) sum_{i=1}^m (K_w f')(t - (m - 2(i-1)) / (2w))| on a grid of t.
///
/// The left side sums point samples of f against shifted base kernels; the
/// right side sums quadrature cell means of f'. No code is shared between them.
inline std::vector<double> derivative_identity_residuals(const Signal& f, const Kernel& base, int m, double w,
                                                         std::span<const double> ts,
                                                         double truncation_tol = kDefaultTruncationTol) {
  detail::check_ac(f);
  detail::check_rate(w);
  if (ts.empty()) return {};
  const auto [mn, mx] = std::minmax_element(ts.begin(), ts.end());
  const Interval range{*mn, *mx};
  const double shift = m / (2.0 * w);

  SamplingOperators lhs(f, AveragedKernel(base, m), w, range, truncation_tol);
  KantorovichSeries rhs(f.derivative_signal(), base, w, range.grown(shift), truncation_tol);

  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) {
    double mean = 0.0;
    for (int i = 1; i <= m; ++i) mean += rhs(t - (m - 2.0 * (i - 1)) / (2.0 * w));
    out.push_back(std::abs(lhs.averaged_derivative(t) - mean / m));
  }
  return out;
}

inline double derivative_identity_residual(const Signal& f, const Kernel& base, int m, double w, double t,
                                           double truncation_tol = kDefaultTruncationTol) {
  const double ts[] = {t};
  return derivative_identity_residuals(f, base, m, w, ts, truncation_tol).front();
}

/// (S_bar^m_w f)' in the differenced form
/// (w/m) sum_k [f(k/w) - f((k-m)/w)] chi(wt - k + m/2).
///
/// Only differences touching the essential window of f are kept, which makes
/// this a finite sum for any kernel; the dropped part is bounded by
/// m * (variation of f outside the window).
class DifferencedDerivative {
 public:
  DifferencedDerivative(const Signal& f, const Kernel& base, int m, double w) : base_(base), m_(m), w_(w) {
    detail::check_rate(w);
    if (m < 1) throw std::invalid_argument("DifferencedDerivative: m must be >= 1");
    const auto& win = f.essential_window;
    lo_ = detail::ceil_l(win.lo * w) - 1;
    const long hi = detail::floor_l(win.hi * w) + m + 1;
    diffs_.resize(static_cast<std::size_t>(hi - lo_ + 1));
    for (long k = lo_; k <= hi; ++k) {
      const double d = f(static_cast<double>(k) / w) - f(static_cast<double>(k - m) / w);
      diffs_[static_cast<std::size_t>(k - lo_)] = d;
      abs_sum_ += std::abs(d);
    }
    neglected_ = f.constant_outside ? 0.0 : m * f.tail_variation(win);
  }

  double operator()(double t) const {
    const double arg0 = w_ * t + 0.5 * m_;  // kernel argument is arg0 - k
    long a = lo_, b = hi();
    if (base_.is_compact()) {
      const double r = base_.radius();
      a = std::max(a, detail::floor_l(arg0 - r));
      b = std::min(b, detail::ceil_l(arg0 + r));
    }
    double s = 0.0;
    for (long k = a; k <= b; ++k) s += diffs_[static_cast<std::size_t>(k - lo_)] * base_(arg0 - static_cast<double>(k));
    return w_ / m_ * s;
  }

  long lo() const { return lo_; }
  long hi() const { return lo_ + static_cast<long>(diffs_.size()) - 1; }
  double abs_sum() const { return abs_sum_; }
  double neglected_abs_sum() const { return neglected_; }

  /// Points in `window` where the integrand inherits a base-kernel breakpoint.
  std::vector<double> breakpoints(const Interval& window) const {
    std::vector<double> out;
    if (base_.breakpoints.empty()) return out;
    const double h = 0.5 * m_;
    for (long k = lo_; k <= hi(); ++k) {
      if (diffs_[static_cast<std::size_t>(k - lo_)] == 0.0) continue;
      for (double bp : base_.breakpoints) {
        const double t = (static_cast<double>(k) - h + bp) / w_;
        if (t > window.lo && t < window.hi) out.push_back(t);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Bound on int_{R \ window} |(S_bar f)'| plus the contribution of dropped differences.
  double tail_bound(const Interval& window, double base_l1) const {
    const double h = 0.5 * m_;
    double tail = 0.0;
    for (long k = lo_; k <= hi(); ++k) {
      const double d = std::abs(diffs_[static_cast<std::size_t>(k - lo_)]);
      if (d == 0.0) continue;
      const double kk = static_cast<double>(k);
      tail += d * (base_.tail_mass(w_ * window.hi + h - kk) + base_.tail_mass(kk - h - w_ * window.lo));
    }
    tail /= m_;
    if (neglected_ > 0.0) tail += base_l1 * neglected_ / m_;
    return tail;
  }

 private:
  Kernel base_;
  int m_;
  double w_;
  long lo_ = 0;
  std::vector<double> diffs_;
  double abs_sum_ = 0.0;
  double neglected_ = 0.0;
};

}  // namespace varsamp

#endif  // VARSAMP_OPERATORS_HPP
