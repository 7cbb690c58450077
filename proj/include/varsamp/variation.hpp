#ifndef VARSAMP_VARIATION_HPP
#define VARSAMP_VARIATION_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "numerics.hpp"
#include "operators.hpp"
#include "parallel.hpp"
#include "signals.hpp"

namespace varsamp {

struct TracePoint {
  std::size_t points = 0;
  double value = 0.0;
};

/// Variation of a function over `window`; `tail_bound` bounds what lies outside.
struct VariationEstimate {
  double value = 0.0;
  std::size_t partition_points = 0;
  Interval window;
  double tail_bound = 0.0;
  std::vector<TracePoint> refinement_trace;
  bool capped = false;  // refinement stopped at the point cap: value is a lower bound only

  double upper() const { return value + tail_bound; }
};

class WindowTooSmall : public std::invalid_argument {
 public:
  WindowTooSmall(const Interval& given, const Interval& required)
      : std::invalid_argument("window [" + format_g(given.lo) + ", " + format_g(given.hi) +
                              "] too small: it must contain [" + format_g(required.lo) + ", " +
                              format_g(required.hi) + "]"),
        required_(required) {}
  const Interval& required() const { return required_; }

 private:
  Interval required_;
};

/// Essential window of f grown by (m/2 + r)/w + 1, with r the support radius
/// (0 for kernels without compact support).
inline Interval required_window(const Signal& f, const AveragedKernel& ak, double w) {
  const double r = ak.base().is_compact() ? ak.base().radius() : 0.0;
  return f.essential_window.grown((0.5 * ak.m() + r) / w + 1.0);
}

/// Window on which the variation of the operator output is integrated: the
/// required window, widened for decaying kernels until the neglected tail of
/// |(S_bar f)'| is at most `tail_tol`.
inline Interval operator_variation_window(const Signal& f, const AveragedKernel& ak, double w, double tail_tol) {
  const Interval req = required_window(f, ak, w);
  if (ak.base().is_compact()) return req;
  const DifferencedDerivative dd(f, ak.base(), ak.m(), w);
  if (dd.abs_sum() == 0.0) return req;
  const double x = ak.base().window_half_width(tail_tol * ak.m() / dd.abs_sum());
  const Interval wide = f.essential_window.grown((x + 0.5 * ak.m()) / w + 1.0);
  return {std::min(wide.lo, req.lo), std::max(wide.hi, req.hi)};
}

/// V[S_bar^m_w f] as the integral of |(S_bar^m_w f)'| over `window`, split at
/// the sign changes of the derivative.
inline VariationEstimate variation_of_operator_output(const Signal& f, const AveragedKernel& ak, double w,
                                                      const Interval& window, double tol = 1e-9) {
  detail::check_rate(w);
  const Interval req = required_window(f, ak, w);
  if (!window.contains(req)) throw WindowTooSmall(window, req);
  const DifferencedDerivative dd(f, ak.base(), ak.m(), w);

  VariationEstimate est;
  est.window = window;
  if (dd.abs_sum() == 0.0 && dd.neglected_abs_sum() == 0.0) {
    est.refinement_trace.push_back({0, 0.0});
    return est;
  }
  const auto breaks = dd.breakpoints(window);
  const auto r = integrate_abs(dd, window.lo, window.hi, breaks, 1.0 / (8.0 * w), tol);
  est.value = r.value;
  est.partition_points = r.evaluations;
  est.tail_bound = dd.tail_bound(window, l1_norm_upper(ak.base()));
  est.refinement_trace.push_back({r.evaluations, r.value});
  return est;
}

inline constexpr std::size_t kDefaultPartitionPoints = (1u << 12) + 1;
inline constexpr std::size_t kPartitionCap = (1u << 20) + 1;

struct RefinementOptions {
  std::size_t initial_points = kDefaultPartitionPoints;
  std::size_t cap = kPartitionCap;
  double rel_tol = 1e-3;
  double truncation_tol = kDefaultTruncationTol;
};

namespace detail {

inline std::size_t nested_size(std::size_t points) {
  std::size_t n = 2;
  while (n + 1 < points) n *= 2;
  return n + 1;
}

}  // namespace detail

/// Partition-sum variation of g over `window` on nested uniform partitions of
/// 2^j + 1 points, each also holding the points in `extra`. The point count
/// doubles until two successive sums agree to `rel_tol` or the cap is hit.
template <class G>
VariationEstimate refine_partition_variation(G&& g, const Interval& window, std::span<const double> extra,
                                             const RefinementOptions& opts) {
  if (!(window.lo < window.hi)) throw std::invalid_argument("partition variation: empty window");
  std::size_t n = detail::nested_size(std::max<std::size_t>(opts.initial_points, 3));
  const std::size_t cap = detail::nested_size(std::max(opts.cap, n));

  auto node = [&](std::size_t i, std::size_t count) {
    if (i + 1 == count) return window.hi;
    return window.lo + window.length() * static_cast<double>(i) / static_cast<double>(count - 1);
  };

  std::vector<double> xs_extra;
  for (double x : extra)
    if (x > window.lo && x < window.hi) xs_extra.push_back(x);
  std::sort(xs_extra.begin(), xs_extra.end());
  xs_extra.erase(std::unique(xs_extra.begin(), xs_extra.end()), xs_extra.end());
  std::vector<double> g_extra(xs_extra.size());
  for (std::size_t i = 0; i < xs_extra.size(); ++i) g_extra[i] = g(xs_extra[i]);

  std::vector<double> g_uniform(n);
  for (std::size_t i = 0; i < n; ++i) g_uniform[i] = g(node(i, n));

  auto partition_sum = [&](std::size_t count) {
    double total = 0.0;
    std::size_t j = 0;
    double prev = g_uniform[0];
    for (std::size_t i = 1; i < count; ++i) {
      const double x = node(i, count);
      for (; j < xs_extra.size() && xs_extra[j] <= x; ++j) {
        if (xs_extra[j] == x) continue;
        total += std::abs(g_extra[j] - prev);
        prev = g_extra[j];
      }
      total += std::abs(g_uniform[i] - prev);
      prev = g_uniform[i];
    }
    return total;
  };

  VariationEstimate est;
  est.window = window;
  double value = partition_sum(n);
  est.refinement_trace.push_back({n + xs_extra.size(), value});
  for (;;) {
    if (n >= cap) {
      est.capped = true;
      break;
    }
    const std::size_t m = 2 * n - 1;
    std::vector<double> next(m);
    for (std::size_t i = 0; i < n; ++i) next[2 * i] = g_uniform[i];
    for (std::size_t i = 1; i < m; i += 2) next[i] = g(node(i, m));
    g_uniform = std::move(next);
    n = m;
    const double refined = partition_sum(n);
    est.refinement_trace.push_back({n + xs_extra.size(), refined});
    const bool settled = std::abs(refined - value) <= opts.rel_tol * std::abs(refined);
    value = refined;
    if (settled) break;
  }
  est.value = value;
  est.partition_points = n + xs_extra.size();
  return est;
}

/// Partition points that pin each jump of f: x - delta, x, x + delta.
inline std::vector<double> jump_points(const Signal& f, const Interval& window) {
  const double delta = 1e-10 * std::max(1.0, window.length());
  std::vector<double> out;
  for (const auto& j : f.discontinuities) {
    out.push_back(j.location - delta);
    out.push_back(j.location);
    out.push_back(j.location + delta);
  }
  return out;
}

/// V[S_bar^m_w f - f] by partition sums with the jumps of f in every partition.
inline VariationEstimate variation_of_difference(const Signal& f, const AveragedKernel& ak, double w,
                                                 const Interval& window, const RefinementOptions& opts = {}) {
  detail::check_rate(w);
  const SamplingOperators ops(f, ak, w, window, opts.truncation_tol);
  auto g = [&](double t) { return ops.averaged(t) - f(t); };
  const auto extra = jump_points(f, window);
  auto est = refine_partition_variation(g, window, extra, opts);
  const DifferencedDerivative dd(f, ak.base(), ak.m(), w);
  const Interval req = required_window(f, ak, w);
  if (ak.base().is_compact() && f.constant_outside && window.contains(req))
    est.tail_bound = 0.0;
  else
    est.tail_bound = dd.tail_bound(window, l1_norm_upper(ak.base())) + f.tail_variation(window);
  return est;
}

inline VariationEstimate variation_of_difference(const Signal& f, const AveragedKernel& ak, double w,
                                                 const Interval& window, std::size_t points) {
  RefinementOptions opts;
  opts.initial_points = points;
  return variation_of_difference(f, ak, w, window, opts);
}

struct DetractingReport {
  double lhs = 0.0;            // V[S_bar f] + tail bound
  double rhs = 0.0;            // ||chi||_1 V[f] / m
  double corrected_rhs = 0.0;  // ||chi||_1 V[f]
  bool pass = false;
  bool corrected_pass = false;
  VariationEstimate estimate;
};

inline constexpr double kDetractingRelTol = 1e-6;
inline constexpr double kDetractingAbsTol = 1e-4;

/// Compares V[S_bar^m_w f] with ||chi||_1 V[f] / m and with ||chi||_1 V[f].
/// The integration window of a decaying kernel is widened only as far as
/// needed to decide both comparisons.
inline DetractingReport detracting_check(const Signal& f, const Kernel& base, int m, double w) {
  if (std::isnan(f.exact_variation)) throw std::invalid_argument("detracting_check: V[f] unknown for " + f.id);
  const AveragedKernel ak(base, m);
  const double l1 = l1_norm_upper(base);
  DetractingReport rep;
  rep.rhs = l1 * f.exact_variation / m;
  rep.corrected_rhs = l1 * f.exact_variation;
  const auto threshold = [](double rhs) { return rhs * (1.0 + kDetractingRelTol) + kDetractingAbsTol; };
  const auto decided = [&](double rhs) {
    return rep.lhs <= threshold(rhs) || rep.estimate.value > threshold(rhs);
  };
  for (double tail_tol : {1e-3, 1e-4, 5e-5}) {
    rep.estimate = variation_of_operator_output(f, ak, w, operator_variation_window(f, ak, w, tail_tol));
    rep.lhs = rep.estimate.upper();
    if (base.is_compact() || (decided(rep.rhs) && decided(rep.corrected_rhs))) break;
  }
  rep.pass = rep.lhs <= threshold(rep.rhs);
  rep.corrected_pass = rep.lhs <= threshold(rep.corrected_rhs);
  return rep;
}

struct L1Error {
  double value = 0.0;
  double tail_bound = 0.0;
  double upper() const { return value + tail_bound; }
};

/// Essential window of f grown by (r + 1)/w + 1 (r = 0 without compact support).
inline Interval kantorovich_window(const Signal& f, const Kernel& chi, double w) {
  const double r = chi.is_compact() ? chi.radius() : 0.0;
  return f.essential_window.grown((r + 1.0) / w + 1.0);
}

/// ||K_w f' - f'||_1: quadrature over `window` plus a bound for the rest of the line.
inline L1Error kantorovich_l1_error(const Signal& f, const Kernel& chi, double w, const Interval& window,
                                    double tol = 1e-9, double truncation_tol = kDefaultTruncationTol) {
  if (!f.has_derivative()) throw std::domain_error("kantorovich_l1_error: signal " + f.id + " has no derivative");
  detail::check_rate(w);
  const Signal df = f.derivative_signal();
  const KantorovichSeries series(df, chi, w, window, truncation_tol);

  std::vector<double> breaks = f.breakpoints();
  if (!chi.breakpoints.empty()) {
    const long lo = detail::floor_l(w * window.lo) - 1;
    const long hi = detail::ceil_l(w * window.hi) + 1;
    for (long k = lo; k <= hi; ++k)
      for (double b : chi.breakpoints) breaks.push_back((static_cast<double>(k) + b) / w);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto diff = [&](double t) { return series(t) - df(t); };
  L1Error out;
  out.value = integrate_abs(diff, window.lo, window.hi, breaks, 1.0 / (8.0 * w), tol).value;

  const double l1 = l1_norm_upper(chi);
  const double outside = f.tail_variation(window);  // int of |f'| off the window
  out.tail_bound = (1.0 + l1) * outside;
  const long k_lo = detail::floor_l(w * window.lo);
  const long k_hi = detail::ceil_l(w * window.hi) - 1;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double c = std::abs(series.cell_mean(k));
    if (c == 0.0) continue;
    const double kk = static_cast<double>(k);
    const double mass = chi.tail_mass(w * window.hi - kk) + chi.tail_mass(kk - w * window.lo);
    out.tail_bound += c / w * std::min(l1, mass);
  }
  return out;
}

inline L1Error kantorovich_l1_error(const Signal& f, const Kernel& chi, double w) {
  return kantorovich_l1_error(f, chi, w, kantorovich_window(f, chi, w));
}

struct ConvergenceRow {
  double w = 0.0;
  VariationEstimate v_diff;
  VariationEstimate v_op;
  double bound = 0.0;
  double wall_time = 0.0;  // seconds
};

struct StudyOptions {
  double tail_tol = 1e-4;
  RefinementOptions refinement{};
};

/// Window shared by every row of a study: sized for the smallest rate.
inline Interval study_window(const Signal& f, const AveragedKernel& ak, double w_min, double tail_tol) {
  return operator_variation_window(f, ak, w_min, tail_tol);
}

/// One row per rate: V[S_bar f - f], V[S_bar f] and ||chi||_1 V[f] / m.
/// Rows are computed in parallel and returned in the order of `w_list`.
inline std::vector<ConvergenceRow> convergence_study(const Signal& f, const Kernel& base, int m,
                                                     std::span<const double> w_list, const StudyOptions& opts = {}) {
  if (w_list.empty()) throw std::invalid_argument("convergence_study: empty rate list");
  for (std::size_t i = 0; i < w_list.size(); ++i) {
    detail::check_rate(w_list[i]);
    if (i > 0 && !(w_list[i] > w_list[i - 1])) throw std::invalid_argument("convergence_study: rates must ascend");
  }
  const AveragedKernel ak(base, m);
  const Interval window = study_window(f, ak, w_list.front(), opts.tail_tol);
  const double bound = std::isnan(f.exact_variation) ? std::numeric_limits<double>::quiet_NaN()
                                                     : l1_norm_upper(base) * f.exact_variation / m;
  return parallel_map<ConvergenceRow>(w_list.size(), [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    ConvergenceRow row;
    row.w = w_list[i];
    row.v_diff = variation_of_difference(f, ak, row.w, window, opts.refinement);
    row.v_op = variation_of_operator_output(f, ak, row.w, window);
    row.bound = bound;
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
  });
}

}  // namespace varsamp

#endif  // VARSAMP_VARIATION_HPP
