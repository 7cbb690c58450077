#ifndef VARSAMP_SIGNALS_HPP
#define VARSAMP_SIGNALS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace varsamp {

struct Jump {
  double location = 0.0;
  double magnitude = 0.0;  // f(x+) - f(x-)
};

/// A bounded test function with known variation.
///
/// Outside `essential_window` the function is the constant `left_value` /
/// `right_value` when `constant_outside` is set; otherwise
/// `variation_outside(I)` bounds the variation of f on R \ I for any I that
/// contains the origin.
struct Signal {
  std::string id;
  std::function<double(double)> value;
  std::function<double(double)> derivative;  // empty when f is not AC
  double exact_variation = 0.0;              // NaN when unknown
  bool is_bv = true;
  bool is_ac = false;
  Interval essential_window;
  bool constant_outside = true;
  double left_value = 0.0;
  double right_value = 0.0;
  std::function<double(const Interval&)> variation_outside;
  std::vector<Jump> discontinuities;
  std::vector<double> kinks;  // where the derivative jumps
  double bound = 1.0;         // sup |f|

  double operator()(double x) const { return value(x); }
  bool has_derivative() const { return static_cast<bool>(derivative); }

  double tail_variation(const Interval& window) const {
    if (variation_outside) return variation_outside(window);
    if (window.contains(essential_window)) return 0.0;
    return std::isnan(exact_variation) ? std::numeric_limits<double>::infinity() : exact_variation;
  }

  std::vector<double> breakpoints() const {
    std::vector<double> out = kinks;
    for (const auto& j : discontinuities) out.push_back(j.location);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// f' as a signal in its own right; kinks of f become its jumps.
  Signal derivative_signal() const {
    if (!has_derivative()) throw std::domain_error("signal " + id + " has no derivative");
    Signal d;
    d.id = id + "'";
    d.value = derivative;
    d.exact_variation = std::numeric_limits<double>::quiet_NaN();
    d.is_ac = false;
    d.essential_window = essential_window;
    d.constant_outside = constant_outside;
    d.left_value = 0.0;
    d.right_value = 0.0;
    for (double k : kinks) d.discontinuities.push_back({k, 0.0});
    d.bound = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
};

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

inline Signal constant_signal(double c) {
  Signal s;
  s.id = "const:" + format_g(c);
  s.value = [c](double) { return c; };
  s.derivative = [](double) { return 0.0; };
  s.exact_variation = 0.0;
  s.is_ac = true;
  s.essential_window = {-1.0, 1.0};
  s.left_value = s.right_value = c;
  s.bound = std::abs(c);
  return s;
}

/// Tent of height 1 and half-width a.
inline Signal hat(double a = 1.0) {
  if (!(a > 0.0)) throw std::invalid_argument("hat: half-width must be positive");
  Signal s;
  s.id = "hat:" + format_g(a);
  s.value = [a](double x) { return std::max(0.0, 1.0 - std::abs(x) / a); };
  s.derivative = [a](double x) {
    if (x <= -a || x >= a) return 0.0;
    return x < 0.0 ? 1.0 / a : -1.0 / a;
  };
  s.exact_variation = 2.0;
  s.is_ac = true;
  s.essential_window = {-a, a};
  s.kinks = {-a, 0.0, a};
  return s;
}

inline constexpr double kWitchWindow = 100.0;

/// 1 / (1 + x^2); not constant anywhere, so the window carries a tail bound.
inline Signal witch(double T = kWitchWindow) {
  Signal s;
  s.id = "witch";
  s.value = [](double x) { return 1.0 / (1.0 + x * x); };
  s.derivative = [](double x) {
    const double d = 1.0 + x * x;
    return -2.0 * x / (d * d);
  };
  s.exact_variation = 2.0;
  s.is_ac = true;
  s.essential_window = {-T, T};
  s.constant_outside = false;
  s.variation_outside = [](const Interval& I) {
    // f is monotone on each half-line, decaying to 0.
    const double left = I.lo < 0.0 ? 1.0 / (1.0 + I.lo * I.lo) : 1.0;
    const double right = I.hi > 0.0 ? 1.0 / (1.0 + I.hi * I.hi) : 1.0;
    return left + right;
  };
  return s;
}

/// Raised cosine (1 + cos(pi x)) / 2 on [-1, 1].
inline Signal bump() {
  constexpr double pi = std::numbers::pi;
  Signal s;
  s.id = "bump";
  s.value = [](double x) { return std::abs(x) >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(pi * x)); };
  s.derivative = [](double x) { return std::abs(x) >= 1.0 ? 0.0 : -0.5 * pi * std::sin(pi * x); };
  s.exact_variation = 2.0;
  s.is_ac = true;
  s.essential_window = {-1.0, 1.0};
  s.kinks = {-1.0, 1.0};
  return s;
}

/// H(x) = 0 for x < 0, 1 for x >= 0.
inline Signal heaviside() {
  Signal s;
  s.id = "heaviside";
  s.value = [](double x) { return x < 0.0 ? 0.0 : 1.0; };
  s.exact_variation = 1.0;
  s.essential_window = {-0.5, 0.5};
  s.right_value = 1.0;
  s.discontinuities = {{0.0, 1.0}};
  return s;
}

/// Unit steps at -1, 0 and 1.
inline Signal staircase3() {
  Signal s;
  s.id = "staircase3";
  s.value = [](double x) { return (x >= -1.0 ? 1.0 : 0.0) + (x >= 0.0 ? 1.0 : 0.0) + (x >= 1.0 ? 1.0 : 0.0); };
  s.exact_variation = 3.0;
  s.essential_window = {-1.5, 1.5};
  s.right_value = 3.0;
  s.discontinuities = {{-1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}};
  s.bound = 3.0;
  return s;
}

/// min(max(x, 0), 1).
inline Signal ramp_clip() {
  Signal s;
  s.id = "ramp_clip";
  s.value = [](double x) { return std::min(std::max(x, 0.0), 1.0); };
  s.derivative = [](double x) { return (x > 0.0 && x < 1.0) ? 1.0 : 0.0; };
  s.exact_variation = 1.0;
  s.is_ac = true;
  s.essential_window = {0.0, 1.0};
  s.right_value = 1.0;
  s.kinks = {0.0, 1.0};
  return s;
}

inline std::vector<Signal> catalog() {
  return {hat(1.0), witch(), bump(), heaviside(), staircase3(), ramp_clip()};
}

inline std::vector<Signal> ac_catalog() { return {hat(1.0), witch(), bump(), ramp_clip()}; }

/// Uniform partition of `points` nodes on [a, b] with every discontinuity in
/// (a, b) injected together with two close neighbours.
inline std::vector<double> variation_partition(const Interval& I, std::size_t points,
                                               const std::vector<Jump>& jumps) {
  if (points < 2) throw std::invalid_argument("variation partition: need at least 2 points");
  std::vector<double> xs(points);
  for (std::size_t i = 0; i < points; ++i)
    xs[i] = I.lo + I.length() * static_cast<double>(i) / static_cast<double>(points - 1);
  xs.back() = I.hi;
  const double delta = 1e-10 * std::max(1.0, I.length());
  for (const auto& j : jumps) {
    if (j.location <= I.lo || j.location >= I.hi) continue;
    xs.push_back(j.location - delta);
    xs.push_back(j.location);
    xs.push_back(j.location + delta);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

template <class F>
double partition_variation(F&& f, const std::vector<double>& xs) {
  double total = 0.0;
  double prev = f(xs.front());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double cur = f(xs[i]);
    total += std::abs(cur - prev);
    prev = cur;
  }
  return total;
}

/// Partition-sum variation of s over [a, b]. Partitions with 2^j + 1 points
/// are nested, so the value is nondecreasing along that sequence.
inline double variation_oracle(const Signal& s, const Interval& I, std::size_t points) {
  return partition_variation(s.value, variation_partition(I, points, s.discontinuities));
}

}  // namespace varsamp

#endif  // VARSAMP_SIGNALS_HPP
