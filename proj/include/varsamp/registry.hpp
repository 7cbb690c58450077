#ifndef VARSAMP_REGISTRY_HPP
#define VARSAMP_REGISTRY_HPP

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kernels.hpp"
#include "signals.hpp"

namespace varsamp {

class UnknownId : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

inline std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

inline bool starts_with(std::string_view s, std::string_view prefix, std::string_view& rest) {
  if (!s.starts_with(prefix)) return false;
  rest = s.substr(prefix.size());
  return true;
}

}  // namespace detail

/// A kernel id resolved to either a plain kernel or an averaged one.
struct KernelSpec {
  Kernel base;
  int m = 0;  // 0: plain kernel

  bool averaged() const { return m > 0; }
  Kernel kernel() const { return averaged() ? AveragedKernel(base, m).as_kernel() : base; }
};

/// Ids: "bspline:n", "fejer", "bochner-riesz:g", "avg:m:<base id>".
inline KernelSpec parse_kernel(std::string_view id) {
  std::string_view rest;
  if (detail::starts_with(id, "avg:", rest)) {
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw UnknownId("kernel id '" + std::string(id) + "': expected avg:<m>:<base>");
    const auto m = detail::parse_int(rest.substr(0, colon));
    if (!m || *m < 1) throw UnknownId("kernel id '" + std::string(id) + "': m must be a positive integer");
    auto inner = parse_kernel(rest.substr(colon + 1));
    if (inner.averaged()) throw UnknownId("kernel id '" + std::string(id) + "': nested averaging is not supported");
    return {inner.base, *m};
  }
  try {
    if (detail::starts_with(id, "bspline:", rest)) {
      const auto n = detail::parse_int(rest);
      if (!n) throw UnknownId("kernel id '" + std::string(id) + "': order must be an integer");
      return {bspline_kernel(*n), 0};
    }
    if (id == "fejer") return {fejer_kernel(), 0};
    if (detail::starts_with(id, "bochner-riesz:", rest)) {
      const auto g = detail::parse_double(rest);
      if (!g) throw UnknownId("kernel id '" + std::string(id) + "': gamma must be a number");
      return {bochner_riesz_kernel(*g), 0};
    }
  } catch (const UnknownId&) {
    throw;
  } catch (const std::exception& e) {
    throw UnknownId("kernel id '" + std::string(id) + "': " + e.what());
  }
  throw UnknownId("unknown kernel id '" + std::string(id) + "'");
}

/// Ids: "hat:a", "witch", "bump", "heaviside", "staircase3", "ramp_clip", "const:c".
inline Signal parse_signal(std::string_view id) {
  std::string_view rest;
  if (detail::starts_with(id, "hat:", rest)) {
    const auto a = detail::parse_double(rest);
    if (!a || !(*a > 0.0)) throw UnknownId("signal id '" + std::string(id) + "': half-width must be positive");
    return hat(*a);
  }
  if (detail::starts_with(id, "const:", rest)) {
    const auto c = detail::parse_double(rest);
    if (!c) throw UnknownId("signal id '" + std::string(id) + "': value must be a number");
    return constant_signal(*c);
  }
  if (id == "hat") return hat(1.0);
  if (id == "witch") return witch();
  if (id == "bump") return bump();
  if (id == "heaviside") return heaviside();
  if (id == "staircase3") return staircase3();
  if (id == "ramp_clip") return ramp_clip();
  throw UnknownId("unknown signal id '" + std::string(id) + "'");
}

inline std::vector<std::string> known_kernel_ids() {
  return {"bspline:<n>", "fejer", "bochner-riesz:<1..5>", "avg:<m>:<kernel>"};
}

inline std::vector<std::string> known_signal_ids() {
  return {"hat:<a>", "witch", "bump", "heaviside", "staircase3", "ramp_clip", "const:<c>"};
}

}  // namespace varsamp

#endif  // VARSAMP_REGISTRY_HPP
