#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gamow {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr double kPi = std::numbers::pi;

using json = nlohmann::json;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct FeasibilityError : std::domain_error {
  using std::domain_error::domain_error;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an adaptive quadrature cannot reach its tolerance; the best
// estimate is kept so callers can decide whether it is good enough.
struct ToleranceNotMet : std::runtime_error {
  double estimate;
  double error;
  ToleranceNotMet(const std::string& what, double est, double err)
      : std::runtime_error(what), estimate(est), error(err) {}
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Outcome of a numerical check.  passed is true exactly when there are no
// witnesses; flags hold auxiliary booleans that do not affect passed.
struct CheckReport {
  bool passed = true;
  std::vector<json> witnesses;
  double extremal_ratio = 0.0;
  std::size_t samples_used = 0;
  std::map<std::string, bool> flags;
  std::map<std::string, double> values;

  void add_witness(json w) {
    witnesses.push_back(std::move(w));
    passed = false;
  }
};

inline void to_json(json& j, const CheckReport& r) {
  j = json{{"passed", r.passed},
           {"witnesses", r.witnesses},
           {"extremal_ratio", r.extremal_ratio},
           {"samples_used", r.samples_used}};
  if (!r.flags.empty()) j["flags"] = r.flags;
  if (!r.values.empty()) j["values"] = r.values;
}

// Pairwise (tree) summation; the reduction order depends only on the length,
// so totals are reproducible regardless of how the terms were produced.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// FNV-1a 64, used to stamp output files with the hash of their config.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace gamow
