#pragma once

#include <cmath>

namespace rcr {

// All factor tables and intermediate results live in log domain.  Exact
// zeros in input tables are mapped to a reserved sentinel; arithmetic
// involving the sentinel saturates instead of drifting to -2e30 etc.
inline constexpr double kLogZero = -1e30;
inline constexpr double kLogZeroGuard = -1e29;

inline bool is_log_zero(double v) { return v <= kLogZeroGuard; }

// log(a*b): saturating addition.
inline double log_mul(double a, double b) {
    if (is_log_zero(a) || is_log_zero(b)) return kLogZero;
    return a + b;
}

// log(a/b); caller must ensure b is not log-zero.
inline double log_div(double a, double b) {
    if (is_log_zero(a)) return kLogZero;
    return a - b;
}

// log(exp(a) + exp(b)), max-shifted.
inline double log_add(double a, double b) {
    if (is_log_zero(a)) return is_log_zero(b) ? kLogZero : b;
    if (is_log_zero(b)) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

inline double log_max(double a, double b) { return a > b ? a : b; }

inline double from_linear(double v) { return v > 0.0 ? std::log(v) : kLogZero; }

inline double to_linear(double lv) { return is_log_zero(lv) ? 0.0 : std::exp(lv); }

}  // namespace rcr
