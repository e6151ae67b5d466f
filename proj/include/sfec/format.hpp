#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace sfec {

/// 12 significant digits, scientific notation. Output is a pure function of
/// the bit pattern so reruns diff clean.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace sfec
