#pragma once

#include <fmt/format.h>

#include <string>

namespace virtmet::detail {

/// Fixed 6-decimal rendering; negative zero prints as "0.000000".
inline std::string fixed6(double v) {
    std::string s = fmt::format("{:.6f}", v);
    if (s == "-0.000000") s.erase(0, 1);
    return s;
}

}  // namespace virtmet::detail
