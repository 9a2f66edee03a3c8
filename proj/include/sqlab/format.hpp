#pragma once

#include <cstdio>
#include <string>

namespace sqlab {

/// Fixed textual form for numbers in labels, CSV and console output.
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace sqlab
