#pragma once

#include <cstdio>
#include <string>

#include "ucbf/common.hpp"

namespace ucbf {

/// 17 significant digits: enough for an exact double round trip.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_vec(const Vec& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += fmt_double(v[i]);
    }
    return out + "]";
}

}  // namespace ucbf
