#pragma once

#include "brownpoly/environment.hpp"

namespace brownpoly {

inline constexpr int kBruteForceMaxLevels = 4;
inline constexpr int kBruteForceMaxCells = 12;

/// log Z_{1,n}(0, t) by explicit summation over every strictly increasing jump
/// tuple 0 <= j_1 < ... < j_{n-1} <= m-1, in long double. Each tuple weighs
/// delta^{n-1} exp(B_1(0, t_{j_1}) + B_2(t_{j_1}, t_{j_2}) + ... + B_n(t_{j_{n-1}}, t)).
/// Throws std::invalid_argument when n > 4 or m > 12.
double brute_force_free(const Environment& env);

} // namespace brownpoly
