#include "brownpoly/oracle.hpp"

#include "brownpoly/logspace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace brownpoly {

double brute_force_free(const Environment& env)
{
    const int n = env.levels();
    const int m = env.cells();
    if (n > kBruteForceMaxLevels || m > kBruteForceMaxCells) {
        throw std::invalid_argument("brute_force_free: instance too large (n=" + std::to_string(n)
                                    + ", m=" + std::to_string(m) + "; limits 4 and 12)");
    }
    std::vector<std::vector<long double>> path(static_cast<std::size_t>(n + 1));
    for (int k = 1; k <= n; ++k) {
        path[k].assign(static_cast<std::size_t>(m + 1), 0.0L);
        for (int i = 0; i < m; ++i) path[k][i + 1] = path[k][i] + env.inc(k, i);
    }
    const long double delta = static_cast<long double>(env.grid().t) / m;

    // jumps[0] = 0 and jumps[n] = m bracket the free jump indices.
    std::vector<int> jumps(static_cast<std::size_t>(n + 1), 0);
    jumps[n] = m;
    long double total = 0.0L;
    auto visit = [&](auto&& self, int k) -> void {
        if (k == n) {
            long double exponent = 0.0L;
            for (int l = 1; l <= n; ++l) exponent += path[l][jumps[l]] - path[l][jumps[l - 1]];
            total += std::pow(delta, n - 1) * std::exp(exponent);
            return;
        }
        const int lo = k == 1 ? 0 : jumps[k - 1] + 1;
        for (int j = lo; j <= m - 1; ++j) {
            jumps[k] = j;
            self(self, k + 1);
        }
    };
    visit(visit, 1);
    return total > 0.0L ? static_cast<double>(std::log(total)) : kLogZero;
}

} // namespace brownpoly
