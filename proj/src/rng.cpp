#include "lipfd/rng.hpp"

#include "lipfd/errors.hpp"

#include <cmath>
#include <numeric>

namespace lipfd {

std::vector<int> Rng::sample_without_replacement(int n, int k) {
    if (n < 0 || k < 0 || k > n) {
        throw ArgumentError("sample_without_replacement: need 0 <= k <= n, got k=" +
                            std::to_string(k) + " n=" + std::to_string(n));
    }
    // Partial Fisher-Yates over [0, n); only the first k slots are materialized.
    std::vector<int> pool(static_cast<size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> out;
    out.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        int64_t j = uniform_int(i, n - 1);
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        out.push_back(pool[static_cast<size_t>(i)]);
    }
    return out;
}

}  // namespace lipfd
