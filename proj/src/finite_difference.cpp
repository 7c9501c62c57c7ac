#include "chanest/finite_difference.hpp"

#include <algorithm>
#include <array>

#include "chanest/errors.hpp"

namespace chanest {

std::vector<double> derivative_weights(double x0, std::span<const double> nodes) {
    const std::size_t n = nodes.size();
    if (n < 2) throw ValidationError("derivative_weights: need at least two nodes");
    // c[j][m]: weight of node j for the m-th derivative, m in {0, 1}.
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            if (c3 == 0.0) throw ValidationError("derivative_weights: repeated node");
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = c[j][1];
    return w;
}

std::vector<std::size_t> stencil_indices(std::size_t n_points, std::size_t i, std::size_t width) {
    width = std::min(width, n_points);
    std::size_t start = i >= width / 2 ? i - width / 2 : 0;
    start = std::min(start, n_points - width);
    std::vector<std::size_t> idx(width);
    for (std::size_t k = 0; k < width; ++k) idx[k] = start + k;
    return idx;
}

}  // namespace chanest
