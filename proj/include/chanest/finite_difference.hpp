#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chanest {

/// Weights w_i such that f'(x0) ~ sum_i w_i f(nodes[i]) (Fornberg's
/// recursion). Exact for polynomials of degree < nodes.size().
std::vector<double> derivative_weights(double x0, std::span<const double> nodes);

/// Indices of the stencil used at grid point i: the `width` nearest grid
/// points, centred where the grid allows and shifted inward at the ends.
std::vector<std::size_t> stencil_indices(std::size_t n_points, std::size_t i, std::size_t width);

}  // namespace chanest
