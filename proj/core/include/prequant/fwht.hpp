#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prequant/tensor.hpp"

namespace prequant {

// Orthonormal fast Walsh-Hadamard transform over the channel dimension.
// The d^{-1/2} scaling is baked in, so H is symmetric and its own inverse.

bool is_power_of_two(std::size_t n);

// In-place butterfly, O(d log d). Length must be a power of two.
void fwht_inplace(std::span<double> v);

std::vector<double> fwht_vector(std::span<const double> v);

// Transforms every row (token): returns X * H.
Tensor2D fwht_rows(const Tensor2D& x);

// Transforms every column: returns H * X. Used when folding the inverse
// transform into weight matrices.
Tensor2D fwht_cols(const Tensor2D& x);

// Dense Sylvester construction, H_{2n} = 2^{-1/2} [[H_n, H_n], [H_n, -H_n]].
// Test oracle for the butterfly; refuses d > 2^14.
Tensor2D naive_hadamard(std::size_t d);

} // namespace prequant
