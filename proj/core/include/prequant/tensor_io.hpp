#pragma once

#include <string>

#include "prequant/tensor.hpp"

namespace prequant {

// NPY v1.0, 2-D only, little-endian float64 (lossless round trip).
Tensor2D load_npy(const std::string& path);
void save_npy(const Tensor2D& x, const std::string& path);

// Headered CSV (UTF-8, '.' decimal separator), 17 significant digits.
Tensor2D load_csv(const std::string& path);
void save_csv(const Tensor2D& x, const std::string& path);

// Dispatch on extension: .npy or .csv.
Tensor2D load_tensor(const std::string& path);
void save_tensor(const Tensor2D& x, const std::string& path);

} // namespace prequant
