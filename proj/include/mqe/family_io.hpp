#pragma once

#include <filesystem>

#include "mqe/quantize.hpp"

namespace mqe {

/// Directory layout: centers.csv (shared support) or centers_<i>.csv, weights.csv
/// (N x K) and meta.json {scheme, K, seed, eps_K, lloyd_iters}.
void save_quantized_family(const QuantizedFamily& qf, const std::filesystem::path& dir);
QuantizedFamily load_quantized_family(const std::filesystem::path& dir);

}  // namespace mqe
