#pragma once

#include <filesystem>
#include <string>

#include "mast/tensor.hpp"

namespace mast {

/// Reads a binary (P5) PGM with maxval 255 as an H x W tensor scaled to [0,1].
Tensor read_pgm(const std::filesystem::path& path);
Tensor decode_pgm(const std::string& bytes);

struct PgmScaling {
  double min = 0.0;
  double max = 0.0;
};

/// Writes an H x W tensor as P5 PGM after min-max scaling to 0..255. A
/// constant image is written as all zeros. Returns the scaling used.
PgmScaling write_pgm_minmax(const std::filesystem::path& path, const Tensor& img);

}  // namespace mast
