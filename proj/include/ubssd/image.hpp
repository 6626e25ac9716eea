#pragma once

#include <Eigen/Dense>

#include <filesystem>

namespace ubssd {

/// Grayscale bitmap as nonnegative intensities, row 0 at the top.
using Bitmap = Eigen::MatrixXd;

/// Reads a PGM (P2/P5) or PNG grayscale image; color PNG collapses to luma.
Bitmap load_image(const std::filesystem::path& path);

}  // namespace ubssd
