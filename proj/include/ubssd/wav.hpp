#pragma once

#include <Eigen/Dense>

#include <filesystem>

namespace ubssd {

/// Decodes a 16-bit PCM WAV file; returns channels x frames in [-1, 1).
Eigen::MatrixXd load_wav16(const std::filesystem::path& path);

/// Writes 16-bit PCM WAV (values clipped to [-1, 1)).
void save_wav16(const Eigen::MatrixXd& frames, int sample_rate,
                const std::filesystem::path& path);

}  // namespace ubssd
