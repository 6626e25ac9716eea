#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>

namespace ubssd {

/// SplitMix64 finalizer. All seed derivation goes through this so that
/// experiment cells are decorrelated and reproducible.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t seed_chain(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

template <typename... Rest>
std::uint64_t seed_chain(std::uint64_t seed, std::uint64_t v, Rest... rest) {
  return seed_chain(seed_chain(seed, v), rest...);
}

using Rng = std::mt19937_64;

/// Mean over columns (rows = channels, columns = samples).
Eigen::VectorXd sample_mean(const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Mean-removed covariance with 1/n normalization.
Eigen::MatrixXd sample_covariance(const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Pearson correlation of two equally long vectors; 0 when either is constant.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b);

/// Symmetric inverse square root of an SPD matrix.
Eigen::MatrixXd inverse_sqrt_spd(const Eigen::Ref<const Eigen::MatrixXd>& c);

/// Shortest round-trippable decimal form of a double (%.17g with downshift).
std::string format_double(double v);

}  // namespace ubssd
