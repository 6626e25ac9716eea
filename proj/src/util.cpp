#include "ubssd/util.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ubssd {

Eigen::VectorXd sample_mean(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  return x.rowwise().mean();
}

Eigen::MatrixXd sample_covariance(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::VectorXd mu = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - mu;
  return (centered * centered.transpose()) / static_cast<double>(x.cols());
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::ArrayXd da = a.array() - ma;
  const Eigen::ArrayXd db = b.array() - mb;
  const double va = (da * da).sum() / n;
  const double vb = (db * db).sum() / n;
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return (da * db).sum() / n / std::sqrt(va * vb);
}

Eigen::MatrixXd inverse_sqrt_spd(const Eigen::Ref<const Eigen::MatrixXd>& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  const double floor = 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
  Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace ubssd
