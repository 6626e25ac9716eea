#include "ubssd/isa.hpp"

#include "ubssd/util.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>

namespace ubssd {
namespace {

// E[log cosh Z] for standard normal Z; deviations from it measure
// non-Gaussianity under the tanh contrast.
constexpr double kGaussLogCosh = 0.374567207491438;
constexpr double kFlatContrast = 0.01;  // below this the contrast is noise

double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) a(r, c) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

// flip each row so its largest-magnitude entry is positive
void canonicalize_row_signs(Eigen::MatrixXd& w) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    Eigen::Index j;
    w.row(i).cwiseAbs().maxCoeff(&j);
    if (w(i, j) < 0) w.row(i) = -w.row(i);
  }
}

}  // namespace

PcaResult pca_whiten(const TimeSeries& x, int target_dim) {
  if (target_dim < 1 || target_dim > x.dim())
    throw DimensionError("pca_whiten: target_dim must be in [1, dim]");
  if (x.effective_len() < 2)
    throw DataError("pca_whiten: not enough effective samples");
  const Eigen::MatrixXd cov = sample_covariance(x.effective());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw DataError("pca_whiten: eigensolver failed");
  const Eigen::VectorXd& lam = es.eigenvalues();  // ascending
  const Eigen::Index D = x.dim();

  PcaResult out;
  const double total = lam.cwiseMax(0.0).sum();
  double kept = 0.0;
  const double floor = 1e-15 * std::max(lam(D - 1), 0.0) +
                       std::numeric_limits<double>::min();
  Eigen::MatrixXd w(target_dim, D);
  for (int i = 0; i < target_dim; ++i) {
    const Eigen::Index idx = D - 1 - i;  // descending order
    kept += std::max(lam(idx), 0.0);
    w.row(i) = es.eigenvectors().col(idx).transpose() /
               std::sqrt(std::max(lam(idx), floor));
  }
  canonicalize_row_signs(w);
  out.discarded_mass = total > 0.0 ? (total - kept) / total : 0.0;
  if (target_dim < D) {
    const double cut = lam(D - target_dim);      // smallest kept
    const double next = lam(D - target_dim - 1); // largest dropped
    out.ill_separated = next > 0.5 * cut;
  }
  out.w_pca = std::move(w);
  out.whitened = TimeSeries(out.w_pca * x.values, x.transient);
  return out;
}

IcaResult ica(const TimeSeries& white, const IcaOptions& opts) {
  const Eigen::Index D = white.dim();
  const Eigen::Index n = white.effective_len();
  if (n < 2) throw DataError("ica: not enough effective samples");
  if (opts.restarts < 1 || opts.max_iter < 1)
    throw DimensionError("ica: restarts and max_iter must be positive");

  // center once; the returned matrix is still a pure linear demixer
  Eigen::MatrixXd z = white.effective();
  z.colwise() -= z.rowwise().mean().eval();
  const double inv_n = 1.0 / static_cast<double>(n);

  // On subspace-structured data the per-row fixed-point test can never fire:
  // rotations inside an invariant subspace leave the contrast flat and the
  // rows keep drifting. A stagnation check on the contrast objective stops
  // those runs once the separation has stopped improving measurably.
  constexpr int kStallInterval = 10;
  constexpr int kStallChecks = 3;
  constexpr double kStallRelTol = 1e-5;

  auto contrast_of = [&](const Eigen::MatrixXd& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < D; ++i) {
      double acc = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) acc += log_cosh(y(i, t));
      const double dev = acc * inv_n - kGaussLogCosh;
      total += dev * dev;
    }
    return total;
  };

  IcaResult best;
  double best_objective = -1.0;
  for (int restart = 0; restart < opts.restarts; ++restart) {
    Rng rng(seed_chain(opts.seed, static_cast<std::uint64_t>(restart)));
    Eigen::MatrixXd w = random_orthogonal(D, rng);
    int iterations = 0;
    bool converged = false;
    double stall_best = -1.0;
    int stall_count = 0;
    Eigen::MatrixXd y, g;
    for (; iterations < opts.max_iter; ++iterations) {
      y.noalias() = w * z;
      g = y.array().tanh();
      const Eigen::VectorXd g_prime_mean =
          (1.0 - g.array().square()).rowwise().mean();
      Eigen::MatrixXd w_new = (g * z.transpose()) * inv_n;
      w_new.noalias() -= g_prime_mean.asDiagonal() * w;
      w_new = inverse_sqrt_spd(w_new * w_new.transpose()) * w_new;
      const double delta =
          ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0)
              .abs()
              .maxCoeff();
      w = std::move(w_new);
      if (delta < opts.tol) {
        converged = true;
        ++iterations;
        break;
      }
      if ((iterations + 1) % kStallInterval == 0) {
        const double objective = contrast_of(w * z);
        if (objective > stall_best + kStallRelTol * std::max(1e-12, std::fabs(stall_best))) {
          stall_best = objective;
          stall_count = 0;
        } else if (++stall_count >= kStallChecks) {
          ++iterations;
          break;
        }
      }
    }
    y.noalias() = w * z;
    Eigen::VectorXd deviation(D);
    for (Eigen::Index i = 0; i < D; ++i) {
      double acc = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) acc += log_cosh(y(i, t));
      deviation(i) = std::fabs(acc * inv_n - kGaussLogCosh);
    }
    const double objective = deviation.squaredNorm();
    if (objective > best_objective) {
      best_objective = objective;
      best.w = w;
      best.iterations = iterations;
      best.converged = converged;
      best.contrast = objective;
      best.unidentifiable = deviation.maxCoeff() < kFlatContrast;
    }
  }
  canonicalize_row_signs(best.w);
  return best;
}

Eigen::MatrixXd dependence_matrix(const TimeSeries& y) {
  const Eigen::Index D = y.dim();
  const Eigen::Index n = y.effective_len();
  if (n < 2) throw DataError("dependence_matrix: not enough samples");
  const Eigen::MatrixXd z = y.effective();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(D, D);
  Eigen::MatrixXd f(D, n);
  for (int bank = 0; bank < 3; ++bank) {
    switch (bank) {
      case 0: f = z.array().square(); break;
      case 1: f = z.array().abs(); break;
      case 2: f = z.array().tanh(); break;
    }
    // row-standardize, then |corr| is a plain Gram matrix
    f.colwise() -= f.rowwise().mean().eval();
    for (Eigen::Index i = 0; i < D; ++i) {
      const double norm = f.row(i).norm();
      if (norm > 0.0) f.row(i) /= norm;
    }
    s = s.cwiseMax((f * f.transpose()).cwiseAbs());
  }
  s.diagonal().setZero();
  return s;
}

namespace {

double partition_count(int m, int d) {
  // (M d)! / (d!^M M!)
  double log_count = std::lgamma(static_cast<double>(m) * d + 1.0) -
                     m * std::lgamma(d + 1.0) - std::lgamma(m + 1.0);
  return std::exp(log_count);
}

double within_group_mass(const Eigen::MatrixXd& s, const std::vector<int>& assign) {
  double total = 0.0;
  const int n = static_cast<int>(assign.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (assign[i] == assign[j]) total += s(i, j);
  return total;
}

// exhaustive search: anchor each group on its smallest free channel and
// choose the d-1 partners from the remaining free channels
void enumerate_partitions(const Eigen::MatrixXd& s, std::vector<int>& free_list,
                          std::vector<int>& assign, int group, int d,
                          double& best_score, std::vector<int>& best_assign) {
  if (free_list.empty()) {
    const double score = within_group_mass(s, assign);
    if (score > best_score ||
        (score == best_score && (best_assign.empty() || assign < best_assign))) {
      best_score = score;
      best_assign = assign;
    }
    return;
  }
  const int anchor = free_list.front();
  std::vector<int> rest(free_list.begin() + 1, free_list.end());
  const int k = d - 1;
  const int r = static_cast<int>(rest.size());
  std::vector<int> pick(static_cast<std::size_t>(k));
  // lexicographic combinations of `rest` indices
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    assign[static_cast<std::size_t>(anchor)] = group;
    std::vector<int> next_free;
    next_free.reserve(rest.size());
    {
      std::size_t p = 0;
      for (int i = 0; i < r; ++i) {
        if (p < idx.size() && idx[p] == i) {
          assign[static_cast<std::size_t>(rest[static_cast<std::size_t>(i)])] = group;
          ++p;
        } else {
          next_free.push_back(rest[static_cast<std::size_t>(i)]);
        }
      }
    }
    enumerate_partitions(s, next_free, assign, group + 1, d, best_score, best_assign);
    // advance combination
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == r - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// can the incomplete group sizes still be packed into bins of exactly d?
bool packable(std::vector<int> counts, int d,
              std::map<std::vector<int>, bool>& memo) {
  bool empty = true;
  for (int c : counts)
    if (c) empty = false;
  if (empty) return true;
  if (auto it = memo.find(counts); it != memo.end()) return it->second;

  // build one bin containing the largest remaining size
  int largest = 0;
  for (int sz = static_cast<int>(counts.size()); sz >= 1; --sz)
    if (counts[static_cast<std::size_t>(sz - 1)]) {
      largest = sz;
      break;
    }
  bool ok = false;
  counts[static_cast<std::size_t>(largest - 1)]--;
  // complete the bin with any multiset of smaller-or-equal sizes
  std::vector<int> fill;
  std::function<bool(int, int)> complete = [&](int remaining, int max_sz) -> bool {
    if (remaining == 0) return packable(counts, d, memo);
    for (int sz = std::min(remaining, max_sz); sz >= 1; --sz) {
      if (!counts[static_cast<std::size_t>(sz - 1)]) continue;
      counts[static_cast<std::size_t>(sz - 1)]--;
      const bool done = complete(remaining - sz, sz);
      counts[static_cast<std::size_t>(sz - 1)]++;
      if (done) return true;
    }
    return false;
  };
  ok = complete(d - largest, largest);
  counts[static_cast<std::size_t>(largest - 1)]++;
  memo[counts] = ok;
  return ok;
}

double linkage(const Eigen::MatrixXd& s, const std::vector<int>& a,
               const std::vector<int>& b) {
  double total = 0.0;
  for (int i : a)
    for (int j : b) total += s(i, j);
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::vector<int> greedy_partition(const Eigen::MatrixXd& s, int d, int m) {
  const int n = d * m;
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) groups[static_cast<std::size_t>(i)] = {i};
  std::map<std::vector<int>, bool> memo;

  auto size_counts = [&](int skip_a, int skip_b, int merged_size) {
    std::vector<int> counts(static_cast<std::size_t>(d), 0);
    for (int g = 0; g < static_cast<int>(groups.size()); ++g) {
      if (g == skip_a || g == skip_b) continue;
      const int sz = static_cast<int>(groups[static_cast<std::size_t>(g)].size());
      if (sz < d) counts[static_cast<std::size_t>(sz - 1)]++;
    }
    if (merged_size >= 1 && merged_size < d) counts[static_cast<std::size_t>(merged_size - 1)]++;
    // counts[d-1] would be complete groups; they are excluded above
    return counts;
  };

  while (static_cast<int>(groups.size()) > m) {
    double best_link = -1.0;
    int best_a = -1, best_b = -1;
    for (int a = 0; a < static_cast<int>(groups.size()); ++a)
      for (int b = a + 1; b < static_cast<int>(groups.size()); ++b) {
        const int merged = static_cast<int>(groups[static_cast<std::size_t>(a)].size() +
                                            groups[static_cast<std::size_t>(b)].size());
        if (merged > d) continue;
        if (!packable(size_counts(a, b, merged == d ? 0 : merged), d, memo)) continue;
        const double link = linkage(s, groups[static_cast<std::size_t>(a)],
                                    groups[static_cast<std::size_t>(b)]);
        if (link > best_link) {
          best_link = link;
          best_a = a;
          best_b = b;
        }
      }
    if (best_a < 0) throw DataError("group_components: no feasible merge");
    auto& ga = groups[static_cast<std::size_t>(best_a)];
    const auto gb = groups[static_cast<std::size_t>(best_b)];
    ga.insert(ga.end(), gb.begin(), gb.end());
    std::sort(ga.begin(), ga.end());
    groups.erase(groups.begin() + best_b);
  }

  std::vector<int> assign(static_cast<std::size_t>(n));
  for (int g = 0; g < m; ++g)
    for (int i : groups[static_cast<std::size_t>(g)]) assign[static_cast<std::size_t>(i)] = g;
  return assign;
}

// best-improvement pairwise swaps until a local optimum
double hill_climb(const Eigen::MatrixXd& s, std::vector<int>& assign) {
  const int n = static_cast<int>(assign.size());
  auto attachment = [&](int ch, int group) {
    double total = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != ch && assign[static_cast<std::size_t>(j)] == group) total += s(ch, j);
    return total;
  };
  for (int round = 0; round < 10000; ++round) {
    double best_delta = 1e-12;
    int best_i = -1, best_j = -1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const int gi = assign[static_cast<std::size_t>(i)];
        const int gj = assign[static_cast<std::size_t>(j)];
        if (gi == gj) continue;
        const double delta = attachment(i, gj) + attachment(j, gi) -
                             attachment(i, gi) - attachment(j, gj) -
                             2.0 * s(i, j);
        if (delta > best_delta) {
          best_delta = delta;
          best_i = i;
          best_j = j;
        }
      }
    if (best_i < 0) break;
    std::swap(assign[static_cast<std::size_t>(best_i)],
              assign[static_cast<std::size_t>(best_j)]);
  }
  return within_group_mass(s, assign);
}

// group indices relabeled by smallest member so equal partitions compare equal
std::vector<int> canonical_relabel(const std::vector<int>& assign, int m) {
  std::vector<int> first(static_cast<std::size_t>(m), -1);
  std::vector<int> order;
  for (int c = 0; c < static_cast<int>(assign.size()); ++c) {
    const int g = assign[static_cast<std::size_t>(c)];
    if (first[static_cast<std::size_t>(g)] < 0) {
      first[static_cast<std::size_t>(g)] = static_cast<int>(order.size());
      order.push_back(g);
    }
  }
  std::vector<int> relabeled(assign.size());
  for (std::size_t c = 0; c < assign.size(); ++c)
    relabeled[c] = first[static_cast<std::size_t>(assign[c])];
  return relabeled;
}

}  // namespace

GroupingResult group_components(const TimeSeries& y, int d, int m,
                                bool force_greedy) {
  if (d < 1 || m < 1) throw DimensionError("group_components: d, M must be positive");
  if (y.dim() != static_cast<Eigen::Index>(d) * m)
    throw DimensionError("group_components: dim must equal M*d");
  const Eigen::MatrixXd s = dependence_matrix(y);

  GroupingResult out;
  std::vector<int> assign;
  if (d == 1) {
    assign.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) assign[static_cast<std::size_t>(i)] = i;
    out.objective = 0.0;
    out.exhaustive = true;
  } else if (!force_greedy && partition_count(m, d) <= 1e5) {
    std::vector<int> free_list(static_cast<std::size_t>(d) * m);
    for (int i = 0; i < d * m; ++i) free_list[static_cast<std::size_t>(i)] = i;
    std::vector<int> scratch(free_list.size(), -1);
    double best_score = -std::numeric_limits<double>::infinity();
    enumerate_partitions(s, free_list, scratch, 0, d, best_score, assign);
    out.objective = best_score;
    out.exhaustive = true;
  } else {
    assign = greedy_partition(s, d, m);
    out.objective = hill_climb(s, assign);
    assign = canonical_relabel(assign, m);
    out.exhaustive = false;
  }

  out.partition = Partition(m, d, assign);
  // permutation making groups contiguous: rows ordered by group, then channel
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d * m, d * m);
  int row = 0;
  for (const auto& group : out.partition.groups())
    for (int ch : group) p(row++, ch) = 1.0;
  out.permutation = std::move(p);
  return out;
}

IsaResult solve_isa(const TimeSeries& x, int d, int m, const IsaOptions& opts) {
  const int target = d * m;
  PcaResult pca = pca_whiten(x, target);
  IcaResult ic = ica(pca.whitened, opts.ica);
  const TimeSeries rotated(ic.w * pca.whitened.values, x.transient);
  GroupingResult grouping = group_components(rotated, d, m);

  IsaResult out;
  out.w_pca = std::move(pca.w_pca);
  out.w_isa = grouping.permutation * ic.w;
  out.partition = Partition::contiguous(m, d);
  out.components = TimeSeries(grouping.permutation * rotated.values, x.transient);
  out.ica_iterations = ic.iterations;
  out.grouping_objective = grouping.objective;
  out.discarded_mass = pca.discarded_mass;
  out.ica_converged = ic.converged;
  out.ica_unidentifiable = ic.unidentifiable;
  out.pca_ill_separated = pca.ill_separated;
  return out;
}

}  // namespace ubssd
