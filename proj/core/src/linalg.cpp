#include "mhparse/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mhparse/rng.hpp"

namespace mhparse {

namespace {

double offdiag_norm(const Tensor& a) {
  const int n = a.extent(0);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) s += 2.0 * a.at(i, j) * a.at(i, j);
  return std::sqrt(s);
}

}  // namespace

std::pair<std::vector<double>, Tensor> sym_eigs(const Tensor& m, int k) {
  if (m.rank() != 2 || m.extent(0) != m.extent(1))
    throw argument_error("sym_eigs expects a square matrix, got " + m.shape_str());
  const int n = m.extent(0);
  if (k < 1 || k > n) throw argument_error("sym_eigs: k=" + std::to_string(k) + " out of [1," + std::to_string(n) + "]");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::fabs(m.at(i, j) - m.at(j, i)) > 1e-9)
        throw contract_error("sym_eigs: matrix not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");

  Tensor a = m;
  Tensor q = Tensor::identity(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale += a.at(i, j) * a.at(i, j);
  scale = std::sqrt(scale);
  const double tol = 1e-12 * std::max(1.0, scale);

  for (int sweep = 0; sweep < 128 && offdiag_norm(a) > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int qq = p + 1; qq < n; ++qq) {
        const double apq = a.at(p, qq);
        if (std::fabs(apq) <= tol / (n * n + 1.0)) continue;
        const double theta = (a.at(qq, qq) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a.at(p, p), aqq2 = a.at(qq, qq);
        a.at(p, p) = app - t * apq;
        a.at(qq, qq) = aqq2 + t * apq;
        a.at(p, qq) = 0.0;
        a.at(qq, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != qq) {
            const double arp = a.at(r, p), arq = a.at(r, qq);
            a.at(r, p) = a.at(p, r) = arp - s * (arq + tau * arp);
            a.at(r, qq) = a.at(qq, r) = arq + s * (arp - tau * arq);
          }
          const double qrp = q.at(r, p), qrq = q.at(r, qq);
          q.at(r, p) = qrp - s * (qrq + tau * qrp);
          q.at(r, qq) = qrq + s * (qrp - tau * qrq);
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a.at(i, i) < a.at(j, j); });

  std::vector<double> evals(static_cast<std::size_t>(k));
  Tensor evecs({n, k});
  for (int c = 0; c < k; ++c) {
    const int src = order[static_cast<std::size_t>(c)];
    evals[static_cast<std::size_t>(c)] = a.at(src, src);
    for (int r = 0; r < n; ++r) evecs.at(r, c) = q.at(r, src);
  }
  return {std::move(evals), std::move(evecs)};
}

std::vector<int> kmeans(const Tensor& points, int k, std::uint64_t seed,
                        std::vector<double>* wcss_history) {
  if (points.rank() != 2) throw argument_error("kmeans expects N x d points");
  const int n = points.extent(0), d = points.extent(1);
  if (k < 1 || k > n) throw argument_error("kmeans: k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));

  auto dist2 = [&](int i, const std::vector<double>& c) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = points.at(i, j) - c[static_cast<std::size_t>(j)];
      s += diff * diff;
    }
    return s;
  };

  // Farthest-point init: seed picks the first center, each later center is
  // the point farthest from the chosen set (lowest index on ties).
  Rng rng(seed);
  std::vector<std::vector<double>> centers;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  {
    const int first = rng.uniform_int(0, n - 1);
    centers.emplace_back(points.data() + static_cast<std::size_t>(first) * d,
                         points.data() + static_cast<std::size_t>(first + 1) * d);
    used[static_cast<std::size_t>(first)] = 1;
  }
  while (static_cast<int>(centers.size()) < k) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      double nd = std::numeric_limits<double>::max();
      for (const auto& c : centers) nd = std::min(nd, dist2(i, c));
      if (nd > best_d + 1e-30 && !used[static_cast<std::size_t>(i)]) {
        best_d = nd;
        best = i;
      }
    }
    if (best < 0) {  // all remaining points coincide with centers
      for (int i = 0; i < n; ++i)
        if (!used[static_cast<std::size_t>(i)]) {
          best = i;
          break;
        }
    }
    centers.emplace_back(points.data() + static_cast<std::size_t>(best) * d,
                         points.data() + static_cast<std::size_t>(best + 1) * d);
    used[static_cast<std::size_t>(best)] = 1;
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < 256; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = dist2(i, centers[0]);
      for (int c = 1; c < k; ++c) {
        const double dd = dist2(i, centers[static_cast<std::size_t>(c)]);
        if (dd < bd - 1e-30) {
          bd = dd;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (wcss_history) wcss_history->push_back(kmeans_wcss(points, labels, k));
    if (!changed && iter > 0) break;

    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      const int c = labels[static_cast<std::size_t>(i)];
      ++counts[static_cast<std::size_t>(c)];
      for (int j = 0; j < d; ++j) sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] += points.at(i, j);
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        // Re-seed an empty cluster on the point farthest from its center.
        int far = 0;
        double fd = -1.0;
        for (int i = 0; i < n; ++i) {
          const double dd = dist2(i, centers[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]);
          if (dd > fd + 1e-30) {
            fd = dd;
            far = i;
          }
        }
        for (int j = 0; j < d; ++j) centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = points.at(far, j);
        labels[static_cast<std::size_t>(far)] = c;
        continue;
      }
      for (int j = 0; j < d; ++j)
        centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
            sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] / counts[static_cast<std::size_t>(c)];
    }
  }
  return labels;
}

double kmeans_wcss(const Tensor& points, const std::vector<int>& labels, int k) {
  const int n = points.extent(0), d = points.extent(1);
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    ++counts[static_cast<std::size_t>(c)];
    for (int j = 0; j < d; ++j) sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] += points.at(i, j);
  }
  double wcss = 0.0;
  for (int i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
      const double mean = sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] / counts[static_cast<std::size_t>(c)];
      const double diff = points.at(i, j) - mean;
      wcss += diff * diff;
    }
  }
  return wcss;
}

}  // namespace mhparse
