#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mhparse/linalg.hpp"
#include "mhparse/rng.hpp"

using namespace mhparse;

namespace {

Tensor random_symmetric(int n, Rng& rng) {
  Tensor m({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform(-2.0, 2.0);
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  return m;
}

// Independent eigenvalue oracle: counts eigenvalues below x via the inertia
// of the LDL^T factorization of (A - xI), then bisects. Shares nothing with
// the Jacobi implementation under test.
int eigs_below(const Tensor& a, double x) {
  const int n = a.extent(0);
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = a.at(i, j) - (i == j ? x : 0.0);
  int negatives = 0;
  for (int k = 0; k < n; ++k) {
    const double pivot = m[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
    if (pivot < 0) ++negatives;
    if (std::fabs(pivot) < 1e-300) return -1;  // unlucky shift, caller perturbs
    for (int i = k + 1; i < n; ++i) {
      const double f = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] / pivot;
      for (int j = k; j < n; ++j)
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= f * m[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    }
  }
  return negatives;
}

std::vector<double> oracle_eigenvalues(const Tensor& a) {
  const int n = a.extent(0);
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    double radius = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) radius += std::fabs(a.at(i, j));
    lo = std::min(lo, a.at(i, i) - radius - 1.0);
    hi = std::max(hi, a.at(i, i) + radius + 1.0);
  }
  auto count = [&](double x) {
    int c = eigs_below(a, x);
    if (c < 0) c = eigs_below(a, x + 3e-13);
    return c;
  };
  std::vector<double> out;
  for (int idx = 1; idx <= n; ++idx) {
    double a0 = lo, b0 = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a0 + b0);
      if (count(mid) >= idx)
        b0 = mid;
      else
        a0 = mid;
    }
    out.push_back(0.5 * (a0 + b0));
  }
  return out;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::vector<int> remap(labels.size(), -1);
  std::vector<int> out;
  out.reserve(labels.size());
  int next = 0;
  for (int l : labels) {
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
    out.push_back(remap[static_cast<std::size_t>(l)]);
  }
  return out;
}

}  // namespace

TEST_CASE("sym_eigs identity") {
  auto [vals, vecs] = sym_eigs(Tensor::identity(3), 3);
  for (double v : vals) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sym_eigs diagonal") {
  Tensor d({3, 3});
  d.at(0, 0) = 2.0;
  d.at(1, 1) = 1.0;
  d.at(2, 2) = 3.0;
  auto [vals, vecs] = sym_eigs(d, 2);
  CHECK(vals[0] == doctest::Approx(1.0));
  CHECK(vals[1] == doctest::Approx(2.0));
  // axis-aligned eigenvectors
  CHECK(std::fabs(vecs.at(1, 0)) == doctest::Approx(1.0));
  CHECK(std::fabs(vecs.at(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigs errors") {
  Tensor m({2, 2}, {1.0, 0.5, 0.2, 1.0});
  CHECK_THROWS_AS(sym_eigs(m, 1), contract_error);
  CHECK_THROWS_AS(sym_eigs(Tensor::identity(2), 3), argument_error);
  CHECK_THROWS_AS(sym_eigs(Tensor::identity(2), 0), argument_error);
}

TEST_CASE("sym_eigs random 6x6 matches inertia-bisection oracle") {
  Rng rng(42);
  Tensor m = random_symmetric(6, rng);
  const std::vector<double> expect = oracle_eigenvalues(m);
  auto [vals, vecs] = sym_eigs(m, 6);
  for (int i = 0; i < 6; ++i) CHECK(vals[static_cast<std::size_t>(i)] == doctest::Approx(expect[static_cast<std::size_t>(i)]).epsilon(1e-8));
}

TEST_CASE("sym_eigs residual and orthonormality up to N=64") {
  Rng rng(7);
  for (int n : {2, 5, 16, 33, 64}) {
    Tensor m = random_symmetric(n, rng);
    const int k = std::max(1, n / 2);
    auto [vals, vecs] = sym_eigs(m, k);
    const double bound = 1e-7 * std::max(1.0, m.max_abs());
    for (int c = 0; c < k; ++c) {
      Tensor v({n});
      for (int r = 0; r < n; ++r) v[r] = vecs.at(r, c);
      CHECK(eig_residual_inf(m, v, vals[static_cast<std::size_t>(c)]) <= bound);
    }
    for (int c1 = 0; c1 < k; ++c1)
      for (int c2 = c1; c2 < k; ++c2) {
        double dot = 0.0;
        for (int r = 0; r < n; ++r) dot += vecs.at(r, c1) * vecs.at(r, c2);
        CHECK(std::fabs(dot - (c1 == c2 ? 1.0 : 0.0)) <= 1e-7);
      }
    // eigenvalues ascending
    for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] >= vals[i - 1] - 1e-12);
  }
}

TEST_CASE("kmeans separates two distant clouds") {
  Tensor pts({6, 2}, {0, 0, 0.1, 0, 0, 0.1, 10, 10, 10.1, 10, 10, 10.1});
  const auto labels = kmeans(pts, 2, 5);
  CHECK(labels[0] == labels[1]);
  CHECK(labels[1] == labels[2]);
  CHECK(labels[3] == labels[4]);
  CHECK(labels[4] == labels[5]);
  CHECK(labels[0] != labels[3]);
}

TEST_CASE("kmeans with k equal to point count gives singleton clusters") {
  Tensor pts({4, 1}, {0.0, 1.0, 2.0, 3.0});
  const auto labels = kmeans(pts, 4, 17);
  std::vector<int> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3});
  CHECK(kmeans_wcss(pts, labels, 4) == doctest::Approx(0.0));
}

TEST_CASE("kmeans rejects k larger than N") {
  Tensor pts({2, 1}, {0.0, 1.0});
  CHECK_THROWS_AS(kmeans(pts, 3, 0), argument_error);
}

TEST_CASE("kmeans deterministic per seed") {
  Rng rng(3);
  Tensor pts({20, 2});
  for (int i = 0; i < pts.size(); ++i) pts[i] = rng.uniform(0, 1);
  const auto a = kmeans(pts, 4, 9);
  const auto b = kmeans(pts, 4, 9);
  CHECK(a == b);
}

TEST_CASE("kmeans WCSS non-increasing across iterations") {
  Rng rng(15);
  Tensor pts({40, 3});
  for (int i = 0; i < pts.size(); ++i) pts[i] = rng.normal();
  std::vector<double> history;
  kmeans(pts, 5, 2, &history);
  REQUIRE(history.size() >= 2);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] + 1e-9);
}

TEST_CASE("kmeans matches exhaustive assignment oracle on 3 blobs") {
  // 12 points in 3 tight blobs; the oracle tries every 3^12 assignment.
  Rng rng(21);
  Tensor pts({12, 2});
  const double cx[3] = {0.0, 8.0, 0.0};
  const double cy[3] = {0.0, 0.0, 8.0};
  for (int i = 0; i < 12; ++i) {
    const int blob = i / 4;
    pts.at(i, 0) = cx[blob] + rng.uniform(-0.5, 0.5);
    pts.at(i, 1) = cy[blob] + rng.uniform(-0.5, 0.5);
  }

  std::vector<int> best(12, 0);
  double best_wcss = 1e300;
  std::vector<int> assign(12, 0);
  const long long total = 531441;  // 3^12
  for (long long code = 0; code < total; ++code) {
    long long c = code;
    for (int i = 0; i < 12; ++i) {
      assign[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      c /= 3;
    }
    const double w = kmeans_wcss(pts, assign, 3);
    if (w < best_wcss - 1e-12) {
      best_wcss = w;
      best = assign;
    }
  }

  const auto labels = kmeans(pts, 3, 77);
  CHECK(canonical_labels(labels) == canonical_labels(best));
  CHECK(kmeans_wcss(pts, labels, 3) == doctest::Approx(best_wcss).epsilon(1e-9));
}
