#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "mhparse/autodiff.hpp"
#include "mhparse/gradcheck.hpp"
#include "mhparse/rng.hpp"

using namespace mhparse;
using ad::Tape;
using ad::Val;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.normal() * scale;
  return t;
}

// Checks d(scalar expr)/d(single param tensor) against central differences.
double check_op(const std::function<Val(Tape&, Val)>& build, const Tensor& x, double eps = 1e-4) {
  ScalarFunction f;
  const std::vector<int> shape = x.shape();
  f.value = [&, shape](const Tensor& p) {
    Tape t;
    Val v = t.param("p", p);
    return t.val(build(t, v))[0];
  };
  f.gradient = [&, shape](const Tensor& p) {
    Tape t;
    Val v = t.param("p", p);
    t.backward(build(t, v));
    return t.param_grads().at("p");
  };
  return grad_check(f, x, eps);
}

}  // namespace

TEST_CASE("grad_check on x^2 at x=3") {
  ScalarFunction f;
  f.value = [](const Tensor& p) { return p[0] * p[0]; };
  f.gradient = [](const Tensor& p) { return Tensor({1}, {2.0 * p[0]}); };
  const double err = grad_check(f, Tensor::scalar(3.0), 1e-4);
  CHECK(err < 1e-6);
}

TEST_CASE("grad_check on a constant function reports zero error") {
  ScalarFunction f;
  f.value = [](const Tensor&) { return 42.0; };
  f.gradient = [](const Tensor& p) { return Tensor(p.shape()); };
  CHECK(grad_check(f, Tensor({3}, {1, 2, 3}), 1e-4) == 0.0);
}

TEST_CASE("grad_check rejects bad eps and non-finite values") {
  ScalarFunction f;
  f.value = [](const Tensor& p) { return std::log(p[0]); };
  f.gradient = [](const Tensor& p) { return Tensor({1}, {1.0 / p[0]}); };
  CHECK_THROWS_AS(grad_check(f, Tensor::scalar(1.0), 1e-2), argument_error);
  // probing 0 +- eps evaluates log of a negative number -> NaN
  CHECK_THROWS_AS(grad_check(f, Tensor::scalar(0.0), 1e-4), evaluation_error);
}

TEST_CASE("elementwise op gradients") {
  Rng rng(7);
  Tensor x = random_tensor({3, 4}, rng);

  CHECK(check_op([](Tape& t, Val v) { return t.sum(t.mul(v, v)); }, x) < 1e-6);
  CHECK(check_op([](Tape& t, Val v) { return t.mean(t.vexp(v)); }, x) < 1e-6);
  CHECK(check_op([](Tape& t, Val v) { return t.sum(t.vtanh(v)); }, x) < 1e-6);
  CHECK(check_op([](Tape& t, Val v) { return t.sum(t.sigmoid(v)); }, x) < 1e-6);
  CHECK(check_op([](Tape& t, Val v) { return t.sum(t.scale(v, -2.5)); }, x) < 1e-6);

  Tensor pos = random_tensor({3, 4}, rng);
  for (int i = 0; i < pos.size(); ++i) pos[i] = std::fabs(pos[i]) + 0.5;
  CHECK(check_op([](Tape& t, Val v) { return t.sum(t.vlog(v)); }, pos) < 1e-6);
}

TEST_CASE("matmul / transpose / reshape gradients") {
  Rng rng(11);
  Tensor x = random_tensor({3, 4}, rng);
  Tensor w = random_tensor({4, 2}, rng);

  auto build = [&](Tape& t, Val v) {
    Val ww = t.input(w);
    return t.sum(t.matmul(v, ww));
  };
  CHECK(check_op(build, x) < 1e-6);

  auto build_t = [&](Tape& t, Val v) { return t.sum(t.matmul(t.transpose2(v), v)); };
  CHECK(check_op(build_t, x) < 1e-6);

  auto build_r = [](Tape& t, Val v) { return t.sum(t.reshape(v, {12})); };
  CHECK(check_op(build_r, x) < 1e-6);
}

TEST_CASE("softmax gradients") {
  Rng rng(13);
  Tensor x = random_tensor({4, 5}, rng);
  Tensor w = random_tensor({4, 5}, rng);
  auto build = [&](Tape& t, Val v) { return t.sum(t.mul(t.softmax_rows(v), t.input(w))); };
  CHECK(check_op(build, x) < 1e-6);

  Tensor xv = random_tensor({6, 1}, rng);
  Tensor wv = random_tensor({6, 1}, rng);
  auto build_all = [&](Tape& t, Val v) { return t.sum(t.mul(t.softmax_all(v), t.input(wv))); };
  CHECK(check_op(build_all, xv) < 1e-6);
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(17);
  Tape t;
  Val v = t.input(random_tensor({5, 19}, rng, 3.0));
  const Tensor& p = t.val(t.softmax_rows(v));
  for (int r = 0; r < 5; ++r) {
    double s = 0.0;
    for (int c = 0; c < 19; ++c) s += p.at(r, c);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("conv2d matches direct convolution and gradients pass") {
  Rng rng(19);
  Tensor x = random_tensor({6, 6, 2}, rng);
  Tensor w = random_tensor({3, 3, 2, 4}, rng);
  Tensor b = random_tensor({4}, rng);

  Tape t;
  Val out = t.conv2d(t.input(x), t.input(w), t.input(b), 2, 1);
  const Tensor& o = t.val(out);
  REQUIRE(o.shape() == std::vector<int>{3, 3, 4});

  // direct recomputation at one output site
  double expect = b[1];
  const int oy = 1, ox = 2;
  for (int ky = 0; ky < 3; ++ky)
    for (int kx = 0; kx < 3; ++kx) {
      const int iy = oy * 2 - 1 + ky, ix = ox * 2 - 1 + kx;
      if (iy < 0 || iy >= 6 || ix < 0 || ix >= 6) continue;
      for (int ci = 0; ci < 2; ++ci) expect += x.at(iy, ix, ci) * w.at(ky, kx, ci, 1);
    }
  CHECK(o.at(oy, ox, 1) == doctest::Approx(expect).epsilon(1e-12));

  auto build_x = [&](Tape& tt, Val v) {
    return tt.sum(tt.vtanh(tt.conv2d(v, tt.input(w), tt.input(b), 2, 1)));
  };
  CHECK(check_op(build_x, x) < 1e-5);

  auto build_w = [&](Tape& tt, Val v) {
    return tt.sum(tt.vtanh(tt.conv2d(tt.input(x), v, tt.input(b), 1, 1)));
  };
  CHECK(check_op(build_w, w) < 1e-5);

  auto build_b = [&](Tape& tt, Val v) {
    return tt.sum(tt.vtanh(tt.conv2d(tt.input(x), tt.input(w), v, 1, 0)));
  };
  CHECK(check_op(build_b, b) < 1e-5);
}

TEST_CASE("pooling gradients") {
  Rng rng(23);
  Tensor x = random_tensor({4, 4, 3}, rng);
  auto build = [](Tape& t, Val v) { return t.sum(t.mul(t.global_avg_pool(v), t.global_avg_pool(v))); };
  CHECK(check_op(build, x) < 1e-6);

  auto pixels = std::make_shared<std::vector<std::vector<int>>>();
  pixels->push_back({0, 1, 4});
  pixels->push_back({2, 3});
  pixels->push_back({5, 6, 7});
  Tensor rows = random_tensor({8, 3}, rng);
  auto build_sp = [&](Tape& t, Val v) {
    return t.sum(t.vtanh(t.superpixel_pool(v, pixels)));
  };
  CHECK(check_op(build_sp, rows) < 1e-6);
}

TEST_CASE("superpixel_pool computes per-superpixel means") {
  Tensor rows({4, 2}, {1, 10, 3, 30, 5, 50, 7, 70});
  auto pixels = std::make_shared<std::vector<std::vector<int>>>();
  pixels->push_back({0, 1});
  pixels->push_back({2, 3});
  Tape t;
  const Tensor& p = t.val(t.superpixel_pool(t.input(rows), pixels));
  CHECK(p.at(0, 0) == doctest::Approx(2.0));
  CHECK(p.at(0, 1) == doctest::Approx(20.0));
  CHECK(p.at(1, 0) == doctest::Approx(6.0));
  CHECK(p.at(1, 1) == doctest::Approx(60.0));
}

TEST_CASE("superpixel_pool rejects empty superpixels") {
  auto pixels = std::make_shared<std::vector<std::vector<int>>>();
  pixels->push_back({0});
  pixels->push_back({});
  Tape t;
  Val rows = t.input(Tensor({2, 1}, {1, 2}));
  CHECK_THROWS_AS(t.superpixel_pool(rows, pixels), resolution_error);
}

TEST_CASE("gaussian_affinity values and gradients") {
  // squared distance exactly 2 theta^2 -> e^-1
  const double theta = 0.7;
  Tensor pts({2, 1}, {0.0, std::sqrt(2.0) * theta});
  Tape t;
  const Tensor& a = t.val(t.gaussian_affinity(t.input(pts), theta));
  CHECK(a.at(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(a.at(0, 0) == 1.0);
  CHECK(a.at(1, 1) == 1.0);

  Rng rng(29);
  Tensor x = random_tensor({5, 3}, rng);
  Tensor w = random_tensor({5, 5}, rng);
  auto build = [&](Tape& tt, Val v) {
    return tt.sum(tt.mul(tt.gaussian_affinity(v, 1.3), tt.input(w)));
  };
  CHECK(check_op(build, x) < 1e-5);
}

TEST_CASE("normalize_adjacency gradient") {
  Rng rng(31);
  Tensor a({4, 4});
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double v = rng.next_double();
      a.at(i, j) = v;
      a.at(j, i) = v;
    }
  Tensor w = random_tensor({4, 4}, rng);
  auto build = [&](Tape& t, Val v) {
    return t.sum(t.mul(t.normalize_adjacency(v), t.input(w)));
  };
  CHECK(check_op(build, a) < 1e-5);
}

TEST_CASE("cross_entropy_mean matches -mean log softmax and gradients pass") {
  Rng rng(37);
  Tensor logits = random_tensor({6, 5}, rng, 2.0);
  auto targets = std::make_shared<std::vector<int>>(std::vector<int>{0, 3, 2, 4, 1, 1});

  Tape t;
  Val l = t.input(logits);
  const double fused = t.val(t.cross_entropy_mean(l, targets))[0];

  double manual = 0.0;
  const Tensor& p = t.val(t.softmax_rows(l));
  for (int r = 0; r < 6; ++r) manual -= std::log(p.at(r, (*targets)[static_cast<std::size_t>(r)]));
  manual /= 6.0;
  CHECK(fused == doctest::Approx(manual).epsilon(1e-10));

  auto build = [&](Tape& tt, Val v) { return tt.cross_entropy_mean(v, targets); };
  CHECK(check_op(build, logits) < 1e-6);
}

TEST_CASE("clamp saturates gradient outside the window") {
  Tensor x({3}, {-1.0, 0.5, 2.0});
  Tape t;
  Val v = t.param("p", x);
  t.backward(t.sum(t.clamp(v, 0.0, 1.0)));
  const Tensor g = t.param_grads().at("p");
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 1.0);
  CHECK(g[2] == 0.0);
}

TEST_CASE("backward rejects non-scalar and non-finite losses") {
  Tape t;
  Val v = t.param("p", Tensor({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(t.backward(v), argument_error);

  Tape t2;
  Val z = t2.param("p", Tensor::scalar(0.0));
  Val bad = t2.vlog(z);  // log 0 = -inf
  CHECK_THROWS_AS(t2.backward(bad), evaluation_error);
}

TEST_CASE("gradients accumulate when a value is used twice") {
  Tape t;
  Val v = t.param("p", Tensor::scalar(3.0));
  Val y = t.mul(v, v);  // x^2, dy/dx = 6
  t.backward(t.sum(y));
  CHECK(t.param_grads().at("p")[0] == doctest::Approx(6.0));
}
