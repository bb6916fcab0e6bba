#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mhparse/errors.hpp"

namespace mhparse {

// Dense row-major tensor of doubles. Shapes are small (desk-scale images and
// parameter blocks), so everything is by value and copies are cheap enough.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(count(shape_)), 0.0);
  }

  Tensor(std::vector<int> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<long long>(data_.size()) != count(shape_))
      throw argument_error("tensor data length does not match shape");
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    for (double& x : t.data_) x = v;
    return t;
  }

  static Tensor identity(int n) {
    Tensor t({n, n});
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int extent(int d) const { return shape_[static_cast<std::size_t>(d)]; }
  int size() const { return static_cast<int>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

  double& at(int i, int j) { return data_[static_cast<std::size_t>(i * extent(1) + j)]; }
  double at(int i, int j) const { return data_[static_cast<std::size_t>(i * extent(1) + j)]; }

  double& at(int i, int j, int k) {
    return data_[static_cast<std::size_t>((i * extent(1) + j) * extent(2) + k)];
  }
  double at(int i, int j, int k) const {
    return data_[static_cast<std::size_t>((i * extent(1) + j) * extent(2) + k)];
  }

  double& at(int i, int j, int k, int l) {
    return data_[static_cast<std::size_t>(((i * extent(1) + j) * extent(2) + k) * extent(3) + l)];
  }
  double at(int i, int j, int k, int l) const {
    return data_[static_cast<std::size_t>(((i * extent(1) + j) * extent(2) + k) * extent(3) + l)];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

  double sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  static long long count(const std::vector<int>& shape) {
    long long n = 1;
    for (int e : shape) {
      if (e < 0) throw argument_error("negative tensor extent");
      n *= e;
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// C = A(m x k) * B(k x n)
Tensor matmul(const Tensor& a, const Tensor& b);

// Transpose of a rank-2 tensor.
Tensor transpose(const Tensor& a);

// Throws contract_error when any entry is NaN or infinite.
void require_finite(const Tensor& t, const std::string& what);

// Infinity norm of (a*v - lambda*v), used by eigensolver contracts and tests.
double eig_residual_inf(const Tensor& m, const Tensor& v, double lambda);

// Bilinear upsample of an H x W (x C) field to out_h x out_w.
Tensor bilinear_upsample(const Tensor& src, int out_h, int out_w);

}  // namespace mhparse
