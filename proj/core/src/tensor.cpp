#include "mhparse/tensor.hpp"

#include <algorithm>

namespace mhparse {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0))
    throw argument_error("matmul shape mismatch " + a.shape_str() + " x " + b.shape_str());
  const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor c({m, n});
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double av = a.at(i, p);
      if (av == 0.0) continue;
      const double* brow = b.data() + static_cast<std::size_t>(p) * n;
      double* crow = c.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw argument_error("transpose expects rank-2 tensor");
  const int m = a.extent(0), n = a.extent(1);
  Tensor t({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

void require_finite(const Tensor& t, const std::string& what) {
  if (!t.all_finite()) throw contract_error(what + ": non-finite value");
}

double eig_residual_inf(const Tensor& m, const Tensor& v, double lambda) {
  const int n = m.extent(0);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int j = 0; j < n; ++j) r += m.at(i, j) * v[j];
    worst = std::max(worst, std::fabs(r - lambda * v[i]));
  }
  return worst;
}

Tensor bilinear_upsample(const Tensor& src, int out_h, int out_w) {
  if (src.rank() != 2 && src.rank() != 3)
    throw argument_error("bilinear_upsample expects rank-2 or rank-3 tensor");
  const int h = src.extent(0), w = src.extent(1);
  const int c = src.rank() == 3 ? src.extent(2) : 1;
  Tensor out(src.rank() == 3 ? std::vector<int>{out_h, out_w, c}
                             : std::vector<int>{out_h, out_w});
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        auto get = [&](int yy, int xx) {
          return src.rank() == 3 ? src.at(yy, xx, ch) : src.at(yy, xx);
        };
        const double top = get(y0, x0) * (1 - wx) + get(y0, x1) * wx;
        const double bot = get(y1, x0) * (1 - wx) + get(y1, x1) * wx;
        const double val = top * (1 - wy) + bot * wy;
        if (src.rank() == 3)
          out.at(y, x, ch) = val;
        else
          out.at(y, x) = val;
      }
    }
  }
  return out;
}

}  // namespace mhparse
