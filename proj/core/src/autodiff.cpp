#include "mhparse/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace mhparse::ad {

Val Tape::make(Tensor value, bool needs_grad, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Tensor(value.shape());
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Val{static_cast<int>(nodes_.size()) - 1};
}

Val Tape::input(Tensor v) { return make(std::move(v), false, nullptr); }

Val Tape::param(const std::string& name, Tensor v) {
  Val out = make(std::move(v), true, nullptr);
  params_[name] = out.id;
  return out;
}

Val Tape::add(Val a, Val b) {
  if (!v(a.id).same_shape(v(b.id))) throw argument_error("add shape mismatch");
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] += v(b.id)[i];
  Val o = make(std::move(out), ng(a.id) || ng(b.id), nullptr);
  const int ia = a.id, ib = b.id, io = o.id;
  node(o).back = [ia, ib, io](Tape& t) {
    const Tensor& go = t.g(io);
    if (t.ng(ia))
      for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i];
    if (t.ng(ib))
      for (int i = 0; i < go.size(); ++i) t.g(ib)[i] += go[i];
  };
  return o;
}

Val Tape::sub(Val a, Val b) {
  if (!v(a.id).same_shape(v(b.id))) throw argument_error("sub shape mismatch");
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] -= v(b.id)[i];
  Val o = make(std::move(out), ng(a.id) || ng(b.id), nullptr);
  const int ia = a.id, ib = b.id, io = o.id;
  node(o).back = [ia, ib, io](Tape& t) {
    const Tensor& go = t.g(io);
    if (t.ng(ia))
      for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i];
    if (t.ng(ib))
      for (int i = 0; i < go.size(); ++i) t.g(ib)[i] -= go[i];
  };
  return o;
}

Val Tape::mul(Val a, Val b) {
  if (!v(a.id).same_shape(v(b.id))) throw argument_error("mul shape mismatch");
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] *= v(b.id)[i];
  Val o = make(std::move(out), ng(a.id) || ng(b.id), nullptr);
  const int ia = a.id, ib = b.id, io = o.id;
  node(o).back = [ia, ib, io](Tape& t) {
    const Tensor& go = t.g(io);
    if (t.ng(ia))
      for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i] * t.v(ib)[i];
    if (t.ng(ib))
      for (int i = 0; i < go.size(); ++i) t.g(ib)[i] += go[i] * t.v(ia)[i];
  };
  return o;
}

Val Tape::scale(Val a, double s) {
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] *= s;
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io, s](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i] * s;
  };
  return o;
}

Val Tape::add_rowvec(Val m, Val bias) {
  const Tensor& mm = v(m.id);
  const Tensor& bb = v(bias.id);
  if (mm.rank() != 2 || bb.size() != mm.extent(1))
    throw argument_error("add_rowvec shape mismatch");
  Tensor out = mm;
  const int rows = mm.extent(0), cols = mm.extent(1);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.at(r, c) += bb[c];
  Val o = make(std::move(out), ng(m.id) || ng(bias.id), nullptr);
  const int im = m.id, ib = bias.id, io = o.id;
  node(o).back = [im, ib, io, rows, cols](Tape& t) {
    const Tensor& go = t.g(io);
    if (t.ng(im))
      for (int i = 0; i < go.size(); ++i) t.g(im)[i] += go[i];
    if (t.ng(ib))
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) t.g(ib)[c] += go[r * cols + c];
  };
  return o;
}

Val Tape::matmul(Val a, Val b) {
  Tensor out = mhparse::matmul(v(a.id), v(b.id));
  Val o = make(std::move(out), ng(a.id) || ng(b.id), nullptr);
  const int ia = a.id, ib = b.id, io = o.id;
  node(o).back = [ia, ib, io](Tape& t) {
    const Tensor& go = t.g(io);
    const Tensor& av = t.v(ia);
    const Tensor& bv = t.v(ib);
    const int m = av.extent(0), k = av.extent(1), n = bv.extent(1);
    if (t.ng(ia)) {
      Tensor& ga = t.g(ia);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double gij = go.at(i, j);
          if (gij == 0.0) continue;
          for (int p = 0; p < k; ++p) ga.at(i, p) += gij * bv.at(p, j);
        }
    }
    if (t.ng(ib)) {
      Tensor& gb = t.g(ib);
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          const double aip = av.at(i, p);
          if (aip == 0.0) continue;
          for (int j = 0; j < n; ++j) gb.at(p, j) += aip * go.at(i, j);
        }
    }
  };
  return o;
}

Val Tape::transpose2(Val a) {
  Tensor out = mhparse::transpose(v(a.id));
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const int m = go.extent(0), n = go.extent(1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) t.g(ia).at(j, i) += go.at(i, j);
  };
  return o;
}

Val Tape::reshape(Val a, std::vector<int> shape) {
  if (Tensor::count(shape) != v(a.id).size()) throw argument_error("reshape size mismatch");
  Tensor out(std::move(shape));
  for (int i = 0; i < out.size(); ++i) out[i] = v(a.id)[i];
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i];
  };
  return o;
}

Val Tape::vexp(Val a) {
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& ov = t.v(io);
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i] * ov[i];
  };
  return o;
}

Val Tape::vlog(Val a) {
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& av = t.v(ia);
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i] / av[i];
  };
  return o;
}

Val Tape::vtanh(Val a) {
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& ov = t.v(io);
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i] * (1.0 - ov[i] * ov[i]);
  };
  return o;
}

Val Tape::relu(Val a) {
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& av = t.v(ia);
    for (int i = 0; i < go.size(); ++i)
      if (av[i] > 0.0) t.g(ia)[i] += go[i];
  };
  return o;
}

Val Tape::sigmoid(Val a) {
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& ov = t.v(io);
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i] * ov[i] * (1.0 - ov[i]);
  };
  return o;
}

Val Tape::clamp(Val a, double lo, double hi) {
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lo, hi);
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io, lo, hi](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& av = t.v(ia);
    for (int i = 0; i < go.size(); ++i)
      if (av[i] > lo && av[i] < hi) t.g(ia)[i] += go[i];
  };
  return o;
}

Val Tape::softmax_rows(Val a) {
  const Tensor& av = v(a.id);
  if (av.rank() != 2) throw argument_error("softmax_rows expects rank-2 tensor");
  const int rows = av.extent(0), cols = av.extent(1);
  Tensor out({rows, cols});
  for (int r = 0; r < rows; ++r) {
    double m = av.at(r, 0);
    for (int c = 1; c < cols; ++c) m = std::max(m, av.at(r, c));
    double z = 0.0;
    for (int c = 0; c < cols; ++c) z += std::exp(av.at(r, c) - m);
    for (int c = 0; c < cols; ++c) out.at(r, c) = std::exp(av.at(r, c) - m) / z;
  }
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io, rows, cols](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& ov = t.v(io);
    for (int r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += go.at(r, c) * ov.at(r, c);
      for (int c = 0; c < cols; ++c)
        t.g(ia).at(r, c) += ov.at(r, c) * (go.at(r, c) - dot);
    }
  };
  return o;
}

Val Tape::softmax_all(Val a) {
  const Tensor& av = v(a.id);
  Tensor out(av.shape());
  double m = av[0];
  for (int i = 1; i < av.size(); ++i) m = std::max(m, av[i]);
  double z = 0.0;
  for (int i = 0; i < av.size(); ++i) z += std::exp(av[i] - m);
  for (int i = 0; i < av.size(); ++i) out[i] = std::exp(av[i] - m) / z;
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& ov = t.v(io);
    double dot = 0.0;
    for (int i = 0; i < go.size(); ++i) dot += go[i] * ov[i];
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += ov[i] * (go[i] - dot);
  };
  return o;
}

Val Tape::sum(Val a) {
  Tensor out = Tensor::scalar(v(a.id).sum());
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io](Tape& t) {
    if (!t.ng(ia)) return;
    const double go = t.g(io)[0];
    for (int i = 0; i < t.g(ia).size(); ++i) t.g(ia)[i] += go;
  };
  return o;
}

Val Tape::mean(Val a) {
  const int n = v(a.id).size();
  Tensor out = Tensor::scalar(v(a.id).sum() / n);
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  node(o).back = [ia, io, n](Tape& t) {
    if (!t.ng(ia)) return;
    const double go = t.g(io)[0] / n;
    for (int i = 0; i < t.g(ia).size(); ++i) t.g(ia)[i] += go;
  };
  return o;
}

Val Tape::mul_const(Val a, Tensor c) {
  if (!v(a.id).same_shape(c)) throw argument_error("mul_const shape mismatch");
  Tensor out = v(a.id);
  for (int i = 0; i < out.size(); ++i) out[i] *= c[i];
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  auto cc = std::make_shared<Tensor>(std::move(c));
  node(o).back = [ia, io, cc](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    for (int i = 0; i < go.size(); ++i) t.g(ia)[i] += go[i] * (*cc)[i];
  };
  return o;
}

Val Tape::conv2d(Val x, Val w, Val bias, int stride, int pad) {
  const Tensor& xv = v(x.id);
  const Tensor& wv = v(w.id);
  const Tensor& bv = v(bias.id);
  if (xv.rank() != 3 || wv.rank() != 4) throw argument_error("conv2d expects HxWxC and KhxKwxCinxCout");
  const int h = xv.extent(0), wd = xv.extent(1), cin = xv.extent(2);
  const int kh = wv.extent(0), kw = wv.extent(1), cout = wv.extent(3);
  if (wv.extent(2) != cin) throw argument_error("conv2d channel mismatch");
  if (bv.size() != cout) throw argument_error("conv2d bias size mismatch");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  Tensor out({oh, ow, cout});
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      for (int co = 0; co < cout; ++co) out.at(oy, ox, co) = bv[co];
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= wd) continue;
          for (int ci = 0; ci < cin; ++ci) {
            const double xval = xv.at(iy, ix, ci);
            if (xval == 0.0) continue;
            for (int co = 0; co < cout; ++co)
              out.at(oy, ox, co) += xval * wv.at(ky, kx, ci, co);
          }
        }
      }
    }
  Val o = make(std::move(out), ng(x.id) || ng(w.id) || ng(bias.id), nullptr);
  const int ix_ = x.id, iw_ = w.id, ib_ = bias.id, io = o.id;
  node(o).back = [ix_, iw_, ib_, io, stride, pad](Tape& t) {
    const Tensor& go = t.g(io);
    const Tensor& xv2 = t.v(ix_);
    const Tensor& wv2 = t.v(iw_);
    const int h = xv2.extent(0), wd = xv2.extent(1), cin = xv2.extent(2);
    const int kh = wv2.extent(0), kw = wv2.extent(1), cout = wv2.extent(3);
    const int oh = go.extent(0), ow = go.extent(1);
    const bool nx = t.ng(ix_), nw = t.ng(iw_), nb = t.ng(ib_);
    if (nb) {
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
          for (int co = 0; co < cout; ++co) t.g(ib_)[co] += go.at(oy, ox, co);
    }
    if (!nx && !nw) return;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= wd) continue;
            for (int ci = 0; ci < cin; ++ci) {
              for (int co = 0; co < cout; ++co) {
                const double gval = go.at(oy, ox, co);
                if (gval == 0.0) continue;
                if (nx) t.g(ix_).at(iy, ix, ci) += gval * wv2.at(ky, kx, ci, co);
                if (nw) t.g(iw_).at(ky, kx, ci, co) += gval * xv2.at(iy, ix, ci);
              }
            }
          }
        }
  };
  return o;
}

Val Tape::global_avg_pool(Val x) {
  const Tensor& xv = v(x.id);
  if (xv.rank() != 3) throw argument_error("global_avg_pool expects HxWxC");
  const int h = xv.extent(0), w = xv.extent(1), c = xv.extent(2);
  Tensor out({1, c});
  for (int y = 0; y < h; ++y)
    for (int xx = 0; xx < w; ++xx)
      for (int ch = 0; ch < c; ++ch) out.at(0, ch) += xv.at(y, xx, ch);
  for (int ch = 0; ch < c; ++ch) out.at(0, ch) /= h * w;
  Val o = make(std::move(out), ng(x.id), nullptr);
  const int ia = x.id, io = o.id;
  node(o).back = [ia, io, h, w, c](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const double inv = 1.0 / (h * w);
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx)
        for (int ch = 0; ch < c; ++ch) t.g(ia).at(y, xx, ch) += go.at(0, ch) * inv;
  };
  return o;
}

Val Tape::superpixel_pool(Val rows,
                          std::shared_ptr<const std::vector<std::vector<int>>> pixels) {
  const Tensor& rv = v(rows.id);
  if (rv.rank() != 2) throw argument_error("superpixel_pool expects (pixels x channels)");
  const int c = rv.extent(1);
  const int n = static_cast<int>(pixels->size());
  Tensor out({n, c});
  for (int s = 0; s < n; ++s) {
    const auto& px = (*pixels)[static_cast<std::size_t>(s)];
    if (px.empty()) throw resolution_error("superpixel " + std::to_string(s) + " has no pixels at this resolution");
    for (int k : px)
      for (int ch = 0; ch < c; ++ch) out.at(s, ch) += rv.at(k, ch);
    for (int ch = 0; ch < c; ++ch) out.at(s, ch) /= static_cast<double>(px.size());
  }
  Val o = make(std::move(out), ng(rows.id), nullptr);
  const int ia = rows.id, io = o.id;
  node(o).back = [ia, io, pixels, n, c](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    for (int s = 0; s < n; ++s) {
      const auto& px = (*pixels)[static_cast<std::size_t>(s)];
      const double inv = 1.0 / static_cast<double>(px.size());
      for (int k : px)
        for (int ch = 0; ch < c; ++ch) t.g(ia).at(k, ch) += go.at(s, ch) * inv;
    }
  };
  return o;
}

Val Tape::gaussian_affinity(Val pooled, double theta) {
  const Tensor& pv = v(pooled.id);
  if (pv.rank() != 2) throw argument_error("gaussian_affinity expects N x C");
  if (theta <= 0.0) throw argument_error("gaussian_affinity requires theta > 0");
  const int n = pv.extent(0), c = pv.extent(1);
  const double inv2t2 = 1.0 / (2.0 * theta * theta);
  Tensor out({n, n});
  for (int i = 0; i < n; ++i) {
    out.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        const double d = pv.at(i, ch) - pv.at(j, ch);
        d2 += d * d;
      }
      const double a = std::exp(-d2 * inv2t2);
      out.at(i, j) = a;
      out.at(j, i) = a;
    }
  }
  Val o = make(std::move(out), ng(pooled.id), nullptr);
  const int ia = pooled.id, io = o.id;
  const double invt2 = 1.0 / (theta * theta);
  node(o).back = [ia, io, n, c, invt2](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& ov = t.v(io);
    const Tensor& pv2 = t.v(ia);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double gsum = go.at(i, j);
        if (gsum == 0.0) continue;
        const double coef = -gsum * ov.at(i, j) * invt2;
        for (int ch = 0; ch < c; ++ch) {
          const double diff = pv2.at(i, ch) - pv2.at(j, ch);
          t.g(ia).at(i, ch) += coef * diff;
          t.g(ia).at(j, ch) -= coef * diff;
        }
      }
  };
  return o;
}

Val Tape::normalize_adjacency(Val a) {
  const Tensor& av = v(a.id);
  if (av.rank() != 2 || av.extent(0) != av.extent(1))
    throw argument_error("normalize_adjacency expects square matrix");
  const int n = av.extent(0);
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double row = 1.0;  // self-loop from A + I
    for (int j = 0; j < n; ++j) row += av.at(i, j);
    s[static_cast<std::size_t>(i)] = row;
  }
  Tensor out({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double ahat = av.at(i, j) + (i == j ? 1.0 : 0.0);
      out.at(i, j) = ahat / std::sqrt(s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)]);
    }
  Val o = make(std::move(out), ng(a.id), nullptr);
  const int ia = a.id, io = o.id;
  auto degs = std::make_shared<std::vector<double>>(std::move(s));
  node(o).back = [ia, io, n, degs](Tape& t) {
    if (!t.ng(ia)) return;
    const Tensor& go = t.g(io);
    const Tensor& ov = t.v(io);
    const auto& s2 = *degs;
    // r_k = sum_j (g_kj N_kj + g_jk N_jk) / s_k; d/dA_kl = g_kl / sqrt(s_k s_l) - r_k / 2
    std::vector<double> r(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += go.at(k, j) * ov.at(k, j) + go.at(j, k) * ov.at(j, k);
      r[static_cast<std::size_t>(k)] = acc / s2[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        t.g(ia).at(k, l) += go.at(k, l) / std::sqrt(s2[static_cast<std::size_t>(k)] * s2[static_cast<std::size_t>(l)]) -
                            0.5 * r[static_cast<std::size_t>(k)];
  };
  return o;
}

Val Tape::cross_entropy_mean(Val logits, std::shared_ptr<const std::vector<int>> targets) {
  const Tensor& lv = v(logits.id);
  if (lv.rank() != 2) throw argument_error("cross_entropy_mean expects rank-2 logits");
  const int rows = lv.extent(0), cols = lv.extent(1);
  if (static_cast<int>(targets->size()) != rows)
    throw argument_error("cross_entropy_mean target count mismatch");
  double loss = 0.0;
  for (int r = 0; r < rows; ++r) {
    double m = lv.at(r, 0);
    for (int c = 1; c < cols; ++c) m = std::max(m, lv.at(r, c));
    double z = 0.0;
    for (int c = 0; c < cols; ++c) z += std::exp(lv.at(r, c) - m);
    loss += m + std::log(z) - lv.at(r, (*targets)[static_cast<std::size_t>(r)]);
  }
  loss /= rows;
  Val o = make(Tensor::scalar(loss), ng(logits.id), nullptr);
  const int ia = logits.id, io = o.id;
  node(o).back = [ia, io, rows, cols, targets](Tape& t) {
    if (!t.ng(ia)) return;
    const double go = t.g(io)[0] / rows;
    const Tensor& lv2 = t.v(ia);
    for (int r = 0; r < rows; ++r) {
      double m = lv2.at(r, 0);
      for (int c = 1; c < cols; ++c) m = std::max(m, lv2.at(r, c));
      double z = 0.0;
      for (int c = 0; c < cols; ++c) z += std::exp(lv2.at(r, c) - m);
      for (int c = 0; c < cols; ++c) {
        const double p = std::exp(lv2.at(r, c) - m) / z;
        const double onehot = (c == (*targets)[static_cast<std::size_t>(r)]) ? 1.0 : 0.0;
        t.g(ia).at(r, c) += go * (p - onehot);
      }
    }
  };
  return o;
}

void Tape::backward(Val loss) {
  if (v(loss.id).size() != 1) throw argument_error("backward expects a scalar loss");
  if (!v(loss.id).all_finite()) throw evaluation_error("backward on non-finite loss");
  g(loss.id)[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.needs_grad && n.back) n.back(*this);
  }
}

std::map<std::string, Tensor> Tape::param_grads() const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, id] : params_) out[name] = nodes_[static_cast<std::size_t>(id)].grad;
  return out;
}

}  // namespace mhparse::ad
