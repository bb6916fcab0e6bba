#include "mhparse/superpixels.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mhparse {

std::vector<std::vector<int>> SuperpixelMap::pixel_lists() const {
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(count));
  const int h = assignment.extent(0), w = assignment.extent(1);
  for (int k = 0; k < h * w; ++k) lists[static_cast<std::size_t>(assignment[k])].push_back(k);
  return lists;
}

std::vector<std::vector<int>> SuperpixelMap::pixel_lists_at(int out_h, int out_w) const {
  const int h = assignment.extent(0), w = assignment.extent(1);
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(count));
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min(h - 1, static_cast<int>((y + 0.5) * h / out_h));
    for (int x = 0; x < out_w; ++x) {
      const int sx = std::min(w - 1, static_cast<int>((x + 0.5) * w / out_w));
      lists[static_cast<std::size_t>(id_at(sy, sx))].push_back(y * out_w + x);
    }
  }
  for (int s = 0; s < count; ++s)
    if (lists[static_cast<std::size_t>(s)].empty())
      throw resolution_error("superpixel " + std::to_string(s) + " vanished at " +
                             std::to_string(out_h) + "x" + std::to_string(out_w));
  return lists;
}

std::vector<std::vector<int>> SuperpixelMap::adjacency() const {
  const int h = assignment.extent(0), w = assignment.extent(1);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(count));
  auto link = [&](int a, int b) {
    if (a == b) return;
    auto& va = adj[static_cast<std::size_t>(a)];
    if (std::find(va.begin(), va.end(), b) == va.end()) {
      va.push_back(b);
      adj[static_cast<std::size_t>(b)].push_back(a);
    }
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) link(id_at(y, x), id_at(y, x + 1));
      if (y + 1 < h) link(id_at(y, x), id_at(y + 1, x));
    }
  return adj;
}

void SuperpixelMap::validate() const {
  const int h = assignment.extent(0), w = assignment.extent(1);
  std::vector<int> seen(static_cast<std::size_t>(count), 0);
  for (int k = 0; k < h * w; ++k) {
    const double v = assignment[k];
    if (v < 0 || v >= count || v != std::floor(v))
      throw contract_error("superpixel id out of range at pixel " + std::to_string(k));
    ++seen[static_cast<std::size_t>(v)];
  }
  for (int s = 0; s < count; ++s)
    if (!seen[static_cast<std::size_t>(s)]) throw contract_error("superpixel id " + std::to_string(s) + " unused");

  // 4-connectivity: one BFS per id must reach all its pixels.
  Tensor visited({h, w});
  for (int start = 0; start < h * w; ++start) {
    if (visited[start] != 0.0) continue;
    const int id = static_cast<int>(assignment[start]);
    int reached = 0;
    std::queue<int> q;
    q.push(start);
    visited[start] = 1.0;
    while (!q.empty()) {
      const int k = q.front();
      q.pop();
      ++reached;
      const int y = k / w, x = k % w;
      const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
      for (int d = 0; d < 4; ++d) {
        const int ny = y + dy[d], nx = x + dx[d];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const int nk = ny * w + nx;
        if (visited[nk] == 0.0 && static_cast<int>(assignment[nk]) == id) {
          visited[nk] = 1.0;
          q.push(nk);
        }
      }
    }
    if (reached != seen[static_cast<std::size_t>(id)])
      throw contract_error("superpixel " + std::to_string(id) + " is not 4-connected");
    seen[static_cast<std::size_t>(id)] = reached;  // unchanged; keeps counts for later ids
  }
}

SuperpixelMap make_superpixels(const Tensor& image, int target_size, double compactness) {
  if (target_size < 4) throw argument_error("superpixel target size must be >= 4");
  if (image.rank() != 3 || image.extent(2) != 3) throw argument_error("expected H x W x 3 image");
  const int h = image.extent(0), w = image.extent(1);

  const int step = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(target_size)))));
  const int gy = std::max(1, h / step), gx = std::max(1, w / step);
  const int n_seeds = gy * gx;

  struct Center {
    double r, g, b, y, x;
  };
  std::vector<Center> centers(static_cast<std::size_t>(n_seeds));
  for (int cy = 0; cy < gy; ++cy)
    for (int cx = 0; cx < gx; ++cx) {
      const int py = std::min(h - 1, cy * h / gy + h / (2 * gy));
      const int px = std::min(w - 1, cx * w / gx + w / (2 * gx));
      centers[static_cast<std::size_t>(cy * gx + cx)] = {image.at(py, px, 0), image.at(py, px, 1),
                                                         image.at(py, px, 2), static_cast<double>(py),
                                                         static_cast<double>(px)};
    }

  const double spatial_w = (compactness / step) * (compactness / step);
  std::vector<int> label(static_cast<std::size_t>(h * w), -1);
  std::vector<double> best(static_cast<std::size_t>(h * w), 0.0);

  for (int iter = 0; iter < 8; ++iter) {
    std::fill(best.begin(), best.end(), 1e300);
    for (int s = 0; s < n_seeds; ++s) {
      const Center& c = centers[static_cast<std::size_t>(s)];
      const int y0 = std::max(0, static_cast<int>(c.y) - 2 * step);
      const int y1 = std::min(h - 1, static_cast<int>(c.y) + 2 * step);
      const int x0 = std::max(0, static_cast<int>(c.x) - 2 * step);
      const int x1 = std::min(w - 1, static_cast<int>(c.x) + 2 * step);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const double dr = image.at(y, x, 0) - c.r;
          const double dg = image.at(y, x, 1) - c.g;
          const double db = image.at(y, x, 2) - c.b;
          const double dy = y - c.y, dx = x - c.x;
          const double d = dr * dr + dg * dg + db * db + spatial_w * (dy * dy + dx * dx);
          const int k = y * w + x;
          if (d < best[static_cast<std::size_t>(k)]) {
            best[static_cast<std::size_t>(k)] = d;
            label[static_cast<std::size_t>(k)] = s;
          }
        }
    }
    // update centers
    std::vector<Center> sums(static_cast<std::size_t>(n_seeds), {0, 0, 0, 0, 0});
    std::vector<int> counts(static_cast<std::size_t>(n_seeds), 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int s = label[static_cast<std::size_t>(y * w + x)];
        if (s < 0) continue;
        Center& acc = sums[static_cast<std::size_t>(s)];
        acc.r += image.at(y, x, 0);
        acc.g += image.at(y, x, 1);
        acc.b += image.at(y, x, 2);
        acc.y += y;
        acc.x += x;
        ++counts[static_cast<std::size_t>(s)];
      }
    for (int s = 0; s < n_seeds; ++s) {
      if (counts[static_cast<std::size_t>(s)] == 0) continue;
      const double inv = 1.0 / counts[static_cast<std::size_t>(s)];
      Center& c = centers[static_cast<std::size_t>(s)];
      const Center& acc = sums[static_cast<std::size_t>(s)];
      c = {acc.r * inv, acc.g * inv, acc.b * inv, acc.y * inv, acc.x * inv};
    }
  }

  // Any pixel missed by all windows joins its left/up neighbor's label.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int k = y * w + x;
      if (label[static_cast<std::size_t>(k)] < 0)
        label[static_cast<std::size_t>(k)] =
            x > 0 ? label[static_cast<std::size_t>(k - 1)] : (y > 0 ? label[static_cast<std::size_t>(k - w)] : 0);
    }

  // Connectivity enforcement: keep the largest 4-connected component of each
  // label, absorb the rest into an adjacent component, then compact ids.
  std::vector<int> comp(static_cast<std::size_t>(h * w), -1);
  std::vector<int> comp_label, comp_size;
  for (int start = 0; start < h * w; ++start) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    const int id = static_cast<int>(comp_label.size());
    const int lbl = label[static_cast<std::size_t>(start)];
    int size = 0;
    std::queue<int> q;
    q.push(start);
    comp[static_cast<std::size_t>(start)] = id;
    while (!q.empty()) {
      const int k = q.front();
      q.pop();
      ++size;
      const int y = k / w, x = k % w;
      const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
      for (int d = 0; d < 4; ++d) {
        const int ny = y + dy[d], nx = x + dx[d];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const int nk = ny * w + nx;
        if (comp[static_cast<std::size_t>(nk)] < 0 && label[static_cast<std::size_t>(nk)] == lbl) {
          comp[static_cast<std::size_t>(nk)] = id;
          q.push(nk);
        }
      }
    }
    comp_label.push_back(lbl);
    comp_size.push_back(size);
  }

  std::vector<int> main_comp(static_cast<std::size_t>(n_seeds), -1);
  for (std::size_t c = 0; c < comp_label.size(); ++c) {
    const int lbl = comp_label[c];
    if (main_comp[static_cast<std::size_t>(lbl)] < 0 ||
        comp_size[c] > comp_size[static_cast<std::size_t>(main_comp[static_cast<std::size_t>(lbl)])])
      main_comp[static_cast<std::size_t>(lbl)] = static_cast<int>(c);
  }

  // Fragments merge into the first adjacent main component in scan order;
  // repeat until everything is absorbed (fragments can neighbor fragments).
  std::vector<int> final_comp = comp;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int k = 0; k < h * w; ++k) {
      const int c = final_comp[static_cast<std::size_t>(k)];
      if (main_comp[static_cast<std::size_t>(comp_label[static_cast<std::size_t>(c)])] == c) continue;
      const int y = k / w, x = k % w;
      const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
      for (int d = 0; d < 4; ++d) {
        const int ny = y + dy[d], nx = x + dx[d];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const int nc = final_comp[static_cast<std::size_t>(ny * w + nx)];
        if (main_comp[static_cast<std::size_t>(comp_label[static_cast<std::size_t>(nc)])] == nc) {
          final_comp[static_cast<std::size_t>(k)] = nc;
          changed = true;
          break;
        }
      }
    }
  }

  std::vector<int> compact(comp_label.size(), -1);
  int next_id = 0;
  SuperpixelMap map;
  map.assignment = Tensor({h, w});
  for (int k = 0; k < h * w; ++k) {
    const int c = final_comp[static_cast<std::size_t>(k)];
    if (compact[static_cast<std::size_t>(c)] < 0) compact[static_cast<std::size_t>(c)] = next_id++;
    map.assignment[k] = compact[static_cast<std::size_t>(c)];
  }
  map.count = next_id;
  return map;
}

}  // namespace mhparse
