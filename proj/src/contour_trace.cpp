#include <algorithm>
#include <array>
#include <cmath>

#include "palynseg/imgcore.hpp"

namespace palynseg {

namespace {

// Crossing nodes live on the edges between horizontally (kH) or vertically
// (kV) adjacent pixel centers of the zero-padded grid.
enum NodeType { kH = 0, kV = 1 };

class NodeGrid {
 public:
  NodeGrid(int w, int h) : pw_(w + 2), ph_(h + 2), adj_(static_cast<std::size_t>(pw_) * ph_ * 2, {-1, -1}) {}

  int id(int x, int y, NodeType t) const { return ((y + 1) * pw_ + (x + 1)) * 2 + t; }

  Point2 position(int id) const {
    const int t = id & 1;
    const int cell = id >> 1;
    const int x = cell % pw_ - 1;
    const int y = cell / pw_ - 1;
    return t == kH ? Point2{x + 0.5, static_cast<double>(y)} : Point2{static_cast<double>(x), y + 0.5};
  }

  void link(int a, int b) {
    push(a, b);
    push(b, a);
  }

  const std::array<int, 2>& neighbors(int id) const { return adj_[id]; }
  std::size_t size() const { return adj_.size(); }

 private:
  void push(int a, int b) {
    auto& slot = adj_[a];
    if (slot[0] < 0) {
      slot[0] = b;
    } else {
      slot[1] = b;
    }
  }

  int pw_;
  int ph_;
  std::vector<std::array<int, 2>> adj_;
};

}  // namespace

std::vector<Contour> trace_boundaries(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  NodeGrid grid(w, h);

  for (int cy = -1; cy < h; ++cy) {
    for (int cx = -1; cx < w; ++cx) {
      const bool tl = mask.get_or_false(cx, cy);
      const bool tr = mask.get_or_false(cx + 1, cy);
      const bool br = mask.get_or_false(cx + 1, cy + 1);
      const bool bl = mask.get_or_false(cx, cy + 1);
      const int top = grid.id(cx, cy, kH);
      const int bottom = grid.id(cx, cy + 1, kH);
      const int left = grid.id(cx, cy, kV);
      const int right = grid.id(cx + 1, cy, kV);

      if (tl && br && !tr && !bl) {
        grid.link(top, right);
        grid.link(bottom, left);
        continue;
      }
      if (tr && bl && !tl && !br) {
        grid.link(top, left);
        grid.link(bottom, right);
        continue;
      }
      int ends[2];
      int n = 0;
      if (tl != tr) ends[n++] = top;
      if (tr != br) ends[n++] = right;
      if (bl != br) ends[n++] = bottom;
      if (tl != bl) ends[n++] = left;
      if (n == 2) grid.link(ends[0], ends[1]);
    }
  }

  std::vector<Contour> loops;
  std::vector<std::uint8_t> visited(grid.size(), 0);
  for (int start = 0; start < static_cast<int>(grid.size()); ++start) {
    if (visited[start] || grid.neighbors(start)[0] < 0) continue;
    Contour loop;
    int prev = -1;
    int cur = start;
    do {
      visited[cur] = 1;
      loop.points.push_back(grid.position(cur));
      const auto& nb = grid.neighbors(cur);
      const int next = nb[0] != prev ? nb[0] : nb[1];
      prev = cur;
      cur = next;
    } while (cur != start && cur >= 0);

    if (loop.signed_area() > 0.0) {
      std::reverse(loop.points.begin() + 1, loop.points.end());
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

Contour outer_boundary(const BinaryMask& mask) {
  auto loops = trace_boundaries(mask);
  if (loops.empty()) return {};
  auto best = std::max_element(loops.begin(), loops.end(), [](const Contour& a, const Contour& b) {
    return std::abs(a.signed_area()) < std::abs(b.signed_area());
  });
  return std::move(*best);
}

}  // namespace palynseg
