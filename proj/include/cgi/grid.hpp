#pragma once

#include <cstdint>
#include <vector>

#include "cgi/errors.hpp"

namespace cgi {

/// Row-major 2D grid, origin at the top-left corner.
template <typename T>
struct Grid {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(uint32_t w, uint32_t h, T fill = T{})
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  size_t count() const { return static_cast<size_t>(width) * height; }
  size_t index(uint32_t x, uint32_t y) const { return static_cast<size_t>(y) * width + x; }

  T& at(uint32_t x, uint32_t y) { return values[index(x, y)]; }
  const T& at(uint32_t x, uint32_t y) const { return values[index(x, y)]; }

  bool same_shape(uint32_t w, uint32_t h) const { return width == w && height == h; }

  bool operator==(const Grid&) const = default;
};

/// Real-valued image plane (reconstructions, diagnostics).
using PixelMap = Grid<double>;

/// 8-bit display image.
using ByteMap = Grid<uint8_t>;

inline void require_same_shape(uint32_t aw, uint32_t ah, uint32_t bw, uint32_t bh,
                               const char* what) {
  if (aw != bw || ah != bh) {
    throw ConfigError(std::string(what) + ": dimension mismatch (" + std::to_string(aw) + "x" +
                      std::to_string(ah) + " vs " + std::to_string(bw) + "x" +
                      std::to_string(bh) + ")");
  }
}

}  // namespace cgi
