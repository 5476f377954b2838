#pragma once

#include <cstdint>
#include <vector>

#include "error.hpp"

namespace evhar {

// Row-major single-channel image.
template <typename T>
struct BasicImage {
  int width = 0;
  int height = 0;
  std::vector<T> px;

  BasicImage() = default;
  BasicImage(int w, int h, T fill = T()) : width(w), height(h), px(size_t(w) * h, fill) {}

  T& at(int x, int y) { return px[size_t(y) * width + x]; }
  T at(int x, int y) const { return px[size_t(y) * width + x]; }
  size_t size() const { return px.size(); }
  template <typename U>
  bool same_shape(const BasicImage<U>& o) const {
    return width == o.width && height == o.height;
  }
};

using ImageU8 = BasicImage<uint8_t>;  // accumulated event frames
using ImageF = BasicImage<float>;     // simulator input, flow fields
using ImageD = BasicImage<double>;    // motion maps

}  // namespace evhar
