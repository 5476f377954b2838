#pragma once

#include <vector>

#include "descriptors.hpp"
#include "image.hpp"

namespace evhar {

// The three activity projections of a video. Grid shapes: xy is W wide by H
// tall, xt is W wide by T tall, yt is T wide by H tall.
struct MotionMaps {
  ImageD xy, xt, yt;
};

// activity(x,y,t) = |frame_t(x,y) - 128| / 127, averaged over the left-out
// axis, then each map rescaled by its own max into [0,1].
MotionMaps compute_motion_maps(const std::vector<ImageU8>& frames);

// Summed-area table, one row and column larger than the source.
struct IntegralImage {
  int width = 0;
  int height = 0;
  std::vector<double> table;  // (width+1) x (height+1), row-major

  IntegralImage() = default;
  explicit IntegralImage(const ImageD& img);

  double at(int col, int row) const { return table[size_t(row) * (width + 1) + col]; }
  // Sum over x0 <= x < x1, y0 <= y < y1.
  double rect(int x0, int y0, int x1, int y1) const {
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }
};

struct SurfKeypoint {
  int x = 0;
  int y = 0;
  double scale = 0;
};

struct SurfResult {
  std::vector<SurfKeypoint> keypoints;
  DescriptorSet descriptors;  // dim 64, one row per keypoint
};

// Upright SURF-64 on a dense grid: keypoints at multiples of grid_step whose
// 20s x 20s window fits inside the map, enumerated scale-major then row-major.
// Throws map_too_small when no scale's window fits the map at all.
SurfResult dense_surf(const ImageD& map, int grid_step, const std::vector<double>& scales,
                      int workers = 1);

}  // namespace evhar
