#pragma once

#include "image.hpp"

namespace evhar {

// Per-pixel displacement between two consecutive frames.
struct FlowField {
  ImageF u, v;
};

// Coarse-to-fine local least-squares flow: floor(log2(min(W,H)/16)) halvings
// above the base image, a 15x15 weighting window, 3 refinement iterations per
// level. Identical inputs produce an exactly zero field.
FlowField optical_flow(const ImageF& a, const ImageF& b);

ImageF u8_to_f(const ImageU8& img);

float bilinear_at(const ImageF& img, double x, double y);

}  // namespace evhar
