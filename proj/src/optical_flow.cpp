#include "optical_flow.hpp"

#include <algorithm>
#include <cmath>

#include "motion_maps.hpp"

namespace evhar {

ImageF u8_to_f(const ImageU8& img) {
  ImageF out(img.width, img.height);
  for (size_t i = 0; i < img.px.size(); ++i) out.px[i] = float(img.px[i]) / 255.f;
  return out;
}

float bilinear_at(const ImageF& img, double x, double y) {
  x = std::clamp(x, 0.0, double(img.width - 1));
  y = std::clamp(y, 0.0, double(img.height - 1));
  int x0 = int(x), y0 = int(y);
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  double fx = x - x0, fy = y - y0;
  double top = img.at(x0, y0) + fx * (double(img.at(x1, y0)) - img.at(x0, y0));
  double bot = img.at(x0, y1) + fx * (double(img.at(x1, y1)) - img.at(x0, y1));
  return float(top + fy * (bot - top));
}

namespace {

constexpr int kWindowRadius = 7;  // 15x15 window
constexpr int kIterations = 3;
constexpr double kDetEps = 1e-9;

// Separable binomial blur; raw textures are too harsh for stable window
// estimates, and blurring both frames alike preserves brightness constancy.
ImageF binom3(const ImageF& src) {
  const int w = src.width, h = src.height;
  ImageF tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
      tmp.at(x, y) = float((double(src.at(xm, y)) + 2.0 * src.at(x, y) + src.at(xp, y)) / 4.0);
    }
  for (int y = 0; y < h; ++y) {
    int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x)
      out.at(x, y) = float((double(tmp.at(x, ym)) + 2.0 * tmp.at(x, y) + tmp.at(x, yp)) / 4.0);
  }
  return out;
}

ImageF downsample(const ImageF& src) {
  int w = (src.width + 1) / 2, h = (src.height + 1) / 2;
  ImageF out(w, h);
  for (int y = 0; y < h; ++y) {
    int y0 = 2 * y, y1 = std::min(2 * y + 1, src.height - 1);
    for (int x = 0; x < w; ++x) {
      int x0 = 2 * x, x1 = std::min(2 * x + 1, src.width - 1);
      out.at(x, y) = float((double(src.at(x0, y0)) + src.at(x1, y0) + src.at(x0, y1) +
                            src.at(x1, y1)) /
                           4.0);
    }
  }
  return out;
}

void gradients(const ImageF& img, ImageD& gx, ImageD& gy) {
  const int w = img.width, h = img.height;
  for (int y = 0; y < h; ++y) {
    int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
      gx.at(x, y) = (double(img.at(xp, y)) - img.at(xm, y)) / 2.0;
      gy.at(x, y) = (double(img.at(x, yp)) - img.at(x, ym)) / 2.0;
    }
  }
}

// One refinement pass at the current pyramid level. The whole window is
// warped by the centre pixel's current flow; warping each pixel by its own
// flow couples neighbouring estimates and they settle into noisy fixpoints.
void refine(const ImageF& a, const ImageF& b, const ImageD& gx, const ImageD& gy,
            const IntegralImage& sxx, const IntegralImage& sxy, const IntegralImage& syy,
            ImageF& u, ImageF& v) {
  const int w = a.width, h = a.height;
  for (int y = 0; y < h; ++y) {
    int y0 = std::max(0, y - kWindowRadius), y1 = std::min(h, y + kWindowRadius + 1);
    for (int x = 0; x < w; ++x) {
      int x0 = std::max(0, x - kWindowRadius), x1 = std::min(w, x + kWindowRadius + 1);
      double axx = sxx.rect(x0, y0, x1, y1);
      double axy = sxy.rect(x0, y0, x1, y1);
      double ayy = syy.rect(x0, y0, x1, y1);
      double det = axx * ayy - axy * axy;
      if (std::abs(det) <= kDetEps) continue;
      double u0 = u.at(x, y), v0 = v.at(x, y);
      double bx = 0, by = 0;
      for (int wy = y0; wy < y1; ++wy)
        for (int wx = x0; wx < x1; ++wx) {
          double it = double(bilinear_at(b, wx + u0, wy + v0)) - a.at(wx, wy);
          bx += gx.at(wx, wy) * it;
          by += gy.at(wx, wy) * it;
        }
      double du = (axy * by - ayy * bx) / det;
      double dv = (axy * bx - axx * by) / det;
      du = std::clamp(du, -double(kWindowRadius), double(kWindowRadius));
      dv = std::clamp(dv, -double(kWindowRadius), double(kWindowRadius));
      u.at(x, y) = float(u0 + du);
      v.at(x, y) = float(v0 + dv);
    }
  }
}

}  // namespace

FlowField optical_flow(const ImageF& a, const ImageF& b) {
  if (!a.same_shape(b)) fail(ErrorCode::geometry_mismatch, "flow frames differ in size");
  if (a.width < 2 || a.height < 2) fail(ErrorCode::geometry_mismatch, "flow frames too small");

  int extra = 0;
  int m = std::min(a.width, a.height);
  while ((m >> (extra + 1)) >= 16) ++extra;

  std::vector<ImageF> pyr_a{a}, pyr_b{b};
  for (int l = 0; l < extra; ++l) {
    pyr_a.push_back(downsample(pyr_a.back()));
    pyr_b.push_back(downsample(pyr_b.back()));
  }

  ImageF u, v;
  for (int level = extra; level >= 0; --level) {
    const ImageF la = binom3(pyr_a[size_t(level)]);
    const ImageF lb = binom3(pyr_b[size_t(level)]);
    ImageF nu(la.width, la.height, 0.f), nv(la.width, la.height, 0.f);
    if (level < extra) {
      for (int y = 0; y < la.height; ++y)
        for (int x = 0; x < la.width; ++x) {
          nu.at(x, y) = 2.f * bilinear_at(u, x * 0.5, y * 0.5);
          nv.at(x, y) = 2.f * bilinear_at(v, x * 0.5, y * 0.5);
        }
    }
    u = std::move(nu);
    v = std::move(nv);

    ImageD gx(la.width, la.height), gy(la.width, la.height);
    gradients(la, gx, gy);
    ImageD pxx(la.width, la.height), pxy(la.width, la.height), pyy(la.width, la.height);
    for (size_t i = 0; i < gx.px.size(); ++i) {
      pxx.px[i] = gx.px[i] * gx.px[i];
      pxy.px[i] = gx.px[i] * gy.px[i];
      pyy.px[i] = gy.px[i] * gy.px[i];
    }
    IntegralImage sxx(pxx), sxy(pxy), syy(pyy);
    for (int it = 0; it < kIterations; ++it) {
      refine(la, lb, gx, gy, sxx, sxy, syy, u, v);
      // each window pixel is warped by its own flow, so without smoothing
      // between passes neighbouring residuals can lock into a noisy fixpoint
      u = binom3(u);
      v = binom3(v);
    }
  }
  return {std::move(u), std::move(v)};
}

}  // namespace evhar
