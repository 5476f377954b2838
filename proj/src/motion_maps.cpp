#include "motion_maps.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace evhar {

MotionMaps compute_motion_maps(const std::vector<ImageU8>& frames) {
  if (frames.empty()) fail(ErrorCode::degenerate_video, "video has no frames");
  const int w = frames[0].width, h = frames[0].height;
  const int t_len = int(frames.size());
  for (const ImageU8& f : frames)
    if (f.width != w || f.height != h)
      fail(ErrorCode::geometry_mismatch, "video frames differ in size");

  std::vector<double> axy(size_t(w) * h, 0.0);
  std::vector<double> axt(size_t(w) * t_len, 0.0);
  std::vector<double> ayt(size_t(t_len) * h, 0.0);
  for (int t = 0; t < t_len; ++t) {
    const ImageU8& f = frames[size_t(t)];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double a = std::abs(int(f.at(x, y)) - 128) / 127.0;
        if (a == 0) continue;
        axy[size_t(y) * w + x] += a;
        axt[size_t(t) * w + x] += a;
        ayt[size_t(y) * t_len + t] += a;
      }
    }
  }

  auto finish = [](std::vector<double>& acc, double denom, int mw, int mh) {
    ImageD img(mw, mh);
    double maxv = 0;
    for (double& v : acc) {
      v /= denom;
      maxv = std::max(maxv, v);
    }
    for (size_t i = 0; i < acc.size(); ++i)
      img.px[i] = maxv > 0 ? acc[i] / maxv : 0.0;
    return img;
  };

  MotionMaps maps;
  maps.xy = finish(axy, double(t_len), w, h);
  maps.xt = finish(axt, double(h), w, t_len);
  maps.yt = finish(ayt, double(w), t_len, h);
  return maps;
}

IntegralImage::IntegralImage(const ImageD& img) {
  width = img.width;
  height = img.height;
  table.assign(size_t(width + 1) * (height + 1), 0.0);
  for (int y = 0; y < height; ++y) {
    double rowsum = 0;
    for (int x = 0; x < width; ++x) {
      rowsum += img.at(x, y);
      table[size_t(y + 1) * (width + 1) + (x + 1)] =
          table[size_t(y) * (width + 1) + (x + 1)] + rowsum;
    }
  }
}

SurfResult dense_surf(const ImageD& map, int grid_step, const std::vector<double>& scales,
                      int workers) {
  if (grid_step < 1) fail(ErrorCode::config, "grid step must be >= 1");
  if (scales.empty()) fail(ErrorCode::config, "need at least one scale");
  for (double s : scales)
    if (!(s > 0)) fail(ErrorCode::config, "scales must be positive");
  const int w = map.width, h = map.height;

  bool any_fit = false;
  int fs_max = 1;
  double s_max = 0;
  for (double s : scales) {
    int margin = int(std::ceil(10.0 * s));
    if (2 * margin <= w && 2 * margin <= h) any_fit = true;
    fs_max = std::max(fs_max, int(std::max<long>(1, std::lround(s))));
    s_max = std::max(s_max, s);
  }
  if (!any_fit)
    fail(ErrorCode::map_too_small, "map " + std::to_string(w) + "x" + std::to_string(h) +
                                       " cannot fit a sampling window at any scale");

  // Replicate-pad far enough that every Haar box stays inside. Values are
  // anchored at map(0,0): Haar responses are shift-invariant anyway, and the
  // subtraction makes constant maps come out exactly zero instead of
  // normalized rounding noise.
  const int pad = int(std::ceil(10.0 * s_max)) + fs_max + 2;
  const double anchor = map.at(0, 0);
  ImageD padded(w + 2 * pad, h + 2 * pad);
  for (int y = 0; y < padded.height; ++y) {
    int sy = std::clamp(y - pad, 0, h - 1);
    for (int x = 0; x < padded.width; ++x)
      padded.at(x, y) = map.at(std::clamp(x - pad, 0, w - 1), sy) - anchor;
  }
  const IntegralImage ii(padded);

  SurfResult out;
  for (double s : scales) {
    int margin = int(std::ceil(10.0 * s));
    if (2 * margin > w || 2 * margin > h) continue;
    int x0 = ((margin + grid_step - 1) / grid_step) * grid_step;
    int y0 = x0;
    for (int ky = y0; ky <= h - margin; ky += grid_step)
      for (int kx = x0; kx <= w - margin; kx += grid_step)
        out.keypoints.push_back({kx, ky, s});
  }
  out.descriptors.dim = 64;
  out.descriptors.data.assign(out.keypoints.size() * 64, 0.f);
  if (out.keypoints.empty()) return out;

  double weights[400];
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 20; ++i) {
      double di = i - 9.5, dj = j - 9.5;
      weights[j * 20 + i] = std::exp(-(di * di + dj * dj) / (2.0 * 3.3 * 3.3));
    }

  parallel_for(out.keypoints.size(), workers, [&](size_t k) {
    const SurfKeypoint& kp = out.keypoints[k];
    const double s = kp.scale;
    const int fs = int(std::max<long>(1, std::lround(s)));
    const double box_area = double(fs) * (2 * fs + 1);
    double acc[64] = {0};
    for (int j = 0; j < 20; ++j) {
      for (int i = 0; i < 20; ++i) {
        int px = int(std::floor(kp.x + (i - 9.5) * s + 0.5)) + pad;
        int py = int(std::floor(kp.y + (j - 9.5) * s + 0.5)) + pad;
        double dx = (ii.rect(px + 1, py - fs, px + fs + 1, py + fs + 1) -
                     ii.rect(px - fs, py - fs, px, py + fs + 1)) /
                    box_area;
        double dy = (ii.rect(px - fs, py + 1, px + fs + 1, py + fs + 1) -
                     ii.rect(px - fs, py - fs, px + fs + 1, py)) /
                    box_area;
        double wgt = weights[j * 20 + i];
        int base = ((j / 5) * 4 + (i / 5)) * 4;
        acc[base + 0] += wgt * dx;
        acc[base + 1] += wgt * dy;
        acc[base + 2] += wgt * std::abs(dx);
        acc[base + 3] += wgt * std::abs(dy);
      }
    }
    double n2 = 0;
    for (double v : acc) n2 += v * v;
    float* row = out.descriptors.data.data() + k * 64;
    if (n2 > 0) {
      double inv = 1.0 / std::sqrt(n2);
      for (int m = 0; m < 64; ++m) row[m] = float(acc[m] * inv);
    }
  });
  return out;
}

}  // namespace evhar
