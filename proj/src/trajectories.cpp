#include "trajectories.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace evhar {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kPatch = 32;  // spatial patch side
constexpr int kHalo = kPatch + 2;

void validate(const TrajConfig& cfg) {
  if (cfg.step < 1) fail(ErrorCode::config, "trajectory step must be >= 1");
  if (cfg.traj_len < 3 || cfg.traj_len % 3 != 0)
    fail(ErrorCode::config, "traj_len must be a positive multiple of 3");
  if (cfg.max_step <= 0 || cfg.min_disp < 0 || cfg.flow_eps < 0 || cfg.texture_thresh < 0)
    fail(ErrorCode::config, "bad trajectory thresholds");
}

// 34x34 window around the rounded point, zero outside the image.
template <typename Getter>
void fill_halo(Getter&& value, int w, int h, PointD p, double* halo) {
  int cx = int(std::lround(p.x)), cy = int(std::lround(p.y));
  for (int b = 0; b < kHalo; ++b) {
    int y = cy - kHalo / 2 + b;
    for (int a = 0; a < kHalo; ++a) {
      int x = cx - kHalo / 2 + a;
      halo[b * kHalo + a] = (x >= 0 && x < w && y >= 0 && y < h) ? value(x, y) : 0.0;
    }
  }
}

// Unsigned 8-bin orientation histogram of central differences over the halo,
// magnitude weighted, accumulated into the temporal cell ct of acc[96].
void accum_grad_hist(const double* halo, int ct, double* acc) {
  for (int b = 0; b < kPatch; ++b) {
    for (int a = 0; a < kPatch; ++a) {
      double gx = halo[(b + 1) * kHalo + a + 2] - halo[(b + 1) * kHalo + a];
      double gy = halo[(b + 2) * kHalo + a + 1] - halo[b * kHalo + a + 1];
      double mag = std::hypot(gx, gy);
      if (mag == 0) continue;
      double ang = std::atan2(gy, gx);
      if (ang < 0) ang += kPi;
      if (ang >= kPi) ang -= kPi;  // 180 folds onto 0
      int bin = std::min(7, int(ang / (kPi / 8.0)));
      int cell = ct * 4 + (b / 16) * 2 + (a / 16);
      acc[cell * 8 + bin] += mag;
    }
  }
}

std::vector<float> normalized(const double* acc, int n) {
  double n2 = 0;
  for (int i = 0; i < n; ++i) n2 += acc[i] * acc[i];
  std::vector<float> out(size_t(n), 0.f);
  if (n2 > 0) {
    double inv = 1.0 / std::sqrt(n2);
    for (int i = 0; i < n; ++i) out[size_t(i)] = float(acc[i] * inv);
  }
  return out;
}

float median9(float* v) {
  std::nth_element(v, v + 4, v + 9);
  return v[4];
}

}  // namespace

std::vector<PointD> dense_sample(const ImageF& frame, int step,
                                 const std::vector<PointD>& existing,
                                 double texture_thresh) {
  if (step < 1) fail(ErrorCode::config, "sampling step must be >= 1");
  std::vector<PointD> out;
  const double r2 = (step / 2.0) * (step / 2.0);
  for (int y = step; y <= frame.height - 2; y += step) {
    for (int x = step; x <= frame.width - 2; x += step) {
      bool taken = false;
      for (const PointD& p : existing) {
        double dx = p.x - x, dy = p.y - y;
        if (dx * dx + dy * dy < r2) {
          taken = true;
          break;
        }
      }
      if (taken) continue;
      double mean = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) mean += frame.at(x + dx, y + dy);
      mean /= 9.0;
      double var = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          double d = frame.at(x + dx, y + dy) - mean;
          var += d * d;
        }
      var /= 9.0;
      if (var < texture_thresh) continue;
      out.push_back({double(x), double(y)});
    }
  }
  return out;
}

FlowField median_filter_flow(const FlowField& f) {
  FlowField out{ImageF(f.u.width, f.u.height), ImageF(f.v.width, f.v.height)};
  float window[9];
  for (const auto& [src, dst] : {std::pair{&f.u, &out.u}, std::pair{&f.v, &out.v}}) {
    for (int y = 0; y < src->height; ++y)
      for (int x = 0; x < src->width; ++x) {
        int k = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            window[k++] = src->at(std::clamp(x + dx, 0, src->width - 1),
                                  std::clamp(y + dy, 0, src->height - 1));
        dst->at(x, y) = median9(window);
      }
  }
  return out;
}

TrackResult track_trajectories(const std::vector<ImageF>& frames, const TrajConfig& cfg,
                               int workers) {
  validate(cfg);
  const int t_len = int(frames.size());
  TrackResult result;
  if (t_len < 2) return result;
  const int w = frames[0].width, h = frames[0].height;
  for (const ImageF& f : frames)
    if (!f.same_shape(frames[0])) fail(ErrorCode::geometry_mismatch, "frames differ in size");

  result.flows.resize(size_t(t_len - 1));
  parallel_for(size_t(t_len - 1), workers,
               [&](size_t i) { result.flows[i] = optical_flow(frames[i], frames[i + 1]); });
  std::vector<FlowField> med(result.flows.size());
  parallel_for(result.flows.size(), workers,
               [&](size_t i) { med[i] = median_filter_flow(result.flows[i]); });

  struct Track {
    Trajectory traj;
    uint64_t seq;
  };
  std::vector<Track> active;
  std::vector<Track> done;
  uint64_t seq = 0;

  for (int f = 0; f < t_len; ++f) {
    if (f > 0) {
      const FlowField& mf = med[size_t(f - 1)];
      std::vector<Track> keep;
      keep.reserve(active.size());
      for (Track& tr : active) {
        PointD p = tr.traj.points.back();
        double du = bilinear_at(mf.u, p.x, p.y);
        double dv = bilinear_at(mf.v, p.x, p.y);
        PointD np{p.x + du, p.y + dv};
        if (std::hypot(du, dv) > cfg.max_step) continue;  // erratic, drop entirely
        if (np.x < 0 || np.x > w - 1 || np.y < 0 || np.y > h - 1) continue;  // left frame
        tr.traj.points.push_back(np);
        if (int(tr.traj.points.size()) == cfg.traj_len + 1) {
          double path = 0;
          for (size_t i = 1; i < tr.traj.points.size(); ++i)
            path += std::hypot(tr.traj.points[i].x - tr.traj.points[i - 1].x,
                               tr.traj.points[i].y - tr.traj.points[i - 1].y);
          if (path >= cfg.min_disp) done.push_back(std::move(tr));
        } else {
          keep.push_back(std::move(tr));
        }
      }
      active = std::move(keep);
    }
    if (f <= t_len - 1 - cfg.traj_len) {
      std::vector<PointD> existing;
      existing.reserve(active.size());
      for (const Track& tr : active) existing.push_back(tr.traj.points.back());
      for (PointD p : dense_sample(frames[size_t(f)], cfg.step, existing, cfg.texture_thresh))
        active.push_back({Trajectory{f, {p}}, seq++});
    }
  }

  std::sort(done.begin(), done.end(),
            [](const Track& a, const Track& b) { return a.seq < b.seq; });
  result.trajectories.reserve(done.size());
  for (Track& tr : done) result.trajectories.push_back(std::move(tr.traj));
  return result;
}

int hof_angle_bin(double deg) {
  double r = deg / 45.0 + 0.5;
  double fl = std::floor(r);
  int n = int(fl);
  if (fl == r) {
    // equidistant between centers n-1 and n: lower wrapped index wins
    int lo = ((n - 1) % 8 + 8) % 8, hi = (n % 8 + 8) % 8;
    return std::min(lo, hi);
  }
  return (n % 8 + 8) % 8;
}

std::vector<float> hog_descriptor(const std::vector<ImageF>& frames, const Trajectory& t,
                                  const TrajConfig& cfg) {
  validate(cfg);
  if (int(t.points.size()) != cfg.traj_len + 1)
    fail(ErrorCode::invalid_argument, "trajectory is incomplete");
  const int cell_len = cfg.traj_len / 3;
  double halo[kHalo * kHalo];
  double acc[96] = {0};
  for (int k = 0; k < cfg.traj_len; ++k) {
    size_t fi = size_t(t.start_frame + k);
    if (fi >= frames.size()) fail(ErrorCode::invalid_argument, "trajectory exceeds video");
    const ImageF& img = frames[fi];
    fill_halo([&](int x, int y) { return double(img.at(x, y)); }, img.width, img.height,
              t.points[size_t(k)], halo);
    accum_grad_hist(halo, k / cell_len, acc);
  }
  return normalized(acc, 96);
}

std::vector<float> hof_descriptor(const std::vector<FlowField>& flows, const Trajectory& t,
                                  const TrajConfig& cfg) {
  validate(cfg);
  if (int(t.points.size()) != cfg.traj_len + 1)
    fail(ErrorCode::invalid_argument, "trajectory is incomplete");
  const int cell_len = cfg.traj_len / 3;
  double acc[108] = {0};
  for (int k = 0; k < cfg.traj_len; ++k) {
    size_t fi = size_t(t.start_frame + k);
    if (fi >= flows.size()) fail(ErrorCode::invalid_argument, "trajectory exceeds flow fields");
    const FlowField& fl = flows[fi];
    const int w = fl.u.width, h = fl.u.height;
    int cx = int(std::lround(t.points[size_t(k)].x));
    int cy = int(std::lround(t.points[size_t(k)].y));
    int ct = k / cell_len;
    for (int b = 0; b < kPatch; ++b) {
      int y = cy - kPatch / 2 + b;
      for (int a = 0; a < kPatch; ++a) {
        int x = cx - kPatch / 2 + a;
        double fu = 0, fv = 0;
        if (x >= 0 && x < w && y >= 0 && y < h) {
          fu = fl.u.at(x, y);
          fv = fl.v.at(x, y);
        }
        int cell = ct * 4 + (b / 16) * 2 + (a / 16);
        double mag = std::hypot(fu, fv);
        if (mag < cfg.flow_eps) {
          acc[cell * 9 + 8] += 1.0;  // still pixel, counted not weighted
        } else {
          double deg = std::atan2(fv, fu) * (180.0 / kPi);
          if (deg < 0) deg += 360.0;
          acc[cell * 9 + hof_angle_bin(deg)] += mag;
        }
      }
    }
  }
  return normalized(acc, 108);
}

std::vector<float> mbh_descriptor(const std::vector<FlowField>& flows, const Trajectory& t,
                                  const TrajConfig& cfg) {
  validate(cfg);
  if (int(t.points.size()) != cfg.traj_len + 1)
    fail(ErrorCode::invalid_argument, "trajectory is incomplete");
  const int cell_len = cfg.traj_len / 3;
  double halo[kHalo * kHalo];
  double acc_u[96] = {0}, acc_v[96] = {0};
  for (int k = 0; k < cfg.traj_len; ++k) {
    size_t fi = size_t(t.start_frame + k);
    if (fi >= flows.size()) fail(ErrorCode::invalid_argument, "trajectory exceeds flow fields");
    const FlowField& fl = flows[fi];
    int ct = k / cell_len;
    fill_halo([&](int x, int y) { return double(fl.u.at(x, y)); }, fl.u.width, fl.u.height,
              t.points[size_t(k)], halo);
    accum_grad_hist(halo, ct, acc_u);
    fill_halo([&](int x, int y) { return double(fl.v.at(x, y)); }, fl.v.width, fl.v.height,
              t.points[size_t(k)], halo);
    accum_grad_hist(halo, ct, acc_v);
  }
  // each component half is normalized on its own, then the pair once more so
  // every emitted descriptor is unit length
  std::vector<float> half_u = normalized(acc_u, 96);
  std::vector<float> half_v = normalized(acc_v, 96);
  double full[192];
  for (int i = 0; i < 96; ++i) {
    full[i] = half_u[size_t(i)];
    full[96 + i] = half_v[size_t(i)];
  }
  return normalized(full, 192);
}

TrajectoryFeatures extract_trajectories(const std::vector<ImageU8>& frames,
                                        const TrajConfig& cfg, int workers) {
  validate(cfg);
  std::vector<ImageF> ff(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) ff[i] = u8_to_f(frames[i]);

  TrackResult tracked = track_trajectories(ff, cfg, workers);
  TrajectoryFeatures out;
  out.trajectories = std::move(tracked.trajectories);
  const size_t n = out.trajectories.size();
  out.hog.dim = 96;
  out.hof.dim = 108;
  out.mbh.dim = 192;
  out.hog.data.assign(n * 96, 0.f);
  out.hof.data.assign(n * 108, 0.f);
  out.mbh.data.assign(n * 192, 0.f);
  parallel_for(n, workers, [&](size_t i) {
    const Trajectory& t = out.trajectories[i];
    auto hog = hog_descriptor(ff, t, cfg);
    auto hof = hof_descriptor(tracked.flows, t, cfg);
    auto mbh = mbh_descriptor(tracked.flows, t, cfg);
    std::copy(hog.begin(), hog.end(), out.hog.data.begin() + ptrdiff_t(i) * 96);
    std::copy(hof.begin(), hof.end(), out.hof.data.begin() + ptrdiff_t(i) * 108);
    std::copy(mbh.begin(), mbh.end(), out.mbh.data.begin() + ptrdiff_t(i) * 192);
  });
  return out;
}

}  // namespace evhar
