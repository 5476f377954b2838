#include "sim.hpp"

#include <algorithm>
#include <cmath>

namespace evhar {

EventStream simulate_events(const std::vector<ImageF>& frames, const SimParams& params) {
  if (frames.size() < 2) fail(ErrorCode::degenerate_video, "simulator needs at least two frames");
  if (params.fps <= 0 || params.theta <= 0 || params.eps <= 0 || params.noise_rate < 0)
    fail(ErrorCode::config, "bad simulator parameters");
  const int w = frames[0].width, h = frames[0].height;
  if (w <= 0 || h <= 0 || w > 0xFFFF || h > 0xFFFF)
    fail(ErrorCode::config, "bad simulator frame geometry");
  for (const ImageF& f : frames)
    if (!f.same_shape(frames[0]))
      fail(ErrorCode::geometry_mismatch, "simulator frames differ in size");

  EventStream out;
  out.geometry = {uint16_t(w), uint16_t(h)};

  std::vector<double> memory(size_t(w) * h);
  for (size_t i = 0; i < memory.size(); ++i)
    memory[i] = std::log(double(frames[0].px[i]) + params.eps);

  Rng noise_rng(mix_seed(params.seed, 0x6E015Eull));
  const double lambda = params.noise_rate / params.fps;

  for (size_t k = 1; k < frames.size(); ++k) {
    const int64_t t = llround(double(k) * 1e6 / params.fps);
    const ImageF& f = frames[k];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        size_t i = size_t(y) * w + x;
        double d = std::log(double(f.px[i]) + params.eps) - memory[i];
        int n = int(std::floor(std::abs(d) / params.theta));
        if (n <= 0) continue;
        Polarity pol = d > 0 ? Polarity::on : Polarity::off;
        for (int e = 0; e < n; ++e)
          out.events.push_back({t, uint16_t(x), uint16_t(y), pol});
        memory[i] += double(n) * params.theta * (d > 0 ? 1.0 : -1.0);
      }
    }
    if (lambda > 0) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          uint32_t m = noise_rng.poisson(lambda);
          for (uint32_t e = 0; e < m; ++e)
            out.events.push_back({t, uint16_t(x), uint16_t(y),
                                  noise_rng.bounded(2) ? Polarity::on : Polarity::off});
        }
      }
    }
  }
  return out;
}

const std::vector<std::string>& gesture_class_names() {
  static const std::vector<std::string> names = {
      "swipe_left", "swipe_right", "swipe_up", "swipe_down", "cw_circle", "ccw_circle"};
  return names;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

struct ClipStyle {
  double disc_r;
  double speed_mul;
  double off_x, off_y;
  double fg, bg;
  double circ_r;
  double tilt;
  double arc_span;
  double theta0;
};

// Style is a function of subject and rep only, never class; the mirrored
// classes below then come out as exact pixel mirrors of their partners.
ClipStyle make_style(int subject, int rep, uint64_t seed) {
  Rng srng(mix_seed(seed, 0x5EED5ull, uint64_t(subject)));
  ClipStyle s;
  s.disc_r = 7.0 + 3.0 * srng.uniform();
  s.speed_mul = 0.82 + 0.18 * srng.uniform();  // <= 1 so the disc never rests
  s.off_x = (srng.uniform() - 0.5) * 16.0;
  s.off_y = (srng.uniform() - 0.5) * 16.0;
  s.fg = 0.75 + 0.2 * srng.uniform();
  s.bg = 0.08 + 0.06 * srng.uniform();
  s.circ_r = 28.0 + 8.0 * srng.uniform();

  Rng rrng(mix_seed(seed, 0xC11Full, uint64_t(subject), uint64_t(rep)));
  s.disc_r += (rrng.uniform() - 0.5) * 2.0;
  s.off_x += (rrng.uniform() - 0.5) * 8.0;
  s.off_y += (rrng.uniform() - 0.5) * 8.0;
  s.circ_r += (rrng.uniform() - 0.5) * 4.0;
  s.tilt = (rrng.uniform() - 0.5) * 0.15;
  s.arc_span = 1.5 * kPi * (0.92 + 0.16 * rrng.uniform());
  s.theta0 = -kPi / 2.0 + (rrng.uniform() - 0.5) * 0.3;
  return s;
}

struct Vec2 {
  double x, y;
};

// Disc center at progress u in [0,1] for the three canonical classes;
// swipe_right / swipe_down / ccw_circle are mirrors of these. Clockwise in
// screen coordinates means increasing polar angle (y grows downward).
Vec2 gesture_pos(int cls, double u, const ClipStyle& s, int w, int h) {
  double ue = std::clamp(0.5 + s.speed_mul * (u - 0.5), 0.0, 1.0);
  double px = (w - 1) / 2.0;  // mirror pivots
  double py = (h - 1) / 2.0;
  double cx = px + s.off_x;
  double cy = py + s.off_y;
  double margin = s.disc_r + 6.0;
  Vec2 p;
  switch (cls & ~1) {
    case 0:  // swipe_left
      p.x = (w - 1 - margin) + ue * (margin - (w - 1 - margin));
      p.y = cy + s.tilt * (p.x - px);
      break;
    case 2:  // swipe_up
      p.y = (h - 1 - margin) + ue * (margin - (h - 1 - margin));
      p.x = cx + s.tilt * (p.y - py);
      break;
    case 4: {  // cw_circle
      double th = s.theta0 + s.arc_span * ue;
      p.x = cx + s.circ_r * std::cos(th);
      p.y = cy + s.circ_r * std::sin(th);
      break;
    }
    default:
      fail(ErrorCode::invalid_argument, "gesture class out of range");
  }
  if (cls == 1) p.x = (w - 1) - p.x;                  // swipe_right
  if (cls == 3 || cls == 5) p.y = (h - 1) - p.y;      // swipe_down, ccw_circle
  return p;
}

void render_disc(ImageF& img, Vec2 c, double r, double fg) {
  int x0 = std::max(0, int(std::floor(c.x - r - 2)));
  int x1 = std::min(img.width - 1, int(std::ceil(c.x + r + 2)));
  int y0 = std::max(0, int(std::floor(c.y - r - 2)));
  int y1 = std::min(img.height - 1, int(std::ceil(c.y + r + 2)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double d = std::hypot(x - c.x, y - c.y);
      double cov = std::clamp((r - d) / 1.5 + 0.5, 0.0, 1.0);
      if (cov > 0) {
        float& v = img.at(x, y);
        v = float(v + (fg - v) * cov);
      }
    }
  }
}

}  // namespace

std::vector<ImageF> render_gesture(int cls, int subject, int rep, const GestureParams& params) {
  if (cls < 0 || cls >= int(gesture_class_names().size()))
    fail(ErrorCode::invalid_argument, "gesture class out of range");
  if (subject < 0 || rep < 0) fail(ErrorCode::invalid_argument, "negative subject or rep");
  if (params.width < 32 || params.height < 32)
    fail(ErrorCode::config, "gesture canvas too small");
  if (params.fps <= 0 || params.duration_s <= 0)
    fail(ErrorCode::config, "bad gesture timing");

  ClipStyle style = make_style(subject, rep, params.seed);
  int steps = std::max(1, int(std::lround(params.duration_s * params.fps)));
  std::vector<ImageF> frames;
  frames.reserve(size_t(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    double u = double(k) / steps;
    ImageF frame(params.width, params.height, float(style.bg));
    Vec2 c = gesture_pos(cls, u, style, params.width, params.height);
    render_disc(frame, c, style.disc_r, style.fg);
    frames.push_back(std::move(frame));
  }
  return frames;
}

EventStream synth_gesture(int cls, int subject, int rep, const GestureParams& params) {
  std::vector<ImageF> frames = render_gesture(cls, subject, rep, params);
  SimParams sim;
  sim.fps = params.fps;
  sim.theta = params.theta;
  sim.eps = params.eps;
  sim.noise_rate = params.noise_rate;
  sim.seed = mix_seed(params.seed, uint64_t(cls), uint64_t(subject), uint64_t(rep) ^ 0x9E37ull);
  return simulate_events(frames, sim);
}

}  // namespace evhar
