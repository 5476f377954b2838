#pragma once

#include <string>
#include <vector>

#include "event_stream.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace evhar {

struct SimParams {
  double fps = 30.0;
  double theta = 0.2;         // log-intensity contrast threshold
  double eps = 1.0 / 255.0;   // additive offset before the log
  double noise_rate = 0.0;    // spurious events per pixel per second
  uint64_t seed = 42;
};

// Threshold-crossing DVS model over a rendered frame sequence. Frame k>0 is
// compared against a per-pixel log-intensity memory; each theta crossing
// emits one event stamped at that frame's time.
EventStream simulate_events(const std::vector<ImageF>& frames, const SimParams& params);

struct GestureParams {
  int width = 128;
  int height = 128;
  double fps = 30.0;
  double duration_s = 1.2;
  double theta = 0.2;
  double eps = 1.0 / 255.0;
  double noise_rate = 0.0;
  uint64_t seed = 42;
};

// 6-class synthetic gesture corpus: a moving disc on a dark background,
// rendered then pushed through simulate_events. Subject index drives stable
// style offsets (radius, speed, placement), rep adds smaller jitter.
// cls in [0,6): swipe_left, swipe_right, swipe_up, swipe_down, circle_cw, circle_ccw.
EventStream synth_gesture(int cls, int subject, int rep, const GestureParams& params);

const std::vector<std::string>& gesture_class_names();

// Rendered intensity frames for one gesture clip, [0,1] values.
std::vector<ImageF> render_gesture(int cls, int subject, int rep, const GestureParams& params);

}  // namespace evhar
