#pragma once

#include <vector>

#include "descriptors.hpp"
#include "image.hpp"
#include "optical_flow.hpp"

namespace evhar {

struct TrajConfig {
  int step = 5;                 // sampling grid spacing
  int traj_len = 15;            // steps per complete trajectory (must be divisible by 3)
  double max_step = 8.0;        // larger single steps mark a track erratic
  double min_disp = 2.0;        // minimum summed path length to keep a track
  double flow_eps = 0.4;        // HOF still-pixel threshold
  double texture_thresh = 1e-4; // 3x3 intensity variance below this is untextured
};

struct PointD {
  double x = 0, y = 0;
};

struct Trajectory {
  int start_frame = 0;
  std::vector<PointD> points;  // traj_len + 1 entries once complete
};

// Grid positions (multiples of step, 1 px inside the border) that are
// textured and not within step/2 of an existing tracked point.
std::vector<PointD> dense_sample(const ImageF& frame, int step,
                                 const std::vector<PointD>& existing,
                                 double texture_thresh);

// 3x3 median of each component with edge replication; tracks advance on this.
FlowField median_filter_flow(const FlowField& f);

struct TrackResult {
  std::vector<Trajectory> trajectories;  // complete tracks, seeding order
  std::vector<FlowField> flows;          // one per consecutive frame pair
};

TrackResult track_trajectories(const std::vector<ImageF>& frames, const TrajConfig& cfg,
                               int workers = 1);

// Full-circle orientation bin for HOF: nearest of the 8 centers k*45deg,
// ties to the lower index (the 337.5deg tie wraps to bin 0).
int hof_angle_bin(double deg);

std::vector<float> hog_descriptor(const std::vector<ImageF>& frames, const Trajectory& t,
                                  const TrajConfig& cfg);
std::vector<float> hof_descriptor(const std::vector<FlowField>& flows, const Trajectory& t,
                                  const TrajConfig& cfg);
std::vector<float> mbh_descriptor(const std::vector<FlowField>& flows, const Trajectory& t,
                                  const TrajConfig& cfg);

struct TrajectoryFeatures {
  std::vector<Trajectory> trajectories;
  DescriptorSet hog, hof, mbh;
};

// Frames to tracked descriptors in one call; descriptor row i belongs to
// trajectory i.
TrajectoryFeatures extract_trajectories(const std::vector<ImageU8>& frames,
                                        const TrajConfig& cfg, int workers = 1);

}  // namespace evhar
