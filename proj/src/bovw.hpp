#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "descriptors.hpp"

namespace evhar {

// Visual vocabulary for one descriptor channel.
struct Codebook {
  Channel kind = Channel::xy;
  int k = 0;
  int d = 0;
  uint64_t seed = 0;
  std::vector<double> centroids;  // k rows of d, row-major
  std::vector<double> objective;  // per-iteration k-means objective, not persisted

  const double* row(int i) const { return centroids.data() + size_t(i) * size_t(d); }
};

// Per-video random subsets concatenated into one training matrix. Every video
// gets budget / n picks (the first budget % n videos one more); videos with
// fewer features contribute everything they have.
DescriptorSet sample_training_features(const std::vector<const DescriptorSet*>& per_video,
                                       uint64_t budget, uint64_t seed);

// k-means++ seeding, Lloyd until the assignment fixpoint or 100 iterations.
// Empty clusters are re-seeded to the point farthest from its centroid.
Codebook train_codebook(const DescriptorSet& feats, int k, uint64_t seed,
                        Channel kind = Channel::xy, int workers = 1);

// Nearest-centroid counts (ties to the lowest index), L2-normalized. An empty
// descriptor set encodes to the all-zero histogram.
std::vector<float> encode_video(const DescriptorSet& desc, const Codebook& cb);

// Concatenation in the caller's channel order; deliberately not re-normalized.
std::vector<float> fuse(const std::vector<std::vector<float>>& parts);

std::string codebook_to_json(const Codebook& cb);
Codebook codebook_from_json(const std::string& text);
void save_codebook(const std::string& path, const Codebook& cb);
Codebook load_codebook(const std::string& path);

}  // namespace evhar
