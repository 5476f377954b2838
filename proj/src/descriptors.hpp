#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace evhar {

// Late-fusion channels, in their fixed concatenation order.
enum class Channel : int { xy = 0, xt = 1, yt = 2, hog = 3, hof = 4, mbh = 5 };

constexpr int kNumChannels = 6;

const char* channel_name(Channel c);
Channel parse_channel(const std::string& name);
std::vector<Channel> parse_channel_list(const std::string& csv);

// Descriptor width per channel: SURF64 on each map, HOG96, HOF108, MBH192.
int channel_dim(Channel c);

// Flat row-major pack of same-length descriptors.
struct DescriptorSet {
  int dim = 0;
  std::vector<float> data;

  size_t count() const { return dim > 0 ? data.size() / size_t(dim) : 0; }
  const float* row(size_t i) const { return data.data() + i * size_t(dim); }
  void append(const float* v) { data.insert(data.end(), v, v + dim); }
};

struct VideoFeatures {
  std::array<DescriptorSet, kNumChannels> channels;

  DescriptorSet& of(Channel c) { return channels[size_t(c)]; }
  const DescriptorSet& of(Channel c) const { return channels[size_t(c)]; }
};

// Compact binary form used by the on-disk feature cache.
std::string serialize_features(const VideoFeatures& f);
VideoFeatures deserialize_features(std::string_view bytes);

}  // namespace evhar
