#include "descriptors.hpp"

#include <cstring>

namespace evhar {

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::xy: return "xy";
    case Channel::xt: return "xt";
    case Channel::yt: return "yt";
    case Channel::hog: return "hog";
    case Channel::hof: return "hof";
    case Channel::mbh: return "mbh";
  }
  fail(ErrorCode::internal, "bad channel value");
}

Channel parse_channel(const std::string& name) {
  for (int i = 0; i < kNumChannels; ++i)
    if (name == channel_name(Channel(i))) return Channel(i);
  fail(ErrorCode::config, "unknown channel '" + name + "'");
}

std::vector<Channel> parse_channel_list(const std::string& csv) {
  std::vector<Channel> out;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) fail(ErrorCode::config, "empty channel name in list");
    Channel c = parse_channel(cur);
    for (Channel seen : out)
      if (seen == c) fail(ErrorCode::config, "duplicate channel '" + cur + "'");
    out.push_back(c);
    cur.clear();
  };
  for (char ch : csv) {
    if (ch == ',') flush();
    else if (!std::isspace(uint8_t(ch))) cur.push_back(ch);
  }
  flush();
  return out;
}

int channel_dim(Channel c) {
  switch (c) {
    case Channel::xy:
    case Channel::xt:
    case Channel::yt: return 64;
    case Channel::hog: return 96;
    case Channel::hof: return 108;
    case Channel::mbh: return 192;
  }
  fail(ErrorCode::internal, "bad channel value");
}

namespace {
constexpr char kMagic[4] = {'E', 'V', 'F', '1'};

void put_u32(std::string& out, uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::string& out, uint64_t v) { out.append(reinterpret_cast<const char*>(&v), 8); }

uint32_t take_u32(std::string_view& b) {
  if (b.size() < 4) fail(ErrorCode::truncated_record, "feature blob too short");
  uint32_t v;
  std::memcpy(&v, b.data(), 4);
  b.remove_prefix(4);
  return v;
}

uint64_t take_u64(std::string_view& b) {
  if (b.size() < 8) fail(ErrorCode::truncated_record, "feature blob too short");
  uint64_t v;
  std::memcpy(&v, b.data(), 8);
  b.remove_prefix(8);
  return v;
}
}  // namespace

std::string serialize_features(const VideoFeatures& f) {
  std::string out(kMagic, 4);
  for (int c = 0; c < kNumChannels; ++c) {
    const DescriptorSet& ds = f.channels[size_t(c)];
    put_u32(out, uint32_t(ds.dim));
    put_u64(out, uint64_t(ds.data.size()));
    out.append(reinterpret_cast<const char*>(ds.data.data()), ds.data.size() * sizeof(float));
  }
  return out;
}

VideoFeatures deserialize_features(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorCode::unsupported_format, "not a feature blob");
  bytes.remove_prefix(4);
  VideoFeatures f;
  for (int c = 0; c < kNumChannels; ++c) {
    DescriptorSet& ds = f.channels[size_t(c)];
    ds.dim = int(take_u32(bytes));
    uint64_t n = take_u64(bytes);
    if (ds.dim < 0 || (ds.dim > 0 && n % uint64_t(ds.dim) != 0))
      fail(ErrorCode::unsupported_format, "feature blob shape corrupt");
    if (bytes.size() < n * sizeof(float))
      fail(ErrorCode::truncated_record, "feature blob too short");
    ds.data.resize(size_t(n));
    std::memcpy(ds.data.data(), bytes.data(), size_t(n) * sizeof(float));
    bytes.remove_prefix(size_t(n) * sizeof(float));
  }
  if (!bytes.empty()) fail(ErrorCode::unsupported_format, "feature blob has trailing bytes");
  return f;
}

}  // namespace evhar
