#include "frames.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace evhar {

std::vector<ImageU8> events_to_frames(const EventStream& stream, double fps, int gain) {
  if (fps <= 0) fail(ErrorCode::config, "fps must be positive");
  if (stream.geometry.width == 0 || stream.geometry.height == 0)
    fail(ErrorCode::geometry_mismatch, "stream has no geometry");
  if (stream.events.empty()) fail(ErrorCode::empty_stream, "no events to accumulate");

  const int w = stream.geometry.width, h = stream.geometry.height;
  const int64_t t0 = stream.events.front().t;
  const int64_t duration = stream.events.back().t - t0;
  const int frame_count = std::max(1, int(std::ceil(double(duration) * fps / 1e6)));

  std::vector<std::vector<int32_t>> diff(size_t(frame_count),
                                         std::vector<int32_t>(size_t(w) * h, 0));
  for (const Event& e : stream.events) {
    if (e.x >= w || e.y >= h)
      fail(ErrorCode::address_out_of_range, "event outside stream geometry");
    int idx = int(std::floor(double(e.t - t0) * fps / 1e6));
    idx = std::clamp(idx, 0, frame_count - 1);
    diff[size_t(idx)][size_t(e.y) * w + e.x] += (e.polarity == Polarity::on) ? 1 : -1;
  }

  std::vector<ImageU8> frames;
  frames.reserve(size_t(frame_count));
  for (int f = 0; f < frame_count; ++f) {
    ImageU8 img(w, h);
    for (size_t i = 0; i < img.px.size(); ++i) {
      int64_t v = 128 + int64_t(gain) * diff[size_t(f)][i];
      img.px[i] = uint8_t(std::clamp<int64_t>(v, 0, 255));
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

ImageU8 median_denoise(const ImageU8& img, int radius) {
  if (radius < 1) fail(ErrorCode::config, "median radius must be >= 1");
  ImageU8 out(img.width, img.height);
  std::vector<uint8_t> window;
  window.reserve(size_t(2 * radius + 1) * (2 * radius + 1));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      window.clear();
      for (int dy = -radius; dy <= radius; ++dy) {
        int yy = std::clamp(y + dy, 0, img.height - 1);
        for (int dx = -radius; dx <= radius; ++dx) {
          int xx = std::clamp(x + dx, 0, img.width - 1);
          window.push_back(img.at(xx, yy));
        }
      }
      auto mid = window.begin() + window.size() / 2;
      std::nth_element(window.begin(), mid, window.end());
      out.at(x, y) = *mid;
    }
  }
  return out;
}

std::string encode_pgm(const ImageU8& img) {
  char header[64];
  int n = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", img.width, img.height);
  std::string out(header, size_t(n));
  out.append(reinterpret_cast<const char*>(img.px.data()), img.px.size());
  return out;
}

ImageU8 decode_pgm(std::string_view data) {
  // P5, single whitespace-separated header tokens, maxval 255.
  size_t pos = 0;
  auto token = [&]() -> std::string_view {
    while (pos < data.size() && std::isspace(uint8_t(data[pos]))) ++pos;
    if (pos < data.size() && data[pos] == '#') {  // comment line
      while (pos < data.size() && data[pos] != '\n') ++pos;
      while (pos < data.size() && std::isspace(uint8_t(data[pos]))) ++pos;
    }
    size_t start = pos;
    while (pos < data.size() && !std::isspace(uint8_t(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  if (token() != "P5") fail(ErrorCode::unsupported_format, "not a P5 PGM");
  auto num = [&]() {
    auto tok = token();
    int v = -1;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v <= 0)
      fail(ErrorCode::unsupported_format, "bad PGM header");
    return v;
  };
  int w = num(), h = num(), maxval = num();
  if (maxval != 255) fail(ErrorCode::unsupported_format, "PGM maxval must be 255");
  ++pos;  // single whitespace after maxval
  if (data.size() - pos < size_t(w) * h) fail(ErrorCode::truncated_record, "PGM pixel data short");
  ImageU8 img(w, h);
  std::copy_n(data.data() + pos, size_t(w) * h, reinterpret_cast<char*>(img.px.data()));
  return img;
}

void write_pgm(const std::string& path, const ImageU8& img) {
  write_binary_file(path, encode_pgm(img));
}

ImageU8 read_pgm(const std::string& path) { return decode_pgm(read_binary_file(path)); }

namespace {
template <typename Img>
ImageU8 to_u8_impl(const Img& img) {
  ImageU8 out(img.width, img.height);
  for (size_t i = 0; i < img.px.size(); ++i) {
    double v = std::clamp(double(img.px[i]), 0.0, 1.0);
    out.px[i] = uint8_t(std::lround(v * 255.0));
  }
  return out;
}
}  // namespace

ImageU8 to_u8(const ImageF& img) { return to_u8_impl(img); }
ImageU8 to_u8(const ImageD& img) { return to_u8_impl(img); }

}  // namespace evhar
