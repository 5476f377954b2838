#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "event_stream.hpp"
#include "image.hpp"

namespace evhar {

// Fixed-rate accumulation. Each frame spans 1/fps seconds from the first
// event; a pixel's value is 128 + gain*(on_count - off_count) clamped to
// [0,255]. Events landing exactly on the end of the span go to the last frame.
std::vector<ImageU8> events_to_frames(const EventStream& stream, double fps, int gain);

// Square-window median with edge replication.
ImageU8 median_denoise(const ImageU8& img, int radius);

std::string encode_pgm(const ImageU8& img);
ImageU8 decode_pgm(std::string_view data);
void write_pgm(const std::string& path, const ImageU8& img);
ImageU8 read_pgm(const std::string& path);

// [0,1] real-valued map to 8-bit for export.
ImageU8 to_u8(const ImageF& img);
ImageU8 to_u8(const ImageD& img);

}  // namespace evhar
