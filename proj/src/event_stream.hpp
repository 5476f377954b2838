#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace evhar {

struct Geometry {
  uint16_t width = 0;
  uint16_t height = 0;
  bool operator==(const Geometry&) const = default;
};

enum class Polarity : uint8_t { off = 0, on = 1 };

struct Event {
  int64_t t = 0;  // microseconds
  uint16_t x = 0;
  uint16_t y = 0;
  Polarity polarity = Polarity::on;
  bool operator==(const Event&) const = default;
};

struct EventStream {
  Geometry geometry;
  std::vector<Event> events;

  bool operator==(const EventStream&) const = default;
  int64_t duration_us() const {
    return events.empty() ? 0 : events.back().t - events.front().t;
  }
};

// Address decoding for one sensor family. AEDAT 2.0 carries a 32-bit address
// word per event; field positions vary per sensor and are profile data, not
// format data.
struct SensorProfile {
  std::string name;
  Geometry geometry;
  uint32_t x_shift = 0;
  uint32_t x_mask = 0;
  uint32_t y_shift = 0;
  uint32_t y_mask = 0;
  uint32_t pol_shift = 0;
  uint32_t pol_on_value = 1;  // address bit value that means ON
  uint32_t special_mask = 0;  // records with any of these bits set are not DVS events

  struct Decoded {
    uint16_t x;
    uint16_t y;
    bool on;
  };

  Decoded decode(uint32_t address) const;
  uint32_t encode(const Event& e) const;
  bool is_special(uint32_t address) const {
    return (address & special_mask) != 0;
  }
};

SensorProfile dvs128_profile();
SensorProfile davis240_profile();

// Spec string: "name,width,height,x_shift,x_bits,y_shift,y_bits,pol_shift,pol_on"
SensorProfile parse_profile_spec(const std::string& spec);

// Resolves "dvs128"/"davis240" or, when custom_spec names it, a user-defined
// profile. pol_on_override of 0/1 replaces the profile's ON-bit convention.
SensorProfile resolve_profile(const std::string& name,
                              const std::string& custom_spec = "",
                              int pol_on_override = -1);

struct ParseOptions {
  bool allow_timestamp_wrap = false;
};

struct ParseResult {
  EventStream stream;
  uint64_t skipped_records = 0;  // non-DVS packets (APS/IMU/special markers)
};

ParseResult parse_aedat(std::string_view bytes, const SensorProfile& profile,
                        const ParseOptions& opts = {});
ParseResult parse_csv_events(std::string_view text, Geometry geometry,
                             const ParseOptions& opts = {});

enum class EventFormat { aedat2, csv };

EventFormat parse_event_format(const std::string& name);
const char* event_format_name(EventFormat f);

std::string serialize_events(const EventStream& stream, EventFormat format,
                             const SensorProfile& profile);

ParseResult read_events_file(const std::string& path, EventFormat format,
                             const SensorProfile& profile,
                             const ParseOptions& opts = {});
void write_events_file(const std::string& path, const EventStream& stream,
                       EventFormat format, const SensorProfile& profile);

std::string read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::string_view data);

}  // namespace evhar
