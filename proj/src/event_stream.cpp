#include "event_stream.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace evhar {

namespace {

uint32_t mask_of_bits(uint32_t bits) {
  if (bits == 0 || bits > 31) fail(ErrorCode::config, "field width out of range");
  return (1u << bits) - 1u;
}

uint32_t be32(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) |
         (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void put_be32(std::string& out, uint32_t v) {
  out.push_back(char((v >> 24) & 0xFF));
  out.push_back(char((v >> 16) & 0xFF));
  out.push_back(char((v >> 8) & 0xFF));
  out.push_back(char(v & 0xFF));
}

}  // namespace

SensorProfile::Decoded SensorProfile::decode(uint32_t address) const {
  Decoded d;
  d.x = uint16_t((address >> x_shift) & x_mask);
  d.y = uint16_t((address >> y_shift) & y_mask);
  d.on = ((address >> pol_shift) & 1u) == pol_on_value;
  return d;
}

uint32_t SensorProfile::encode(const Event& e) const {
  if (e.x > x_mask || e.y > y_mask)
    fail(ErrorCode::unencodable_event, "coordinates exceed profile address fields");
  uint32_t pol_bit = (e.polarity == Polarity::on) ? pol_on_value : (1u - pol_on_value);
  return (uint32_t(e.x) << x_shift) | (uint32_t(e.y) << y_shift) |
         (pol_bit << pol_shift);
}

SensorProfile dvs128_profile() {
  SensorProfile p;
  p.name = "dvs128";
  p.geometry = {128, 128};
  p.x_shift = 1;
  p.x_mask = 0x7F;
  p.y_shift = 8;
  p.y_mask = 0x7F;
  p.pol_shift = 0;
  p.pol_on_value = 1;
  p.special_mask = 0x8000u;
  return p;
}

SensorProfile davis240_profile() {
  SensorProfile p;
  p.name = "davis240";
  p.geometry = {240, 180};
  p.x_shift = 12;
  p.x_mask = 0x3FF;
  p.y_shift = 22;
  p.y_mask = 0x1FF;
  p.pol_shift = 11;
  p.pol_on_value = 1;
  p.special_mask = 0x80000000u;
  return p;
}

SensorProfile parse_profile_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 9)
    fail(ErrorCode::config, "profile spec needs 9 comma-separated fields, got " +
                                std::to_string(parts.size()));
  auto num = [&](size_t i) -> long {
    long v = 0;
    const std::string& s = parts[i];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 0)
      fail(ErrorCode::config, "bad profile field '" + s + "'");
    return v;
  };
  SensorProfile p;
  p.name = parts[0];
  if (p.name.empty()) fail(ErrorCode::config, "profile name empty");
  long w = num(1), h = num(2);
  if (w <= 0 || h <= 0 || w > 0xFFFF || h > 0xFFFF)
    fail(ErrorCode::config, "profile geometry out of range");
  p.geometry = {uint16_t(w), uint16_t(h)};
  p.x_shift = uint32_t(num(3));
  p.x_mask = mask_of_bits(uint32_t(num(4)));
  p.y_shift = uint32_t(num(5));
  p.y_mask = mask_of_bits(uint32_t(num(6)));
  p.pol_shift = uint32_t(num(7));
  long pol_on = num(8);
  if (pol_on != 0 && pol_on != 1) fail(ErrorCode::config, "pol_on must be 0 or 1");
  p.pol_on_value = uint32_t(pol_on);
  p.special_mask = 0;
  if (p.x_shift > 31 || p.y_shift > 31 || p.pol_shift > 31)
    fail(ErrorCode::config, "profile shift out of range");
  return p;
}

SensorProfile resolve_profile(const std::string& name, const std::string& custom_spec,
                              int pol_on_override) {
  SensorProfile p;
  if (name == "dvs128") {
    p = dvs128_profile();
  } else if (name == "davis240") {
    p = davis240_profile();
  } else if (!custom_spec.empty()) {
    p = parse_profile_spec(custom_spec);
    if (p.name != name)
      fail(ErrorCode::config, "custom profile '" + p.name + "' does not match requested '" + name + "'");
  } else {
    fail(ErrorCode::config, "unknown sensor profile '" + name + "'");
  }
  if (pol_on_override == 0 || pol_on_override == 1)
    p.pol_on_value = uint32_t(pol_on_override);
  return p;
}

ParseResult parse_aedat(std::string_view bytes, const SensorProfile& profile,
                        const ParseOptions& opts) {
  size_t pos = 0;
  bool saw_magic = false;
  bool first_line = true;
  // Header: leading lines starting with '#'. The first one must be the
  // AER-DAT 2.0 magic when a magic line is present at all.
  while (pos < bytes.size() && bytes[pos] == '#') {
    size_t eol = bytes.find('\n', pos);
    size_t end = (eol == std::string_view::npos) ? bytes.size() : eol + 1;
    std::string_view line = bytes.substr(pos, end - pos);
    if (first_line) {
      if (line.substr(0, 9) == "#!AER-DAT") {
        saw_magic = true;
        std::string_view ver = line.substr(9);
        while (!ver.empty() && (ver.back() == '\n' || ver.back() == '\r')) ver.remove_suffix(1);
        if (ver != "2.0")
          fail(ErrorCode::unsupported_format,
               "unsupported AER-DAT version '" + std::string(ver) + "'");
      }
      first_line = false;
    }
    pos = end;
  }
  (void)saw_magic;  // headerless raw files are accepted; jAER writes headers but tools vary

  std::string_view body = bytes.substr(pos);
  if (body.size() % 8 != 0)
    fail(ErrorCode::truncated_record,
         "event body is " + std::to_string(body.size()) + " bytes, not a multiple of 8");

  ParseResult result;
  result.stream.geometry = profile.geometry;
  result.stream.events.reserve(body.size() / 8);

  const auto* p = reinterpret_cast<const unsigned char*>(body.data());
  int64_t wrap_offset = 0;
  int64_t prev_raw = -1;
  int64_t prev_t = -1;
  for (size_t i = 0; i + 8 <= body.size(); i += 8) {
    uint32_t address = be32(p + i);
    uint32_t ts = be32(p + i + 4);
    if (profile.is_special(address)) {
      ++result.skipped_records;
      continue;
    }
    int64_t raw = int64_t(ts);
    if (prev_raw >= 0 && raw < prev_raw) {
      if (opts.allow_timestamp_wrap && prev_raw - raw > (int64_t(1) << 31)) {
        wrap_offset += int64_t(1) << 32;
      } else {
        fail(ErrorCode::monotonicity_violation,
             "timestamp " + std::to_string(raw) + " after " + std::to_string(prev_raw) +
                 " at record " + std::to_string(i / 8));
      }
    }
    prev_raw = raw;
    int64_t t = raw + wrap_offset;
    if (prev_t >= 0 && t < prev_t)
      fail(ErrorCode::monotonicity_violation, "unwrapped timestamp regressed");
    prev_t = t;

    auto d = profile.decode(address);
    if (d.x >= profile.geometry.width || d.y >= profile.geometry.height)
      fail(ErrorCode::address_out_of_range,
           "event (" + std::to_string(d.x) + "," + std::to_string(d.y) +
               ") outside " + std::to_string(profile.geometry.width) + "x" +
               std::to_string(profile.geometry.height) + " at record " +
               std::to_string(i / 8));
    result.stream.events.push_back(
        {t, d.x, d.y, d.on ? Polarity::on : Polarity::off});
  }
  return result;
}

ParseResult parse_csv_events(std::string_view text, Geometry geometry,
                             const ParseOptions& opts) {
  ParseResult result;
  result.stream.geometry = geometry;

  int64_t wrap_offset = 0;
  int64_t prev_raw = -1;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
    pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    int64_t fields[4];
    size_t fp = 0;
    bool ok = true;
    for (int f = 0; f < 4; ++f) {
      size_t comma = line.find(',', fp);
      std::string_view tok = (f < 3)
                                 ? line.substr(fp, comma == std::string_view::npos ? line.size() - fp : comma - fp)
                                 : line.substr(fp);
      if (f < 3) {
        if (comma == std::string_view::npos) {
          ok = false;
          break;
        }
        fp = comma + 1;
      } else if (tok.find(',') != std::string_view::npos) {
        ok = false;
      }
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), fields[f]);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      if (line_no == 1 && result.stream.events.empty()) continue;  // header line
      fail(ErrorCode::malformed_line, "line " + std::to_string(line_no) + ": '" +
                                          std::string(line) + "'");
    }
    int64_t t = fields[0], x = fields[1], y = fields[2], p = fields[3];
    if (t < 0) fail(ErrorCode::malformed_line, "negative timestamp at line " + std::to_string(line_no));
    if (p != 0 && p != 1) fail(ErrorCode::malformed_line, "polarity must be 0 or 1 at line " + std::to_string(line_no));
    if (x < 0 || y < 0 || x >= geometry.width || y >= geometry.height)
      fail(ErrorCode::address_out_of_range,
           "event (" + std::to_string(x) + "," + std::to_string(y) + ") outside " +
               std::to_string(geometry.width) + "x" + std::to_string(geometry.height) +
               " at line " + std::to_string(line_no));
    if (prev_raw >= 0 && t < prev_raw) {
      if (opts.allow_timestamp_wrap && prev_raw - t > (int64_t(1) << 31) && prev_raw <= 0xFFFFFFFFll) {
        wrap_offset += int64_t(1) << 32;
      } else {
        fail(ErrorCode::monotonicity_violation,
             "timestamp " + std::to_string(t) + " after " + std::to_string(prev_raw) +
                 " at line " + std::to_string(line_no));
      }
    }
    prev_raw = t;
    result.stream.events.push_back({t + wrap_offset, uint16_t(x), uint16_t(y),
                                    p == 1 ? Polarity::on : Polarity::off});
  }
  return result;
}

EventFormat parse_event_format(const std::string& name) {
  if (name == "aedat2" || name == "aedat") return EventFormat::aedat2;
  if (name == "csv") return EventFormat::csv;
  fail(ErrorCode::config, "unknown event format '" + name + "'");
}

const char* event_format_name(EventFormat f) {
  return f == EventFormat::aedat2 ? "aedat2" : "csv";
}

std::string serialize_events(const EventStream& stream, EventFormat format,
                             const SensorProfile& profile) {
  std::string out;
  if (format == EventFormat::csv) {
    char buf[96];
    for (const Event& e : stream.events) {
      int n = std::snprintf(buf, sizeof buf, "%lld,%u,%u,%u\n",
                            (long long)e.t, unsigned(e.x), unsigned(e.y),
                            e.polarity == Polarity::on ? 1u : 0u);
      out.append(buf, size_t(n));
    }
    return out;
  }
  if (stream.geometry.width > profile.geometry.width ||
      stream.geometry.height > profile.geometry.height)
    fail(ErrorCode::geometry_mismatch, "stream does not fit profile sensor");
  out = "#!AER-DAT2.0\r\n";
  for (const Event& e : stream.events) {
    if (e.t < 0 || e.t > 0xFFFFFFFFll)
      fail(ErrorCode::unencodable_event,
           "timestamp " + std::to_string(e.t) + " does not fit 32 bits");
    uint32_t address = profile.encode(e);
    if (profile.is_special(address))
      fail(ErrorCode::unencodable_event, "encoded address collides with special mask");
    put_be32(out, address);
    put_be32(out, uint32_t(e.t));
  }
  return out;
}

ParseResult read_events_file(const std::string& path, EventFormat format,
                             const SensorProfile& profile, const ParseOptions& opts) {
  std::string data = read_binary_file(path);
  if (format == EventFormat::aedat2) return parse_aedat(data, profile, opts);
  return parse_csv_events(data, profile.geometry, opts);
}

void write_events_file(const std::string& path, const EventStream& stream,
                       EventFormat format, const SensorProfile& profile) {
  write_binary_file(path, serialize_events(stream, format, profile));
}

std::string read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::io, "read failed for '" + path + "'");
  return std::move(ss).str();
}

void write_binary_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot create '" + path + "'");
  out.write(data.data(), std::streamsize(data.size()));
  out.flush();
  if (!out) fail(ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace evhar
