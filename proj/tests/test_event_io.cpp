#include "event_stream.hpp"

#include <string>

#include "doctest.h"
#include "test_util.hpp"

using namespace evhar;
using evhar::testutil::code_of;
using evhar::testutil::random_stream;

namespace {

// Independent re-statement of the DVS128 layout for oracle checks.
Event dvs128_decode_oracle(uint32_t addr, uint32_t ts) {
  Event e;
  e.t = ts;
  e.x = uint16_t((addr >> 1) & 0x7F);
  e.y = uint16_t((addr >> 8) & 0x7F);
  e.polarity = (addr & 1) ? Polarity::on : Polarity::off;
  return e;
}

std::string record(uint32_t addr, uint32_t ts) {
  std::string r;
  for (int b = 24; b >= 0; b -= 8) r.push_back(char((addr >> b) & 0xFF));
  for (int b = 24; b >= 0; b -= 8) r.push_back(char((ts >> b) & 0xFF));
  return r;
}

}  // namespace

TEST_CASE("aedat header-only file gives zero events") {
  auto r = parse_aedat("#!AER-DAT2.0\r\n", dvs128_profile());
  CHECK(r.stream.events.empty());
  CHECK(r.stream.geometry.width == 128);
  CHECK(r.skipped_records == 0);
}

TEST_CASE("aedat single record decodes per the dvs128 layout") {
  const std::string bytes =
      std::string("#!AER-DAT2.0\r\n") +
      std::string("\x00\x00\x02\x05\x00\x00\x03\xE8", 8);
  auto r = parse_aedat(bytes, dvs128_profile());
  REQUIRE(r.stream.events.size() == 1);
  Event want = dvs128_decode_oracle(0x0205, 0x03E8);
  CHECK(r.stream.events[0] == want);
  CHECK(r.stream.events[0].t == 1000);
  CHECK(r.stream.events[0].x == 2);
  CHECK(r.stream.events[0].y == 2);
  CHECK(r.stream.events[0].polarity == Polarity::on);
}

TEST_CASE("aedat random records match the bit oracle") {
  Rng rng(7);
  std::string bytes = "#!AER-DAT2.0\r\n# extra header\r\n";
  std::vector<Event> want;
  uint32_t t = 0;
  for (int i = 0; i < 500; ++i) {
    t += uint32_t(rng.bounded(3000));
    uint32_t addr = uint32_t(rng.next_u64()) & 0x7FFF;  // keep below the special bit
    bytes += record(addr, t);
    want.push_back(dvs128_decode_oracle(addr, t));
  }
  auto r = parse_aedat(bytes, dvs128_profile());
  REQUIRE(r.stream.events.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) CHECK(r.stream.events[i] == want[i]);
}

TEST_CASE("aedat rejects a timestamp decrease") {
  std::string bytes = record(0x0205, 5) + record(0x0205, 3);
  CHECK(code_of([&] { parse_aedat(bytes, dvs128_profile()); }) ==
        ErrorCode::monotonicity_violation);
}

TEST_CASE("aedat wrap handling") {
  std::string bytes = record(0x0205, 0xFFFFFFF0u) + record(0x0205, 16);
  SUBCASE("off by default") {
    CHECK(code_of([&] { parse_aedat(bytes, dvs128_profile()); }) ==
          ErrorCode::monotonicity_violation);
  }
  SUBCASE("unwraps when allowed") {
    ParseOptions opts;
    opts.allow_timestamp_wrap = true;
    auto r = parse_aedat(bytes, dvs128_profile(), opts);
    REQUIRE(r.stream.events.size() == 2);
    CHECK(r.stream.events[0].t == 0xFFFFFFF0ll);
    CHECK(r.stream.events[1].t == 0x100000010ll);
  }
  SUBCASE("small decreases stay errors even when allowed") {
    ParseOptions opts;
    opts.allow_timestamp_wrap = true;
    std::string small = record(0x0205, 5) + record(0x0205, 3);
    CHECK(code_of([&] { parse_aedat(small, dvs128_profile(), opts); }) ==
          ErrorCode::monotonicity_violation);
  }
}

TEST_CASE("aedat error taxonomy") {
  SUBCASE("other versions rejected") {
    CHECK(code_of([&] { parse_aedat("#!AER-DAT3.1\r\n", dvs128_profile()); }) ==
          ErrorCode::unsupported_format);
  }
  SUBCASE("truncated body") {
    std::string bytes = "#!AER-DAT2.0\r\n";
    bytes += record(0x0205, 10).substr(0, 5);
    CHECK(code_of([&] { parse_aedat(bytes, dvs128_profile()); }) ==
          ErrorCode::truncated_record);
  }
  SUBCASE("davis240 coordinates outside the sensor") {
    // x field holds 10 bits; 300 > 239 decodes but exceeds geometry
    uint32_t addr = (300u << 12) | (20u << 22);
    CHECK(code_of([&] { parse_aedat(record(addr, 5), davis240_profile()); }) ==
          ErrorCode::address_out_of_range);
  }
}

TEST_CASE("aedat skips special records") {
  std::string bytes = record(0x8000u | 0x0205u, 4) + record(0x0205, 9);
  auto r = parse_aedat(bytes, dvs128_profile());
  CHECK(r.skipped_records == 1);
  REQUIRE(r.stream.events.size() == 1);
  CHECK(r.stream.events[0].t == 9);
}

TEST_CASE("csv basics") {
  Geometry g{128, 128};
  SUBCASE("empty text") { CHECK(parse_csv_events("", g).stream.events.empty()); }
  SUBCASE("single line") {
    auto r = parse_csv_events("1000,2,2,1\n", g);
    REQUIRE(r.stream.events.size() == 1);
    CHECK(r.stream.events[0] == Event{1000, 2, 2, Polarity::on});
  }
  SUBCASE("optional header line") {
    auto r = parse_csv_events("t_us,x,y,p\n1000,2,2,0\n", g);
    REQUIRE(r.stream.events.size() == 1);
    CHECK(r.stream.events[0].polarity == Polarity::off);
  }
  SUBCASE("x out of range") {
    CHECK(code_of([&] { parse_csv_events("0,200,2,1\n", g); }) ==
          ErrorCode::address_out_of_range);
  }
  SUBCASE("bad polarity") {
    CHECK(code_of([&] { parse_csv_events("0,1,2,7\n", g); }) == ErrorCode::malformed_line);
  }
  SUBCASE("negative timestamp") {
    CHECK(code_of([&] { parse_csv_events("-5,1,2,1\n", g); }) == ErrorCode::malformed_line);
  }
  SUBCASE("malformed mid-file line") {
    CHECK(code_of([&] { parse_csv_events("1,1,1,1\nhello\n", g); }) ==
          ErrorCode::malformed_line);
  }
  SUBCASE("monotonicity enforced") {
    CHECK(code_of([&] { parse_csv_events("5,1,1,1\n3,1,1,1\n", g); }) ==
          ErrorCode::monotonicity_violation);
  }
}

TEST_CASE("serialization round trips") {
  SUBCASE("empty stream to csv is empty text") {
    EventStream s;
    s.geometry = {128, 128};
    CHECK(serialize_events(s, EventFormat::csv, dvs128_profile()).empty());
  }
  SUBCASE("known event encodes to the reference bytes") {
    EventStream s;
    s.geometry = {128, 128};
    s.events.push_back({1000, 2, 2, Polarity::on});
    std::string bytes = serialize_events(s, EventFormat::aedat2, dvs128_profile());
    CHECK(bytes == std::string("#!AER-DAT2.0\r\n") +
                       std::string("\x00\x00\x02\x05\x00\x00\x03\xE8", 8));
  }
  SUBCASE("random streams round trip through both formats") {
    Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
      const SensorProfile profile = trial % 2 ? davis240_profile() : dvs128_profile();
      EventStream s = random_stream(rng, profile.geometry, rng.bounded(200));
      for (EventFormat f : {EventFormat::aedat2, EventFormat::csv}) {
        std::string data = serialize_events(s, f, profile);
        ParseResult back = f == EventFormat::aedat2
                               ? parse_aedat(data, profile)
                               : parse_csv_events(data, profile.geometry);
        CHECK(back.stream == s);
      }
    }
  }
  SUBCASE("timestamp beyond 32 bits cannot encode to aedat") {
    EventStream s;
    s.geometry = {128, 128};
    s.events.push_back({0x100000000ll, 1, 1, Polarity::on});
    CHECK(code_of([&] { serialize_events(s, EventFormat::aedat2, dvs128_profile()); }) ==
          ErrorCode::unencodable_event);
  }
}

TEST_CASE("profiles") {
  SUBCASE("davis240 field layout") {
    auto p = davis240_profile();
    uint32_t addr = (37u << 12) | (91u << 22) | (1u << 11);
    auto d = p.decode(addr);
    CHECK(d.x == 37);
    CHECK(d.y == 91);
    CHECK(d.on);
    CHECK(p.encode({0, 37, 91, Polarity::on}) == addr);
  }
  SUBCASE("custom profile spec") {
    auto p = parse_profile_spec("toy,16,8,0,4,4,3,7,0");
    CHECK(p.geometry.width == 16);
    CHECK(p.geometry.height == 8);
    CHECK(p.x_mask == 0xF);
    CHECK(p.y_mask == 0x7);
    CHECK(p.pol_on_value == 0);
    auto d = p.decode((5u << 0) | (3u << 4));
    CHECK(d.x == 5);
    CHECK(d.y == 3);
    CHECK(d.on);  // pol bit 7 clear, pol_on 0
  }
  SUBCASE("bad specs rejected") {
    CHECK(code_of([&] { parse_profile_spec("toy,16,8,0,4,4,3,7"); }) == ErrorCode::config);
    CHECK(code_of([&] { parse_profile_spec("toy,16,8,0,0,4,3,7,1"); }) == ErrorCode::config);
    CHECK(code_of([&] { resolve_profile("nope"); }) == ErrorCode::config);
  }
  SUBCASE("polarity override flips conventions") {
    auto p = resolve_profile("dvs128", "", 0);
    auto d = p.decode(0x0205);  // pol bit set
    CHECK_FALSE(d.on);
  }
}

TEST_CASE("file io round trip") {
  Rng rng(3);
  EventStream s = random_stream(rng, {128, 128}, 50);
  std::string path = "io_roundtrip.aedat";
  write_events_file(path, s, EventFormat::aedat2, dvs128_profile());
  auto r = read_events_file(path, EventFormat::aedat2, dvs128_profile());
  CHECK(r.stream == s);
  CHECK(code_of([&] { read_binary_file("definitely_missing_file"); }) == ErrorCode::io);
}
