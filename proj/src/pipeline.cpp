#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "bovw.hpp"
#include "frames.hpp"
#include "motion_maps.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sim.hpp"

namespace evhar {

namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& leaf) {
  return (fs::path(dir) / leaf).string();
}

long long parse_i64(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long long r = 0;
  try {
    r = std::stoll(v, &pos);
  } catch (...) {
    fail(ErrorCode::config, key + ": expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) fail(ErrorCode::config, key + ": expected an integer, got '" + v + "'");
  return r;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  long long r = parse_i64(key, v);
  if (r < 0) fail(ErrorCode::config, key + ": must not be negative");
  return uint64_t(r);
}

double parse_f64(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double r = 0;
  try {
    r = std::stod(v, &pos);
  } catch (...) {
    fail(ErrorCode::config, key + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size()) fail(ErrorCode::config, key + ": expected a number, got '" + v + "'");
  return r;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorCode::config, key + ": expected true or false, got '" + v + "'");
}

std::vector<double> parse_scale_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  size_t start = 0;
  while (start <= v.size()) {
    size_t comma = v.find(',', start);
    if (comma == std::string::npos) comma = v.size();
    out.push_back(parse_f64(key, v.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string fmt_f64(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_acc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

uint64_t fnv1a(std::string_view s, uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

constexpr const char* kManifestHeader = "id,path,format,profile,label,group";

}  // namespace

void config_set(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "fps") cfg.fps = parse_f64(key, value);
  else if (key == "gain") cfg.gain = int(parse_i64(key, value));
  else if (key == "denoise") cfg.denoise = parse_bool(key, value);
  else if (key == "denoise_radius") cfg.denoise_radius = int(parse_i64(key, value));
  else if (key == "surf_step") cfg.surf_step = int(parse_i64(key, value));
  else if (key == "surf_scales") cfg.surf_scales = parse_scale_list(key, value);
  else if (key == "traj_step") cfg.traj.step = int(parse_i64(key, value));
  else if (key == "traj_len") cfg.traj.traj_len = int(parse_i64(key, value));
  else if (key == "max_step") cfg.traj.max_step = parse_f64(key, value);
  else if (key == "min_disp") cfg.traj.min_disp = parse_f64(key, value);
  else if (key == "flow_eps") cfg.traj.flow_eps = parse_f64(key, value);
  else if (key == "texture_thresh") cfg.traj.texture_thresh = parse_f64(key, value);
  else if (key == "kmeans_k") cfg.kmeans_k = int(parse_i64(key, value));
  else if (key == "sample_budget") cfg.sample_budget = parse_u64(key, value);
  else if (key == "channels") cfg.channels = parse_channel_list(value);
  else if (key == "shared_codebook") cfg.shared_codebook = parse_bool(key, value);
  else if (key == "classifier") cfg.classifier = parse_classifier_kind(value);
  else if (key == "svm_c") cfg.svm_c = parse_f64(key, value);
  else if (key == "knn_k") cfg.knn_k = int(parse_i64(key, value));
  else if (key == "allow_wrap") cfg.allow_wrap = parse_bool(key, value);
  else if (key == "pol_on") cfg.pol_on = int(parse_i64(key, value));
  else if (key == "custom_profile") cfg.custom_profile = value;
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "workers") cfg.workers = int(parse_i64(key, value));
  else if (key == "emit_svg") cfg.emit_svg = parse_bool(key, value);
  else if (key == "sim_width") cfg.sim_width = int(parse_i64(key, value));
  else if (key == "sim_height") cfg.sim_height = int(parse_i64(key, value));
  else if (key == "sim_subjects") cfg.sim_subjects = int(parse_i64(key, value));
  else if (key == "sim_reps") cfg.sim_reps = int(parse_i64(key, value));
  else if (key == "sim_duration_s") cfg.sim_duration_s = parse_f64(key, value);
  else if (key == "sim_theta") cfg.sim_theta = parse_f64(key, value);
  else if (key == "sim_eps") cfg.sim_eps = parse_f64(key, value);
  else if (key == "sim_noise_rate") cfg.sim_noise_rate = parse_f64(key, value);
  else if (key == "sim_format") cfg.sim_format = parse_event_format(value);
  else fail(ErrorCode::config, "unknown configuration key: " + key);
}

std::string config_to_toml(const PipelineConfig& cfg) {
  std::string scales;
  for (size_t i = 0; i < cfg.surf_scales.size(); ++i) {
    if (i) scales += ',';
    scales += fmt_f64(cfg.surf_scales[i]);
  }
  std::string chans;
  for (size_t i = 0; i < cfg.channels.size(); ++i) {
    if (i) chans += ',';
    chans += channel_name(cfg.channels[i]);
  }

  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  auto qt = [](const std::string& s) { return "\"" + s + "\""; };
  kv("fps", fmt_f64(cfg.fps));
  kv("gain", std::to_string(cfg.gain));
  kv("denoise", cfg.denoise ? "true" : "false");
  kv("denoise_radius", std::to_string(cfg.denoise_radius));
  kv("surf_step", std::to_string(cfg.surf_step));
  kv("surf_scales", qt(scales));
  kv("traj_step", std::to_string(cfg.traj.step));
  kv("traj_len", std::to_string(cfg.traj.traj_len));
  kv("max_step", fmt_f64(cfg.traj.max_step));
  kv("min_disp", fmt_f64(cfg.traj.min_disp));
  kv("flow_eps", fmt_f64(cfg.traj.flow_eps));
  kv("texture_thresh", fmt_f64(cfg.traj.texture_thresh));
  kv("kmeans_k", std::to_string(cfg.kmeans_k));
  kv("sample_budget", std::to_string(cfg.sample_budget));
  kv("channels", qt(chans));
  kv("shared_codebook", cfg.shared_codebook ? "true" : "false");
  kv("classifier", qt(classifier_kind_name(cfg.classifier)));
  kv("svm_c", fmt_f64(cfg.svm_c));
  kv("knn_k", std::to_string(cfg.knn_k));
  kv("allow_wrap", cfg.allow_wrap ? "true" : "false");
  kv("pol_on", std::to_string(cfg.pol_on));
  kv("custom_profile", qt(cfg.custom_profile));
  kv("seed", std::to_string(cfg.seed));
  kv("workers", std::to_string(cfg.workers));
  kv("emit_svg", cfg.emit_svg ? "true" : "false");
  kv("sim_width", std::to_string(cfg.sim_width));
  kv("sim_height", std::to_string(cfg.sim_height));
  kv("sim_subjects", std::to_string(cfg.sim_subjects));
  kv("sim_reps", std::to_string(cfg.sim_reps));
  kv("sim_duration_s", fmt_f64(cfg.sim_duration_s));
  kv("sim_theta", fmt_f64(cfg.sim_theta));
  kv("sim_eps", fmt_f64(cfg.sim_eps));
  kv("sim_noise_rate", fmt_f64(cfg.sim_noise_rate));
  kv("sim_format", qt(event_format_name(cfg.sim_format)));
  return out;
}

void validate_config(const PipelineConfig& cfg) {
  auto bad = [](const std::string& msg) { fail(ErrorCode::config, msg); };
  if (!(cfg.fps > 0) || !std::isfinite(cfg.fps) || cfg.fps > 10000) bad("fps out of range");
  if (cfg.gain < 1 || cfg.gain > 10000) bad("gain out of range");
  if (cfg.denoise_radius < 1 || cfg.denoise_radius > 7) bad("denoise_radius out of range");
  if (cfg.surf_step < 1) bad("surf_step must be positive");
  if (cfg.surf_scales.empty()) bad("surf_scales must not be empty");
  for (double s : cfg.surf_scales)
    if (!(s > 0) || !std::isfinite(s) || s > 100) bad("surf scale out of range");
  if (cfg.traj.step < 1) bad("traj_step must be positive");
  if (cfg.traj.traj_len < 3 || cfg.traj.traj_len % 3 != 0)
    bad("traj_len must be a positive multiple of 3");
  if (!(cfg.traj.max_step > 0) || !std::isfinite(cfg.traj.max_step)) bad("max_step out of range");
  if (cfg.traj.min_disp < 0 || !std::isfinite(cfg.traj.min_disp)) bad("min_disp out of range");
  if (cfg.traj.flow_eps < 0 || !std::isfinite(cfg.traj.flow_eps)) bad("flow_eps out of range");
  if (cfg.traj.texture_thresh < 0 || !std::isfinite(cfg.traj.texture_thresh))
    bad("texture_thresh out of range");
  if (cfg.kmeans_k < 1) bad("kmeans_k must be positive");
  if (cfg.sample_budget < 1) bad("sample_budget must be positive");
  if (cfg.channels.empty()) bad("channels must not be empty");
  std::set<Channel> seen(cfg.channels.begin(), cfg.channels.end());
  if (seen.size() != cfg.channels.size()) bad("channels holds duplicates");
  if (!(cfg.svm_c > 0) || !std::isfinite(cfg.svm_c)) bad("svm_c must be positive");
  if (cfg.knn_k < 1) bad("knn_k must be positive");
  if (cfg.pol_on < -1 || cfg.pol_on > 1) bad("pol_on must be -1, 0 or 1");
  if (cfg.workers < 0 || cfg.workers > 256) bad("workers out of range");
  if (cfg.sim_width < 8 || cfg.sim_width > 2048 || cfg.sim_height < 8 || cfg.sim_height > 2048)
    bad("simulated geometry out of range");
  if (cfg.sim_subjects < 1 || cfg.sim_reps < 1) bad("sim_subjects and sim_reps must be positive");
  if (!(cfg.sim_duration_s > 0) || cfg.sim_duration_s > 600) bad("sim_duration_s out of range");
  if (!(cfg.sim_theta > 0) || !std::isfinite(cfg.sim_theta)) bad("sim_theta out of range");
  if (!(cfg.sim_eps > 0) || !std::isfinite(cfg.sim_eps)) bad("sim_eps out of range");
  if (cfg.sim_noise_rate < 0 || !std::isfinite(cfg.sim_noise_rate))
    bad("sim_noise_rate out of range");
}

Manifest parse_manifest(const std::string& path) {
  const std::string text = read_binary_file(path);
  Manifest m;
  m.dir = fs::path(path).parent_path().string();

  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  if (lines.empty() || lines[0] != kManifestHeader)
    fail(ErrorCode::manifest, "manifest must start with header '" + std::string(kManifestHeader) + "'");
  if (lines.size() < 2) fail(ErrorCode::manifest, "manifest has no rows");

  std::set<std::string> ids;
  for (size_t li = 1; li < lines.size(); ++li) {
    const std::string where = "manifest line " + std::to_string(li + 1);
    if (lines[li].empty()) fail(ErrorCode::manifest, where + " is empty");
    std::vector<std::string> f = split_fields(lines[li]);
    if (f.size() != 6) fail(ErrorCode::manifest, where + " needs 6 fields, has " + std::to_string(f.size()));
    for (const std::string& field : f)
      if (field.empty()) fail(ErrorCode::manifest, where + " has an empty field");
    if (f[2] != "aedat2" && f[2] != "csv")
      fail(ErrorCode::manifest, where + ": unknown format '" + f[2] + "'");
    if (!ids.insert(f[0]).second)
      fail(ErrorCode::manifest, "duplicate video id '" + f[0] + "'");
    m.rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5]});
  }
  return m;
}

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
  std::string out = kManifestHeader;
  out += '\n';
  for (const ManifestRow& r : rows) {
    for (const std::string* field : {&r.id, &r.path, &r.format, &r.profile, &r.label, &r.group}) {
      if (field->empty() || field->find(',') != std::string::npos ||
          field->find('\n') != std::string::npos)
        fail(ErrorCode::invalid_argument, "manifest fields must be non-empty and comma-free");
    }
    out += r.id + "," + r.path + "," + r.format + "," + r.profile + "," + r.label + "," + r.group + "\n";
  }
  write_binary_file(path, out);
}

std::string resolve_manifest_path(const Manifest& m, const ManifestRow& row) {
  fs::path p(row.path);
  if (p.is_absolute() || m.dir.empty()) return p.lexically_normal().string();
  return (fs::path(m.dir) / p).lexically_normal().string();
}

EventStream load_video_events(const Manifest& m, const ManifestRow& row,
                              const PipelineConfig& cfg) {
  const SensorProfile prof = resolve_profile(row.profile, cfg.custom_profile, cfg.pol_on);
  const EventFormat fmt = parse_event_format(row.format);
  ParseOptions opts;
  opts.allow_timestamp_wrap = cfg.allow_wrap;
  return read_events_file(resolve_manifest_path(m, row), fmt, prof, opts).stream;
}

namespace {

// AEDAT address layout for non-native geometries: polarity in bit 0, then x,
// then y, packed as tightly as the dimensions allow.
std::string synth_profile_spec(int width, int height) {
  int xb = 1, yb = 1;
  while ((1 << xb) < width) ++xb;
  while ((1 << yb) < height) ++yb;
  char buf[96];
  std::snprintf(buf, sizeof buf, "synth,%d,%d,1,%d,%d,%d,0,1", width, height, xb, 1 + xb, yb);
  return buf;
}

}  // namespace

SimDatasetResult simulate_dataset(const std::string& out_dir, const PipelineConfig& cfg) {
  validate_config(cfg);
  fs::create_directories(fs::path(out_dir) / "clips");

  GestureParams gp;
  gp.width = cfg.sim_width;
  gp.height = cfg.sim_height;
  gp.fps = cfg.fps;
  gp.duration_s = cfg.sim_duration_s;
  gp.theta = cfg.sim_theta;
  gp.eps = cfg.sim_eps;
  gp.noise_rate = cfg.sim_noise_rate;
  gp.seed = cfg.seed;

  SimDatasetResult result;
  SensorProfile prof;
  std::string profile_name;
  if (cfg.sim_width == 128 && cfg.sim_height == 128) {
    prof = dvs128_profile();
    profile_name = "dvs128";
  } else {
    result.profile_spec = synth_profile_spec(cfg.sim_width, cfg.sim_height);
    prof = parse_profile_spec(result.profile_spec);
    profile_name = "synth";
  }

  const std::vector<std::string>& names = gesture_class_names();
  const char* ext = cfg.sim_format == EventFormat::csv ? ".csv" : ".aedat";
  const size_t per_class = size_t(cfg.sim_subjects) * size_t(cfg.sim_reps);
  const size_t total = names.size() * per_class;

  std::vector<ManifestRow> rows(total);
  parallel_for(total, resolve_workers(cfg.workers), [&](size_t i) {
    const int cls = int(i / per_class);
    const int subject = int((i / size_t(cfg.sim_reps)) % size_t(cfg.sim_subjects));
    const int rep = int(i % size_t(cfg.sim_reps));
    const EventStream stream = synth_gesture(cls, subject, rep, gp);

    char tag[64];
    std::snprintf(tag, sizeof tag, "%s_s%02d_r%d", names[cls].c_str(), subject, rep);
    const std::string leaf = std::string("clips/") + tag + ext;
    write_binary_file(join_path(out_dir, leaf),
                      serialize_events(stream, cfg.sim_format, prof));

    char grp[16];
    std::snprintf(grp, sizeof grp, "s%02d", subject);
    rows[i] = {tag, leaf, event_format_name(cfg.sim_format), profile_name, names[cls], grp};
  });

  result.manifest_path = join_path(out_dir, "manifest.csv");
  write_manifest(result.manifest_path, rows);
  return result;
}

VideoFeatures extract_features(const EventStream& stream, const PipelineConfig& cfg,
                               int workers) {
  std::vector<ImageU8> frames = events_to_frames(stream, cfg.fps, cfg.gain);
  if (cfg.denoise)
    for (ImageU8& f : frames) f = median_denoise(f, cfg.denoise_radius);

  VideoFeatures vf;
  for (int c = 0; c < kNumChannels; ++c)
    vf.channels[size_t(c)].dim = channel_dim(Channel(c));

  const MotionMaps maps = compute_motion_maps(frames);
  vf.of(Channel::xy) = dense_surf(maps.xy, cfg.surf_step, cfg.surf_scales, workers).descriptors;
  vf.of(Channel::xt) = dense_surf(maps.xt, cfg.surf_step, cfg.surf_scales, workers).descriptors;
  vf.of(Channel::yt) = dense_surf(maps.yt, cfg.surf_step, cfg.surf_scales, workers).descriptors;

  TrajectoryFeatures tf = extract_trajectories(frames, cfg.traj, workers);
  vf.of(Channel::hog) = std::move(tf.hog);
  vf.of(Channel::hof) = std::move(tf.hof);
  vf.of(Channel::mbh) = std::move(tf.mbh);
  return vf;
}

namespace {

// Everything that changes extracted features; file bytes are hashed on top.
std::string feature_fingerprint(const PipelineConfig& cfg) {
  char buf[256];
  std::string out = "feat1";
  std::snprintf(buf, sizeof buf, "|%a|%d|%d|%d|%d", cfg.fps, cfg.gain, int(cfg.denoise),
                cfg.denoise_radius, cfg.surf_step);
  out += buf;
  for (double s : cfg.surf_scales) {
    std::snprintf(buf, sizeof buf, "|%a", s);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "|%d|%d|%a|%a|%a|%a", cfg.traj.step, cfg.traj.traj_len,
                cfg.traj.max_step, cfg.traj.min_disp, cfg.traj.flow_eps,
                cfg.traj.texture_thresh);
  out += buf;
  std::snprintf(buf, sizeof buf, "|%d|%d|", cfg.pol_on, int(cfg.allow_wrap));
  out += buf;
  out += cfg.custom_profile;
  return out;
}

VideoFeatures empty_features() {
  VideoFeatures vf;
  for (int c = 0; c < kNumChannels; ++c)
    vf.channels[size_t(c)].dim = channel_dim(Channel(c));
  return vf;
}

}  // namespace

std::vector<VideoFeatures> extract_dataset_features(const Manifest& m,
                                                    const PipelineConfig& cfg,
                                                    const std::string& cache_dir,
                                                    std::vector<std::string>* warnings) {
  validate_config(cfg);
  if (!cache_dir.empty()) fs::create_directories(cache_dir);
  const std::string fingerprint = feature_fingerprint(cfg);

  const size_t n = m.rows.size();
  std::vector<VideoFeatures> out(n);
  std::vector<std::string> warn(n);

  parallel_for(n, resolve_workers(cfg.workers), [&](size_t i) {
    const ManifestRow& row = m.rows[i];
    std::string bytes;
    try {
      bytes = read_binary_file(resolve_manifest_path(m, row));
    } catch (const Error& e) {
      fail(e.code(), "video " + row.id + ": " + e.what());
    }

    std::string cache_path;
    if (!cache_dir.empty()) {
      uint64_t h = fnv1a(fingerprint);
      h = fnv1a("|" + row.format + "|" + row.profile + "|", h);
      h = fnv1a(bytes, h);
      cache_path = join_path(cache_dir, hex64(h) + ".feat");
      if (fs::exists(cache_path)) {
        try {
          out[i] = deserialize_features(read_binary_file(cache_path));
          return;
        } catch (...) {
          // stale or damaged cache entry, recompute below
        }
      }
    }

    EventStream stream;
    try {
      const SensorProfile prof = resolve_profile(row.profile, cfg.custom_profile, cfg.pol_on);
      ParseOptions opts;
      opts.allow_timestamp_wrap = cfg.allow_wrap;
      stream = row.format == "aedat2"
                   ? parse_aedat(bytes, prof, opts).stream
                   : parse_csv_events(bytes, prof.geometry, opts).stream;
    } catch (const Error& e) {
      fail(e.code(), "video " + row.id + ": " + e.what());
    }

    try {
      out[i] = extract_features(stream, cfg, 1);
    } catch (const Error& e) {
      warn[i] = row.id + ": " + e.what();
      out[i] = empty_features();
    }

    if (!cache_path.empty()) {
      const std::string tmp = cache_path + ".tmp" + std::to_string(i);
      write_binary_file(tmp, serialize_features(out[i]));
      fs::rename(tmp, cache_path);
    }
  });

  if (warnings)
    for (std::string& w : warn)
      if (!w.empty()) warnings->push_back(std::move(w));
  return out;
}

namespace {

// Name of the class at `pos` within the report's label list.
std::string label_name_of(const PipelineResult& r, size_t pos) {
  if (pos < r.label_names.size()) return r.label_names[pos];
  return pos < r.fused.labels.size() ? std::to_string(r.fused.labels[pos]) : std::string("?");
}

std::string svg_chart(const PipelineResult& r) {
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& [ch, rep] : r.per_channel) bars.emplace_back(channel_name(ch), rep.mean_accuracy);
  bars.emplace_back("fused", r.fused.mean_accuracy);

  const int bar_w = 56, gap = 28, left = 50, base_y = 200, plot_h = 160;
  const int width = left + int(bars.size()) * (bar_w + gap) + 20;
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"250\">\n", width);
  s += buf;
  s += "<line x1=\"40\" y1=\"40\" x2=\"40\" y2=\"200\" stroke=\"black\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"40\" y1=\"200\" x2=\"%d\" y2=\"200\" stroke=\"black\"/>\n", width - 10);
  s += buf;
  for (size_t i = 0; i < bars.size(); ++i) {
    const int x = left + int(i) * (bar_w + gap);
    const int h = int(std::lround(bars[i].second * plot_h));
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#4878a8\"/>\n", x,
                  base_y - h, bar_w, h);
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"220\" font-size=\"13\" text-anchor=\"middle\">%s</text>\n",
                  x + bar_w / 2, bars[i].first.c_str());
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                  x + bar_w / 2, base_y - h - 6, fmt_acc(bars[i].second).c_str());
    s += buf;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace

void emit_report(const PipelineResult& r, const ReportPaths& paths) {
  if (!paths.report_csv.empty()) {
    std::string s = "fold,accuracy\n";
    for (size_t f = 0; f < r.fused.fold_groups.size(); ++f)
      s += r.fused.fold_groups[f] + "," + fmt_acc(r.fused.fold_accuracy[f]) + "\n";
    s += "mean," + fmt_acc(r.fused.mean_accuracy) + "\n";
    s += "pooled," + fmt_acc(r.fused.pooled_accuracy) + "\n";
    write_binary_file(paths.report_csv, s);
  }

  if (!paths.confusion_csv.empty()) {
    std::string s = "label";
    for (size_t i = 0; i < r.fused.labels.size(); ++i) s += "," + label_name_of(r, i);
    s += "\n";
    for (size_t row = 0; row < r.fused.confusion.size(); ++row) {
      s += label_name_of(r, row);
      for (int64_t c : r.fused.confusion[row]) s += "," + std::to_string(c);
      s += "\n";
    }
    write_binary_file(paths.confusion_csv, s);
  }

  if (!paths.channel_csv.empty()) {
    std::string s = "channel,accuracy\n";
    for (const auto& [ch, rep] : r.per_channel)
      s += std::string(channel_name(ch)) + "," + fmt_acc(rep.mean_accuracy) + "\n";
    s += "fused," + fmt_acc(r.fused.mean_accuracy) + "\n";
    write_binary_file(paths.channel_csv, s);
  }

  if (!paths.svg.empty()) write_binary_file(paths.svg, svg_chart(r));
}

PipelineResult run_pipeline(const std::string& manifest_path, const PipelineConfig& cfg,
                            const std::string& out_dir) {
  validate_config(cfg);
  const Manifest m = parse_manifest(manifest_path);
  fs::create_directories(out_dir);

  PipelineResult result;
  for (const ManifestRow& row : m.rows) result.label_names.push_back(row.label);
  std::sort(result.label_names.begin(), result.label_names.end());
  result.label_names.erase(std::unique(result.label_names.begin(), result.label_names.end()),
                           result.label_names.end());

  std::vector<int> labels;
  std::vector<std::string> groups;
  for (const ManifestRow& row : m.rows) {
    const auto it =
        std::lower_bound(result.label_names.begin(), result.label_names.end(), row.label);
    labels.push_back(int(it - result.label_names.begin()));
    groups.push_back(row.group);
  }

  const std::vector<VideoFeatures> features =
      extract_dataset_features(m, cfg, join_path(out_dir, "cache"), &result.warnings);
  std::vector<const VideoFeatures*> ptrs;
  ptrs.reserve(features.size());
  for (const VideoFeatures& f : features) ptrs.push_back(&f);

  ClassifierConfig cc;
  cc.kind = cfg.classifier;
  cc.svm_c = cfg.svm_c;
  cc.knn_k = cfg.knn_k;
  cc.kmeans_k = cfg.kmeans_k;
  cc.sample_budget = cfg.sample_budget;
  cc.seed = cfg.seed;
  cc.shared_codebook = cfg.shared_codebook;
  cc.workers = cfg.workers;

  result.fused = cross_validate(ptrs, labels, groups, cfg.channels, cc);
  for (Channel ch : cfg.channels)
    result.per_channel.emplace_back(ch, cross_validate(ptrs, labels, groups, {ch}, cc));

  write_binary_file(join_path(out_dir, "config.toml"), config_to_toml(cfg));
  ReportPaths paths;
  paths.report_csv = join_path(out_dir, "report.csv");
  paths.confusion_csv = join_path(out_dir, "confusion.csv");
  paths.channel_csv = join_path(out_dir, "channel_accuracy.csv");
  if (cfg.emit_svg) paths.svg = join_path(out_dir, "report.svg");
  emit_report(result, paths);
  return result;
}

namespace {

std::string codebook_leaf(Channel ch) {
  return std::string("codebook_") + channel_name(ch) + ".json";
}

// Whole-dataset vocabularies, one per configured channel.
std::vector<Codebook> fit_codebooks(const std::vector<VideoFeatures>& features,
                                    const PipelineConfig& cfg) {
  std::vector<Codebook> books;
  const uint64_t base = mix_seed(cfg.seed, 0);
  for (size_t ci = 0; ci < cfg.channels.size(); ++ci) {
    std::vector<const DescriptorSet*> sets;
    sets.reserve(features.size());
    for (const VideoFeatures& f : features) sets.push_back(&f.of(cfg.channels[ci]));
    const DescriptorSet sample =
        sample_training_features(sets, cfg.sample_budget, mix_seed(base, uint64_t(ci), 1));
    books.push_back(train_codebook(sample, cfg.kmeans_k, mix_seed(base, uint64_t(ci), 2),
                                   cfg.channels[ci], cfg.workers));
  }
  return books;
}

std::vector<Codebook> load_codebooks(const std::string& dir,
                                     const std::vector<Channel>& channels) {
  std::vector<Codebook> books;
  for (Channel ch : channels) {
    Codebook cb = load_codebook(join_path(dir, codebook_leaf(ch)));
    if (cb.kind != ch)
      fail(ErrorCode::config, std::string("codebook file for ") + channel_name(ch) +
                                  " holds a " + channel_name(cb.kind) + " vocabulary");
    books.push_back(std::move(cb));
  }
  return books;
}

std::vector<float> fuse_encoded(const VideoFeatures& video,
                                const std::vector<Channel>& channels,
                                const std::vector<Codebook>& books) {
  std::vector<std::vector<float>> parts;
  parts.reserve(channels.size());
  for (size_t ci = 0; ci < channels.size(); ++ci)
    parts.push_back(encode_video(video.of(channels[ci]), books[ci]));
  return fuse(parts);
}

}  // namespace

void train_codebooks(const std::string& manifest_path, const PipelineConfig& cfg,
                     const std::string& cache_dir, const std::string& out_dir) {
  validate_config(cfg);
  const Manifest m = parse_manifest(manifest_path);
  fs::create_directories(out_dir);
  const std::vector<VideoFeatures> features =
      extract_dataset_features(m, cfg, cache_dir, nullptr);
  const std::vector<Codebook> books = fit_codebooks(features, cfg);
  for (size_t ci = 0; ci < books.size(); ++ci)
    save_codebook(join_path(out_dir, codebook_leaf(cfg.channels[ci])), books[ci]);
}

void encode_dataset(const std::string& manifest_path, const PipelineConfig& cfg,
                    const std::string& cache_dir, const std::string& codebook_dir,
                    const std::string& out_csv) {
  validate_config(cfg);
  const Manifest m = parse_manifest(manifest_path);
  const std::vector<Codebook> books = load_codebooks(codebook_dir, cfg.channels);
  const std::vector<VideoFeatures> features =
      extract_dataset_features(m, cfg, cache_dir, nullptr);

  std::string out = "id,label,group,histogram\n";
  char buf[32];
  for (size_t i = 0; i < m.rows.size(); ++i) {
    const std::vector<float> hist = fuse_encoded(features[i], cfg.channels, books);
    out += m.rows[i].id + "," + m.rows[i].label + "," + m.rows[i].group;
    for (float v : hist) {
      std::snprintf(buf, sizeof buf, ",%.9e", double(v));
      out += buf;
    }
    out += "\n";
  }
  write_binary_file(out_csv, out);
}

void train_model(const std::string& manifest_path, const PipelineConfig& cfg,
                 const std::string& out_dir) {
  validate_config(cfg);
  if (cfg.classifier != ClassifierKind::svm)
    fail(ErrorCode::config, "only the svm classifier produces a storable model");
  const Manifest m = parse_manifest(manifest_path);
  fs::create_directories(out_dir);

  std::vector<std::string> names;
  for (const ManifestRow& row : m.rows) names.push_back(row.label);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<int> labels;
  for (const ManifestRow& row : m.rows)
    labels.push_back(
        int(std::lower_bound(names.begin(), names.end(), row.label) - names.begin()));

  const std::vector<VideoFeatures> features =
      extract_dataset_features(m, cfg, join_path(out_dir, "cache"), nullptr);
  const std::vector<Codebook> books = fit_codebooks(features, cfg);
  for (size_t ci = 0; ci < books.size(); ++ci)
    save_codebook(join_path(out_dir, codebook_leaf(cfg.channels[ci])), books[ci]);

  std::vector<std::vector<float>> hists;
  hists.reserve(features.size());
  for (const VideoFeatures& f : features)
    hists.push_back(fuse_encoded(f, cfg.channels, books));

  SvmModel model = train_svm(hists, labels, cfg.svm_c, mix_seed(cfg.seed, 3), cfg.workers);
  model.channels = cfg.channels;
  model.class_names.reserve(model.classes.size());
  for (int c : model.classes) model.class_names.push_back(names[size_t(c)]);
  save_svm(join_path(out_dir, "model.json"), model);
  write_binary_file(join_path(out_dir, "config.toml"), config_to_toml(cfg));
}

PipelineResult eval_model(const std::string& manifest_path, const PipelineConfig& cfg,
                          const std::string& model_dir, const std::string& out_dir) {
  validate_config(cfg);
  const Manifest m = parse_manifest(manifest_path);
  const SvmModel model = load_svm(join_path(model_dir, "model.json"));
  if (model.class_names.empty())
    fail(ErrorCode::config, "model file carries no class names");
  const std::vector<Codebook> books = load_codebooks(model_dir, model.channels);
  fs::create_directories(out_dir);

  PipelineResult result;
  result.label_names = model.class_names;
  const size_t nl = model.classes.size();

  std::vector<int> truth;
  for (const ManifestRow& row : m.rows) {
    const auto it =
        std::find(model.class_names.begin(), model.class_names.end(), row.label);
    if (it == model.class_names.end())
      fail(ErrorCode::manifest,
           "video " + row.id + ": label '" + row.label + "' is unknown to the model");
    truth.push_back(model.classes[size_t(it - model.class_names.begin())]);
  }

  const std::vector<VideoFeatures> features =
      extract_dataset_features(m, cfg, join_path(out_dir, "cache"), &result.warnings);

  EvalReport& rep = result.fused;
  rep.labels = model.classes;
  rep.confusion.assign(nl, std::vector<int64_t>(nl, 0));
  size_t correct = 0;
  for (size_t i = 0; i < features.size(); ++i) {
    const std::vector<float> hist = fuse_encoded(features[i], model.channels, books);
    const int predicted = svm_predict(model, hist);
    const size_t ti = size_t(std::lower_bound(model.classes.begin(), model.classes.end(),
                                              truth[i]) -
                             model.classes.begin());
    const size_t pi = size_t(std::lower_bound(model.classes.begin(), model.classes.end(),
                                              predicted) -
                             model.classes.begin());
    ++rep.confusion[ti][pi];
    if (predicted == truth[i]) ++correct;
  }
  const double acc = m.rows.empty() ? 0.0 : double(correct) / double(m.rows.size());
  rep.fold_groups = {"all"};
  rep.fold_accuracy = {acc};
  rep.mean_accuracy = acc;
  rep.pooled_accuracy = acc;
  rep.per_class_accuracy.assign(nl, 0.0);
  for (size_t r = 0; r < nl; ++r) {
    int64_t row_sum = 0;
    for (size_t c = 0; c < nl; ++c) row_sum += rep.confusion[r][c];
    if (row_sum > 0) rep.per_class_accuracy[r] = double(rep.confusion[r][r]) / double(row_sum);
  }

  ReportPaths paths;
  paths.report_csv = join_path(out_dir, "report.csv");
  paths.confusion_csv = join_path(out_dir, "confusion.csv");
  paths.channel_csv = join_path(out_dir, "channel_accuracy.csv");
  if (cfg.emit_svg) paths.svg = join_path(out_dir, "report.svg");
  emit_report(result, paths);
  return result;
}

}  // namespace evhar
