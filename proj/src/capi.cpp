#include "evhar.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <string>
#include <utility>

#include "error.hpp"
#include "event_stream.hpp"
#include "frames.hpp"
#include "motion_maps.hpp"
#include "pipeline.hpp"

struct evhar_config {
  evhar::PipelineConfig cfg;
};

struct evhar_report {
  evhar::PipelineResult result;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int set_error(int code, std::string msg) {
  g_last_error = std::move(msg);
  return code;
}

int null_arg(const char* what) {
  return set_error(EVHAR_E_INVALID_ARGUMENT, std::string(what) + " is NULL");
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
  } catch (const evhar::Error& e) {
    return set_error(static_cast<int>(e.code()), e.what());
  } catch (const std::exception& e) {
    return set_error(EVHAR_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(EVHAR_E_INTERNAL, "unknown failure");
  }
  g_last_error.clear();
  return EVHAR_OK;
}

evhar::ParseResult read_one_video(const evhar::PipelineConfig& cfg, const char* events_path,
                                  const char* format, const char* profile) {
  evhar::EventFormat fmt = evhar::parse_event_format(format);
  evhar::SensorProfile prof =
      evhar::resolve_profile(profile, cfg.custom_profile, cfg.pol_on);
  evhar::ParseOptions opts;
  opts.allow_timestamp_wrap = cfg.allow_wrap;
  return evhar::read_events_file(events_path, fmt, prof, opts);
}

std::string join_dir(const std::string& dir, const std::string& leaf) {
  return (std::filesystem::path(dir) / leaf).string();
}

}  // namespace

extern "C" {

const char* evhar_status_name(int status) {
  if (status < 0 || status > static_cast<int>(evhar::ErrorCode::internal)) return "unknown";
  return evhar::error_code_name(static_cast<evhar::ErrorCode>(status));
}

const char* evhar_last_error(void) { return g_last_error.c_str(); }

void evhar_string_free(char* s) { std::free(s); }

evhar_config* evhar_config_new(void) {
  try {
    return new evhar_config();
  } catch (...) {
    return nullptr;
  }
}

void evhar_config_free(evhar_config* cfg) { delete cfg; }

int evhar_config_set(evhar_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr) return null_arg("cfg");
  if (key == nullptr) return null_arg("key");
  if (value == nullptr) return null_arg("value");
  return guarded([&] { evhar::config_set(cfg->cfg, key, value); });
}

int evhar_config_toml(const evhar_config* cfg, char** toml_out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (toml_out == nullptr) return null_arg("toml_out");
  return guarded([&] {
    *toml_out = dup_string(evhar::config_to_toml(cfg->cfg));
    if (*toml_out == nullptr) evhar::fail(evhar::ErrorCode::internal, "out of memory");
  });
}

int evhar_simulate(const evhar_config* cfg, const char* out_dir, char** manifest_path_out,
                   char** profile_spec_out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (out_dir == nullptr) return null_arg("out_dir");
  return guarded([&] {
    evhar::SimDatasetResult r = evhar::simulate_dataset(out_dir, cfg->cfg);
    if (manifest_path_out != nullptr) *manifest_path_out = dup_string(r.manifest_path);
    if (profile_spec_out != nullptr) *profile_spec_out = dup_string(r.profile_spec);
  });
}

int evhar_ingest(const evhar_config* cfg, const char* events_path, const char* format,
                 const char* profile, const char* out_csv, uint64_t* event_count_out,
                 int64_t* duration_us_out, uint32_t* width_out, uint32_t* height_out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (events_path == nullptr) return null_arg("events_path");
  if (format == nullptr) return null_arg("format");
  if (profile == nullptr) return null_arg("profile");
  return guarded([&] {
    evhar::ParseResult r = read_one_video(cfg->cfg, events_path, format, profile);
    const evhar::EventStream& s = r.stream;
    if (out_csv != nullptr) {
      evhar::SensorProfile prof =
          evhar::resolve_profile(profile, cfg->cfg.custom_profile, cfg->cfg.pol_on);
      evhar::write_events_file(out_csv, s, evhar::EventFormat::csv, prof);
    }
    if (event_count_out != nullptr) *event_count_out = s.events.size();
    if (duration_us_out != nullptr)
      *duration_us_out = s.events.empty() ? 0 : s.events.back().t - s.events.front().t;
    if (width_out != nullptr) *width_out = s.geometry.width;
    if (height_out != nullptr) *height_out = s.geometry.height;
  });
}

int evhar_export_frames(const evhar_config* cfg, const char* events_path, const char* format,
                        const char* profile, const char* out_dir,
                        uint64_t* frame_count_out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (events_path == nullptr) return null_arg("events_path");
  if (format == nullptr) return null_arg("format");
  if (profile == nullptr) return null_arg("profile");
  if (out_dir == nullptr) return null_arg("out_dir");
  return guarded([&] {
    evhar::validate_config(cfg->cfg);
    evhar::ParseResult r = read_one_video(cfg->cfg, events_path, format, profile);
    std::vector<evhar::ImageU8> frames =
        evhar::events_to_frames(r.stream, cfg->cfg.fps, cfg->cfg.gain);
    std::filesystem::create_directories(out_dir);
    char leaf[32];
    for (size_t i = 0; i < frames.size(); ++i) {
      evhar::ImageU8 img = cfg->cfg.denoise
                               ? evhar::median_denoise(frames[i], cfg->cfg.denoise_radius)
                               : frames[i];
      std::snprintf(leaf, sizeof leaf, "frame_%05zu.pgm", i);
      evhar::write_pgm(join_dir(out_dir, leaf), img);
    }
    if (frame_count_out != nullptr) *frame_count_out = frames.size();
  });
}

int evhar_export_maps(const evhar_config* cfg, const char* events_path, const char* format,
                      const char* profile, const char* out_dir) {
  if (cfg == nullptr) return null_arg("cfg");
  if (events_path == nullptr) return null_arg("events_path");
  if (format == nullptr) return null_arg("format");
  if (profile == nullptr) return null_arg("profile");
  if (out_dir == nullptr) return null_arg("out_dir");
  return guarded([&] {
    evhar::validate_config(cfg->cfg);
    evhar::ParseResult r = read_one_video(cfg->cfg, events_path, format, profile);
    std::vector<evhar::ImageU8> frames =
        evhar::events_to_frames(r.stream, cfg->cfg.fps, cfg->cfg.gain);
    if (cfg->cfg.denoise) {
      for (evhar::ImageU8& f : frames) f = evhar::median_denoise(f, cfg->cfg.denoise_radius);
    }
    evhar::MotionMaps maps = evhar::compute_motion_maps(frames);
    std::filesystem::create_directories(out_dir);
    evhar::write_pgm(join_dir(out_dir, "map_xy.pgm"), evhar::to_u8(maps.xy));
    evhar::write_pgm(join_dir(out_dir, "map_xt.pgm"), evhar::to_u8(maps.xt));
    evhar::write_pgm(join_dir(out_dir, "map_yt.pgm"), evhar::to_u8(maps.yt));
  });
}

int evhar_extract_features(const evhar_config* cfg, const char* manifest_path,
                           const char* cache_dir, uint64_t* video_count_out,
                           uint64_t* warning_count_out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (manifest_path == nullptr) return null_arg("manifest_path");
  if (cache_dir == nullptr) return null_arg("cache_dir");
  return guarded([&] {
    evhar::validate_config(cfg->cfg);
    evhar::Manifest m = evhar::parse_manifest(manifest_path);
    std::vector<std::string> warnings;
    std::vector<evhar::VideoFeatures> feats =
        evhar::extract_dataset_features(m, cfg->cfg, cache_dir, &warnings);
    if (video_count_out != nullptr) *video_count_out = feats.size();
    if (warning_count_out != nullptr) *warning_count_out = warnings.size();
  });
}

int evhar_train_codebooks(const evhar_config* cfg, const char* manifest_path,
                          const char* cache_dir, const char* out_dir) {
  if (cfg == nullptr) return null_arg("cfg");
  if (manifest_path == nullptr) return null_arg("manifest_path");
  if (cache_dir == nullptr) return null_arg("cache_dir");
  if (out_dir == nullptr) return null_arg("out_dir");
  return guarded(
      [&] { evhar::train_codebooks(manifest_path, cfg->cfg, cache_dir, out_dir); });
}

int evhar_encode_dataset(const evhar_config* cfg, const char* manifest_path,
                         const char* cache_dir, const char* codebook_dir,
                         const char* out_csv) {
  if (cfg == nullptr) return null_arg("cfg");
  if (manifest_path == nullptr) return null_arg("manifest_path");
  if (cache_dir == nullptr) return null_arg("cache_dir");
  if (codebook_dir == nullptr) return null_arg("codebook_dir");
  if (out_csv == nullptr) return null_arg("out_csv");
  return guarded([&] {
    evhar::encode_dataset(manifest_path, cfg->cfg, cache_dir, codebook_dir, out_csv);
  });
}

int evhar_train(const evhar_config* cfg, const char* manifest_path, const char* out_dir) {
  if (cfg == nullptr) return null_arg("cfg");
  if (manifest_path == nullptr) return null_arg("manifest_path");
  if (out_dir == nullptr) return null_arg("out_dir");
  return guarded([&] { evhar::train_model(manifest_path, cfg->cfg, out_dir); });
}

int evhar_eval(const evhar_config* cfg, const char* manifest_path, const char* model_dir,
               const char* out_dir, evhar_report** report_out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (manifest_path == nullptr) return null_arg("manifest_path");
  if (model_dir == nullptr) return null_arg("model_dir");
  if (out_dir == nullptr) return null_arg("out_dir");
  return guarded([&] {
    evhar::PipelineResult r = evhar::eval_model(manifest_path, cfg->cfg, model_dir, out_dir);
    if (report_out != nullptr) *report_out = new evhar_report{std::move(r)};
  });
}

int evhar_pipeline(const evhar_config* cfg, const char* manifest_path, const char* out_dir,
                   evhar_report** report_out) {
  if (cfg == nullptr) return null_arg("cfg");
  if (manifest_path == nullptr) return null_arg("manifest_path");
  if (out_dir == nullptr) return null_arg("out_dir");
  return guarded([&] {
    evhar::PipelineResult r = evhar::run_pipeline(manifest_path, cfg->cfg, out_dir);
    if (report_out != nullptr) *report_out = new evhar_report{std::move(r)};
  });
}

void evhar_report_free(evhar_report* r) { delete r; }

size_t evhar_report_fold_count(const evhar_report* r) {
  return r == nullptr ? 0 : r->result.fused.fold_groups.size();
}

const char* evhar_report_fold_group(const evhar_report* r, size_t fold) {
  if (r == nullptr || fold >= r->result.fused.fold_groups.size()) return "";
  return r->result.fused.fold_groups[fold].c_str();
}

double evhar_report_fold_accuracy(const evhar_report* r, size_t fold) {
  if (r == nullptr || fold >= r->result.fused.fold_accuracy.size()) return 0.0;
  return r->result.fused.fold_accuracy[fold];
}

double evhar_report_mean_accuracy(const evhar_report* r) {
  return r == nullptr ? 0.0 : r->result.fused.mean_accuracy;
}

double evhar_report_pooled_accuracy(const evhar_report* r) {
  return r == nullptr ? 0.0 : r->result.fused.pooled_accuracy;
}

size_t evhar_report_label_count(const evhar_report* r) {
  return r == nullptr ? 0 : r->result.label_names.size();
}

const char* evhar_report_label(const evhar_report* r, size_t index) {
  if (r == nullptr || index >= r->result.label_names.size()) return "";
  return r->result.label_names[index].c_str();
}

int64_t evhar_report_confusion(const evhar_report* r, size_t true_index, size_t pred_index) {
  if (r == nullptr) return 0;
  size_t n = r->result.fused.labels.size();
  if (true_index >= n || pred_index >= n) return 0;
  return r->result.fused.confusion[true_index][pred_index];
}

size_t evhar_report_channel_count(const evhar_report* r) {
  return r == nullptr ? 0 : r->result.per_channel.size();
}

const char* evhar_report_channel(const evhar_report* r, size_t index) {
  if (r == nullptr || index >= r->result.per_channel.size()) return "";
  return evhar::channel_name(r->result.per_channel[index].first);
}

double evhar_report_channel_accuracy(const evhar_report* r, size_t index) {
  if (r == nullptr || index >= r->result.per_channel.size()) return 0.0;
  return r->result.per_channel[index].second.mean_accuracy;
}

size_t evhar_report_warning_count(const evhar_report* r) {
  return r == nullptr ? 0 : r->result.warnings.size();
}

const char* evhar_report_warning(const evhar_report* r, size_t index) {
  if (r == nullptr || index >= r->result.warnings.size()) return "";
  return r->result.warnings[index].c_str();
}

}  // extern "C"
