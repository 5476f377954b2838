#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "classify.hpp"
#include "descriptors.hpp"
#include "event_stream.hpp"
#include "trajectories.hpp"

namespace evhar {

// Every knob of a run. A run is reproducible from this struct alone; see
// config_to_toml for the serialized form.
struct PipelineConfig {
  // event accumulation
  double fps = 30.0;
  int gain = 64;
  bool denoise = false;
  int denoise_radius = 1;

  // motion-map descriptors
  int surf_step = 8;
  std::vector<double> surf_scales = {1.6, 3.2};

  // dense trajectories
  TrajConfig traj;

  // vocabulary and encoding
  int kmeans_k = 500;
  uint64_t sample_budget = 100000;
  std::vector<Channel> channels = {Channel::xy, Channel::xt, Channel::yt, Channel::mbh};
  bool shared_codebook = false;

  // classifier
  ClassifierKind classifier = ClassifierKind::svm;
  double svm_c = 1.0;
  int knn_k = 5;

  // event decoding
  bool allow_wrap = false;
  int pol_on = -1;  // -1 keeps each profile's own ON convention
  std::string custom_profile;  // extra profile spec usable from manifests

  // run control
  uint64_t seed = 42;
  int workers = 0;  // 0 picks a worker count from the machine
  bool emit_svg = false;

  // synthetic dataset generation
  int sim_width = 128;
  int sim_height = 128;
  int sim_subjects = 12;
  int sim_reps = 5;
  double sim_duration_s = 1.2;
  double sim_theta = 0.2;
  double sim_eps = 1.0 / 255.0;
  double sim_noise_rate = 0.0;
  EventFormat sim_format = EventFormat::aedat2;
};

// Assigns one configuration key from its string form; unknown keys and
// unparsable values are config errors. Keys match the TOML field names.
void config_set(PipelineConfig& cfg, const std::string& key, const std::string& value);

// Flat TOML document holding every field, suitable to rerun the pipeline.
std::string config_to_toml(const PipelineConfig& cfg);

// Range checks; throws config errors.
void validate_config(const PipelineConfig& cfg);

struct ManifestRow {
  std::string id;
  std::string path;  // relative paths resolve against the manifest directory
  std::string format;
  std::string profile;
  std::string label;
  std::string group;
};

struct Manifest {
  std::string dir;
  std::vector<ManifestRow> rows;
};

// CSV with the exact header id,path,format,profile,label,group.
Manifest parse_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);
std::string resolve_manifest_path(const Manifest& m, const ManifestRow& row);

// Reads and decodes one manifest row under the config's profile overrides.
EventStream load_video_events(const Manifest& m, const ManifestRow& row,
                              const PipelineConfig& cfg);

struct SimDatasetResult {
  std::string manifest_path;
  // Spec string of the generated profile when the geometry needs a custom
  // one; empty when a built-in profile fits. Feed it back via custom_profile.
  std::string profile_spec;
};

// Renders the 6-gesture corpus (classes x sim_subjects x sim_reps clips),
// writes one event file per clip plus manifest.csv.
SimDatasetResult simulate_dataset(const std::string& out_dir, const PipelineConfig& cfg);

// Frames, motion-map SURF and trajectory descriptors for one decoded video.
VideoFeatures extract_features(const EventStream& stream, const PipelineConfig& cfg,
                               int workers = 1);

// Per-video features in manifest order. Results are cached in cache_dir keyed
// by a content hash of the event file and the feature settings (pass "" to
// disable). A video whose extraction fails contributes empty descriptor sets
// and one warnings entry; read or parse failures abort with the video id.
std::vector<VideoFeatures> extract_dataset_features(const Manifest& m,
                                                    const PipelineConfig& cfg,
                                                    const std::string& cache_dir,
                                                    std::vector<std::string>* warnings);

struct PipelineResult {
  std::vector<std::string> label_names;  // positionally aligned with fused.labels
  EvalReport fused;
  std::vector<std::pair<Channel, EvalReport>> per_channel;  // config channel order
  std::vector<std::string> warnings;
};

struct ReportPaths {
  std::string report_csv;
  std::string confusion_csv;
  std::string channel_csv;
  std::string svg;  // empty skips the chart
};

void emit_report(const PipelineResult& r, const ReportPaths& paths);

// Full flow: manifest -> features (cached under out_dir/cache) -> per-fold
// codebooks, encoding and classifier -> report.csv, confusion.csv,
// channel_accuracy.csv, config.toml and optional report.svg in out_dir.
PipelineResult run_pipeline(const std::string& manifest_path, const PipelineConfig& cfg,
                            const std::string& out_dir);

// Fits one codebook per configured channel on the whole manifest and writes
// codebook_<channel>.json files into out_dir.
void train_codebooks(const std::string& manifest_path, const PipelineConfig& cfg,
                     const std::string& cache_dir, const std::string& out_dir);

// Encodes every manifest row against codebooks from codebook_dir into one CSV
// (id,label,group followed by the fused histogram).
void encode_dataset(const std::string& manifest_path, const PipelineConfig& cfg,
                    const std::string& cache_dir, const std::string& codebook_dir,
                    const std::string& out_csv);

// Whole-manifest fit: codebooks plus an SVM on every row, written to out_dir
// (codebook_<channel>.json, model.json). Unlike run_pipeline nothing is held
// out; pair it with eval_model on a different manifest.
void train_model(const std::string& manifest_path, const PipelineConfig& cfg,
                 const std::string& out_dir);

// Applies a train_model directory to a manifest and reports a single fold
// named "all"; labels unknown to the model are manifest errors.
PipelineResult eval_model(const std::string& manifest_path, const PipelineConfig& cfg,
                          const std::string& model_dir, const std::string& out_dir);

}  // namespace evhar
