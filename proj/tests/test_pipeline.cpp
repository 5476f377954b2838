#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "frames.hpp"
#include "pipeline.hpp"
#include "test_util.hpp"

using namespace evhar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::path("pipe_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string sub(const std::string& leaf) const { return (path / leaf).string(); }
};

// Small corpus configuration shared by the end-to-end cases.
PipelineConfig small_cfg() {
  PipelineConfig cfg;
  cfg.sim_width = 48;
  cfg.sim_height = 48;
  cfg.sim_subjects = 2;
  cfg.sim_reps = 1;
  cfg.sim_noise_rate = 0.0;
  cfg.kmeans_k = 8;
  cfg.sample_budget = 2000;
  cfg.channels = {Channel::xy};
  cfg.workers = 4;
  cfg.seed = 77;
  return cfg;
}

std::string file_text(const std::string& path) { return read_binary_file(path); }

}  // namespace

TEST_CASE("config toml round-trips every key") {
  PipelineConfig cfg;
  cfg.fps = 25.5;
  cfg.gain = 32;
  cfg.denoise = true;
  cfg.denoise_radius = 2;
  cfg.surf_step = 6;
  cfg.surf_scales = {1.25, 2.0, 4.0};
  cfg.traj.step = 4;
  cfg.traj.traj_len = 12;
  cfg.traj.max_step = 6.5;
  cfg.traj.min_disp = 1.75;
  cfg.traj.flow_eps = 0.3;
  cfg.traj.texture_thresh = 2e-4;
  cfg.kmeans_k = 64;
  cfg.sample_budget = 5000;
  cfg.channels = {Channel::xt, Channel::mbh};
  cfg.shared_codebook = true;
  cfg.classifier = ClassifierKind::knn;
  cfg.svm_c = 2.25;
  cfg.knn_k = 7;
  cfg.allow_wrap = true;
  cfg.pol_on = 0;
  cfg.custom_profile = "synth,48,48,1,6,7,6,0,1";
  cfg.seed = 99;
  cfg.workers = 3;
  cfg.emit_svg = true;
  cfg.sim_width = 48;
  cfg.sim_height = 64;
  cfg.sim_subjects = 3;
  cfg.sim_reps = 2;
  cfg.sim_duration_s = 0.8;
  cfg.sim_theta = 0.25;
  cfg.sim_eps = 0.005;
  cfg.sim_noise_rate = 1.5;
  cfg.sim_format = EventFormat::csv;

  const std::string toml = config_to_toml(cfg);
  PipelineConfig back;
  size_t start = 0;
  while (start < toml.size()) {
    size_t nl = toml.find('\n', start);
    std::string line = toml.substr(start, nl - start);
    start = nl + 1;
    const size_t eq = line.find(" = ");
    REQUIRE(eq != std::string::npos);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 3);
    if (!value.empty() && value.front() == '"') value = value.substr(1, value.size() - 2);
    config_set(back, key, value);
  }
  CHECK(config_to_toml(back) == toml);
  CHECK(back.channels == cfg.channels);
  CHECK(back.surf_scales == cfg.surf_scales);
  CHECK(back.fps == cfg.fps);
}

TEST_CASE("config rejects unknown keys and bad values") {
  PipelineConfig cfg;
  CHECK(testutil::code_of([&] { config_set(cfg, "frames_per_sec", "30"); }) ==
        ErrorCode::config);
  CHECK(testutil::code_of([&] { config_set(cfg, "fps", "fast"); }) == ErrorCode::config);
  CHECK(testutil::code_of([&] { config_set(cfg, "gain", "12x"); }) == ErrorCode::config);
  CHECK(testutil::code_of([&] { config_set(cfg, "denoise", "maybe"); }) == ErrorCode::config);
  CHECK(testutil::code_of([&] { config_set(cfg, "channels", "xy,zz"); }) == ErrorCode::config);
  CHECK(testutil::code_of([&] { config_set(cfg, "seed", "-4"); }) == ErrorCode::config);
}

TEST_CASE("config validation pins documented ranges") {
  auto broken = [](auto mutate) {
    PipelineConfig cfg;
    mutate(cfg);
    return testutil::code_of([&] { validate_config(cfg); });
  };
  CHECK(broken([](PipelineConfig& c) { c.fps = 0; }) == ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.kmeans_k = 0; }) == ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.traj.traj_len = 14; }) == ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.channels.clear(); }) == ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.channels = {Channel::xy, Channel::xy}; }) ==
        ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.pol_on = 5; }) == ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.svm_c = -1; }) == ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.surf_scales.clear(); }) == ErrorCode::config);
  CHECK(broken([](PipelineConfig& c) { c.sim_width = 4; }) == ErrorCode::config);
  validate_config(PipelineConfig{});  // defaults pass
}

TEST_CASE("manifest writing and parsing round-trip") {
  TempDir dir("manifest");
  const std::vector<ManifestRow> rows = {
      {"v1", "clips/a.aedat", "aedat2", "dvs128", "wave", "s00"},
      {"v2", "/abs/b.csv", "csv", "synth", "clap", "s01"},
  };
  write_manifest(dir.sub("manifest.csv"), rows);
  const Manifest m = parse_manifest(dir.sub("manifest.csv"));
  REQUIRE(m.rows.size() == 2);
  CHECK(m.rows[0].id == "v1");
  CHECK(m.rows[1].profile == "synth");
  CHECK(m.dir == dir.str());
  CHECK(resolve_manifest_path(m, m.rows[0]) == (dir.path / "clips/a.aedat").string());
  CHECK(resolve_manifest_path(m, m.rows[1]) == "/abs/b.csv");
}

TEST_CASE("manifest validation failures") {
  TempDir dir("manifest_bad");
  auto reject = [&](const std::string& text) {
    write_binary_file(dir.sub("m.csv"), text);
    return testutil::code_of([&] { parse_manifest(dir.sub("m.csv")); });
  };
  CHECK(reject("id,path\nv1,a\n") == ErrorCode::manifest);
  CHECK(reject("id,path,format,profile,label,group\n") == ErrorCode::manifest);
  CHECK(reject("id,path,format,profile,label,group\nv1,a.csv,csv,dvs128,wave\n") ==
        ErrorCode::manifest);
  CHECK(reject("id,path,format,profile,label,group\nv1,a.csv,csv,dvs128,,s0\n") ==
        ErrorCode::manifest);
  CHECK(reject("id,path,format,profile,label,group\nv1,a.csv,avi,dvs128,wave,s0\n") ==
        ErrorCode::manifest);
  CHECK(reject("id,path,format,profile,label,group\n"
               "v1,a.csv,csv,dvs128,wave,s0\nv1,b.csv,csv,dvs128,clap,s1\n") ==
        ErrorCode::manifest);
  CHECK(testutil::code_of([&] { parse_manifest(dir.sub("missing.csv")); }) == ErrorCode::io);
  CHECK(testutil::code_of([] {
          write_manifest("unused.csv", {{"a,b", "p", "csv", "dvs128", "l", "g"}});
        }) == ErrorCode::invalid_argument);
}

TEST_CASE("simulate_dataset writes a parseable corpus") {
  TempDir dir("sim");
  PipelineConfig cfg = small_cfg();
  const SimDatasetResult sim = simulate_dataset(dir.str(), cfg);
  CHECK(!sim.profile_spec.empty());  // 48x48 needs the synthetic layout
  cfg.custom_profile = sim.profile_spec;

  const Manifest m = parse_manifest(sim.manifest_path);
  REQUIRE(m.rows.size() == 12);  // 6 classes x 2 subjects x 1 rep

  std::vector<std::string> labels;
  for (const ManifestRow& row : m.rows) labels.push_back(row.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  CHECK(labels.size() == 6);

  for (const ManifestRow& row : m.rows) {
    const EventStream s = load_video_events(m, row, cfg);
    CHECK(s.geometry == Geometry{48, 48});
    CHECK(s.events.size() > 100);
  }

  // same config, fresh directory: identical clip bytes
  TempDir dir2("sim_again");
  const SimDatasetResult sim2 = simulate_dataset(dir2.str(), cfg);
  const Manifest m2 = parse_manifest(sim2.manifest_path);
  CHECK(file_text(resolve_manifest_path(m, m.rows[0])) ==
        file_text(resolve_manifest_path(m2, m2.rows[0])));
  CHECK(file_text(sim.manifest_path) == file_text(sim2.manifest_path));
}

TEST_CASE("extract_features produces every channel at its declared width") {
  TempDir dir("feat");
  PipelineConfig cfg = small_cfg();
  const SimDatasetResult sim = simulate_dataset(dir.str(), cfg);
  cfg.custom_profile = sim.profile_spec;
  const Manifest m = parse_manifest(sim.manifest_path);

  const EventStream s = load_video_events(m, m.rows[0], cfg);
  const VideoFeatures vf = extract_features(s, cfg);
  CHECK(vf.of(Channel::xy).dim == 64);
  CHECK(vf.of(Channel::xt).dim == 64);
  CHECK(vf.of(Channel::yt).dim == 64);
  CHECK(vf.of(Channel::hog).dim == 96);
  CHECK(vf.of(Channel::hof).dim == 108);
  CHECK(vf.of(Channel::mbh).dim == 192);
  CHECK(vf.of(Channel::xy).count() > 0);
  CHECK(vf.of(Channel::xt).count() > 0);

  const VideoFeatures again = extract_features(s, cfg);
  CHECK(serialize_features(again) == serialize_features(vf));
}

TEST_CASE("dataset extraction caches and tolerates broken videos") {
  TempDir dir("cache");
  PipelineConfig cfg = small_cfg();
  cfg.sim_subjects = 1;
  const SimDatasetResult sim = simulate_dataset(dir.str(), cfg);
  cfg.custom_profile = sim.profile_spec;

  // a valid but empty event file: extraction fails, the video stays in
  write_binary_file(dir.sub("clips/empty.csv"), "");
  std::string manifest_text = file_text(sim.manifest_path);
  manifest_text += "empty_vid,clips/empty.csv,csv,synth,wave,s00\n";
  write_binary_file(sim.manifest_path, manifest_text);

  const Manifest m = parse_manifest(sim.manifest_path);
  REQUIRE(m.rows.size() == 7);

  std::vector<std::string> warnings;
  const std::vector<VideoFeatures> feats =
      extract_dataset_features(m, cfg, dir.sub("cache"), &warnings);
  REQUIRE(feats.size() == 7);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("empty_vid") != std::string::npos);
  CHECK(feats[6].of(Channel::xy).count() == 0);
  CHECK(feats[6].of(Channel::xy).dim == 64);
  CHECK(feats[0].of(Channel::xy).count() > 0);

  size_t cache_files = 0;
  for (const auto& entry : fs::directory_iterator(dir.sub("cache"))) {
    (void)entry;
    ++cache_files;
  }
  CHECK(cache_files == 7);

  // second pass is served from the cache and matches bit for bit
  std::vector<std::string> warnings2;
  const std::vector<VideoFeatures> feats2 =
      extract_dataset_features(m, cfg, dir.sub("cache"), &warnings2);
  CHECK(warnings2.empty());  // cached results carry no failure note
  for (size_t i = 0; i < feats.size(); ++i)
    CHECK(serialize_features(feats2[i]) == serialize_features(feats[i]));

  // missing file aborts with the offending id
  manifest_text += "lost_vid,clips/lost.csv,csv,synth,wave,s00\n";
  write_binary_file(sim.manifest_path, manifest_text);
  const Manifest m2 = parse_manifest(sim.manifest_path);
  try {
    extract_dataset_features(m2, cfg, "", nullptr);
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("lost_vid") != std::string::npos);
  }
}

TEST_CASE("emit_report writes the documented schemas") {
  TempDir dir("report");
  PipelineResult r;
  r.label_names = {"clap", "walk", "wave"};
  r.fused.fold_groups = {"g1", "g2"};
  r.fused.fold_accuracy = {1.0, 0.5};
  r.fused.mean_accuracy = 0.75;
  r.fused.pooled_accuracy = 0.7;
  r.fused.labels = {0, 1, 2};
  r.fused.confusion = {{1, 0, 0}, {0, 2, 0}, {1, 0, 3}};
  r.fused.per_class_accuracy = {1.0, 1.0, 0.75};
  r.per_channel.emplace_back(Channel::xy, r.fused);

  ReportPaths paths;
  paths.report_csv = dir.sub("report.csv");
  paths.confusion_csv = dir.sub("confusion.csv");
  paths.channel_csv = dir.sub("channel_accuracy.csv");
  paths.svg = dir.sub("report.svg");
  emit_report(r, paths);

  CHECK(file_text(paths.report_csv) ==
        "fold,accuracy\ng1,1.000000\ng2,0.500000\nmean,0.750000\npooled,0.700000\n");
  CHECK(file_text(paths.confusion_csv) ==
        "label,clap,walk,wave\nclap,1,0,0\nwalk,0,2,0\nwave,1,0,3\n");
  CHECK(file_text(paths.channel_csv) == "channel,accuracy\nxy,0.750000\nfused,0.750000\n");
  CHECK(file_text(paths.svg).substr(0, 4) == "<svg");
}

TEST_CASE("run_pipeline end to end on a tiny synthetic corpus") {
  TempDir dir("e2e");
  PipelineConfig cfg = small_cfg();
  const SimDatasetResult sim = simulate_dataset(dir.sub("data"), cfg);
  cfg.custom_profile = sim.profile_spec;
  cfg.emit_svg = true;

  const PipelineResult r = run_pipeline(sim.manifest_path, cfg, dir.sub("out"));
  CHECK(r.fused.fold_accuracy.size() == 2);  // one fold per subject
  CHECK(r.label_names.size() == 6);
  CHECK(r.warnings.empty());
  REQUIRE(r.per_channel.size() == 1);
  // a single-channel run and its fused report are the same computation
  CHECK(r.per_channel[0].second.mean_accuracy == r.fused.mean_accuracy);
  CHECK(r.per_channel[0].second.fold_accuracy == r.fused.fold_accuracy);
  CHECK(r.per_channel[0].second.confusion == r.fused.confusion);

  for (const char* leaf :
       {"report.csv", "confusion.csv", "channel_accuracy.csv", "config.toml", "report.svg"})
    CHECK(fs::exists(dir.path / "out" / leaf));
  CHECK(file_text(dir.sub("out/config.toml")) == config_to_toml(cfg));

  // rows: 2 folds + mean + pooled after the header
  const std::string report = file_text(dir.sub("out/report.csv"));
  CHECK(std::count(report.begin(), report.end(), '\n') == 5);
  CHECK(report.find("mean,") != std::string::npos);
  CHECK(report.find("pooled,") != std::string::npos);

  // identical inputs and seeds: byte-identical outputs
  const PipelineResult r2 = run_pipeline(sim.manifest_path, cfg, dir.sub("out2"));
  CHECK(r2.fused.fold_accuracy == r.fused.fold_accuracy);
  for (const char* leaf : {"report.csv", "confusion.csv", "channel_accuracy.csv"})
    CHECK(file_text((dir.path / "out" / leaf).string()) ==
          file_text((dir.path / "out2" / leaf).string()));
}

TEST_CASE("stage functions compose into a train/eval flow") {
  TempDir dir("stages");
  PipelineConfig cfg = small_cfg();
  // the xy map alone cannot tell mirrored swipes apart; add a flow channel
  cfg.channels = {Channel::xy, Channel::hof};
  const SimDatasetResult sim = simulate_dataset(dir.sub("data"), cfg);
  cfg.custom_profile = sim.profile_spec;

  train_codebooks(sim.manifest_path, cfg, dir.sub("cache"), dir.sub("books"));
  CHECK(fs::exists(dir.path / "books" / "codebook_xy.json"));
  CHECK(fs::exists(dir.path / "books" / "codebook_hof.json"));

  encode_dataset(sim.manifest_path, cfg, dir.sub("cache"), dir.sub("books"),
                 dir.sub("encoded.csv"));
  const std::string encoded = file_text(dir.sub("encoded.csv"));
  REQUIRE(encoded.rfind("id,label,group,histogram\n", 0) == 0);
  CHECK(std::count(encoded.begin(), encoded.end(), '\n') == 13);  // header + 12 rows
  const std::string row0 = encoded.substr(26, encoded.find('\n', 26) - 26);
  // id,label,group plus one value per vocabulary word of each channel
  CHECK(std::count(row0.begin(), row0.end(), ',') == 2 + 2 * cfg.kmeans_k);

  train_model(sim.manifest_path, cfg, dir.sub("model"));
  CHECK(fs::exists(dir.path / "model" / "model.json"));
  CHECK(fs::exists(dir.path / "model" / "codebook_xy.json"));

  PipelineConfig knn_cfg = cfg;
  knn_cfg.classifier = ClassifierKind::knn;
  CHECK(testutil::code_of([&] { train_model(sim.manifest_path, knn_cfg, dir.sub("m2")); }) ==
        ErrorCode::config);

  const PipelineResult ev =
      eval_model(sim.manifest_path, cfg, dir.sub("model"), dir.sub("eval"));
  CHECK(ev.fused.fold_groups == std::vector<std::string>{"all"});
  CHECK(ev.fused.mean_accuracy == ev.fused.pooled_accuracy);
  CHECK(ev.fused.mean_accuracy >= 0.9);  // scoring the training set itself
  CHECK(ev.label_names.size() == 6);
  CHECK(ev.per_channel.empty());
  int64_t total = 0;
  for (const auto& row : ev.fused.confusion)
    for (int64_t v : row) total += v;
  CHECK(total == 12);
  for (const char* leaf : {"report.csv", "confusion.csv", "channel_accuracy.csv"})
    CHECK(fs::exists(dir.path / "eval" / leaf));

  // a label the model was never fitted on is a manifest problem, not a crash
  Manifest bad = parse_manifest(sim.manifest_path);
  bad.rows[0].label = "jump";
  const std::string bad_path = dir.sub("data/manifest_bad.csv");
  write_manifest(bad_path, bad.rows);
  CHECK(testutil::code_of([&] {
          eval_model(bad_path, cfg, dir.sub("model"), dir.sub("eval2"));
        }) == ErrorCode::manifest);
}
