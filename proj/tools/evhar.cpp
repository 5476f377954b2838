// Command line front end; talks to the toolkit through the C API only.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "evhar.h"

namespace {

// Config keys exposed one-to-one as long options, in the TOML echo order.
const std::vector<std::pair<const char*, const char*>> kConfigKeys = {
    {"fps", "frame accumulation rate"},
    {"gain", "per-event brightness increment"},
    {"denoise", "median-filter accumulated frames (true/false)"},
    {"denoise_radius", "median filter radius"},
    {"surf_step", "dense SURF grid step on motion maps"},
    {"surf_scales", "dense SURF scales, comma separated"},
    {"traj_step", "trajectory sampling grid step"},
    {"traj_len", "trajectory length in frames"},
    {"max_step", "max per-frame tracking step in px"},
    {"min_disp", "min total trajectory displacement in px"},
    {"flow_eps", "flow magnitude below which tracking stops"},
    {"texture_thresh", "min patch variance to seed a trajectory"},
    {"kmeans_k", "vocabulary size per channel"},
    {"sample_budget", "descriptor sample cap for k-means"},
    {"channels", "fused channels, e.g. xy,xt,yt,mbh"},
    {"shared_codebook", "fit vocabularies once on all data (true/false)"},
    {"classifier", "svm, knn or majority"},
    {"svm_c", "SVM regularization C"},
    {"knn_k", "KNN neighbor count"},
    {"allow_wrap", "tolerate 32-bit timestamp wraparound (true/false)"},
    {"pol_on", "polarity ON bit override: -1 keep, 0 or 1"},
    {"custom_profile", "sensor spec name,w,h,xs,xb,ys,yb,ps,pon"},
    {"seed", "master RNG seed"},
    {"workers", "worker threads, 0 = hardware"},
    {"emit_svg", "also write an SVG accuracy chart (true/false)"},
    {"sim_width", "simulated sensor width"},
    {"sim_height", "simulated sensor height"},
    {"sim_subjects", "synthetic subjects per class"},
    {"sim_reps", "repetitions per subject"},
    {"sim_duration_s", "clip duration in seconds"},
    {"sim_theta", "log-intensity event threshold"},
    {"sim_eps", "log-intensity floor"},
    {"sim_noise_rate", "noise events per pixel per second"},
    {"sim_format", "clip file format: aedat2 or csv"},
};

int exit_code_for(int status) {
  if (status == EVHAR_OK) return 0;
  if (status == EVHAR_E_CONFIG || status == EVHAR_E_INVALID_ARGUMENT) return 2;
  if (status == EVHAR_E_INTERNAL) return 4;
  return 3;
}

int report_failure(int status) {
  std::fprintf(stderr, "error (%s): %s\n", evhar_status_name(status), evhar_last_error());
  return exit_code_for(status);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Reads the flat key = value TOML files this tool itself writes.
int apply_config_file(evhar_config* cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error (config_error): cannot open config file '%s'\n",
                 path.c_str());
    return 2;
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error (config_error): %s:%d: expected key = value\n",
                   path.c_str(), line_no);
      return 2;
    }
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    const int status = evhar_config_set(cfg, key.c_str(), value.c_str());
    if (status != EVHAR_OK) {
      std::fprintf(stderr, "error (%s): %s:%d: %s\n", evhar_status_name(status),
                   path.c_str(), line_no, evhar_last_error());
      return exit_code_for(status);
    }
  }
  return 0;
}

void print_report(const evhar_report* rep) {
  std::printf("folds:\n");
  for (size_t f = 0; f < evhar_report_fold_count(rep); ++f)
    std::printf("  %-12s %.4f\n", evhar_report_fold_group(rep, f),
                evhar_report_fold_accuracy(rep, f));
  std::printf("mean accuracy   %.4f\n", evhar_report_mean_accuracy(rep));
  std::printf("pooled accuracy %.4f\n", evhar_report_pooled_accuracy(rep));
  if (evhar_report_channel_count(rep) > 0) {
    std::printf("per-channel mean accuracy:\n");
    for (size_t c = 0; c < evhar_report_channel_count(rep); ++c)
      std::printf("  %-4s %.4f\n", evhar_report_channel(rep, c),
                  evhar_report_channel_accuracy(rep, c));
  }
  const size_t nl = evhar_report_label_count(rep);
  std::printf("confusion (rows = truth):\n");
  for (size_t t = 0; t < nl; ++t) {
    std::printf("  %-14s", evhar_report_label(rep, t));
    for (size_t p = 0; p < nl; ++p)
      std::printf(" %4lld", static_cast<long long>(evhar_report_confusion(rep, t, p)));
    std::printf("\n");
  }
  for (size_t w = 0; w < evhar_report_warning_count(rep); ++w)
    std::fprintf(stderr, "warning: %s\n", evhar_report_warning(rep, w));
}

struct Cleanup {
  evhar_config* cfg;
  ~Cleanup() { evhar_config_free(cfg); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event camera activity recognition toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "TOML config file applied before other flags");
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& [key, help] : kConfigKeys) {
    app.add_option_function<std::string>(
        std::string("--") + key,
        [&overrides, key = std::string(key)](const std::string& v) {
          overrides.emplace_back(key, v);
        },
        help);
  }

  std::string in_path, out_path, manifest, format = "aedat2", profile = "dvs128";
  std::string cache_dir, books_dir, model_dir;

  CLI::App* c_sim = app.add_subcommand("simulate", "render the synthetic gesture corpus");
  c_sim->add_option("--out", out_path, "output directory")->required();

  CLI::App* c_ingest = app.add_subcommand("ingest", "decode an event file, optionally to CSV");
  c_ingest->add_option("--in", in_path, "event file")->required();
  c_ingest->add_option("--format", format, "aedat2 or csv");
  c_ingest->add_option("--profile", profile, "sensor profile name");
  c_ingest->add_option("--out", out_path, "CSV rewrite destination");

  CLI::App* c_frames = app.add_subcommand("frames", "accumulate events into PGM frames");
  c_frames->add_option("--in", in_path, "event file")->required();
  c_frames->add_option("--format", format, "aedat2 or csv");
  c_frames->add_option("--profile", profile, "sensor profile name");
  c_frames->add_option("--out", out_path, "output directory")->required();

  CLI::App* c_maps = app.add_subcommand("maps", "project events into XY/XT/YT motion maps");
  c_maps->add_option("--in", in_path, "event file")->required();
  c_maps->add_option("--format", format, "aedat2 or csv");
  c_maps->add_option("--profile", profile, "sensor profile name");
  c_maps->add_option("--out", out_path, "output directory")->required();

  CLI::App* c_feat = app.add_subcommand("features", "extract descriptors for a manifest");
  c_feat->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  c_feat->add_option("--cache", cache_dir, "feature cache directory")->required();

  CLI::App* c_book = app.add_subcommand("codebook", "fit per-channel vocabularies");
  c_book->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  c_book->add_option("--cache", cache_dir, "feature cache directory")->required();
  c_book->add_option("--out", out_path, "codebook output directory")->required();

  CLI::App* c_enc = app.add_subcommand("encode", "write fused histograms as CSV");
  c_enc->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  c_enc->add_option("--cache", cache_dir, "feature cache directory")->required();
  c_enc->add_option("--books", books_dir, "codebook directory")->required();
  c_enc->add_option("--out", out_path, "histogram CSV path")->required();

  CLI::App* c_train = app.add_subcommand("train", "fit codebooks and an SVM on a manifest");
  c_train->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  c_train->add_option("--out", out_path, "model output directory")->required();

  CLI::App* c_eval = app.add_subcommand("eval", "apply a trained model to a manifest");
  c_eval->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  c_eval->add_option("--model", model_dir, "model directory from train")->required();
  c_eval->add_option("--out", out_path, "report output directory")->required();

  CLI::App* c_pipe = app.add_subcommand("pipeline", "leave-one-group-out cross-validation");
  c_pipe->add_option("--manifest", manifest, "dataset manifest CSV")->required();
  c_pipe->add_option("--out", out_path, "report output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  evhar_config* cfg = evhar_config_new();
  if (cfg == nullptr) {
    std::fprintf(stderr, "error (internal_error): cannot allocate config\n");
    return 4;
  }
  Cleanup cleanup{cfg};

  if (!config_path.empty()) {
    const int rc = apply_config_file(cfg, config_path);
    if (rc != 0) return rc;
  }
  for (const auto& [key, value] : overrides) {
    const int status = evhar_config_set(cfg, key.c_str(), value.c_str());
    if (status != EVHAR_OK) return report_failure(status);
  }

  int status = EVHAR_OK;
  if (c_sim->parsed()) {
    char* mpath = nullptr;
    char* spec = nullptr;
    status = evhar_simulate(cfg, out_path.c_str(), &mpath, &spec);
    if (status == EVHAR_OK) {
      std::printf("manifest: %s\n", mpath);
      if (spec[0] != '\0')
        std::printf("pass --custom_profile \"%s\" to later stages\n", spec);
      evhar_string_free(mpath);
      evhar_string_free(spec);
    }
  } else if (c_ingest->parsed()) {
    uint64_t count = 0;
    int64_t dur = 0;
    uint32_t w = 0, h = 0;
    status = evhar_ingest(cfg, in_path.c_str(), format.c_str(), profile.c_str(),
                          out_path.empty() ? nullptr : out_path.c_str(), &count, &dur, &w,
                          &h);
    if (status == EVHAR_OK)
      std::printf("events %llu  duration_us %lld  geometry %ux%u\n",
                  static_cast<unsigned long long>(count), static_cast<long long>(dur), w, h);
  } else if (c_frames->parsed()) {
    uint64_t n = 0;
    status = evhar_export_frames(cfg, in_path.c_str(), format.c_str(), profile.c_str(),
                                 out_path.c_str(), &n);
    if (status == EVHAR_OK)
      std::printf("frames %llu\n", static_cast<unsigned long long>(n));
  } else if (c_maps->parsed()) {
    status = evhar_export_maps(cfg, in_path.c_str(), format.c_str(), profile.c_str(),
                               out_path.c_str());
    if (status == EVHAR_OK) std::printf("wrote map_xy.pgm map_xt.pgm map_yt.pgm\n");
  } else if (c_feat->parsed()) {
    uint64_t videos = 0, warnings = 0;
    status = evhar_extract_features(cfg, manifest.c_str(), cache_dir.c_str(), &videos,
                                    &warnings);
    if (status == EVHAR_OK)
      std::printf("videos %llu  warnings %llu\n", static_cast<unsigned long long>(videos),
                  static_cast<unsigned long long>(warnings));
  } else if (c_book->parsed()) {
    status = evhar_train_codebooks(cfg, manifest.c_str(), cache_dir.c_str(),
                                   out_path.c_str());
    if (status == EVHAR_OK) std::printf("codebooks written to %s\n", out_path.c_str());
  } else if (c_enc->parsed()) {
    status = evhar_encode_dataset(cfg, manifest.c_str(), cache_dir.c_str(),
                                  books_dir.c_str(), out_path.c_str());
    if (status == EVHAR_OK) std::printf("histograms written to %s\n", out_path.c_str());
  } else if (c_train->parsed()) {
    status = evhar_train(cfg, manifest.c_str(), out_path.c_str());
    if (status == EVHAR_OK) std::printf("model written to %s\n", out_path.c_str());
  } else if (c_eval->parsed()) {
    evhar_report* rep = nullptr;
    status = evhar_eval(cfg, manifest.c_str(), model_dir.c_str(), out_path.c_str(), &rep);
    if (status == EVHAR_OK) {
      print_report(rep);
      evhar_report_free(rep);
    }
  } else if (c_pipe->parsed()) {
    evhar_report* rep = nullptr;
    status = evhar_pipeline(cfg, manifest.c_str(), out_path.c_str(), &rep);
    if (status == EVHAR_OK) {
      print_report(rep);
      evhar_report_free(rep);
    }
  }

  if (status != EVHAR_OK) return report_failure(status);
  return 0;
}
