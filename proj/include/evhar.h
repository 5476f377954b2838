#ifndef EVHAR_H
#define EVHAR_H

/* C interface to the event-based activity recognition toolkit. Every
 * function returns a status code (0 = success); evhar_last_error() holds the
 * message of the most recent failure on the calling thread. Strings returned
 * through char** are heap copies owned by the caller; release them with
 * evhar_string_free. Strings returned as const char* stay owned by the
 * handle they came from. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  EVHAR_OK = 0,
  EVHAR_E_IO = 1,
  EVHAR_E_CONFIG = 2,
  EVHAR_E_UNSUPPORTED_FORMAT = 3,
  EVHAR_E_TRUNCATED_RECORD = 4,
  EVHAR_E_MONOTONICITY = 5,
  EVHAR_E_ADDRESS_RANGE = 6,
  EVHAR_E_MALFORMED_LINE = 7,
  EVHAR_E_UNENCODABLE = 8,
  EVHAR_E_DEGENERATE_VIDEO = 9,
  EVHAR_E_EMPTY_STREAM = 10,
  EVHAR_E_GEOMETRY = 11,
  EVHAR_E_MAP_TOO_SMALL = 12,
  EVHAR_E_DIMENSION = 13,
  EVHAR_E_TOO_FEW_SAMPLES = 14,
  EVHAR_E_NO_FEATURES = 15,
  EVHAR_E_SINGLE_CLASS = 16,
  EVHAR_E_DEGENERATE_FEATURES = 17,
  EVHAR_E_EMPTY_TRAIN_SET = 18,
  EVHAR_E_MISSING_GROUP = 19,
  EVHAR_E_MANIFEST = 20,
  EVHAR_E_INVALID_ARGUMENT = 21,
  EVHAR_E_INTERNAL = 22
};

const char* evhar_status_name(int status);
const char* evhar_last_error(void);
void evhar_string_free(char* s);

/* ---- configuration ---- */

typedef struct evhar_config evhar_config;

evhar_config* evhar_config_new(void);
void evhar_config_free(evhar_config* cfg);

/* Sets one key from its string form; keys match the TOML field names
 * (fps, gain, channels, kmeans_k, seed, ...). */
int evhar_config_set(evhar_config* cfg, const char* key, const char* value);

/* Effective configuration as a TOML document. */
int evhar_config_toml(const evhar_config* cfg, char** toml_out);

/* ---- dataset stages ---- */

/* Renders the synthetic gesture corpus into out_dir (clips plus
 * manifest.csv). profile_spec_out receives the custom sensor layout when one
 * was needed, else an empty string; feed it back via the custom_profile key. */
int evhar_simulate(const evhar_config* cfg, const char* out_dir,
                   char** manifest_path_out, char** profile_spec_out);

/* Decodes an event file and reports its facts; when out_csv is non-NULL the
 * events are rewritten there as CSV. Output pointers may be NULL. */
int evhar_ingest(const evhar_config* cfg, const char* events_path, const char* format,
                 const char* profile, const char* out_csv, uint64_t* event_count_out,
                 int64_t* duration_us_out, uint32_t* width_out, uint32_t* height_out);

/* Accumulated frames as frame_NNNNN.pgm files. */
int evhar_export_frames(const evhar_config* cfg, const char* events_path,
                        const char* format, const char* profile, const char* out_dir,
                        uint64_t* frame_count_out);

/* Motion maps as map_xy.pgm / map_xt.pgm / map_yt.pgm. */
int evhar_export_maps(const evhar_config* cfg, const char* events_path, const char* format,
                      const char* profile, const char* out_dir);

/* Extracts descriptors for every manifest row into cache_dir. */
int evhar_extract_features(const evhar_config* cfg, const char* manifest_path,
                           const char* cache_dir, uint64_t* video_count_out,
                           uint64_t* warning_count_out);

/* Fits one vocabulary per configured channel on the whole manifest. */
int evhar_train_codebooks(const evhar_config* cfg, const char* manifest_path,
                          const char* cache_dir, const char* out_dir);

/* Writes fused histograms for every manifest row as CSV. */
int evhar_encode_dataset(const evhar_config* cfg, const char* manifest_path,
                         const char* cache_dir, const char* codebook_dir,
                         const char* out_csv);

/* Codebooks plus a one-vs-all SVM fitted on the full manifest. */
int evhar_train(const evhar_config* cfg, const char* manifest_path, const char* out_dir);

/* ---- evaluation ---- */

typedef struct evhar_report evhar_report;

/* Applies a evhar_train model directory to a manifest. */
int evhar_eval(const evhar_config* cfg, const char* manifest_path, const char* model_dir,
               const char* out_dir, evhar_report** report_out);

/* Leave-one-group-out cross-validation with report files in out_dir. */
int evhar_pipeline(const evhar_config* cfg, const char* manifest_path, const char* out_dir,
                   evhar_report** report_out);

void evhar_report_free(evhar_report* r);
size_t evhar_report_fold_count(const evhar_report* r);
const char* evhar_report_fold_group(const evhar_report* r, size_t fold);
double evhar_report_fold_accuracy(const evhar_report* r, size_t fold);
double evhar_report_mean_accuracy(const evhar_report* r);
double evhar_report_pooled_accuracy(const evhar_report* r);
size_t evhar_report_label_count(const evhar_report* r);
const char* evhar_report_label(const evhar_report* r, size_t index);
int64_t evhar_report_confusion(const evhar_report* r, size_t true_index, size_t pred_index);
/* Per-channel mean accuracies, one entry per configured channel (empty for
 * evhar_eval reports). */
size_t evhar_report_channel_count(const evhar_report* r);
const char* evhar_report_channel(const evhar_report* r, size_t index);
double evhar_report_channel_accuracy(const evhar_report* r, size_t index);
size_t evhar_report_warning_count(const evhar_report* r);
const char* evhar_report_warning(const evhar_report* r, size_t index);

#ifdef __cplusplus
}
#endif

#endif /* EVHAR_H */
