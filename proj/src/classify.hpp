#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bovw.hpp"
#include "descriptors.hpp"
#include "error.hpp"

namespace evhar {

// One-vs-all linear classifier. Class classes[c] is scored by
// dot(weights[c], x) + biases[c]; prediction takes the argmax.
struct SvmModel {
  std::vector<int> classes;  // ascending
  std::vector<std::string> class_names;  // optional, aligned with classes
  int dim = 0;
  double c_reg = 1.0;
  std::vector<Channel> channels;  // fusion order the features came from

  std::vector<std::vector<double>> weights;  // one row of `dim` per class
  std::vector<double> biases;

  // Solver diagnostics, one entry per class; not persisted. `objective` holds
  // the negative dual value after each epoch, `final_gap` the duality gap at
  // the stopping epoch.
  std::vector<std::vector<double>> objective;
  std::vector<double> final_gap;
};

// Trains per-class L1 hinge-loss SVMs by dual coordinate descent until the
// duality gap drops to 1e-3 or the epoch cap is reached.
SvmModel train_svm(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                   double c_reg, uint64_t seed, int workers = 1);

// Returns the argmax label; exact score ties go to the lowest class index.
// When `scores` is non-null it receives one decision value per model class.
int svm_predict(const SvmModel& model, const std::vector<float>& x,
                std::vector<double>* scores = nullptr);

// Majority vote over the k nearest training vectors (Euclidean). Vote ties
// prefer the smaller mean neighbour distance, then the lower label.
int knn_predict(const std::vector<std::vector<float>>& train_x,
                const std::vector<int>& train_y, const std::vector<float>& x,
                int k_neighbors);

std::string svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const std::string& text);
void save_svm(const std::string& path, const SvmModel& model);
SvmModel load_svm(const std::string& path);

enum class ClassifierKind { svm = 0, knn = 1, majority = 2 };

const char* classifier_kind_name(ClassifierKind k);
ClassifierKind parse_classifier_kind(const std::string& name);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::svm;
  double svm_c = 1.0;
  int knn_k = 5;
  int kmeans_k = 500;
  uint64_t sample_budget = 100000;
  uint64_t seed = 42;
  // Trains one codebook on the whole dataset instead of per fold. Faster but
  // lets held-out descriptors shape the vocabulary.
  bool shared_codebook = false;
  int workers = 1;
};

struct EvalReport {
  std::vector<std::string> fold_groups;  // sorted distinct group ids
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;    // average of the fold accuracies
  double pooled_accuracy = 0.0;  // confusion trace over total count
  std::vector<int> labels;       // sorted distinct labels
  std::vector<std::vector<int64_t>> confusion;  // rows true, columns predicted
  std::vector<double> per_class_accuracy;
};

// Leave-one-group-out evaluation. Every fold holds out one group, trains
// codebooks on the remaining videos only (unless cfg.shared_codebook), encodes
// and fuses the chosen channels, then trains and applies the classifier.
EvalReport cross_validate(const std::vector<const VideoFeatures*>& videos,
                          const std::vector<int>& labels,
                          const std::vector<std::string>& groups,
                          const std::vector<Channel>& channels,
                          const ClassifierConfig& cfg);

}  // namespace evhar
