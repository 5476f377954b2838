#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>

#include <json.hpp>

#include "event_stream.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace evhar {

namespace {

constexpr int kMaxEpochs = 1000;
constexpr double kGapTol = 1e-3;

double dot_aug(const std::vector<double>& w, const std::vector<float>& x) {
  double s = w.back();  // bias feature is a constant 1
  for (size_t j = 0; j < x.size(); ++j) s += w[j] * double(x[j]);
  return s;
}

std::vector<int> sorted_classes(const std::vector<int>& y) {
  std::vector<int> classes(y);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

// Solves min 0.5*||w||^2 + C * sum hinge for one binary problem. The bias is
// handled as an extra always-one feature, so it is regularized too; w has
// dim+1 entries with the bias last.
void train_binary(const std::vector<std::vector<float>>& x, const std::vector<int8_t>& yb,
                  const std::vector<double>& qii, double c_reg, uint64_t seed,
                  std::vector<double>& w, std::vector<double>& trace, double& final_gap) {
  const size_t n = x.size();
  const size_t d = x[0].size();
  w.assign(d + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  Rng rng(seed);
  trace.clear();
  final_gap = 0.0;

  for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
    rng.shuffle(order);
    for (size_t i : order) {
      const double yi = yb[i];
      const double g = yi * dot_aug(w, x[i]) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= c_reg) {
        pg = std::max(g, 0.0);
      }
      if (std::abs(pg) <= 1e-12) continue;
      const double next = std::clamp(alpha[i] - g / qii[i], 0.0, c_reg);
      const double delta = (next - alpha[i]) * yi;
      if (delta == 0.0) continue;
      alpha[i] = next;
      const std::vector<float>& xi = x[i];
      for (size_t j = 0; j < d; ++j) w[j] += delta * double(xi[j]);
      w[d] += delta;
    }

    double wnorm2 = 0.0;
    for (double v : w) wnorm2 += v * v;
    double alpha_sum = 0.0;
    double hinge = 0.0;
    for (size_t i = 0; i < n; ++i) {
      alpha_sum += alpha[i];
      hinge += std::max(0.0, 1.0 - double(yb[i]) * dot_aug(w, x[i]));
    }
    const double primal = 0.5 * wnorm2 + c_reg * hinge;
    const double dual = alpha_sum - 0.5 * wnorm2;
    trace.push_back(0.5 * wnorm2 - alpha_sum);  // negative dual, non-increasing
    final_gap = primal - dual;
    if (final_gap <= kGapTol) break;
  }
}

int label_index(const std::vector<int>& labels, int label) {
  auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) fail(ErrorCode::internal, "label missing from label set");
  return int(it - labels.begin());
}

int majority_label(const std::vector<int>& y) {
  std::map<int, size_t> votes;
  for (int v : y) ++votes[v];
  int best = y.front();
  size_t best_count = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_count) {  // map order makes ties pick the lowest label
      best_count = count;
      best = label;
    }
  }
  return best;
}

}  // namespace

SvmModel train_svm(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                   double c_reg, uint64_t seed, int workers) {
  if (x.size() != y.size())
    fail(ErrorCode::invalid_argument, "feature and label counts differ");
  if (x.empty()) fail(ErrorCode::empty_train_set, "no training vectors");
  if (!(c_reg > 0.0) || !std::isfinite(c_reg))
    fail(ErrorCode::config, "svm C must be positive and finite");

  const size_t d = x[0].size();
  for (const auto& row : x)
    if (row.size() != d)
      fail(ErrorCode::dimension_mismatch, "training vectors have mixed lengths");

  SvmModel model;
  model.classes = sorted_classes(y);
  if (model.classes.size() < 2)
    fail(ErrorCode::single_class, "training data holds a single class");

  bool any_nonzero = false;
  for (const auto& row : x)
    for (float v : row)
      if (v != 0.0f) {
        any_nonzero = true;
        break;
      }
  if (d == 0 || !any_nonzero)
    fail(ErrorCode::degenerate_features, "all training vectors are zero");

  std::vector<double> qii(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double s = 1.0;  // bias feature
    for (float v : x[i]) s += double(v) * double(v);
    qii[i] = s;
  }

  model.dim = int(d);
  model.c_reg = c_reg;
  const size_t nc = model.classes.size();
  model.weights.assign(nc, {});
  model.biases.assign(nc, 0.0);
  model.objective.assign(nc, {});
  model.final_gap.assign(nc, 0.0);

  parallel_for(nc, resolve_workers(workers), [&](size_t c) {
    std::vector<int8_t> yb(y.size());
    for (size_t i = 0; i < y.size(); ++i)
      yb[i] = y[i] == model.classes[c] ? int8_t(1) : int8_t(-1);
    std::vector<double> w;
    train_binary(x, yb, qii, c_reg, mix_seed(seed, uint64_t(c)), w,
                 model.objective[c], model.final_gap[c]);
    model.biases[c] = w.back();
    w.pop_back();
    model.weights[c] = std::move(w);
  });
  return model;
}

int svm_predict(const SvmModel& model, const std::vector<float>& x,
                std::vector<double>* scores) {
  if (int(x.size()) != model.dim)
    fail(ErrorCode::dimension_mismatch, "feature length does not match the model");
  if (model.classes.empty()) fail(ErrorCode::invalid_argument, "model has no classes");

  size_t best = 0;
  double best_score = 0.0;
  if (scores) scores->assign(model.classes.size(), 0.0);
  for (size_t c = 0; c < model.classes.size(); ++c) {
    double s = model.biases[c];
    const std::vector<double>& w = model.weights[c];
    for (size_t j = 0; j < x.size(); ++j) s += w[j] * double(x[j]);
    if (scores) (*scores)[c] = s;
    if (c == 0 || s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return model.classes[best];
}

int knn_predict(const std::vector<std::vector<float>>& train_x,
                const std::vector<int>& train_y, const std::vector<float>& x,
                int k_neighbors) {
  if (train_x.size() != train_y.size())
    fail(ErrorCode::invalid_argument, "feature and label counts differ");
  if (train_x.empty()) fail(ErrorCode::empty_train_set, "knn has no training vectors");
  if (k_neighbors < 1) fail(ErrorCode::config, "knn needs at least one neighbour");

  const size_t n = train_x.size();
  std::vector<std::pair<double, size_t>> by_dist(n);
  for (size_t i = 0; i < n; ++i) {
    if (train_x[i].size() != x.size())
      fail(ErrorCode::dimension_mismatch, "feature length does not match the training set");
    double s = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
      const double diff = double(train_x[i][j]) - double(x[j]);
      s += diff * diff;
    }
    by_dist[i] = {s, i};
  }
  const size_t k = std::min(size_t(k_neighbors), n);
  std::partial_sort(by_dist.begin(), by_dist.begin() + k, by_dist.end());

  struct Tally {
    size_t count = 0;
    double dist_sum = 0.0;
  };
  std::map<int, Tally> votes;
  for (size_t i = 0; i < k; ++i) {
    Tally& t = votes[train_y[by_dist[i].second]];
    ++t.count;
    t.dist_sum += std::sqrt(by_dist[i].first);
  }

  int best = 0;
  size_t best_count = 0;
  double best_mean = 0.0;
  bool first = true;
  for (const auto& [label, t] : votes) {
    const double mean = t.dist_sum / double(t.count);
    const bool wins = first || t.count > best_count ||
                      (t.count == best_count && mean < best_mean);
    if (wins) {  // map order resolves remaining ties to the lowest label
      best = label;
      best_count = t.count;
      best_mean = mean;
      first = false;
    }
  }
  return best;
}

const char* classifier_kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::majority: return "majority";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "svm") return ClassifierKind::svm;
  if (name == "knn") return ClassifierKind::knn;
  if (name == "majority") return ClassifierKind::majority;
  fail(ErrorCode::config, "unknown classifier: " + name);
}

std::string svm_to_json(const SvmModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["C"] = model.c_reg;
  j["dim"] = model.dim;
  j["classes"] = model.classes;
  j["class_names"] = model.class_names;
  std::vector<std::string> names;
  names.reserve(model.channels.size());
  for (Channel c : model.channels) names.push_back(channel_name(c));
  j["channels"] = names;
  j["weights"] = model.weights;
  j["biases"] = model.biases;
  return j.dump();
}

SvmModel svm_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::config, "model file is not valid JSON");
  try {
    if (j.at("version").get<int>() != 1) fail(ErrorCode::config, "unknown model version");
    SvmModel m;
    m.c_reg = j.at("C").get<double>();
    m.dim = j.at("dim").get<int>();
    m.classes = j.at("classes").get<std::vector<int>>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    if (!m.class_names.empty() && m.class_names.size() != m.classes.size())
      fail(ErrorCode::config, "model class names do not align with classes");
    for (const auto& name : j.at("channels").get<std::vector<std::string>>())
      m.channels.push_back(parse_channel(name));
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<double>>();

    if (m.dim < 1 || m.classes.size() < 2 || m.weights.size() != m.classes.size() ||
        m.biases.size() != m.classes.size())
      fail(ErrorCode::config, "model geometry is inconsistent");
    if (!std::is_sorted(m.classes.begin(), m.classes.end()) ||
        std::adjacent_find(m.classes.begin(), m.classes.end()) != m.classes.end())
      fail(ErrorCode::config, "model classes must be strictly increasing");
    for (const auto& row : m.weights) {
      if (row.size() != size_t(m.dim)) fail(ErrorCode::config, "model geometry is inconsistent");
      for (double v : row)
        if (!std::isfinite(v)) fail(ErrorCode::config, "model holds non-finite values");
    }
    for (double v : m.biases)
      if (!std::isfinite(v)) fail(ErrorCode::config, "model holds non-finite values");
    if (!(m.c_reg > 0.0) || !std::isfinite(m.c_reg))
      fail(ErrorCode::config, "model C must be positive");
    return m;
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::config, "model file is missing required fields");
  }
}

void save_svm(const std::string& path, const SvmModel& model) {
  write_binary_file(path, svm_to_json(model));
}

SvmModel load_svm(const std::string& path) { return svm_from_json(read_binary_file(path)); }

namespace {

struct FoldResult {
  double accuracy = 0.0;
  std::vector<int64_t> confusion;  // flat labels*labels, rows true
};

// Encodes and fuses the configured channels for one video.
std::vector<float> fused_histogram(const VideoFeatures& video,
                                   const std::vector<Channel>& channels,
                                   const std::vector<Codebook>& codebooks) {
  std::vector<std::vector<float>> parts;
  parts.reserve(channels.size());
  for (size_t ci = 0; ci < channels.size(); ++ci)
    parts.push_back(encode_video(video.of(channels[ci]), codebooks[ci]));
  return fuse(parts);
}

std::vector<Codebook> train_fold_codebooks(const std::vector<const VideoFeatures*>& videos,
                                           const std::vector<size_t>& train_idx,
                                           const std::vector<Channel>& channels,
                                           const ClassifierConfig& cfg, uint64_t base_seed,
                                           int workers) {
  std::vector<Codebook> books;
  books.reserve(channels.size());
  for (size_t ci = 0; ci < channels.size(); ++ci) {
    std::vector<const DescriptorSet*> sets;
    sets.reserve(train_idx.size());
    for (size_t i : train_idx) sets.push_back(&videos[i]->of(channels[ci]));
    DescriptorSet sample = sample_training_features(sets, cfg.sample_budget,
                                                    mix_seed(base_seed, uint64_t(ci), 1));
    books.push_back(train_codebook(sample, cfg.kmeans_k, mix_seed(base_seed, uint64_t(ci), 2),
                                   channels[ci], workers));
  }
  return books;
}

}  // namespace

EvalReport cross_validate(const std::vector<const VideoFeatures*>& videos,
                          const std::vector<int>& labels,
                          const std::vector<std::string>& groups,
                          const std::vector<Channel>& channels,
                          const ClassifierConfig& cfg) {
  const size_t n = videos.size();
  if (labels.size() != n || groups.size() != n)
    fail(ErrorCode::invalid_argument, "videos, labels and groups must align");
  if (n == 0) fail(ErrorCode::empty_train_set, "no videos to evaluate");
  if (channels.empty()) fail(ErrorCode::invalid_argument, "no channels selected");
  for (const auto& g : groups)
    if (g.empty()) fail(ErrorCode::missing_group, "a video lacks a group id");

  EvalReport report;
  report.fold_groups.assign(groups.begin(), groups.end());
  std::sort(report.fold_groups.begin(), report.fold_groups.end());
  report.fold_groups.erase(std::unique(report.fold_groups.begin(), report.fold_groups.end()),
                           report.fold_groups.end());
  if (report.fold_groups.size() < 2)
    fail(ErrorCode::missing_group, "cross-validation needs at least two groups");

  report.labels = sorted_classes(labels);
  const size_t nl = report.labels.size();
  const size_t folds = report.fold_groups.size();
  const unsigned workers = resolve_workers(cfg.workers);

  // Leaky fast path: one vocabulary fitted on everything, reused by each fold.
  std::vector<Codebook> shared_books;
  if (cfg.shared_codebook) {
    std::vector<size_t> all_idx(n);
    std::iota(all_idx.begin(), all_idx.end(), size_t(0));
    shared_books = train_fold_codebooks(videos, all_idx, channels, cfg,
                                        mix_seed(cfg.seed, 0), int(workers));
  }

  std::vector<FoldResult> fold_out(folds);
  parallel_for(folds, workers, [&](size_t f) {
    const std::string& held_out = report.fold_groups[f];
    std::vector<size_t> train_idx;
    std::vector<size_t> test_idx;
    for (size_t i = 0; i < n; ++i)
      (groups[i] == held_out ? test_idx : train_idx).push_back(i);

    const uint64_t fold_seed = mix_seed(cfg.seed, uint64_t(f) + 1);
    std::vector<Codebook> local_books;
    if (!cfg.shared_codebook)
      local_books = train_fold_codebooks(videos, train_idx, channels, cfg, fold_seed, 1);
    const std::vector<Codebook>& use_books =
        cfg.shared_codebook ? shared_books : local_books;

    std::vector<std::vector<float>> train_hist;
    std::vector<int> train_labels;
    train_hist.reserve(train_idx.size());
    train_labels.reserve(train_idx.size());
    for (size_t i : train_idx) {
      train_hist.push_back(fused_histogram(*videos[i], channels, use_books));
      train_labels.push_back(labels[i]);
    }

    SvmModel model;
    int majority = 0;
    if (cfg.kind == ClassifierKind::svm) {
      model = train_svm(train_hist, train_labels, cfg.svm_c, mix_seed(fold_seed, 3), 1);
      model.channels = channels;
    } else if (cfg.kind == ClassifierKind::majority) {
      majority = majority_label(train_labels);
    }

    FoldResult& out = fold_out[f];
    out.confusion.assign(nl * nl, 0);
    size_t correct = 0;
    for (size_t i : test_idx) {
      const std::vector<float> hist = fused_histogram(*videos[i], channels, use_books);
      int predicted = majority;
      if (cfg.kind == ClassifierKind::svm) {
        predicted = svm_predict(model, hist);
      } else if (cfg.kind == ClassifierKind::knn) {
        predicted = knn_predict(train_hist, train_labels, hist, cfg.knn_k);
      }
      const int ti = label_index(report.labels, labels[i]);
      const int pi = label_index(report.labels, predicted);
      ++out.confusion[size_t(ti) * nl + size_t(pi)];
      if (predicted == labels[i]) ++correct;
    }
    out.accuracy = test_idx.empty() ? 0.0 : double(correct) / double(test_idx.size());
  });

  report.fold_accuracy.resize(folds);
  report.confusion.assign(nl, std::vector<int64_t>(nl, 0));
  double acc_sum = 0.0;
  int64_t trace = 0;
  int64_t total = 0;
  for (size_t f = 0; f < folds; ++f) {
    report.fold_accuracy[f] = fold_out[f].accuracy;
    acc_sum += fold_out[f].accuracy;
    for (size_t r = 0; r < nl; ++r)
      for (size_t c = 0; c < nl; ++c) report.confusion[r][c] += fold_out[f].confusion[r * nl + c];
  }
  for (size_t r = 0; r < nl; ++r)
    for (size_t c = 0; c < nl; ++c) {
      total += report.confusion[r][c];
      if (r == c) trace += report.confusion[r][c];
    }
  report.mean_accuracy = acc_sum / double(folds);
  report.pooled_accuracy = total > 0 ? double(trace) / double(total) : 0.0;
  report.per_class_accuracy.assign(nl, 0.0);
  for (size_t r = 0; r < nl; ++r) {
    int64_t row_sum = 0;
    for (size_t c = 0; c < nl; ++c) row_sum += report.confusion[r][c];
    if (row_sum > 0)
      report.per_class_accuracy[r] = double(report.confusion[r][r]) / double(row_sum);
  }
  return report;
}

}  // namespace evhar
