#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "classify.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace evhar;

namespace {

using Matrix = std::vector<std::vector<float>>;

void blob(Rng& rng, double cx, double cy, int count, int label, Matrix& x,
          std::vector<int>& y) {
  for (int i = 0; i < count; ++i) {
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double rad = 0.3 * rng.uniform();
    x.push_back({float(cx + rad * std::cos(ang)), float(cy + rad * std::sin(ang))});
    y.push_back(label);
  }
}

double binary_hinge(const SvmModel& m, size_t c, const Matrix& x, const std::vector<int>& y) {
  double h = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double s = m.biases[c];
    for (size_t j = 0; j < x[i].size(); ++j) s += m.weights[c][j] * double(x[i][j]);
    const double yb = y[i] == m.classes[c] ? 1.0 : -1.0;
    h += std::max(0.0, 1.0 - yb * s);
  }
  return h;
}

// Written against the declared neighbour rules, independently of the
// implementation: full sort by (distance, index), then votes with
// (count desc, mean distance asc, label asc).
int knn_oracle(const Matrix& x, const std::vector<int>& y, const std::vector<float>& q,
               int k) {
  struct Cand {
    double d2;
    size_t idx;
  };
  std::vector<Cand> all;
  for (size_t i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (size_t j = 0; j < q.size(); ++j) {
      const double df = double(x[i][j]) - double(q[j]);
      s += df * df;
    }
    all.push_back({s, i});
  }
  std::sort(all.begin(), all.end(), [](const Cand& a, const Cand& b) {
    return a.d2 != b.d2 ? a.d2 < b.d2 : a.idx < b.idx;
  });
  const size_t kk = std::min<size_t>(size_t(k), all.size());

  std::vector<int> labs;
  std::vector<size_t> cnt;
  std::vector<double> dsum;
  for (size_t i = 0; i < kk; ++i) {
    const int lab = y[all[i].idx];
    size_t pos = 0;
    while (pos < labs.size() && labs[pos] != lab) ++pos;
    if (pos == labs.size()) {
      labs.push_back(lab);
      cnt.push_back(0);
      dsum.push_back(0.0);
    }
    ++cnt[pos];
    dsum[pos] += std::sqrt(all[i].d2);
  }
  size_t best = 0;
  for (size_t p = 1; p < labs.size(); ++p) {
    const double mp = dsum[p] / double(cnt[p]);
    const double mb = dsum[best] / double(cnt[best]);
    if (cnt[p] > cnt[best] ||
        (cnt[p] == cnt[best] && (mp < mb || (mp == mb && labs[p] < labs[best]))))
      best = p;
  }
  return labs[best];
}

// Video whose descriptors sit near the `label`-th axis corner, so a small
// codebook separates the classes perfectly.
VideoFeatures corner_video(Channel ch, int dim, int label, uint64_t seed, int n_desc = 10) {
  VideoFeatures vf;
  DescriptorSet& set = vf.of(ch);
  set.dim = dim;
  Rng rng(seed);
  std::vector<float> row(size_t(dim), 0.f);
  for (int i = 0; i < n_desc; ++i) {
    for (int j = 0; j < dim; ++j) row[j] = float(rng.uniform() * 0.05);
    row[size_t(label)] += 1.f;
    set.append(row.data());
  }
  return vf;
}

}  // namespace

TEST_CASE("separable blobs train to zero loss and perfect accuracy") {
  Matrix x;
  std::vector<int> y;
  Rng rng(99);
  blob(rng, -2.0, 0.0, 20, 0, x, y);
  blob(rng, 2.0, 0.0, 20, 1, x, y);

  const SvmModel m = train_svm(x, y, 10.0, 7);
  REQUIRE(m.classes == std::vector<int>{0, 1});
  REQUIRE(m.weights.size() == 2);
  REQUIRE(m.weights[0].size() == 2);

  for (size_t i = 0; i < x.size(); ++i) CHECK(svm_predict(m, x[i]) == y[i]);
  for (size_t c = 0; c < 2; ++c) {
    CHECK(binary_hinge(m, c, x, y) <= 1e-3);
    CHECK((m.final_gap[c] <= 1e-3 || m.objective[c].size() == 1000));
    for (double w : m.weights[c]) CHECK(std::isfinite(w));
  }
}

TEST_CASE("svm objective trace is non-increasing") {
  Rng rng(5150);
  for (int inst = 0; inst < 20; ++inst) {
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
      std::vector<float> row(6);
      for (auto& v : row) v = float(rng.uniform(-1.0, 1.0));
      x.push_back(row);
      y.push_back(int(rng.bounded(3)));
    }
    if (*std::min_element(y.begin(), y.end()) == *std::max_element(y.begin(), y.end()))
      y[0] = (y[0] + 1) % 3;
    const SvmModel m = train_svm(x, y, 1.0, uint64_t(inst));
    for (const auto& trace : m.objective) {
      REQUIRE(!trace.empty());
      for (size_t t = 1; t < trace.size(); ++t) {
        const double slack = 1e-9 * std::max(1.0, std::abs(trace[t - 1]));
        CHECK(trace[t] <= trace[t - 1] + slack);
      }
    }
  }
}

TEST_CASE("points duplicated with both labels split the accuracy") {
  Matrix x;
  std::vector<int> y;
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    std::vector<float> p = {float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)),
                            float(rng.uniform(-1, 1))};
    x.push_back(p);
    y.push_back(0);
    x.push_back(p);
    y.push_back(1);
  }
  const SvmModel m = train_svm(x, y, 1.0, 11);
  int correct = 0;
  for (size_t i = 0; i < x.size(); ++i)
    if (svm_predict(m, x[i]) == y[i]) ++correct;
  CHECK(correct == 5);
}

TEST_CASE("svm input contract") {
  Matrix ok = {{1.f, 0.f}, {0.f, 1.f}};
  std::vector<int> y01 = {0, 1};

  CHECK(testutil::code_of([&] { train_svm({}, {}, 1.0, 0); }) == ErrorCode::empty_train_set);
  CHECK(testutil::code_of([&] { train_svm(ok, {0, 0}, 1.0, 0); }) == ErrorCode::single_class);
  CHECK(testutil::code_of([&] { train_svm({{0.f, 0.f}, {0.f, 0.f}}, y01, 1.0, 0); }) ==
        ErrorCode::degenerate_features);
  CHECK(testutil::code_of([&] { train_svm({{}, {}}, y01, 1.0, 0); }) ==
        ErrorCode::degenerate_features);
  CHECK(testutil::code_of([&] { train_svm({{1.f}, {0.f, 1.f}}, y01, 1.0, 0); }) ==
        ErrorCode::dimension_mismatch);
  CHECK(testutil::code_of([&] { train_svm(ok, {0}, 1.0, 0); }) == ErrorCode::invalid_argument);
  CHECK(testutil::code_of([&] { train_svm(ok, y01, 0.0, 0); }) == ErrorCode::config);
  CHECK(testutil::code_of([&] { train_svm(ok, y01, -4.0, 0); }) == ErrorCode::config);

  const SvmModel m = train_svm(ok, y01, 1.0, 0);
  CHECK(testutil::code_of([&] { svm_predict(m, {1.f, 2.f, 3.f}); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("prediction picks argmax and breaks ties low") {
  SvmModel m;
  m.dim = 1;
  m.classes = {0, 1, 2};
  m.weights = {{0.9}, {0.1}, {0.1}};
  m.biases = {0.0, 0.0, 0.0};
  std::vector<double> scores;
  CHECK(svm_predict(m, {1.f}, &scores) == 0);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] == doctest::Approx(0.9));
  CHECK(scores[1] == doctest::Approx(0.1));

  SvmModel tie;
  tie.dim = 2;
  tie.classes = {3, 7};
  tie.weights = {{0.0, 0.0}, {0.0, 0.0}};
  tie.biases = {0.5, 0.5};
  CHECK(svm_predict(tie, {1.f, -1.f}) == 3);
}

TEST_CASE("decisions are invariant to positive rescaling of the model") {
  Matrix x;
  std::vector<int> y;
  Rng rng(17);
  for (int i = 0; i < 30; ++i) {
    x.push_back({float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)),
                 float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))});
    y.push_back(int(rng.bounded(3)));
  }
  y[0] = 0;
  y[1] = 1;
  y[2] = 2;
  SvmModel m = train_svm(x, y, 1.0, 23);
  SvmModel scaled = m;
  for (auto& w : scaled.weights)
    for (auto& v : w) v *= 2.5;
  for (auto& b : scaled.biases) b *= 2.5;
  for (int q = 0; q < 50; ++q) {
    const std::vector<float> probe = {float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)),
                                      float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2))};
    CHECK(svm_predict(m, probe) == svm_predict(scaled, probe));
  }
}

TEST_CASE("svm training is deterministic and worker-count independent") {
  Matrix x;
  std::vector<int> y;
  Rng rng(31);
  for (int i = 0; i < 24; ++i) {
    x.push_back({float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))});
    y.push_back(i % 3);
  }
  const SvmModel a = train_svm(x, y, 1.0, 77, 1);
  const SvmModel b = train_svm(x, y, 1.0, 77, 4);
  const SvmModel c = train_svm(x, y, 1.0, 78, 1);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
  CHECK(a.objective == b.objective);
  CHECK(a.weights != c.weights);
}

TEST_CASE("model json round-trips bit-exactly") {
  Matrix x;
  std::vector<int> y;
  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    x.push_back({float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)),
                 float(rng.uniform(-1, 1))});
    y.push_back(i % 2 == 0 ? 4 : 9);
  }
  SvmModel m = train_svm(x, y, 2.5, 13);
  m.channels = {Channel::xy, Channel::mbh};
  m.class_names = {"four", "nine"};

  const SvmModel back = svm_from_json(svm_to_json(m));
  CHECK(back.classes == m.classes);
  CHECK(back.class_names == m.class_names);
  CHECK(back.dim == m.dim);
  CHECK(back.c_reg == m.c_reg);
  CHECK(back.channels == m.channels);
  CHECK(back.weights == m.weights);
  CHECK(back.biases == m.biases);

  const std::string path = "svm_roundtrip_test.json";
  save_svm(path, m);
  const SvmModel loaded = load_svm(path);
  CHECK(loaded.weights == m.weights);
  std::remove(path.c_str());
}

TEST_CASE("malformed model json reports config errors") {
  CHECK(testutil::code_of([] { svm_from_json("not json"); }) == ErrorCode::config);
  CHECK(testutil::code_of([] {
          svm_from_json(R"({"version":9,"C":1,"dim":1,"classes":[0,1],"channels":[],)"
                        R"("weights":[[1],[2]],"biases":[0,0]})");
        }) == ErrorCode::config);
  CHECK(testutil::code_of([] {
          svm_from_json(R"({"version":1,"C":1,"dim":1,"classes":[0,1],"channels":[],)"
                        R"("weights":[[1]],"biases":[0,0]})");
        }) == ErrorCode::config);
  CHECK(testutil::code_of([] {
          svm_from_json(R"({"version":1,"C":1,"dim":2,"classes":[0,1],"channels":[],)"
                        R"("weights":[[1],[2]],"biases":[0,0]})");
        }) == ErrorCode::config);
  CHECK(testutil::code_of([] {
          svm_from_json(R"({"version":1,"C":1,"dim":1,"classes":[1,0],"channels":[],)"
                        R"("weights":[[1],[2]],"biases":[0,0]})");
        }) == ErrorCode::config);
  CHECK(testutil::code_of([] {
          svm_from_json(R"({"version":1,"C":1,"dim":1,"classes":[0,1],"channels":[],)"
                        R"("weights":[[1],["x"]],"biases":[0,0]})");
        }) == ErrorCode::config);
  CHECK(testutil::code_of([] {
          svm_from_json(R"({"version":1,"C":1,"dim":1,"classes":[0,1]})");
        }) == ErrorCode::config);
}

TEST_CASE("knn handles exact hits and forced majorities") {
  const Matrix x = {{0.f, 0.f}, {1.f, 0.f}, {1.1f, 0.f}, {5.f, 5.f}};
  const std::vector<int> y = {2, 6, 6, 9};
  CHECK(knn_predict(x, y, {5.f, 5.f}, 1) == 9);
  CHECK(knn_predict(x, y, {0.9f, 0.f}, 3) == 6);
  CHECK(knn_predict(x, y, {0.f, 0.f}, 9) == 6);  // k larger than the set
}

TEST_CASE("knn vote ties prefer closer means then lower labels") {
  // votes 2-2, label 1 has the smaller mean distance
  const Matrix a = {{-1.f}, {4.f}, {2.f}, {-2.9f}};
  const std::vector<int> ya = {0, 0, 1, 1};
  CHECK(knn_predict(a, ya, {0.f}, 4) == 1);

  // symmetric distances, tie falls to the lower label
  const Matrix b = {{-1.f}, {1.f}};
  const std::vector<int> yb = {5, 2};
  CHECK(knn_predict(b, yb, {0.f}, 2) == 2);
}

TEST_CASE("knn matches the exhaustive oracle") {
  Rng rng(121);
  Matrix x;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    // integer coordinates force plenty of exact distance ties
    x.push_back({float(rng.bounded(4)), float(rng.bounded(4)), float(rng.bounded(4)),
                 float(rng.bounded(4))});
    y.push_back(int(rng.bounded(3)));
  }
  for (int q = 0; q < 40; ++q) {
    const std::vector<float> probe = {float(rng.bounded(4)), float(rng.bounded(4)),
                                      float(rng.bounded(4)), float(rng.bounded(4))};
    for (int k : {1, 3, 5, 7})
      CHECK(knn_predict(x, y, probe, k) == knn_oracle(x, y, probe, k));
  }
}

TEST_CASE("knn input contract") {
  CHECK(testutil::code_of([] { knn_predict({}, {}, {1.f}, 1); }) == ErrorCode::empty_train_set);
  CHECK(testutil::code_of([] { knn_predict({{1.f}}, {0}, {1.f}, 0); }) == ErrorCode::config);
  CHECK(testutil::code_of([] { knn_predict({{1.f}}, {0}, {1.f, 2.f}, 1); }) ==
        ErrorCode::dimension_mismatch);
  CHECK(testutil::code_of([] { knn_predict({{1.f}, {2.f}}, {0}, {1.f}, 1); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("classifier kind names round-trip") {
  for (ClassifierKind k : {ClassifierKind::svm, ClassifierKind::knn, ClassifierKind::majority})
    CHECK(parse_classifier_kind(classifier_kind_name(k)) == k);
  CHECK(testutil::code_of([] { parse_classifier_kind("forest"); }) == ErrorCode::config);
}

TEST_CASE("majority-stub cross validation matches the hand computation") {
  // group a carries labels {0,0,1}, group b {1,1,0}; the held-out fold is
  // always predicted as the other group's majority, so each fold gets 1/3.
  std::vector<VideoFeatures> store;
  std::vector<int> labels = {0, 0, 1, 1, 1, 0};
  std::vector<std::string> groups = {"a", "a", "a", "b", "b", "b"};
  for (size_t i = 0; i < labels.size(); ++i)
    store.push_back(corner_video(Channel::xy, 64, labels[i], 100 + i));
  std::vector<const VideoFeatures*> videos;
  for (const auto& v : store) videos.push_back(&v);

  ClassifierConfig cfg;
  cfg.kind = ClassifierKind::majority;
  cfg.kmeans_k = 2;
  cfg.sample_budget = 100;
  cfg.seed = 5;

  const EvalReport r = cross_validate(videos, labels, groups, {Channel::xy}, cfg);
  REQUIRE(r.fold_groups == std::vector<std::string>{"a", "b"});
  REQUIRE(r.fold_accuracy.size() == 2);
  CHECK(r.fold_accuracy[0] == doctest::Approx(1.0 / 3.0));
  CHECK(r.fold_accuracy[1] == doctest::Approx(1.0 / 3.0));
  CHECK(r.mean_accuracy == doctest::Approx(1.0 / 3.0));
  CHECK(r.pooled_accuracy == doctest::Approx(1.0 / 3.0));
  REQUIRE(r.labels == std::vector<int>{0, 1});
  CHECK(r.confusion == std::vector<std::vector<int64_t>>{{1, 2}, {2, 1}});
  CHECK(r.per_class_accuracy[0] == doctest::Approx(1.0 / 3.0));
  CHECK(r.per_class_accuracy[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("confusion trace over total equals pooled accuracy") {
  std::vector<VideoFeatures> store;
  std::vector<int> labels;
  std::vector<std::string> groups;
  Rng rng(404);
  for (int g = 0; g < 4; ++g)
    for (int i = 0; i < 3; ++i) {
      labels.push_back(int(rng.bounded(2)));
      groups.push_back("g" + std::to_string(g));
      store.push_back(corner_video(Channel::xy, 64, labels.back(), rng.next_u64()));
    }
  labels[0] = 0;
  labels[1] = 1;
  std::vector<const VideoFeatures*> videos;
  for (const auto& v : store) videos.push_back(&v);

  ClassifierConfig cfg;
  cfg.kind = ClassifierKind::knn;
  cfg.knn_k = 3;
  cfg.kmeans_k = 2;
  cfg.seed = 8;
  const EvalReport r = cross_validate(videos, labels, groups, {Channel::xy}, cfg);

  int64_t trace = 0, total = 0;
  for (size_t i = 0; i < r.confusion.size(); ++i)
    for (size_t j = 0; j < r.confusion[i].size(); ++j) {
      total += r.confusion[i][j];
      if (i == j) trace += r.confusion[i][j];
    }
  CHECK(total == int64_t(labels.size()));
  CHECK(r.pooled_accuracy == doctest::Approx(double(trace) / double(total)));
  double mean = 0;
  for (double a : r.fold_accuracy) mean += a;
  CHECK(r.mean_accuracy == doctest::Approx(mean / double(r.fold_accuracy.size())));
}

TEST_CASE("twelve groups produce twelve folds") {
  std::vector<VideoFeatures> store;
  std::vector<int> labels;
  std::vector<std::string> groups;
  for (int g = 0; g < 12; ++g)
    for (int c = 0; c < 2; ++c) {
      labels.push_back(c);
      groups.push_back(g < 10 ? "s0" + std::to_string(g) : "s" + std::to_string(g));
      store.push_back(corner_video(Channel::xy, 64, c, uint64_t(g * 2 + c)));
    }
  std::vector<const VideoFeatures*> videos;
  for (const auto& v : store) videos.push_back(&v);

  ClassifierConfig cfg;
  cfg.kind = ClassifierKind::majority;
  cfg.kmeans_k = 2;
  const EvalReport r = cross_validate(videos, labels, groups, {Channel::xy}, cfg);
  CHECK(r.fold_accuracy.size() == 12);
  CHECK(std::is_sorted(r.fold_groups.begin(), r.fold_groups.end()));
}

TEST_CASE("separable features evaluate perfectly under every classifier") {
  std::vector<VideoFeatures> store;
  std::vector<int> labels;
  std::vector<std::string> groups;
  uint64_t seed = 900;
  for (int g = 0; g < 4; ++g)
    for (int c = 0; c < 2; ++c)
      for (int rep = 0; rep < 2; ++rep) {
        labels.push_back(c);
        groups.push_back("grp" + std::to_string(g));
        store.push_back(corner_video(Channel::xy, 64, c, seed++));
      }
  std::vector<const VideoFeatures*> videos;
  for (const auto& v : store) videos.push_back(&v);

  ClassifierConfig cfg;
  cfg.kmeans_k = 2;
  cfg.seed = 21;

  cfg.kind = ClassifierKind::svm;
  CHECK(cross_validate(videos, labels, groups, {Channel::xy}, cfg).mean_accuracy ==
        doctest::Approx(1.0));

  cfg.kind = ClassifierKind::knn;
  cfg.knn_k = 3;
  CHECK(cross_validate(videos, labels, groups, {Channel::xy}, cfg).mean_accuracy ==
        doctest::Approx(1.0));

  cfg.kind = ClassifierKind::svm;
  cfg.shared_codebook = true;
  CHECK(cross_validate(videos, labels, groups, {Channel::xy}, cfg).mean_accuracy ==
        doctest::Approx(1.0));
}

TEST_CASE("fused channels feed one classifier") {
  std::vector<VideoFeatures> store;
  std::vector<int> labels;
  std::vector<std::string> groups;
  uint64_t seed = 50;
  for (int g = 0; g < 3; ++g)
    for (int c = 0; c < 2; ++c) {
      labels.push_back(c);
      groups.push_back("g" + std::to_string(g));
      VideoFeatures vf = corner_video(Channel::xy, 64, c, seed++);
      vf.of(Channel::mbh) = corner_video(Channel::mbh, 192, c, seed++).of(Channel::mbh);
      store.push_back(std::move(vf));
    }
  std::vector<const VideoFeatures*> videos;
  for (const auto& v : store) videos.push_back(&v);

  ClassifierConfig cfg;
  cfg.kmeans_k = 2;
  cfg.seed = 33;
  const EvalReport r =
      cross_validate(videos, labels, groups, {Channel::xy, Channel::mbh}, cfg);
  CHECK(r.mean_accuracy == doctest::Approx(1.0));
}

TEST_CASE("cross validation is deterministic and worker independent") {
  std::vector<VideoFeatures> store;
  std::vector<int> labels;
  std::vector<std::string> groups;
  Rng rng(747);
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 4; ++i) {
      labels.push_back(int(rng.bounded(2)));
      groups.push_back("g" + std::to_string(g));
      store.push_back(corner_video(Channel::xy, 64, labels.back(), rng.next_u64()));
    }
  labels[0] = 0;
  labels[1] = 1;
  std::vector<const VideoFeatures*> videos;
  for (const auto& v : store) videos.push_back(&v);

  ClassifierConfig cfg;
  cfg.kmeans_k = 2;
  cfg.seed = 19;
  cfg.workers = 1;
  const EvalReport a = cross_validate(videos, labels, groups, {Channel::xy}, cfg);
  const EvalReport b = cross_validate(videos, labels, groups, {Channel::xy}, cfg);
  cfg.workers = 4;
  const EvalReport c = cross_validate(videos, labels, groups, {Channel::xy}, cfg);
  CHECK(a.fold_accuracy == b.fold_accuracy);
  CHECK(a.confusion == b.confusion);
  CHECK(a.fold_accuracy == c.fold_accuracy);
  CHECK(a.confusion == c.confusion);
  CHECK(a.mean_accuracy == c.mean_accuracy);
}

TEST_CASE("cross validation input contract") {
  std::vector<VideoFeatures> store;
  store.push_back(corner_video(Channel::xy, 64, 0, 1));
  store.push_back(corner_video(Channel::xy, 64, 1, 2));
  std::vector<const VideoFeatures*> videos = {&store[0], &store[1]};
  ClassifierConfig cfg;
  cfg.kmeans_k = 2;

  CHECK(testutil::code_of([&] {
          cross_validate(videos, {0, 1}, {"a", ""}, {Channel::xy}, cfg);
        }) == ErrorCode::missing_group);
  CHECK(testutil::code_of([&] {
          cross_validate(videos, {0, 1}, {"a", "a"}, {Channel::xy}, cfg);
        }) == ErrorCode::missing_group);
  CHECK(testutil::code_of([&] {
          cross_validate(videos, {0}, {"a", "b"}, {Channel::xy}, cfg);
        }) == ErrorCode::invalid_argument);
  CHECK(testutil::code_of([&] { cross_validate(videos, {0, 1}, {"a", "b"}, {}, cfg); }) ==
        ErrorCode::invalid_argument);
  CHECK(testutil::code_of([&] { cross_validate({}, {}, {}, {Channel::xy}, cfg); }) ==
        ErrorCode::empty_train_set);
}
