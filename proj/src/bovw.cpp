#include "bovw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "event_stream.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace evhar {

namespace {

double dist2(const float* x, const double* c, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) {
    double diff = double(x[i]) - c[i];
    s += diff * diff;
  }
  return s;
}

// Strict less keeps the lowest index on exact ties.
int nearest(const float* x, const std::vector<double>& cent, int k, int d, double* best_out) {
  int best = 0;
  double best_d = dist2(x, cent.data(), d);
  for (int c = 1; c < k; ++c) {
    double dd = dist2(x, cent.data() + size_t(c) * d, d);
    if (dd < best_d) {
      best_d = dd;
      best = c;
    }
  }
  if (best_out) *best_out = best_d;
  return best;
}

}  // namespace

DescriptorSet sample_training_features(const std::vector<const DescriptorSet*>& per_video,
                                       uint64_t budget, uint64_t seed) {
  int d = 0;
  bool any = false;
  for (const DescriptorSet* v : per_video) {
    if (v->count() == 0) continue;
    if (!any) {
      d = v->dim;
      any = true;
    } else if (v->dim != d) {
      fail(ErrorCode::dimension_mismatch, "videos carry descriptors of different lengths");
    }
  }
  if (!any) fail(ErrorCode::no_features, "no video produced any features");

  const uint64_t n = per_video.size();
  const uint64_t quota = budget / n;
  const uint64_t remainder = budget % n;

  DescriptorSet out;
  out.dim = d;
  Rng rng(seed);
  for (uint64_t vi = 0; vi < n; ++vi) {
    const DescriptorSet& set = *per_video[vi];
    const size_t have = set.count();
    const uint64_t want = quota + (vi < remainder ? 1 : 0);
    if (have <= want) {
      out.data.insert(out.data.end(), set.data.begin(), set.data.end());
      continue;
    }
    // partial Fisher-Yates: the first `want` slots are a uniform subset
    std::vector<uint32_t> idx(have);
    std::iota(idx.begin(), idx.end(), 0u);
    for (uint64_t j = 0; j < want; ++j) {
      size_t pick = size_t(j) + size_t(rng.bounded(have - j));
      std::swap(idx[size_t(j)], idx[pick]);
      out.append(set.row(idx[size_t(j)]));
    }
  }
  return out;
}

Codebook train_codebook(const DescriptorSet& feats, int k, uint64_t seed, Channel kind,
                        int workers) {
  if (k < 1) fail(ErrorCode::config, "codebook size must be >= 1");
  const size_t n = feats.count();
  const int d = feats.dim;
  if (n < size_t(k)) fail(ErrorCode::too_few_samples, "fewer samples than clusters");

  Codebook cb;
  cb.kind = kind;
  cb.k = k;
  cb.d = d;
  cb.seed = seed;
  cb.centroids.assign(size_t(k) * size_t(d), 0.0);

  Rng rng(seed);
  auto set_centroid = [&](int c, size_t i) {
    const float* src = feats.row(i);
    double* dst = cb.centroids.data() + size_t(c) * d;
    for (int j = 0; j < d; ++j) dst[j] = src[j];
  };

  // k-means++: each new centroid drawn with probability proportional to the
  // squared distance from the ones already chosen
  set_centroid(0, size_t(rng.bounded(n)));
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    const double* last = cb.centroids.data() + size_t(c - 1) * d;
    parallel_for(n, workers, [&](size_t i) {
      double dd = dist2(feats.row(i), last, d);
      if (c == 1 || dd < d2[i]) d2[i] = dd;
    });
    double total = 0;
    for (double v : d2) total += v;
    size_t pick = n - 1;
    if (total > 0) {
      double r = rng.uniform() * total;
      double cum = 0;
      for (size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = size_t(rng.bounded(n));  // all duplicates of chosen centroids
    }
    set_centroid(c, pick);
  }

  std::vector<uint32_t> assign(n), prev;
  std::vector<double> point_d2(n);
  std::vector<double> sums(size_t(k) * size_t(d));
  std::vector<size_t> counts(size_t(k), 0);
  for (int iter = 0; iter < 100; ++iter) {
    parallel_for(n, workers, [&](size_t i) {
      assign[i] = uint32_t(nearest(feats.row(i), cb.centroids, k, d, &point_d2[i]));
    });
    double obj = 0;
    for (double v : point_d2) obj += v;
    cb.objective.push_back(obj);
    if (assign == prev) break;
    prev = assign;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0u);
    for (size_t i = 0; i < n; ++i) {
      const float* x = feats.row(i);
      double* s = sums.data() + size_t(assign[i]) * d;
      for (int j = 0; j < d; ++j) s[j] += x[j];
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[size_t(c)] == 0) continue;
      double inv = 1.0 / double(counts[size_t(c)]);
      double* dst = cb.centroids.data() + size_t(c) * d;
      const double* s = sums.data() + size_t(c) * d;
      for (int j = 0; j < d; ++j) dst[j] = s[j] * inv;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[size_t(c)] != 0) continue;
      size_t far = 0;
      for (size_t i = 1; i < n; ++i)
        if (point_d2[i] > point_d2[far]) far = i;
      set_centroid(c, far);
      assign[far] = uint32_t(c);  // taking the point empties nothing else
      point_d2[far] = 0;
    }
  }
  return cb;
}

std::vector<float> encode_video(const DescriptorSet& desc, const Codebook& cb) {
  if (desc.count() > 0 && desc.dim != cb.d)
    fail(ErrorCode::dimension_mismatch, "descriptor length does not match the codebook");
  std::vector<float> hist(size_t(cb.k), 0.f);
  const size_t n = desc.count();
  if (n == 0) return hist;
  std::vector<double> counts(size_t(cb.k), 0.0);
  for (size_t i = 0; i < n; ++i)
    counts[size_t(nearest(desc.row(i), cb.centroids, cb.k, cb.d, nullptr))] += 1.0;
  double n2 = 0;
  for (double v : counts) n2 += v * v;
  double inv = 1.0 / std::sqrt(n2);
  for (size_t i = 0; i < counts.size(); ++i) hist[i] = float(counts[i] * inv);
  return hist;
}

std::vector<float> fuse(const std::vector<std::vector<float>>& parts) {
  if (parts.empty()) fail(ErrorCode::invalid_argument, "nothing to fuse");
  std::vector<float> out;
  size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::string codebook_to_json(const Codebook& cb) {
  nlohmann::json j;
  j["version"] = 1;
  j["kind"] = channel_name(cb.kind);
  j["k"] = cb.k;
  j["d"] = cb.d;
  j["seed"] = cb.seed;
  j["centroids"] = cb.centroids;
  return j.dump();
}

Codebook codebook_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::config, "codebook file is not valid JSON");
  try {
    if (j.at("version").get<int>() != 1) fail(ErrorCode::config, "unknown codebook version");
    Codebook cb;
    cb.kind = parse_channel(j.at("kind").get<std::string>());
    cb.k = j.at("k").get<int>();
    cb.d = j.at("d").get<int>();
    cb.seed = j.at("seed").get<uint64_t>();
    cb.centroids = j.at("centroids").get<std::vector<double>>();
    if (cb.k < 1 || cb.d < 1 ||
        cb.centroids.size() != size_t(cb.k) * size_t(cb.d))
      fail(ErrorCode::config, "codebook geometry is inconsistent");
    for (double v : cb.centroids)
      if (!std::isfinite(v)) fail(ErrorCode::config, "codebook holds non-finite values");
    return cb;
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::config, "codebook file is missing required fields");
  }
}

void save_codebook(const std::string& path, const Codebook& cb) {
  write_binary_file(path, codebook_to_json(cb));
}

Codebook load_codebook(const std::string& path) {
  return codebook_from_json(read_binary_file(path));
}

}  // namespace evhar
