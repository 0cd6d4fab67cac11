#include "core/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "core/errors.hpp"

namespace oodcl::data {

void SyntheticSpec::validate() const {
  if (n_classes < 2) throw ConfigError("synthetic spec: n_classes must be >= 2");
  if (input_dim < 2) throw ConfigError("synthetic spec: input_dim must be >= 2");
  if (!(cluster_spread > 0.0)) {
    throw ConfigError("synthetic spec: cluster_spread must be > 0");
  }
  if (!(cluster_separation > 0.0)) {
    throw ConfigError("synthetic spec: cluster_separation must be > 0");
  }
}

void AugmentSpec::validate() const {
  if (noise_std < 0.0 || scale_jitter < 0.0) {
    throw ConfigError("augment spec: noise and jitter must be >= 0");
  }
  if (views_per_sample < 2) {
    throw ConfigError("augment spec: views_per_sample must be >= 2");
  }
}

OodKind ood_kind_from_name(const std::string& name) {
  if (name == "shell") return OodKind::Shell;
  if (name == "uniform") return OodKind::Uniform;
  if (name == "heldout") return OodKind::HeldOutClusters;
  if (name == "interpolated") return OodKind::Interpolated;
  throw ConfigError("unknown OOD set kind '" + name +
                    "' (expected shell|uniform|heldout|interpolated)");
}

std::string ood_kind_name(OodKind kind) {
  switch (kind) {
    case OodKind::Shell: return "shell";
    case OodKind::Uniform: return "uniform";
    case OodKind::HeldOutClusters: return "heldout";
    case OodKind::Interpolated: return "interpolated";
  }
  return "unknown";
}

namespace {

constexpr int kPlacementAttempts = 1000;

vec::Vector unit_direction(std::size_t dim, rng::Engine& eng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  vec::Vector v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : v) {
      x = dist(eng);
      n2 += x * x;
    }
  } while (n2 < 1e-24);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Draws one mean on the separation sphere, at least `separation` away from
// every vector in `existing`.
vec::Vector place_mean(std::span<const vec::Vector> existing,
                       std::size_t dim, double separation, rng::Engine& eng) {
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    vec::Vector cand = unit_direction(dim, eng);
    for (double& x : cand) x *= separation;
    const bool ok = std::all_of(
        existing.begin(), existing.end(),
        [&](const vec::Vector& m) { return distance(cand, m) >= separation; });
    if (ok) return cand;
  }
  throw PlacementFailureError(
      "cluster mean placement failed after 1000 attempts");
}

std::vector<vec::Vector> id_means(const SyntheticSpec& spec) {
  auto eng = rng::make_engine(spec.seed, rng::salt::kMeans);
  std::vector<vec::Vector> means;
  means.reserve(spec.n_classes);
  for (std::size_t k = 0; k < spec.n_classes; ++k) {
    means.push_back(
        place_mean(means, spec.input_dim, spec.cluster_separation, eng));
  }
  return means;
}

Dataset sample_clusters(const std::vector<vec::Vector>& means,
                        std::size_t samples_per_class, double spread,
                        bool labeled, rng::Engine& eng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Dataset ds;
  ds.inputs.reserve(means.size() * samples_per_class);
  if (labeled) ds.labels.reserve(means.size() * samples_per_class);
  for (std::size_t k = 0; k < means.size(); ++k) {
    for (std::size_t s = 0; s < samples_per_class; ++s) {
      vec::Vector x = means[k];
      for (double& v : x) v += spread * dist(eng);
      ds.inputs.push_back(std::move(x));
      if (labeled) ds.labels.push_back(int(k));
    }
  }
  return ds;
}

}  // namespace

Dataset gen_id_dataset(const SyntheticSpec& spec) {
  spec.validate();
  const auto means = id_means(spec);
  auto eng = rng::make_engine(spec.seed, rng::salt::kSamples);
  Dataset ds = sample_clusters(means, spec.samples_per_class,
                               spec.cluster_spread, true, eng);
  ds.name = "id_train";
  return ds;
}

Dataset gen_id_testset(const SyntheticSpec& spec,
                       std::size_t samples_per_class) {
  spec.validate();
  const auto means = id_means(spec);
  auto eng = rng::make_engine(spec.seed, rng::salt::kTestSamples);
  Dataset ds =
      sample_clusters(means, samples_per_class, spec.cluster_spread, true, eng);
  ds.name = "id_test";
  return ds;
}

Dataset gen_ood_dataset(OodKind kind, const SyntheticSpec& spec,
                        std::uint64_t seed, std::size_t n_samples) {
  spec.validate();
  auto eng = rng::make_engine(seed, rng::salt::kOodData,
                              std::uint64_t(kind) + 1);
  Dataset ds;
  ds.name = "ood_" + ood_kind_name(kind);
  ds.inputs.reserve(n_samples);

  switch (kind) {
    case OodKind::Shell: {
      const Dataset id = gen_id_dataset(spec);
      double max_norm = 0.0;
      for (const auto& x : id.inputs) {
        max_norm = std::max(max_norm, vec::norm(x));
      }
      const double radius = 1.25 * max_norm;
      for (std::size_t i = 0; i < n_samples; ++i) {
        vec::Vector p = unit_direction(spec.input_dim, eng);
        for (double& v : p) v *= radius;
        ds.inputs.push_back(std::move(p));
      }
      break;
    }
    case OodKind::Uniform: {
      const Dataset id = gen_id_dataset(spec);
      vec::Vector lo(spec.input_dim, 0.0), hi(spec.input_dim, 0.0);
      for (std::size_t d = 0; d < spec.input_dim; ++d) {
        lo[d] = hi[d] = id.inputs[0][d];
      }
      for (const auto& x : id.inputs) {
        for (std::size_t d = 0; d < spec.input_dim; ++d) {
          lo[d] = std::min(lo[d], x[d]);
          hi[d] = std::max(hi[d], x[d]);
        }
      }
      for (std::size_t i = 0; i < n_samples; ++i) {
        vec::Vector p(spec.input_dim);
        for (std::size_t d = 0; d < spec.input_dim; ++d) {
          std::uniform_real_distribution<double> u(lo[d], hi[d]);
          p[d] = u(eng);
        }
        ds.inputs.push_back(std::move(p));
      }
      break;
    }
    case OodKind::HeldOutClusters: {
      std::vector<vec::Vector> taken = id_means(spec);
      const std::size_t n_id_means = taken.size();
      for (std::size_t k = 0; k < spec.n_classes; ++k) {
        taken.push_back(place_mean(taken, spec.input_dim,
                                   spec.cluster_separation, eng));
      }
      std::vector<vec::Vector> fresh(taken.begin() + n_id_means, taken.end());
      std::normal_distribution<double> dist(0.0, 1.0);
      for (std::size_t i = 0; i < n_samples; ++i) {
        vec::Vector x = fresh[i % fresh.size()];
        for (double& v : x) v += spec.cluster_spread * dist(eng);
        ds.inputs.push_back(std::move(x));
      }
      break;
    }
    case OodKind::Interpolated: {
      const Dataset id = gen_id_dataset(spec);
      std::uniform_int_distribution<std::size_t> pick(0, id.size() - 1);
      std::normal_distribution<double> dist(0.0, 1.0);
      const double noise = 0.5 * spec.cluster_spread;
      for (std::size_t i = 0; i < n_samples; ++i) {
        const std::size_t a = pick(eng);
        std::size_t b = pick(eng);
        while (id.labels[b] == id.labels[a]) b = pick(eng);
        vec::Vector p(spec.input_dim);
        for (std::size_t d = 0; d < spec.input_dim; ++d) {
          p[d] = 0.5 * (id.inputs[a][d] + id.inputs[b][d]) + noise * dist(eng);
        }
        ds.inputs.push_back(std::move(p));
      }
      break;
    }
  }
  return ds;
}

std::vector<vec::Vector> augment_views(std::span<const double> x,
                                       const AugmentSpec& aug,
                                       rng::Engine& eng) {
  aug.validate();
  std::vector<vec::Vector> views;
  views.reserve(aug.views_per_sample);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t v = 0; v < aug.views_per_sample; ++v) {
    double u = 0.0;
    if (aug.scale_jitter > 0.0) {
      std::uniform_real_distribution<double> jitter(-aug.scale_jitter,
                                                    aug.scale_jitter);
      u = jitter(eng);
    }
    vec::Vector view(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double eps = aug.noise_std > 0.0 ? aug.noise_std * noise(eng) : 0.0;
      view[d] = (1.0 + u) * x[d] + eps;
    }
    views.push_back(std::move(view));
  }
  return views;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  std::fprintf(f, "# dim=%zu labeled=%d n=%zu\n", ds.dim(),
               ds.labeled() ? 1 : 0, ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labeled()) std::fprintf(f, "%d,", ds.labels[i]);
    const auto& x = ds.inputs[i];
    for (std::size_t d = 0; d < x.size(); ++d) {
      std::fprintf(f, d + 1 < x.size() ? "%.17g," : "%.17g", x[d]);
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string header;
  if (!std::getline(in, header)) {
    throw ParseError(path.string() + ": missing header line");
  }
  std::size_t dim = 0, n = 0;
  int labeled = 0;
  if (std::sscanf(header.c_str(), "# dim=%zu labeled=%d n=%zu", &dim, &labeled,
                  &n) != 3 ||
      dim == 0) {
    throw ParseError(path.string() + ": malformed header '" + header + "'");
  }

  Dataset ds;
  ds.name = path.stem().string();
  ds.inputs.reserve(n);
  if (labeled) ds.labels.reserve(n);

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    const std::size_t expected = dim + (labeled ? 1 : 0);
    if (fields.size() != expected) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(expected) +
                       " columns, found " + std::to_string(fields.size()));
    }
    std::size_t idx = 0;
    if (labeled) {
      try {
        ds.labels.push_back(std::stoi(fields[idx]));
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": bad label '" + fields[idx] + "'");
      }
      ++idx;
    }
    vec::Vector x(dim);
    for (std::size_t d = 0; d < dim; ++d, ++idx) {
      char* end = nullptr;
      x[d] = std::strtod(fields[idx].c_str(), &end);
      if (end == fields[idx].c_str() || *end != '\0') {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": bad number '" + fields[idx] + "'");
      }
    }
    ds.inputs.push_back(std::move(x));
  }
  if (ds.inputs.size() != n) {
    throw ParseError(path.string() + ": header says n=" + std::to_string(n) +
                     " but found " + std::to_string(ds.inputs.size()) +
                     " rows");
  }
  return ds;
}

}  // namespace oodcl::data
