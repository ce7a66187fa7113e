// Stream generators and IDX I/O.

#include "osp/envs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "osp/rng.hpp"

namespace osp {

LabeledStream synth_multiclass(int num_classes, int n_prime, double noise_rate, long horizon,
                               std::uint64_t seed) {
  if (num_classes < 2 || n_prime < 1) throw ConfigError("synth_multiclass: bad parameters");
  if (noise_rate < 0.0 || noise_rate > 1.0) throw ConfigError("noise rate must lie in [0, 1]");
  const int sig_len = 10 * n_prime;
  const int noise_len = 30 * n_prime;
  const int noise_ones = 5 * n_prime;
  Rng rng(seed);

  std::vector<std::vector<std::uint64_t>> signatures(num_classes);
  for (int k = 0; k < num_classes; ++k) {
    std::uint64_t ones = n_prime + rng.next_below(4 * static_cast<std::uint64_t>(n_prime) + 1);
    signatures[k] = rng.sample_indices(sig_len, ones);
  }

  LabeledStream s;
  s.spec = make_multiclass(num_classes);
  s.name = "synth_multiclass";
  s.rx = std::sqrt(10.0 * n_prime);
  s.xs.reserve(horizon);
  s.labels.reserve(horizon);
  for (long t = 0; t < horizon; ++t) {
    std::uint64_t cls = rng.next_below(num_classes);
    Vector x = Vector::Zero(sig_len + noise_len);
    for (std::uint64_t i : signatures[cls]) x(static_cast<Eigen::Index>(i)) = 1.0;
    for (std::uint64_t i : rng.sample_indices(noise_len, noise_ones))
      x(sig_len + static_cast<Eigen::Index>(i)) = 1.0;
    std::uint64_t label = cls;
    if (noise_rate > 0.0 && rng.bernoulli(noise_rate)) label = rng.next_below(num_classes);
    s.xs.push_back(std::move(x));
    s.labels.push_back(label);
  }
  return s;
}

LabeledStream synth_multilabel(int d, int m, int n, long horizon, std::uint64_t seed) {
  if (n < 1) throw ConfigError("synth_multilabel: bad input dimension");
  StructureSpec spec = make_multilabel(d, m);
  Rng rng(seed);

  Matrix prototypes(d, n);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < n; ++j) prototypes(k, j) = rng.next_double(-1.0, 1.0);
    prototypes.row(k) /= prototypes.row(k).norm();
  }
  const double threshold = 0.25;
  const long max_attempts = 1000000;

  LabeledStream s;
  s.spec = spec;
  s.name = "synth_multilabel";
  s.rx = 1.0;
  s.xs.reserve(horizon);
  s.labels.reserve(horizon);
  long attempts = 0;
  for (long t = 0; t < horizon; ++t) {
    for (;;) {
      if (++attempts > max_attempts)
        throw ConfigError("synth_multilabel: rejection sampling exceeded 1e6 attempts");
      std::vector<std::uint64_t> active = rng.sample_indices(d, m);
      Vector x = Vector::Zero(n);
      for (std::uint64_t k : active)
        x += (0.5 + 0.5 * rng.next_double()) * prototypes.row(static_cast<int>(k)).transpose();
      for (int j = 0; j < n; ++j) x(j) += 0.1 * rng.next_double(-1.0, 1.0);
      x /= x.norm();
      std::vector<int> positive;
      for (int k = 0; k < d; ++k)
        if (prototypes.row(k).dot(x) > threshold) positive.push_back(k);
      if (static_cast<int>(positive.size()) != m) continue;
      VertexId label = subset_rank(d, positive);
      s.xs.push_back(std::move(x));
      s.labels.push_back(flip_vertex(spec, label));
      break;
    }
  }
  return s;
}

LabeledStream separable_stream(const StructureSpec& spec, int n, double margin, long horizon,
                               std::uint64_t seed) {
  if (n < spec.d) throw ConfigError("separable_stream requires n >= d");
  if (margin <= 0.0) throw ConfigError("separable_stream requires margin > 0");
  Rng rng(seed);
  double beta = 1.0;
  if (spec.kind != StructureKind::Multiclass) beta = std::sqrt(static_cast<double>(spec.m));

  LabeledStream s;
  s.spec = spec;
  s.name = "separable";
  s.rx = 1.0;
  Matrix u = Matrix::Zero(spec.d, n);
  u.leftCols(spec.d) = margin * beta * Matrix::Identity(spec.d, spec.d);
  s.u_star = u;
  s.planted_margin = margin;
  s.xs.reserve(horizon);
  s.labels.reserve(horizon);
  for (long t = 0; t < horizon; ++t) {
    VertexId v = sample_uniform(spec, rng);
    Vector x = Vector::Zero(n);
    x.head(spec.d) = embed(spec, v) / beta;
    s.xs.push_back(std::move(x));
    s.labels.push_back(v);
  }
  return s;
}

namespace {

std::uint32_t read_be32(std::istream& in) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ConfigError("truncated IDX file");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  std::uint8_t b[4] = {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8),
                       std::uint8_t(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::vector<std::vector<std::uint8_t>> read_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  if (read_be32(in) != 2051) throw ConfigError("bad IDX image magic in " + path);
  std::uint32_t count = read_be32(in), h = read_be32(in), w = read_be32(in);
  std::vector<std::vector<std::uint8_t>> rows(count, std::vector<std::uint8_t>(h * w));
  for (auto& r : rows) {
    in.read(reinterpret_cast<char*>(r.data()), static_cast<std::streamsize>(r.size()));
    if (!in) throw ConfigError("truncated IDX file " + path);
  }
  return rows;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  if (read_be32(in) != 2049) throw ConfigError("bad IDX label magic in " + path);
  std::uint32_t count = read_be32(in);
  std::vector<std::uint8_t> labels(count);
  in.read(reinterpret_cast<char*>(labels.data()), count);
  if (!in) throw ConfigError("truncated IDX file " + path);
  return labels;
}

void write_idx_images(const std::string& path, const std::vector<std::vector<std::uint8_t>>& rows,
                      int height, int width) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path);
  write_be32(out, 2051);
  write_be32(out, static_cast<std::uint32_t>(rows.size()));
  write_be32(out, static_cast<std::uint32_t>(height));
  write_be32(out, static_cast<std::uint32_t>(width));
  for (const auto& r : rows)
    out.write(reinterpret_cast<const char*>(r.data()), static_cast<std::streamsize>(r.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path);
  write_be32(out, 2049);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

LabeledStream mnist_stream(const std::string& images_path, const std::string& labels_path,
                           long horizon, std::uint64_t seed) {
  auto images = read_idx_images(images_path);
  auto labels = read_idx_labels(labels_path);
  if (images.size() != labels.size()) throw ConfigError("IDX image/label count mismatch");
  Rng rng(seed);
  std::vector<std::uint64_t> order = rng.sample_indices(images.size(), images.size());

  LabeledStream s;
  s.spec = make_multiclass(10);
  s.name = "mnist";
  long n = std::min<long>(horizon, static_cast<long>(images.size()));
  double rx = 0.0;
  s.xs.reserve(n);
  s.labels.reserve(n);
  for (long i = 0; i < n; ++i) {
    const auto& img = images[order[i]];
    Vector x(img.size());
    for (size_t j = 0; j < img.size(); ++j) x(static_cast<Eigen::Index>(j)) = img[j] / 255.0;
    rx = std::max(rx, x.norm());
    std::uint8_t lab = labels[order[i]];
    if (lab > 9) throw ConfigError("MNIST label out of range");
    s.xs.push_back(std::move(x));
    s.labels.push_back(lab);
  }
  s.rx = rx;
  return s;
}

}  // namespace osp
