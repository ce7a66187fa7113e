#pragma once
// Labeled input streams: synthetic generators and an MNIST IDX reader.
// Streams are fully materialized up front and byte-reproducible from their
// seed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osp/structures.hpp"

namespace osp {

struct LabeledStream {
  std::string name;
  StructureSpec spec;
  std::vector<Vector> xs;
  std::vector<VertexId> labels;
  double rx = 0.0;                 // bound on max ||x_t||_2
  std::optional<Matrix> u_star;    // planted comparator, if any
  std::optional<double> planted_margin;

  long size() const { return static_cast<long>(xs.size()); }
  int input_dim() const { return xs.empty() ? 0 : static_cast<int>(xs[0].size()); }
};

// Signature-based multiclass stream: per-class binary signature of length
// 10*n_prime with Uniform{n_prime..5*n_prime} ones, followed by a 30*n_prime
// noise block with exactly 5*n_prime ones; labels flipped to a uniform class
// with probability noise_rate. Input dimension 40*n_prime.
LabeledStream synth_multiclass(int num_classes, int n_prime, double noise_rate, long horizon,
                               std::uint64_t seed);

// Prototype-mixture multilabel stream: d unit-norm prototypes in R^n; each
// sample mixes a random m-subset of them plus noise and is thresholded;
// rejection-sampled until exactly m labels are positive.
LabeledStream synth_multilabel(int d, int m, int n, long horizon, std::uint64_t seed);

// Realizable stream with planted U*: x_t is the normalized embedding of a
// uniform vertex (zero-padded to n >= d) and U* = margin * beta * [I 0] so
// theta_t = margin * embed(y_t); ||x_t||_2 = 1.
LabeledStream separable_stream(const StructureSpec& spec, int n, double margin, long horizon,
                               std::uint64_t seed);

// MNIST-format stream (IDX images magic 2051, labels magic 2049), pixels
// scaled to [0, 1], order shuffled by seed, truncated to horizon.
LabeledStream mnist_stream(const std::string& images_path, const std::string& labels_path,
                           long horizon, std::uint64_t seed);

// IDX, as used by MNIST: unsigned byte tensors with big-endian dims.
std::vector<std::vector<std::uint8_t>> read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const std::vector<std::vector<std::uint8_t>>& rows,
                      int height, int width);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

}  // namespace osp
