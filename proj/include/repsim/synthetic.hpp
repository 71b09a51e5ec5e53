#pragma once

#include "repsim/numeric.hpp"
#include "repsim/random.hpp"
#include "repsim/store/sampling.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace repsim::synthetic {

/// Standard normal draws from Rng via Box-Muller, so data is identical on
/// every platform.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()();

 private:
  Rng rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0);

struct ModelSpec {
  std::string id;
  std::size_t dim = 16;
  double noise = 0.1;  // std of the model-specific noise added to the projection
  bool nonlinear = false;  // apply tanh after projecting
};

struct DatasetSpec {
  std::size_t n = 500;
  std::size_t classes = 10;
  std::size_t latent_dim = 8;
  double class_separation = 3.0;  // std of class centers relative to unit within-class spread
};

struct SyntheticData {
  LabelVector labels;
  Matrix latent;
  std::vector<Matrix> features;  // parallel to the model specs
};

/// Labels cycle through the classes (balanced), the latent of row i is its
/// class center plus unit Gaussian noise, and model m sees
/// latent * W_m + noise_m * N(0, 1) with a fixed random W_m per model id
/// and seed.
SyntheticData generate(const DatasetSpec& dataset, const std::vector<ModelSpec>& models, std::uint64_t seed);

struct Blobs {
  Matrix features;
  LabelVector labels;
};

/// Classification data: row i has label i % classes and equals its class
/// center (entries N(0, separation^2)) plus N(0, 1) noise.
Blobs gaussian_blobs(std::size_t n, std::size_t dim, std::size_t classes, double separation, std::uint64_t seed);

}  // namespace repsim::synthetic
