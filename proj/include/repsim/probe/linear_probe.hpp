#pragma once

#include "repsim/numeric.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace repsim {

struct ProbeHyperparams {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  std::size_t epochs = 20;
  std::size_t batch_size = 1024;
  std::uint64_t seed = 0;

  std::string describe() const;
  bool operator==(const ProbeHyperparams&) const = default;
};

/// Multinomial logistic classifier: logits = X W^T + b.
struct ProbeModel {
  Matrix weights;  // C x p
  Vector bias;     // C

  static ProbeModel zeros(std::size_t classes, std::size_t features);
  std::size_t classes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
};

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad_weights;
  Vector grad_bias;
};

/// Mean softmax cross-entropy over the rows of X and its gradient. Weight
/// decay is not part of the loss; the optimizer applies it.
LossAndGrad probe_loss_and_grad(const ProbeModel& model, const Matrix& x, std::span<const std::int64_t> y);

/// Learning rate at step t of T under cosine decay from eta to 0.
double cosine_learning_rate(double eta, std::size_t step, std::size_t total_steps) noexcept;

/// AdamW (beta1 0.9, beta2 0.999, eps 1e-8, decay skips the bias) over
/// shuffled mini-batches. Rows of X are expected to be L2-normalized.
/// Throws NonFiniteLoss if training diverges, TooFewSamples if n < C.
ProbeModel train_probe(const Matrix& x, std::span<const std::int64_t> y, const ProbeHyperparams& hp,
                       std::size_t classes);

/// Argmax class per row; ties go to the smallest class index.
std::vector<std::int64_t> predict(const ProbeModel& model, const Matrix& x);

/// Fraction of rows whose argmax prediction equals the label.
double evaluate_top1(const ProbeModel& model, const Matrix& x, std::span<const std::int64_t> y);

}  // namespace repsim
