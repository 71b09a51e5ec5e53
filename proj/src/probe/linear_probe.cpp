#include "repsim/probe/linear_probe.hpp"

#include "repsim/error.hpp"
#include "repsim/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace repsim {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;

void check_labels(const Matrix& x, std::span<const std::int64_t> y, std::size_t classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw Error(Errc::DimensionMismatch, std::to_string(x.rows()) + " feature rows but " + std::to_string(y.size()) +
                                             " labels");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= classes)
      throw Error(Errc::OutOfDomain,
                  "label " + std::to_string(y[i]) + " at row " + std::to_string(i) + " is outside [0, " +
                      std::to_string(classes) + ")",
                  {i});
  }
}

// Adam moment buffers for one parameter block.
template <typename T>
struct Moments {
  T m, v;
  explicit Moments(const T& shape) : m(T::Zero(shape.rows(), shape.cols())), v(T::Zero(shape.rows(), shape.cols())) {}

  // Returns the Adam direction m_hat / (sqrt(v_hat) + eps).
  T direction(const T& g, double bc1, double bc2) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    return ((m / bc1).array() / ((v / bc2).array().sqrt() + kEpsilon)).matrix();
  }
};

}  // namespace

std::string ProbeHyperparams::describe() const {
  return "eta=" + format_double(learning_rate) + " lambda=" + format_double(weight_decay) +
         " epochs=" + std::to_string(epochs) + " batch=" + std::to_string(batch_size) +
         " seed=" + std::to_string(seed);
}

ProbeModel ProbeModel::zeros(std::size_t classes, std::size_t features) {
  return {Matrix::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(features)),
          Vector::Zero(static_cast<Eigen::Index>(classes))};
}

LossAndGrad probe_loss_and_grad(const ProbeModel& model, const Matrix& x, std::span<const std::int64_t> y) {
  check_labels(x, y, model.classes());
  if (x.cols() != model.weights.cols())
    throw Error(Errc::DimensionMismatch, "probe expects " + std::to_string(model.weights.cols()) +
                                             " features, got " + std::to_string(x.cols()));
  const Eigen::Index n = x.rows();
  LossAndGrad out;
  if (n == 0) {
    out.grad_weights = Matrix::Zero(model.weights.rows(), model.weights.cols());
    out.grad_bias = Vector::Zero(model.bias.size());
    return out;
  }
  Matrix logits = x * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();

  CompensatedSum loss;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = logits.row(i);
    const auto label = y[static_cast<std::size_t>(i)];
    const double top = row.maxCoeff();
    const double target = row(label) - top;
    row.array() = (row.array() - top).exp();
    const double z = row.sum();
    loss.add(std::log(z) - target);
    row /= z;
    row(label) -= 1.0;
  }
  // logits now holds softmax - onehot
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = loss.value() * inv_n;
  out.grad_weights = logits.transpose() * x * inv_n;
  out.grad_bias = logits.colwise().sum().transpose() * inv_n;
  return out;
}

double cosine_learning_rate(double eta, std::size_t step, std::size_t total_steps) noexcept {
  if (total_steps <= 1) return eta;
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps - 1);
  return 0.5 * eta * (1.0 + std::cos(std::numbers::pi * progress));
}

ProbeModel train_probe(const Matrix& x, std::span<const std::int64_t> y, const ProbeHyperparams& hp,
                       std::size_t classes) {
  if (classes == 0) throw Error(Errc::InvalidArgument, "probe needs at least one class");
  check_labels(x, y, classes);
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < classes)
    throw Error(Errc::TooFewSamples,
                std::to_string(n) + " training rows for " + std::to_string(classes) + " classes");
  if (!(hp.learning_rate > 0.0) || !(hp.weight_decay >= 0.0) || hp.epochs == 0 || hp.batch_size == 0)
    throw Error(Errc::InvalidArgument, "invalid probe hyperparameters: " + hp.describe());

  ProbeModel model = ProbeModel::zeros(classes, static_cast<std::size_t>(x.cols()));
  Moments<Matrix> mw(model.weights);
  Moments<Vector> mb(model.bias);

  const std::size_t batch = std::min(hp.batch_size, n);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t total = hp.epochs * steps_per_epoch;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Eigen::Index> rows;
  std::vector<std::int64_t> labels;
  Rng rng(hp.seed);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t begin = s * batch, end = std::min(n, begin + batch);
      rows.assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
      labels.resize(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) labels[k] = y[static_cast<std::size_t>(rows[k])];
      const Matrix xb = x(rows, Eigen::all);
      const LossAndGrad g = probe_loss_and_grad(model, xb, labels);
      if (!std::isfinite(g.loss) || !g.grad_weights.allFinite())
        throw Error(Errc::NonFiniteLoss, "probe training diverged at epoch " + std::to_string(epoch) + " step " +
                                             std::to_string(step) + " (" + hp.describe() + ")");

      const double lr = cosine_learning_rate(hp.learning_rate, step, total);
      ++step;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      model.weights *= 1.0 - lr * hp.weight_decay;
      model.weights -= lr * mw.direction(g.grad_weights, bc1, bc2);
      model.bias -= lr * mb.direction(g.grad_bias, bc1, bc2);
    }
  }
  if (!model.weights.allFinite() || !model.bias.allFinite())
    throw Error(Errc::NonFiniteLoss, "probe weights became non-finite (" + hp.describe() + ")");
  return model;
}

std::vector<std::int64_t> predict(const ProbeModel& model, const Matrix& x) {
  if (x.cols() != model.weights.cols())
    throw Error(Errc::DimensionMismatch, "probe expects " + std::to_string(model.weights.cols()) +
                                             " features, got " + std::to_string(x.cols()));
  Matrix logits = x * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  std::vector<std::int64_t> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

double evaluate_top1(const ProbeModel& model, const Matrix& x, std::span<const std::int64_t> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw Error(Errc::DimensionMismatch, std::to_string(x.rows()) + " feature rows but " + std::to_string(y.size()) +
                                             " labels");
  if (y.empty()) throw Error(Errc::EmptyDataset, "cannot evaluate a probe on zero rows");
  const auto pred = predict(model, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += pred[i] == y[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

}  // namespace repsim
