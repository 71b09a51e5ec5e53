#include "repsim/synthetic.hpp"

#include "repsim/error.hpp"

#include <cmath>
#include <numbers>

namespace repsim::synthetic {
namespace {

std::uint64_t hash_id(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : id) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace

double Gaussian::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - rng_.uniform();  // (0, 1]
  const double u2 = rng_.uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale) {
  Gaussian g(seed);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * g();
  return m;
}

SyntheticData generate(const DatasetSpec& dataset, const std::vector<ModelSpec>& models, std::uint64_t seed) {
  if (dataset.n == 0 || dataset.classes == 0 || dataset.latent_dim == 0)
    throw Error(Errc::InvalidArgument, "synthetic dataset needs n, classes and latent_dim > 0");
  std::vector<std::int64_t> labels(dataset.n);
  for (std::size_t i = 0; i < dataset.n; ++i) labels[i] = static_cast<std::int64_t>(i % dataset.classes);

  const Matrix centers =
      gaussian_matrix(dataset.classes, dataset.latent_dim, derive_seed(seed, 1), dataset.class_separation);
  Matrix latent = gaussian_matrix(dataset.n, dataset.latent_dim, derive_seed(seed, 2));
  for (std::size_t i = 0; i < dataset.n; ++i)
    latent.row(static_cast<Eigen::Index>(i)) += centers.row(labels[i]);

  SyntheticData out{LabelVector(std::move(labels), dataset.classes), latent, {}};
  for (const auto& spec : models) {
    const std::uint64_t ms = derive_seed(seed, hash_id(spec.id));
    const Matrix w = gaussian_matrix(dataset.latent_dim, spec.dim, derive_seed(ms, 1),
                                     1.0 / std::sqrt(static_cast<double>(dataset.latent_dim)));
    Matrix f = latent * w;
    f += gaussian_matrix(dataset.n, spec.dim, derive_seed(ms, 2), spec.noise);
    if (spec.nonlinear) f = f.array().tanh().matrix();
    out.features.push_back(std::move(f));
  }
  return out;
}

Blobs gaussian_blobs(std::size_t n, std::size_t dim, std::size_t classes, double separation, std::uint64_t seed) {
  if (n == 0 || dim == 0 || classes == 0) throw Error(Errc::InvalidArgument, "blobs need n, dim and classes > 0");
  const Matrix centers = gaussian_matrix(classes, dim, derive_seed(seed, 0), separation);
  Matrix x = gaussian_matrix(n, dim, derive_seed(seed, 1));
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::int64_t>(i % classes);
    x.row(static_cast<Eigen::Index>(i)) += centers.row(static_cast<Eigen::Index>(i % classes));
  }
  return {std::move(x), LabelVector(std::move(labels), classes)};
}

}  // namespace repsim::synthetic
