#pragma once

#include "repsim/core/embedding.hpp"
#include "repsim/core/kernel.hpp"
#include "repsim/numeric.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace repsim {

struct Measure {
  enum class Kind { CkaLinear, CkaRbf, RsaSpearman };

  Kind kind = Kind::CkaLinear;
  double sigma_frac = 0.0;

  static Measure cka_linear() { return {Kind::CkaLinear, 0.0}; }
  static Measure cka_rbf(double sigma_frac) { return {Kind::CkaRbf, sigma_frac}; }
  static Measure rsa_spearman() { return {Kind::RsaSpearman, 0.0}; }

  /// Accepts "cka_linear", "rsa_spearman", "cka_rbf(0.2)" and "cka_rbf:0.2".
  static Measure parse(std::string_view text);

  /// "cka_linear", "cka_rbf(0.2)", "rsa_spearman".
  std::string name() const;
  /// File-system safe variant of name(): "cka_rbf_0.2".
  std::string slug() const;

  bool is_cka() const noexcept { return kind != Kind::RsaSpearman; }
  double lower_bound() const noexcept { return is_cka() ? 0.0 : -1.0; }

  friend bool operator==(const Measure&, const Measure&) = default;
};

struct SimilarityValue {
  /// Reported value; CKA is clamped to [0, 1].
  double value = 0.0;
  /// Unclamped value, kept for debugging.
  double raw = 0.0;
  Measure measure;
};

struct MeasureOptions {
  /// Rows per block in the streaming RBF path.
  std::size_t rbf_block = 256;
  MedianOptions median;
};

/// Per-model quantities that depend on one representation only. Preparing
/// each model once per dataset lets every pair reuse them.
struct LinearPrepared {
  Matrix centered;
  double self_frobenius = 0.0;  // |Xc^T Xc|_F^2
};

struct RbfPrepared {
  Matrix centered;
  Vector sq_norms;
  double gamma = 0.0;
  Vector row_means;
  double grand_mean = 0.0;
  double self_sum = 0.0;  // sum_ij Kc[i,j]^2
  std::size_t block = 0;
};

struct RsaPrepared {
  std::vector<double> triangle_ranks;
};

class PreparedRepresentation {
 public:
  using Payload = std::variant<LinearPrepared, RbfPrepared, RsaPrepared>;

  PreparedRepresentation(Measure measure, std::size_t n, Payload payload)
      : measure_(measure), n_(n), payload_(std::move(payload)) {}

  const Measure& measure() const noexcept { return measure_; }
  std::size_t n() const noexcept { return n_; }
  const Payload& payload() const noexcept { return payload_; }

 private:
  Measure measure_;
  std::size_t n_;
  Payload payload_;
};

PreparedRepresentation prepare(const Measure& measure, const EmbeddingMatrix& z,
                               const MeasureOptions& options = {});

/// Symmetric: compare(a, b) and compare(b, a) are bitwise identical.
SimilarityValue compare(const PreparedRepresentation& a, const PreparedRepresentation& b);

SimilarityValue similarity(const Measure& measure, const EmbeddingMatrix& zx,
                           const EmbeddingMatrix& zy, const MeasureOptions& options = {});

}  // namespace repsim
