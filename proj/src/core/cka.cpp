#include "repsim/core/cka.hpp"

#include "repsim/core/correlation.hpp"
#include "repsim/core/rsa.hpp"
#include "repsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace repsim {

namespace {

void require_same_n(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::DimensionMismatch,
                "representations have different stimulus counts (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
  }
}

double n_minus_one_sq(std::size_t n) {
  const double d = static_cast<double>(n) - 1.0;
  return d * d;
}

// Shared CKA normalisation. `cross`, `self_a`, `self_b` are unscaled sums;
// the degeneracy check is applied to the (n-1)^2-scaled self terms.
SimilarityValue finish_cka(double cross, double self_a, double self_b, std::size_t n,
                           const Measure& measure) {
  const double scale = n_minus_one_sq(n);
  if (!(self_a / scale > kMinSelfHsic) || !(self_b / scale > kMinSelfHsic)) {
    throw Error(Errc::DegenerateRepresentation,
                "self-HSIC <= 1e-30 (constant representation)");
  }
  const double raw = cross / std::sqrt(self_a * self_b);
  return {std::clamp(raw, 0.0, 1.0), raw, measure};
}

double frobenius_cross(const Matrix& a, const Matrix& b) {
  const Matrix m = a.transpose() * b;
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) acc.add(m(i, j) * m(i, j));
  }
  return acc.value();
}

// Orders two centered feature matrices canonically so that the cross term
// does not depend on argument order.
bool canonical_first(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) return a.cols() < b.cols();
  return !std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(),
                                       a.data() + a.size());
}

struct RbfSetup {
  Matrix centered;
  Vector sq_norms;
  double gamma = 0.0;
};

RbfSetup rbf_setup(const EmbeddingMatrix& z, double sigma_frac, const MedianOptions& median) {
  const double sigma = sigma_frac * median_pairwise_distance(z, median);
  RbfSetup s;
  s.centered = detail::column_centered(z.data());
  s.sq_norms = s.centered.rowwise().squaredNorm();
  s.gamma = 1.0 / (2.0 * sigma * sigma);
  return s;
}

std::size_t effective_block(std::size_t block, std::size_t n) {
  if (block == 0) throw Error(Errc::InvalidArgument, "block size must be positive");
  return std::min(block, n);
}

// Pass 1: kernel row means and grand mean, block by block.
detail::KernelRowStats rbf_row_stats(const RbfSetup& s, std::size_t block) {
  const Eigen::Index n = s.centered.rows();
  detail::KernelRowStats stats;
  stats.row_means.resize(n);
  Matrix rows;
  for (Eigen::Index r0 = 0; r0 < n; r0 += static_cast<Eigen::Index>(block)) {
    const Eigen::Index r1 = std::min<Eigen::Index>(n, r0 + static_cast<Eigen::Index>(block));
    detail::rbf_kernel_rows(s.centered, s.sq_norms, s.gamma, r0, r1, rows);
    for (Eigen::Index i = 0; i < r1 - r0; ++i) {
      stats.row_means(r0 + i) = detail::kernel_row_mean(rows.row(i).data(), n);
    }
  }
  stats.grand_mean = shifted_mean(
      std::span<const double>(stats.row_means.data(), static_cast<std::size_t>(n)));
  return stats;
}

// Pass 2 over one or two kernels. Accumulates in row-major order across
// blocks, so results do not depend on the block size beyond GEMM rounding.
struct CenteredSums {
  CompensatedSum aa;
  CompensatedSum bb;
  CompensatedSum ab;
};

enum class SumMode { SelfOnly, CrossOnly, All };

// Non-owning view of everything pass 2 needs for one kernel.
struct RbfView {
  const Matrix* centered;
  const Vector* sq_norms;
  double gamma;
  const Vector* row_means;
  double grand_mean;
};

void centered_pass(const RbfView& a, const RbfView* b, std::size_t block, SumMode mode,
                   CenteredSums& sums) {
  const Eigen::Index n = a.centered->rows();
  const Vector& ra = *a.row_means;
  Matrix ka;
  Matrix kb;
  for (Eigen::Index r0 = 0; r0 < n; r0 += static_cast<Eigen::Index>(block)) {
    const Eigen::Index r1 = std::min<Eigen::Index>(n, r0 + static_cast<Eigen::Index>(block));
    detail::rbf_kernel_rows(*a.centered, *a.sq_norms, a.gamma, r0, r1, ka);
    if (b != nullptr) detail::rbf_kernel_rows(*b->centered, *b->sq_norms, b->gamma, r0, r1, kb);
    for (Eigen::Index i = 0; i < r1 - r0; ++i) {
      const double rai = ra(r0 + i);
      const double rbi = b != nullptr ? (*b->row_means)(r0 + i) : 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double ca = detail::centered_entry(ka(i, j), rai, ra(j), a.grand_mean);
        if (mode != SumMode::CrossOnly) sums.aa.add(ca * ca);
        if (b == nullptr) continue;
        const double cb =
            detail::centered_entry(kb(i, j), rbi, (*b->row_means)(j), b->grand_mean);
        if (mode == SumMode::All) sums.bb.add(cb * cb);
        sums.ab.add(ca * cb);
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Measure

Measure Measure::parse(std::string_view text) {
  if (text == "cka_linear") return cka_linear();
  if (text == "rsa_spearman") return rsa_spearman();
  std::string_view rest;
  if (text.starts_with("cka_rbf(") && text.ends_with(")")) {
    rest = text.substr(8, text.size() - 9);
  } else if (text.starts_with("cka_rbf:")) {
    rest = text.substr(8);
  } else if (text.starts_with("cka_rbf_")) {
    rest = text.substr(8);
  } else {
    throw Error(Errc::InvalidArgument, "unknown measure '" + std::string(text) + "'");
  }
  double sigma = 0.0;
  auto res = std::from_chars(rest.data(), rest.data() + rest.size(), sigma);
  if (res.ec != std::errc{} || res.ptr != rest.data() + rest.size() || !(sigma > 0.0)) {
    throw Error(Errc::InvalidArgument, "bad rbf sigma fraction in '" + std::string(text) + "'");
  }
  return cka_rbf(sigma);
}

std::string Measure::name() const {
  switch (kind) {
    case Kind::CkaLinear: return "cka_linear";
    case Kind::CkaRbf: return "cka_rbf(" + format_double(sigma_frac) + ")";
    case Kind::RsaSpearman: return "rsa_spearman";
  }
  return "unknown";
}

std::string Measure::slug() const {
  if (kind == Kind::CkaRbf) return "cka_rbf_" + format_double(sigma_frac);
  return name();
}

// ---------------------------------------------------------------------------
// Gram-path CKA

double hsic_biased(const GramMatrix& kc, const GramMatrix& lc) {
  if (kc.data.rows() != lc.data.rows() || kc.data.cols() != lc.data.cols() ||
      kc.data.rows() != kc.data.cols()) {
    throw Error(Errc::DimensionMismatch, "HSIC operands must be square and of equal size");
  }
  if (!kc.centered || !lc.centered) {
    throw Error(Errc::InvalidArgument, "HSIC expects centered Gram matrices");
  }
  const Eigen::Index n = kc.data.rows();
  if (n < 2) throw Error(Errc::DimensionMismatch, "HSIC needs n >= 2");
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) acc.add(kc.data(i, j) * lc.data(i, j));
  }
  return acc.value() / n_minus_one_sq(static_cast<std::size_t>(n));
}

SimilarityValue cka_gram(const GramMatrix& k, const GramMatrix& l) {
  require_same_n(k.n(), l.n());
  const GramMatrix kc = k.centered ? k : center_gram(k);
  const GramMatrix lc = l.centered ? l : center_gram(l);
  const double scale = n_minus_one_sq(k.n());
  const double kk = hsic_biased(kc, kc) * scale;
  const double ll = hsic_biased(lc, lc) * scale;
  const double kl = hsic_biased(kc, lc) * scale;
  Measure measure = Measure::cka_linear();
  if (k.kernel.kind == KernelSpec::Kind::Rbf && l.kernel.kind == KernelSpec::Kind::Rbf &&
      k.kernel.sigma_frac == l.kernel.sigma_frac) {
    measure = Measure::cka_rbf(k.kernel.sigma_frac);
  }
  return finish_cka(kl, kk, ll, k.n(), measure);
}

SimilarityValue cka_linear_feature(const EmbeddingMatrix& zx, const EmbeddingMatrix& zy) {
  return similarity(Measure::cka_linear(), zx, zy);
}

SimilarityValue cka_rbf_streaming(const EmbeddingMatrix& zx, const EmbeddingMatrix& zy,
                                  const KernelSpec& spec, std::size_t block,
                                  const MedianOptions& median) {
  spec.validate();
  if (spec.kind != KernelSpec::Kind::Rbf) {
    throw Error(Errc::InvalidArgument, "cka_rbf_streaming requires an rbf kernel spec");
  }
  require_same_n(zx.n(), zy.n());
  const std::size_t b = effective_block(block, zx.n());
  const RbfSetup sx = rbf_setup(zx, spec.sigma_frac, median);
  const RbfSetup sy = rbf_setup(zy, spec.sigma_frac, median);
  const auto stats_x = rbf_row_stats(sx, b);
  const auto stats_y = rbf_row_stats(sy, b);
  const RbfView vx{&sx.centered, &sx.sq_norms, sx.gamma, &stats_x.row_means, stats_x.grand_mean};
  const RbfView vy{&sy.centered, &sy.sq_norms, sy.gamma, &stats_y.row_means, stats_y.grand_mean};
  CenteredSums sums;
  centered_pass(vx, &vy, b, SumMode::All, sums);
  return finish_cka(sums.ab.value(), sums.aa.value(), sums.bb.value(), zx.n(),
                    Measure::cka_rbf(spec.sigma_frac));
}

// ---------------------------------------------------------------------------
// Prepared representations

PreparedRepresentation prepare(const Measure& measure, const EmbeddingMatrix& z,
                               const MeasureOptions& options) {
  switch (measure.kind) {
    case Measure::Kind::CkaLinear: {
      LinearPrepared p;
      p.centered = detail::column_centered(z.data());
      p.self_frobenius = frobenius_cross(p.centered, p.centered);
      return {measure, z.n(), std::move(p)};
    }
    case Measure::Kind::CkaRbf: {
      KernelSpec::rbf(measure.sigma_frac).validate();
      const std::size_t block = effective_block(options.rbf_block, z.n());
      RbfSetup s = rbf_setup(z, measure.sigma_frac, options.median);
      auto stats = rbf_row_stats(s, block);
      const RbfView view{&s.centered, &s.sq_norms, s.gamma, &stats.row_means, stats.grand_mean};
      CenteredSums sums;
      centered_pass(view, nullptr, block, SumMode::SelfOnly, sums);
      RbfPrepared p;
      p.centered = std::move(s.centered);
      p.sq_norms = std::move(s.sq_norms);
      p.gamma = s.gamma;
      p.row_means = std::move(stats.row_means);
      p.grand_mean = stats.grand_mean;
      p.self_sum = sums.aa.value();
      p.block = block;
      return {measure, z.n(), std::move(p)};
    }
    case Measure::Kind::RsaSpearman: {
      if (z.n() < 3) throw Error(Errc::InvalidArgument, "RSA needs n >= 3 stimuli");
      auto tri = rdm_lower_triangle(z);
      detail::require_nonconstant_triangle(tri);
      RsaPrepared p;
      p.triangle_ranks = average_ranks(tri);
      return {measure, z.n(), std::move(p)};
    }
  }
  throw Error(Errc::InvalidArgument, "unknown measure kind");
}

SimilarityValue compare(const PreparedRepresentation& a, const PreparedRepresentation& b) {
  if (!(a.measure() == b.measure())) {
    throw Error(Errc::InvalidArgument, "prepared representations use different measures");
  }
  require_same_n(a.n(), b.n());
  const Measure& measure = a.measure();
  switch (measure.kind) {
    case Measure::Kind::CkaLinear: {
      const auto& pa = std::get<LinearPrepared>(a.payload());
      const auto& pb = std::get<LinearPrepared>(b.payload());
      const bool a_first = canonical_first(pa.centered, pb.centered);
      const double cross = a_first ? frobenius_cross(pa.centered, pb.centered)
                                   : frobenius_cross(pb.centered, pa.centered);
      return finish_cka(cross, pa.self_frobenius, pb.self_frobenius, a.n(), measure);
    }
    case Measure::Kind::CkaRbf: {
      const auto& pa = std::get<RbfPrepared>(a.payload());
      const auto& pb = std::get<RbfPrepared>(b.payload());
      const RbfView va{&pa.centered, &pa.sq_norms, pa.gamma, &pa.row_means, pa.grand_mean};
      const RbfView vb{&pb.centered, &pb.sq_norms, pb.gamma, &pb.row_means, pb.grand_mean};
      CenteredSums sums;
      centered_pass(va, &vb, std::min(pa.block, pb.block), SumMode::CrossOnly, sums);
      return finish_cka(sums.ab.value(), pa.self_sum, pb.self_sum, a.n(), measure);
    }
    case Measure::Kind::RsaSpearman: {
      const auto& pa = std::get<RsaPrepared>(a.payload());
      const auto& pb = std::get<RsaPrepared>(b.payload());
      const double r = pearson(pa.triangle_ranks, pb.triangle_ranks);
      return {r, r, measure};
    }
  }
  throw Error(Errc::InvalidArgument, "unknown measure kind");
}

SimilarityValue similarity(const Measure& measure, const EmbeddingMatrix& zx,
                           const EmbeddingMatrix& zy, const MeasureOptions& options) {
  require_same_n(zx.n(), zy.n());
  return compare(prepare(measure, zx, options), prepare(measure, zy, options));
}

}  // namespace repsim
