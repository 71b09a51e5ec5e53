#pragma once

#include "repsim/core/embedding.hpp"
#include "repsim/core/kernel.hpp"
#include "repsim/core/measure.hpp"

#include <cstddef>

namespace repsim {

/// Biased HSIC estimator sum_ij Kc[i,j] Lc[i,j] / (n-1)^2 on centered Grams.
double hsic_biased(const GramMatrix& kc, const GramMatrix& lc);

/// CKA from two Gram matrices (centered here when needed), clamped to [0, 1].
/// Throws DegenerateRepresentation when either self-HSIC is <= 1e-30.
SimilarityValue cka_gram(const GramMatrix& k, const GramMatrix& l);

/// Linear CKA in O(n p^2): |Yc^T Xc|_F^2 / (|Xc^T Xc|_F |Yc^T Yc|_F).
SimilarityValue cka_linear_feature(const EmbeddingMatrix& zx, const EmbeddingMatrix& zy);

/// RBF CKA in two blocked passes with O(n * block) working memory. The
/// first pass accumulates kernel row means, the second the three centered
/// Frobenius products. Block sizes >= n behave as block = n.
SimilarityValue cka_rbf_streaming(const EmbeddingMatrix& zx, const EmbeddingMatrix& zy,
                                  const KernelSpec& spec, std::size_t block,
                                  const MedianOptions& median = {});

}  // namespace repsim
