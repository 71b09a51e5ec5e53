#pragma once

#include "repsim/core/embedding.hpp"
#include "repsim/numeric.hpp"

#include <vector>

namespace repsim {

/// Representational dissimilarity matrix with D[i,j] = 1 - pearson(z_i, z_j).
/// Zero diagonal, exactly symmetric, entries clamped to [0, 2].
Matrix rdm_pearson(const EmbeddingMatrix& z);

/// Strict lower triangle of rdm_pearson(z) in row-major order
/// ((1,0), (2,0), (2,1), (3,0), ...), without materializing the n x n matrix.
std::vector<double> rdm_lower_triangle(const EmbeddingMatrix& z);

/// Spearman correlation between the two RDM triangles.
double rsa_spearman(const EmbeddingMatrix& zx, const EmbeddingMatrix& zy);

namespace detail {

/// Rows centered and scaled to unit norm, so that u_i . u_j is the Pearson
/// correlation between stimuli i and j. Throws ConstantRow /
/// RepresentationTooNarrow.
Matrix standardized_rows(const Matrix& data);

/// Throws ConstantRdm if the triangle holds fewer than two distinct values.
void require_nonconstant_triangle(const std::vector<double>& triangle);

}  // namespace detail

}  // namespace repsim
