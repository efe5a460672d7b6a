#pragma once

#include "cogom/linalg.hpp"

#include <cstddef>
#include <vector>

namespace cogom {

/// Row indices of the K estimated pure subjects, in pick order.
struct PureSubjectSet {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
};

/// Successive projection: take the row of largest l2 norm, deflate every row
/// against its direction, repeat K times. Ties go to the lowest row index.
PureSubjectSet successive_projection(const DenseMatrix& u, std::size_t k);

/// Euclidean projection onto {w >= 0, sum w = 1}, sort-based threshold search
/// (stable sort, so ties are reproducible).
Vector project_to_simplex(const Vector& v);

/// Rows of U * inv(U[S, :]), each projected onto the simplex. Column k of the
/// result corresponds to pure subject S[k].
DenseMatrix membership_from_vertices(const DenseMatrix& u, const PureSubjectSet& pure);

}  // namespace cogom
