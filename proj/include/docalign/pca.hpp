#ifndef DOCALIGN_PCA_HPP
#define DOCALIGN_PCA_HPP

#include <cstdint>
#include <vector>

#include "docalign/types.hpp"

namespace docalign {

// Centering-only PCA projection (no whitening). Components are stored
// row-major, one orthonormal direction per row, ordered by decreasing
// explained variance. Sign convention: the first nonzero coordinate of
// each component is positive.
struct PcaModel {
  std::uint32_t input_dim = 0;
  std::uint32_t output_dim = 0;
  std::vector<float> mean;        // input_dim
  std::vector<float> components;  // output_dim x input_dim

  // Eigenvalues of the sample covariance for the retained components and
  // the covariance trace. Available after fit_pca; not serialized.
  std::vector<double> eigenvalues;
  double total_variance = 0.0;

  double explained_variance_fraction(std::size_t i) const {
    return total_variance > 0.0 ? eigenvalues[i] / total_variance : 0.0;
  }
};

// Fits on `sample` (one row per vector). Requires sample.rows() >= output_dim
// and output_dim <= sample.dim.
PcaModel fit_pca(const EmbeddingMatrix& sample, std::uint32_t output_dim);

// rows_out = (rows_in - mean) * components^T.
EmbeddingMatrix apply_pca(const PcaModel& model, const EmbeddingMatrix& m);

}  // namespace docalign

#endif  // DOCALIGN_PCA_HPP
