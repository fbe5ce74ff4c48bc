#include "docalign/pca.hpp"

#include <Eigen/Dense>

namespace docalign {

PcaModel fit_pca(const EmbeddingMatrix& sample, std::uint32_t output_dim) {
  const std::size_t n = sample.rows();
  const std::uint32_t d = sample.dim;
  if (output_dim == 0) throw InputError("fit_pca: output_dim must be >= 1");
  if (output_dim > d)
    throw InputError("fit_pca: output_dim " + std::to_string(output_dim) +
                     " exceeds input_dim " + std::to_string(d));
  if (n < output_dim)
    throw InputError("fit_pca: sample size " + std::to_string(n) +
                     " smaller than output_dim " + std::to_string(output_dim));

  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j) x(Eigen::Index(i), j) = sample.row(i)[j];

  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  const double divisor = n > 1 ? double(n - 1) : 1.0;
  Eigen::MatrixXd cov = (x.transpose() * x) / divisor;

  // Eigenvalues come out in increasing order; we keep the top output_dim.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("fit_pca: eigendecomposition failed");

  PcaModel model;
  model.input_dim = d;
  model.output_dim = output_dim;
  model.total_variance = cov.trace();
  model.mean.resize(d);
  for (std::uint32_t j = 0; j < d; ++j)
    model.mean[j] = static_cast<float>(mean(j));

  model.components.resize(std::size_t(output_dim) * d);
  model.eigenvalues.resize(output_dim);
  for (std::uint32_t k = 0; k < output_dim; ++k) {
    Eigen::Index col = Eigen::Index(d) - 1 - k;
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    // sign convention: first nonzero coordinate positive
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (v(j) != 0.0) {
        if (v(j) < 0.0) v = -v;
        break;
      }
    }
    model.eigenvalues[k] = solver.eigenvalues()(col);
    for (std::uint32_t j = 0; j < d; ++j)
      model.components[std::size_t(k) * d + j] = static_cast<float>(v(j));
  }
  return model;
}

EmbeddingMatrix apply_pca(const PcaModel& model, const EmbeddingMatrix& m) {
  if (m.dim != model.input_dim)
    throw InputError("apply_pca: matrix dim " + std::to_string(m.dim) +
                     " does not match model input_dim " +
                     std::to_string(model.input_dim));
  const std::size_t n = m.rows();
  const std::uint32_t din = model.input_dim;
  const std::uint32_t dout = model.output_dim;

  EmbeddingMatrix out;
  out.dim = dout;
  out.data.resize(n * std::size_t(dout));
  std::vector<double> centered(din);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = m.row(i);
    for (std::uint32_t j = 0; j < din; ++j)
      centered[j] = double(row[j]) - double(model.mean[j]);
    float* orow = out.row(i);
    for (std::uint32_t k = 0; k < dout; ++k) {
      const float* comp = model.components.data() + std::size_t(k) * din;
      double s = 0.0;
      for (std::uint32_t j = 0; j < din; ++j) s += centered[j] * double(comp[j]);
      orow[k] = static_cast<float>(s);
    }
  }
  return out;
}

}  // namespace docalign
