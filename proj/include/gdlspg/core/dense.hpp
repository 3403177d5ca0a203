#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gdlspg {

using Vector = std::vector<double>;

// Row-major dense matrix of doubles. Shape is fixed at construction.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const double& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { data_.assign(data_.size(), v); }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a^T * b without forming the transpose
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec_t(const DenseMatrix& a, std::span<const double> x);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace gdlspg
