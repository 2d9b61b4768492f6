#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace cglkit {

// Row-major so that operator rows are contiguous for the SIMD kernels.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

}  // namespace cglkit
