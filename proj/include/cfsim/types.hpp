// SPDX-License-Identifier: Apache-2.0

#ifndef CFSIM_TYPES_HPP
#define CFSIM_TYPES_HPP

#include <complex>

#include <Eigen/Dense>

namespace cfsim {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

}  // namespace cfsim

#endif
