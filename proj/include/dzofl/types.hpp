#pragma once

#include <Eigen/Dense>

namespace dzofl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

} // namespace dzofl
