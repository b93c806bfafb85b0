#pragma once

#include <Eigen/Dense>

namespace newtonmr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace newtonmr
