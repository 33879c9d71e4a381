#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ksot {

using Point = Eigen::VectorXd;
using PointList = std::vector<Point>;

}  // namespace ksot
