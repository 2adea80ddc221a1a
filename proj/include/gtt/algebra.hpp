#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gtt {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Linear RGB triple. Arrays rather than vectors so that products are
/// channel-wise.
template <typename Scalar>
using Rgb = Eigen::Array<Scalar, 3, 1>;

/// Row-major pixel storage: one row per pixel, one column per channel.
template <typename Scalar>
using PixelArray = Eigen::Array<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;

using Vector3d = Vector3<double>;
using Rgbd = Rgb<double>;

}  // namespace gtt
