#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Core>

#include "cgs/geometry.hpp"
#include "cgs/series.hpp"

namespace cgs {

struct LorenzParams {
  double s = 10.0;
  double r = 28.0;
  double b = 8.0 / 3.0;
  Eigen::Vector3d x0{1.0, 1.0, 1.0};
  double dt = 0.005;
  double t_end = 75.0;
  /// Integrated and discarded before t = 0.
  double transient = 10.0;
};

struct LorenzTrajectory {
  Eigen::VectorXd t;
  /// One state (x, y, z) per row.
  Eigen::Matrix<double, Eigen::Dynamic, 3> states;
  /// x component as a series with the integration step as dt.
  TimeSeries x;
};

Eigen::Vector3d lorenz_field(const LorenzParams& p, const Eigen::Vector3d& v);

/// Fixed-step classic RK4 over [0, t_end], floor(t_end/dt) + 1 states.
/// Throws NumericalError naming the step at which the state stops being finite.
LorenzTrajectory lorenz_trajectory(const LorenzParams& p);

/// CSV with header t,x,y,z and 9 significant digits.
void write_trajectory_csv(std::ostream& out, const LorenzTrajectory& traj);

/// n points with x, y uniform on [-1, 1] and z = x^2 + y^2. Uniforms come
/// from std::mt19937_64 as (u >> 11) * 2^-53 so clouds match on every platform.
PointCloud paraboloid_sample(std::size_t n, std::uint64_t seed);

}  // namespace cgs
