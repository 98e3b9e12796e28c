#include "cgs/dynsys.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "cgs/error.hpp"

namespace cgs {

Eigen::Vector3d lorenz_field(const LorenzParams& p, const Eigen::Vector3d& v) {
  return {p.s * (v.y() - v.x()), p.r * v.x() - v.y() - v.x() * v.z(), v.x() * v.y() - p.b * v.z()};
}

namespace {

Eigen::Vector3d rk4_step(const LorenzParams& p, const Eigen::Vector3d& v, double h) {
  const Eigen::Vector3d k1 = lorenz_field(p, v);
  const Eigen::Vector3d k2 = lorenz_field(p, v + 0.5 * h * k1);
  const Eigen::Vector3d k3 = lorenz_field(p, v + 0.5 * h * k2);
  const Eigen::Vector3d k4 = lorenz_field(p, v + h * k3);
  return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

LorenzTrajectory lorenz_trajectory(const LorenzParams& p) {
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw InvalidArgument("lorenz: dt must be positive");
  if (!(p.t_end > p.dt) || !std::isfinite(p.t_end)) throw InvalidArgument("lorenz: t_end must exceed dt");
  if (!(p.transient >= 0.0)) throw InvalidArgument("lorenz: transient must be nonnegative");
  if (!p.x0.allFinite()) throw InvalidArgument("lorenz: initial state must be finite");

  // The small slack keeps 75 / 0.005 from rounding down to 14999.
  const auto steps = static_cast<Eigen::Index>(std::floor(p.t_end / p.dt + 1e-9));
  const auto warmup = static_cast<long>(std::llround(p.transient / p.dt));

  Eigen::Vector3d v = p.x0;
  for (long i = 0; i < warmup; ++i) {
    v = rk4_step(p, v, p.dt);
    if (!v.allFinite()) throw NumericalError("lorenz: state not finite at transient step " + std::to_string(i + 1));
  }

  LorenzTrajectory out;
  out.t.resize(steps + 1);
  out.states.resize(steps + 1, 3);
  out.states.row(0) = v.transpose();
  out.t[0] = 0.0;
  for (Eigen::Index i = 1; i <= steps; ++i) {
    v = rk4_step(p, v, p.dt);
    if (!v.allFinite()) throw NumericalError("lorenz: state not finite at step " + std::to_string(i));
    out.states.row(i) = v.transpose();
    out.t[i] = static_cast<double>(i) * p.dt;
  }
  out.x.samples = out.states.col(0);
  out.x.dt = p.dt;
  out.x.label = "lorenz_x";
  return out;
}

void write_trajectory_csv(std::ostream& out, const LorenzTrajectory& traj) {
  out << "t,x,y,z\n";
  char buf[128];
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
    const int len = std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n", traj.t[i], traj.states(i, 0),
                                  traj.states(i, 1), traj.states(i, 2));
    out.write(buf, len);
  }
}

PointCloud paraboloid_sample(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("paraboloid_sample: n must be at least 1");
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  PointCloud pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform();
    const double y = uniform();
    pts.emplace_back(x, y, x * x + y * y);
  }
  return pts;
}

}  // namespace cgs
