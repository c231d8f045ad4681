#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "snakecpg/config.hpp"

// Planar articulated stand-in for the soft snake: a head, three rigid
// bodies and a tail joined by four pressure-driven bending links. Each rigid
// body rides on a wheel pair, so ground contact is anisotropic (cheap to roll
// along the body axis, expensive to slide sideways).
namespace snakecpg::sim {

inline constexpr std::size_t kLinks = 4;
inline constexpr std::size_t kBodies = kLinks + 1;
inline constexpr std::size_t kDof = 3 + kLinks;  // head x, y, heading, then one bend per link

using Vec2 = Eigen::Vector2d;
using LinkArray = std::array<double, kLinks>;

struct PhysicsParams {
  // Randomized quantities; defaults are the midpoints of the randomization ranges.
  double ground_friction = 0.8;     // lateral Coulomb coefficient
  double wheel_friction = 0.075;    // tangential (rolling) Coulomb coefficient
  double rigid_body_mass = 0.055;   // kg, each of the three middle bodies
  double tail_mass = 0.075;         // kg
  double head_mass = 0.1;           // kg
  double max_link_pressure = 8.5;   // psi, lambda_i
  double gravity_angle = 0.0;       // rad, ground tilt about the world y axis

  // Surrogate constants.
  double actuator_lag = 1.0;         // s, first-order pressure lag
  double link_length = 0.1;          // m, soft link centre line
  double rigid_body_length = 0.06;   // m
  double bend_per_psi = 0.12;        // rad of static bend per psi
  double joint_stiffness = 1.0;      // N m / rad
  double joint_damping = 0.04;       // N m s / rad
  double min_anisotropy = 5.0;       // lateral >= min_anisotropy * tangential
  double tangential_viscosity = 0.0;  // N s / m
  double lateral_viscosity = 0.0;     // N s / m
  double slip_velocity = 0.1;        // m/s, Coulomb regularization width
  double gravity = 9.81;             // m/s^2

  void check() const;

  double body_mass(std::size_t body) const;
  double body_spacing() const { return link_length + rigid_body_length; }
  double lateral_coefficient() const;
};

struct Pose {
  Vec2 head = Vec2::Zero();
  double heading = 0.0;
  LinkArray bend{};
};

struct RobotState {
  double time = 0.0;
  Eigen::Matrix<double, kDof, 1> q = Eigen::Matrix<double, kDof, 1>::Zero();
  Eigen::Matrix<double, kDof, 1> qd = Eigen::Matrix<double, kDof, 1>::Zero();
  LinkArray pressure{};     // lagged actuation, normalized to [-1, 1]
  LinkArray link_length{};  // m
  Vec2 com = Vec2::Zero();           // centre of mass (cached)
  Vec2 com_velocity = Vec2::Zero();  // planar velocity v (cached)

  Vec2 head() const { return {q[0], q[1]}; }
  double heading() const { return q[2]; }
  double bend(std::size_t link) const { return q[3 + link]; }
  // kappa_i = delta_i / l_i.
  LinkArray curvature() const;
  bool finite() const;
};

// Robot at rest in `pose`. `pose_noise` perturbs the bends uniformly in
// [-pose_noise, pose_noise] using `seed`.
RobotState reset(const PhysicsParams& phys, const Pose& pose = {}, std::uint64_t seed = 0,
                 double pose_noise = 0.0);

// One semi-implicit step. psi is saturated to [-1, 1] before it reaches the
// valves. Throws DivergenceError on a non-finite state.
RobotState step_robot(const RobotState& st, const LinkArray& psi, const PhysicsParams& phys,
                      double dt);

std::array<Vec2, kBodies> body_positions(const RobotState& st, const PhysicsParams& phys);
double kinetic_energy(const RobotState& st, const PhysicsParams& phys);
// Kinetic energy plus the elastic energy stored in the links.
double mechanical_energy(const RobotState& st, const PhysicsParams& phys);

struct Goal {
  Vec2 position = Vec2::Zero();
  double radius = 0.1;  // m
};

struct Observation {
  double rho = 0.0;        // distance head -> goal (m)
  double rho_dot = 0.0;    // m/s
  double theta = 0.0;      // velocity direction -> goal direction, CCW positive, (-pi, pi]
  double theta_dot = 0.0;  // rad/s
  LinkArray kappa{};       // 1/m
  double v_g = 0.0;        // velocity projected on the goal direction (m/s)
  double d_g = 0.0;        // travel along the initial goal direction (m)
  double speed = 0.0;      // |v| (m/s)

  // s = [rho, rho_dot, theta, theta_dot, kappa_1..kappa_4].
  std::array<double, 8> vector() const;
};

double wrap_angle(double angle);

// `origin` is h(0). Rates are finite differences against `previous` over
// `interval`; they are zero when there is no previous observation.
Observation observe(const RobotState& st, const Goal& goal, const Vec2& origin,
                    const std::optional<Observation>& previous = std::nullopt,
                    double interval = 0.05);

PhysicsParams physics_from(const KeyValueConfig& kv);
KeyValueConfig to_key_values(const PhysicsParams& phys);

}  // namespace snakecpg::sim
