#include "snakecpg/snake.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "snakecpg/errors.hpp"

namespace snakecpg::sim {

namespace {

using DofVec = Eigen::Matrix<double, kDof, 1>;
using DofMat = Eigen::Matrix<double, kDof, kDof>;
using PosJac = Eigen::Matrix<double, 2, kDof>;
using AngJac = Eigen::Matrix<double, 1, kDof>;

Vec2 along(double phi) { return {std::cos(phi), std::sin(phi)}; }
Vec2 across(double phi) { return {-std::sin(phi), std::cos(phi)}; }

// Body k's heading is phi_k = heading + sum_{j<=k} bend_j. Its centre sits
// spacing/2 behind the previous link midpoint, so
//   p_k = p_0 - sum_n w_kn e(phi_n),  w_k0 = w_kk = h/2, w_kn = h in between.
struct Kinematics {
  std::array<double, kBodies> phi{};
  std::array<double, kBodies> phi_dot{};
  std::array<Vec2, kBodies> pos;
  std::array<PosJac, kBodies> J;
  std::array<AngJac, kBodies> Jphi;
  std::array<Vec2, kBodies> bias;  // p_dd = J q_dd + bias

  Kinematics(const RobotState& st, const PhysicsParams& phys) {
    const double h = phys.body_spacing();
    std::array<Vec2, kBodies> e, en;
    for (std::size_t k = 0; k < kBodies; ++k) {
      Jphi[k].setZero();
      Jphi[k](2) = 1.0;
      for (std::size_t j = 0; j < k; ++j) Jphi[k](3 + j) = 1.0;
      phi[k] = Jphi[k].dot(st.q);
      phi_dot[k] = Jphi[k].dot(st.qd);
      e[k] = along(phi[k]);
      en[k] = across(phi[k]);
    }
    for (std::size_t k = 0; k < kBodies; ++k) {
      pos[k] = st.head();
      J[k].setZero();
      J[k](0, 0) = 1.0;
      J[k](1, 1) = 1.0;
      bias[k].setZero();
      for (std::size_t n = 0; n <= k && k > 0; ++n) {
        const double w = (n == 0 || n == k) ? 0.5 * h : h;
        pos[k] -= w * e[n];
        J[k] -= w * en[n] * Jphi[n];
        bias[k] += w * phi_dot[n] * phi_dot[n] * e[n];
      }
    }
  }
};

double body_inertia(double mass, const PhysicsParams& phys) {
  const double len = phys.rigid_body_length;
  return mass * len * len / 12.0;
}

void update_cache(RobotState& st, const PhysicsParams& phys) {
  const Kinematics kin(st, phys);
  Vec2 com = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  double total = 0.0;
  for (std::size_t k = 0; k < kBodies; ++k) {
    const double m = phys.body_mass(k);
    com += m * kin.pos[k];
    vel += m * (kin.J[k] * st.qd);
    total += m;
  }
  st.com = com / total;
  st.com_velocity = vel / total;
}

}  // namespace

void PhysicsParams::check() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(rigid_body_mass > 0.0 && tail_mass > 0.0 && head_mass > 0.0, "masses must be positive");
  require(ground_friction >= 0.0 && wheel_friction >= 0.0, "friction coefficients must be non-negative");
  require(max_link_pressure > 0.0, "max link pressure must be positive");
  require(actuator_lag > 0.0, "actuator lag must be positive");
  require(link_length > 0.0 && rigid_body_length > 0.0, "lengths must be positive");
  require(joint_stiffness > 0.0 && joint_damping >= 0.0, "joint stiffness/damping invalid");
  require(slip_velocity > 0.0, "slip velocity must be positive");
  require(tangential_viscosity >= 0.0 && lateral_viscosity >= 0.0, "viscosities must be non-negative");
  require(std::isfinite(gravity_angle) && std::isfinite(bend_per_psi), "non-finite physics value");
}

double PhysicsParams::body_mass(std::size_t body) const {
  if (body == 0) return head_mass;
  if (body == kBodies - 1) return tail_mass;
  return rigid_body_mass;
}

double PhysicsParams::lateral_coefficient() const {
  return std::max(ground_friction, min_anisotropy * wheel_friction);
}

LinkArray RobotState::curvature() const {
  LinkArray k{};
  for (std::size_t i = 0; i < kLinks; ++i) k[i] = q[3 + i] / link_length[i];
  return k;
}

bool RobotState::finite() const {
  return q.allFinite() && qd.allFinite() &&
         std::all_of(pressure.begin(), pressure.end(), [](double p) { return std::isfinite(p); });
}

RobotState reset(const PhysicsParams& phys, const Pose& pose, std::uint64_t seed,
                 double pose_noise) {
  phys.check();
  RobotState st;
  st.q[0] = pose.head.x();
  st.q[1] = pose.head.y();
  st.q[2] = pose.heading;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  for (std::size_t i = 0; i < kLinks; ++i) {
    st.q[3 + i] = pose.bend[i] + (pose_noise > 0.0 ? pose_noise * noise(rng) : 0.0);
    st.link_length[i] = phys.link_length;
  }
  update_cache(st, phys);
  return st;
}

RobotState step_robot(const RobotState& st, const LinkArray& psi, const PhysicsParams& phys,
                      double dt) {
  if (!(dt > 0.0)) throw ConfigError("robot dt must be positive");
  RobotState next = st;

  // Valve command lambda_i * psi_i filtered by a first-order chamber lag.
  const double alpha = dt / phys.actuator_lag;
  for (std::size_t i = 0; i < kLinks; ++i) {
    const double command = std::clamp(psi[i], -1.0, 1.0);
    next.pressure[i] = st.pressure[i] + alpha * (command - st.pressure[i]);
  }

  const Kinematics kin(st, phys);
  const double normal_g = phys.gravity * std::cos(phys.gravity_angle);
  const double slope_g = phys.gravity * std::sin(phys.gravity_angle);
  const double mu_t = phys.wheel_friction;
  const double mu_l = phys.lateral_coefficient();

  DofMat mass = DofMat::Zero();
  DofMat damping = DofMat::Zero();
  DofVec force = DofVec::Zero();
  for (std::size_t k = 0; k < kBodies; ++k) {
    const double m = phys.body_mass(k);
    const double inertia = body_inertia(m, phys);
    mass.noalias() += m * kin.J[k].transpose() * kin.J[k];
    mass.noalias() += inertia * kin.Jphi[k].transpose() * kin.Jphi[k];

    // Regularized Coulomb + viscous friction, linear in the new velocity.
    const Vec2 t = along(kin.phi[k]);
    const Vec2 n = across(kin.phi[k]);
    const Vec2 v = kin.J[k] * st.qd;
    const double normal = m * normal_g;
    const double c_t = normal * mu_t / std::max(std::abs(t.dot(v)), phys.slip_velocity) +
                       phys.tangential_viscosity;
    const double c_l = normal * mu_l / std::max(std::abs(n.dot(v)), phys.slip_velocity) +
                       phys.lateral_viscosity;
    const Eigen::Matrix2d contact = c_t * t * t.transpose() + c_l * n * n.transpose();
    damping.noalias() += kin.J[k].transpose() * contact * kin.J[k];

    force.noalias() += kin.J[k].transpose() * Vec2(m * slope_g, 0.0);
    force.noalias() -= m * kin.J[k].transpose() * kin.bias[k];
  }
  for (std::size_t i = 0; i < kLinks; ++i) {
    const std::size_t dof = 3 + i;
    const double rest = phys.bend_per_psi * phys.max_link_pressure * st.pressure[i];
    force[dof] += phys.joint_stiffness * (rest - st.q[dof]);
    damping(dof, dof) += phys.joint_damping;
  }

  const DofMat lhs = mass + dt * damping;
  const DofVec rhs = mass * st.qd + dt * force;
  next.qd = lhs.ldlt().solve(rhs);
  next.q = st.q + dt * next.qd;
  next.time = st.time + dt;
  if (!next.finite()) throw DivergenceError("robot integration diverged", 0);
  update_cache(next, phys);
  return next;
}

std::array<Vec2, kBodies> body_positions(const RobotState& st, const PhysicsParams& phys) {
  return Kinematics(st, phys).pos;
}

double kinetic_energy(const RobotState& st, const PhysicsParams& phys) {
  const Kinematics kin(st, phys);
  double e = 0.0;
  for (std::size_t k = 0; k < kBodies; ++k) {
    const double m = phys.body_mass(k);
    e += 0.5 * m * (kin.J[k] * st.qd).squaredNorm();
    e += 0.5 * body_inertia(m, phys) * kin.phi_dot[k] * kin.phi_dot[k];
  }
  return e;
}

double mechanical_energy(const RobotState& st, const PhysicsParams& phys) {
  double e = kinetic_energy(st, phys);
  for (std::size_t i = 0; i < kLinks; ++i) {
    const double rest = phys.bend_per_psi * phys.max_link_pressure * st.pressure[i];
    const double strain = st.q[3 + i] - rest;
    e += 0.5 * phys.joint_stiffness * strain * strain;
  }
  return e;
}

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * kPi);  // in [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::array<double, 8> Observation::vector() const {
  return {rho, rho_dot, theta, theta_dot, kappa[0], kappa[1], kappa[2], kappa[3]};
}

Observation observe(const RobotState& st, const Goal& goal, const Vec2& origin,
                    const std::optional<Observation>& previous, double interval) {
  Observation obs;
  const Vec2 to_goal = goal.position - st.head();
  obs.rho = to_goal.norm();
  obs.speed = st.com_velocity.norm();
  obs.kappa = st.curvature();

  const double goal_angle = obs.rho > 0.0 ? std::atan2(to_goal.y(), to_goal.x()) : st.heading();
  const double motion_angle = obs.speed < 1e-4
                                  ? st.heading()
                                  : std::atan2(st.com_velocity.y(), st.com_velocity.x());
  obs.theta = wrap_angle(goal_angle - motion_angle);
  obs.v_g = obs.rho > 0.0 ? st.com_velocity.dot(to_goal) / obs.rho : 0.0;

  const Vec2 initial_dir = goal.position - origin;
  const double initial_dist = initial_dir.norm();
  obs.d_g = initial_dist > 0.0 ? (st.head() - origin).dot(initial_dir) / initial_dist : 0.0;

  if (previous && interval > 0.0) {
    obs.rho_dot = (obs.rho - previous->rho) / interval;
    obs.theta_dot = wrap_angle(obs.theta - previous->theta) / interval;
  }
  return obs;
}

namespace {

struct PhysicsField {
  const char* key;
  double PhysicsParams::*member;
};

constexpr PhysicsField kPhysicsFields[] = {
    {"ground_friction", &PhysicsParams::ground_friction},
    {"wheel_friction", &PhysicsParams::wheel_friction},
    {"rigid_body_mass", &PhysicsParams::rigid_body_mass},
    {"tail_mass", &PhysicsParams::tail_mass},
    {"head_mass", &PhysicsParams::head_mass},
    {"max_link_pressure", &PhysicsParams::max_link_pressure},
    {"gravity_angle", &PhysicsParams::gravity_angle},
    {"actuator_lag", &PhysicsParams::actuator_lag},
    {"link_length", &PhysicsParams::link_length},
    {"rigid_body_length", &PhysicsParams::rigid_body_length},
    {"bend_per_psi", &PhysicsParams::bend_per_psi},
    {"joint_stiffness", &PhysicsParams::joint_stiffness},
    {"joint_damping", &PhysicsParams::joint_damping},
    {"min_anisotropy", &PhysicsParams::min_anisotropy},
    {"tangential_viscosity", &PhysicsParams::tangential_viscosity},
    {"lateral_viscosity", &PhysicsParams::lateral_viscosity},
    {"slip_velocity", &PhysicsParams::slip_velocity},
    {"gravity", &PhysicsParams::gravity},
};

}  // namespace

PhysicsParams physics_from(const KeyValueConfig& kv) {
  std::set<std::string> known;
  for (const auto& f : kPhysicsFields) known.insert(f.key);
  kv.require_known(known);
  PhysicsParams phys;
  for (const auto& f : kPhysicsFields) phys.*f.member = kv.get_double(f.key, phys.*f.member);
  phys.check();
  return phys;
}

KeyValueConfig to_key_values(const PhysicsParams& phys) {
  KeyValueConfig kv;
  for (const auto& f : kPhysicsFields) kv.set(f.key, phys.*f.member);
  return kv;
}

}  // namespace snakecpg::sim
