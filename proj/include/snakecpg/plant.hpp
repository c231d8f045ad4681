#pragma once

#include <span>
#include <string>
#include <vector>

#include "snakecpg/cpg.hpp"
#include "snakecpg/snake.hpp"

namespace snakecpg::sim {

// CPG network driving the snake surrogate. Both advance with the CPG step
// size; tonic inputs and K_f are held for a whole control interval.
class CpgSnake {
 public:
  CpgSnake(const cpg::OscillatorParams& params, const cpg::IntegrationSettings& integration,
           const PhysicsParams& phys, const Pose& pose = {},
           const cpg::NetworkState& initial = cpg::NetworkState::seeded());

  // One control interval with the network in the loop.
  void advance(const cpg::TonicInputs& u, double K_f);
  // One control interval with psi commanded directly (no oscillator).
  void advance_direct(const LinkArray& psi);
  // Runs the network alone for `duration` seconds; the robot does not move.
  void warm_up(const cpg::TonicInputs& u, double K_f, double duration);

  const RobotState& robot() const { return robot_; }
  const cpg::NetworkState& network() const { return network_; }
  const cpg::OscillatorParams& params() const { return params_; }
  const cpg::IntegrationSettings& integration() const { return integration_; }
  const PhysicsParams& physics() const { return phys_; }
  // Network output after the last step (zero before any step).
  const cpg::Quad& psi() const { return psi_; }
  double time() const { return robot_.time; }

 private:
  int substeps() const;

  cpg::OscillatorParams params_;
  cpg::IntegrationSettings integration_;
  PhysicsParams phys_;
  cpg::NetworkState network_;
  RobotState robot_;
  cpg::Quad psi_{};
};

struct VelocitySweepOptions {
  double tonic = 1.0;          // u_e = u_f for every oscillator
  double warmup = 40.0;        // s at K_f = 1, network only; scaled by K_f
  double transient = 10.0;     // s, robot settling before measurement
  double duration = 20.0;      // s, measurement window
  unsigned workers = 0;        // 0 = hardware concurrency
};

struct VelocityCell {
  double c = 0.0;
  double K_f = 0.0;
  double speed = 0.0;  // straight-line COM displacement / duration (m/s)
  bool ok = false;
  std::string error;
};

// Row-major over (c, K_f). Cell failures are recorded and the sweep continues.
std::vector<VelocityCell> velocity_sweep(std::span<const double> c_grid,
                                         std::span<const double> kf_grid,
                                         const PhysicsParams& phys,
                                         const cpg::OscillatorParams& base = {},
                                         const cpg::IntegrationSettings& integration = {},
                                         const VelocitySweepOptions& options = {});

}  // namespace snakecpg::sim
