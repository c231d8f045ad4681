#include "snakecpg/plant.hpp"

#include <cmath>

#include "snakecpg/errors.hpp"
#include "snakecpg/parallel.hpp"

namespace snakecpg::sim {

CpgSnake::CpgSnake(const cpg::OscillatorParams& params,
                   const cpg::IntegrationSettings& integration, const PhysicsParams& phys,
                   const Pose& pose, const cpg::NetworkState& initial)
    : params_(params),
      integration_(integration),
      phys_(phys),
      network_(initial),
      robot_(reset(phys, pose)) {
  params_.check();
  if (!(integration_.dt > 0.0) || integration_.control_interval < integration_.dt) {
    throw ConfigError("control interval must be at least one integration step");
  }
}

int CpgSnake::substeps() const {
  return static_cast<int>(std::lround(integration_.control_interval / integration_.dt));
}

void CpgSnake::advance(const cpg::TonicInputs& u, double K_f) {
  params_.K_f = K_f;
  params_.check();
  for (int k = 0, n = substeps(); k < n; ++k) {
    network_ = cpg::step_network(network_, u, params_, integration_.dt);
    psi_ = cpg::output(network_, params_).psi;
    robot_ = step_robot(robot_, psi_, phys_, integration_.dt);
  }
}

void CpgSnake::advance_direct(const LinkArray& psi) {
  psi_ = psi;
  for (int k = 0, n = substeps(); k < n; ++k) {
    robot_ = step_robot(robot_, psi_, phys_, integration_.dt);
  }
}

void CpgSnake::warm_up(const cpg::TonicInputs& u, double K_f, double duration) {
  params_.K_f = K_f;
  params_.check();
  const long n = std::lround(duration / integration_.dt);
  for (long k = 0; k < n; ++k) network_ = cpg::step_network(network_, u, params_, integration_.dt);
  psi_ = cpg::output(network_, params_).psi;
}

std::vector<VelocityCell> velocity_sweep(std::span<const double> c_grid,
                                         std::span<const double> kf_grid,
                                         const PhysicsParams& phys,
                                         const cpg::OscillatorParams& base,
                                         const cpg::IntegrationSettings& integration,
                                         const VelocitySweepOptions& options) {
  phys.check();
  std::vector<VelocityCell> cells(c_grid.size() * kf_grid.size());
  parallel_for(
      cells.size(),
      [&](std::size_t idx) {
        VelocityCell& cell = cells[idx];
        cell.c = c_grid[idx / kf_grid.size()];
        cell.K_f = kf_grid[idx % kf_grid.size()];
        try {
          cpg::OscillatorParams p = base;
          p.c = cell.c;
          p.K_f = cell.K_f;
          CpgSnake plant(p, integration, phys);
          const auto u = cpg::TonicInputs::uniform(options.tonic, options.tonic);
          plant.warm_up(u, cell.K_f, options.warmup * cell.K_f);
          const long transient = std::lround(options.transient / integration.control_interval);
          const long window = std::lround(options.duration / integration.control_interval);
          for (long k = 0; k < transient; ++k) plant.advance(u, cell.K_f);
          const Vec2 start = plant.robot().com;
          for (long k = 0; k < window; ++k) plant.advance(u, cell.K_f);
          cell.speed = (plant.robot().com - start).norm() / (window * integration.control_interval);
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
      },
      options.workers);
  return cells;
}

}  // namespace snakecpg::sim
