#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "snakecpg/describing.hpp"
#include "snakecpg/errors.hpp"
#include "snakecpg/gp.hpp"
#include "snakecpg/measure.hpp"
#include "snakecpg/plant.hpp"
#include "snakecpg/ppoc.hpp"
#include "snakecpg/rollout.hpp"
#include "snakecpg/sweeps.hpp"

using namespace snakecpg;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

Verdict threshold_anchor() {
  cpg::OscillatorParams p;
  p.c = 0.75;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double w : grid(3.77, 5.02, 1001)) {
    const double a0 = df::entrainment_threshold(w, p);
    lo = std::min(lo, a0);
    hi = std::max(hi, a0);
  }
  const double a = df::entrainment_threshold(3.77, p), b = df::entrainment_threshold(5.02, p);
  const bool ok = lo >= 0.39 - 0.02 && hi <= 0.83 + 0.02 && std::abs(a - 0.39) <= 0.02 && std::abs(b - 0.83) <= 0.02;
  return {ok, fmt("A0(3.77) = %.4f, A0(5.02) = %.4f, range [%.4f, %.4f]", a, b, lo, hi)};
}

Verdict zero_c() {
  cpg::OscillatorParams p;
  p.c = 0.0;
  int nonzero = 0;
  for (double w : grid(0.1, 20.0, 400)) {
    if (df::entrainment_threshold(w, p) != 0.0) ++nonzero;
  }
  if (df::entrainment_threshold(df::natural_frequency(p), p) != 0.0) ++nonzero;
  return {nonzero == 0, fmt("%d nonzero values over 401 frequencies", nonzero)};
}

Verdict quadrature() {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = -1.0 + 0.02 * i;
    const double half = r >= 1.0 ? std::numbers::pi : std::acos(-r);
    double k = 0.0, l = 0.0;
    if (r > -1.0) {
      k = GK::integrate([r](double t) { return (std::cos(t) + r) * std::cos(t); }, -half, half, 15, 1e-14) /
          std::numbers::pi;
      l = GK::integrate([r](double t) { return std::cos(t) + r; }, -half, half, 15, 1e-14) /
          (2.0 * std::numbers::pi);
    }
    worst = std::max({worst, std::abs(df::gate_fourier_K(r) - k), std::abs(df::gate_fourier_L(r) - l)});
  }
  return {worst < 1e-9, fmt("max deviation %.2e at 101 points", worst)};
}

Verdict bias_law() {
  const std::vector<double> gains{0.19, 0.39, 0.53, 0.66, 0.79};
  const auto u = grid(0.0, 0.5, 26);
  df::SweepSettings s;
  s.duration = 120.0;
  const auto panels = df::summarize_bias(df::bias_sweep({}, gains, u, s));
  bool ok = true;
  std::ostringstream d;
  for (const auto& p : panels) {
    const bool fit_ok = p.has_fit && std::abs(p.fit.slope - 1.0) <= 0.15 && p.fit.r2 >= 0.95;
    const bool bif = p.fixed_points > 0 && std::isfinite(p.bifurcation_u);
    ok = ok && fit_ok && bif;
    d << fmt("K_n %.2f: slope %.3f R2 %.3f lc %zu bif %.2f%s; ", p.K_n, p.fit.slope, p.fit.r2, p.limit_cycles,
             p.bifurcation_u, fit_ok && bif ? "" : " (out)");
  }
  return {ok, d.str()};
}

Verdict duty_law() {
  const cpg::OscillatorParams base;
  df::DutySettings s;
  s.duration = 120.0;
  const auto pts = df::duty_sweep(base, grid(0.1, 0.9, 17), s);
  const auto sum = df::summarize_duty(pts, base);
  std::size_t lc = 0;
  for (const auto& p : pts) lc += p.limit_cycle;
  return {sum.fit.r2 >= 0.9, fmt("slope %.3f intercept %.3f R2 %.4f over %zu points (%zu limit cycles)", sum.fit.slope,
                                 sum.fit.intercept, sum.fit.r2, sum.fit.n, lc)};
}

Verdict frequency_law() {
  df::FrequencySettings s;
  s.duration = 120.0;
  const auto fit = df::frequency_exponent(df::frequency_sweep({}, grid(0.45, 1.05, 13), s));
  double worst = 0.0;
  for (double kf : {0.45, 0.7, 1.05}) {
    worst = std::max(worst, df::time_rescaling_error({}, kf, 30.0, 1e-3, cpg::TonicInputs::uniform(1.0, 1.0)));
  }
  const bool exponent_ok = std::abs(fit.slope + 0.5) <= 0.05;
  return {exponent_ok && worst < 1e-4,
          fmt("exponent %.4f (R2 %.5f, target -0.5 +/- 0.05); rescaling error %.2e", fit.slope, fit.r2, worst)};
}

Verdict invariants() {
  const cpg::OscillatorParams p;
  std::vector<std::string> broken;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> wide(-20.0, 20.0), unit(0.0, 1.0);

  for (int i = 0; i < 10000; ++i) {
    std::array<double, 4> a{wide(rng), wide(rng), wide(rng), wide(rng)};
    const auto u = cpg::decode_action(a);
    for (std::size_t k = 0; k < 4; ++k) {
      if (u.u_e[k] + u.u_f[k] != 1.0 || u.u_e[k] < 0.0 || u.u_f[k] < 0.0) {
        broken.push_back("exclusiveness");
        i = 10000;
        break;
      }
    }
  }

  auto random_tonic = [&] {
    cpg::TonicInputs u;
    for (std::size_t k = 0; k < 4; ++k) {
      u.u_e[k] = unit(rng);
      u.u_f[k] = unit(rng);
    }
    return u;
  };

  double max_psi = 0.0, worst_ue = 0.0, worst_uf = 0.0;
  bool z_ok = true;
  const std::vector<double> levels{0.0, 0.25, 0.5, 0.75, 1.0};
  for (double ue : levels) {
    for (double uf : levels) {
      const auto u = cpg::TonicInputs::uniform(ue, uf);
      auto s = cpg::NetworkState::seeded();
      for (int k = 0; k < 60000; ++k) {
        s = cpg::step_network(s, u, p, 1e-3);
        const auto psi = cpg::output(s, p).psi;
        for (std::size_t i = 0; i < 4; ++i) {
          if (std::abs(psi[i]) > max_psi) {
            max_psi = std::abs(psi[i]);
            worst_ue = ue;
            worst_uf = uf;
          }
          z_ok = z_ok && cpg::firing(s.x_e[i]) >= 0.0 && cpg::firing(s.x_f[i]) >= 0.0;
        }
      }
    }
  }
  if (max_psi > 1.0) broken.push_back("boundedness");
  if (!z_ok) broken.push_back("z >= 0");

  {
    cpg::NetworkState zero;
    const auto d = cpg::derivative(zero, {}, p);
    for (std::size_t i = 0; i < 4; ++i) {
      if (d.x_e[i] != 0.0 || d.x_f[i] != 0.0 || d.y_e[i] != 0.0 || d.y_f[i] != 0.0) {
        broken.push_back("zero-input fixed point");
        break;
      }
    }
    auto s = zero;
    for (int k = 0; k < 1000; ++k) s = cpg::step_network(s, {}, p, 1e-3);
    if (!(s == zero)) broken.push_back("zero-input fixed point (integrated)");
  }

  double mirror = 0.0;
  {
    const auto u = random_tonic();
    auto a = cpg::NetworkState::seeded();
    auto b = a.mirrored();
    for (int k = 0; k < 30000; ++k) {
      a = cpg::step_network(a, u, p, 1e-3);
      b = cpg::step_network(b, u.swapped(), p, 1e-3);
      const auto pa = cpg::output(a, p).psi, pb = cpg::output(b, p).psi;
      for (std::size_t i = 0; i < 4; ++i) mirror = std::max(mirror, std::abs(pa[i] + pb[i]));
    }
  }
  if (mirror >= 1e-9) broken.push_back("mirror antisymmetry");

  bool predicate = true;
  for (int i = 0; i < 10000; ++i) {
    cpg::OscillatorParams q = p;
    q.tau_r = 0.1 + 3.0 * unit(rng);
    q.tau_a = 0.1 + 3.0 * unit(rng);
    q.b = 0.01 + 12.0 * unit(rng);
    const auto r = cpg::validate_params(q);
    const double lhs = (q.tau_a - q.tau_r) * (q.tau_a - q.tau_r);
    const double rhs = 4.0 * q.tau_r * q.tau_a * q.b;
    predicate = predicate && r.lhs == lhs && r.rhs == rhs && r.oscillation_possible == (lhs < rhs);
  }
  cpg::OscillatorParams edge = p;
  edge.tau_r = 1.0;
  edge.tau_a = 3.0;
  edge.b = 1.0 / 3.0;
  predicate = predicate && !cpg::validate_params(edge).oscillation_possible && cpg::validate_params(p).oscillation_possible;
  if (!predicate) broken.push_back("oscillation predicate");

  std::string list;
  for (const auto& b : broken) list += " " + b;
  return {broken.empty(),
          fmt("max |psi| %.4f over 25 tonic pairs x 60 s (at u_e %.2f, u_f %.2f), mirror deviation %.2e%s%s", max_psi,
              worst_ue, worst_uf, mirror,
              broken.empty() ? "" : "; broken:", list.c_str())};
}

Verdict velocity_trend() {
  const auto cs = grid(0.4, 0.8, 10), ks = grid(0.45, 1.05, 10);
  sim::VelocitySweepOptions opts;
  const auto cells = sim::velocity_sweep(cs, ks, sim::PhysicsParams{}, {}, {}, opts);
  double min_rho = 1.0, across_c = 0.0, across_k = 0.0;
  std::size_t failed = 0;
  for (const auto& c : cells) failed += !c.ok;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    std::vector<double> v;
    for (std::size_t j = 0; j < ks.size(); ++j) v.push_back(cells[i * ks.size() + j].speed);
    min_rho = std::min(min_rho, spearman(ks, v));
    across_k += *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  }
  for (std::size_t j = 0; j < ks.size(); ++j) {
    std::vector<double> v;
    for (std::size_t i = 0; i < cs.size(); ++i) v.push_back(cells[i * ks.size() + j].speed);
    across_c += *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  }
  across_k /= static_cast<double>(cs.size());
  across_c /= static_cast<double>(ks.size());
  return {failed == 0 && min_rho > 0.9 && across_c < across_k,
          fmt("min Spearman(K_f, speed) %.3f; mean speed range across c %.4f vs across K_f %.4f m/s; %zu failed cells",
              min_rho, across_c, across_k, failed)};
}

Verdict gp_tuner() {
  gp::EvolveConfig cfg;
  cfg.seed = 1;
  const auto r = gp::evolve(gp::Bounds::around(), cfg);
  bool monotone = true;
  for (std::size_t i = 1; i < r.history.size(); ++i) monotone = monotone && r.history[i].best >= r.history[i - 1].best;
  const auto gait = gp::check_gait(gp::decode(r.best));
  return {monotone && gait.oscillates() && gait.displacement > 0.0,
          fmt("best fitness %.3f after %d generations, history %s, limit cycle on all channels %s, displacement %.3f m",
              r.best_fitness, cfg.generations, monotone ? "non-decreasing" : "DECREASES",
              gait.oscillates() ? "yes" : "no", gait.displacement)};
}

rl::TrainConfig smoke_config() {
  rl::TrainConfig cfg;
  cfg.variant = rl::Variant::foc;
  cfg.seed = 1;
  cfg.levels = 2;
  cfg.target_level = 2;
  cfg.target_rate = 0.8;
  cfg.max_episodes = 3000;
  return cfg;
}

Verdict rl_smoke() {
  const auto table = rl::default_curriculum();
  const auto violations = rl::curriculum_violations(table);
  auto broken = table;
  broken[4].radius = 0.3;
  const bool detects = !rl::curriculum_violations(broken).empty();

  rl::CurriculumTracker tracker(table);
  for (int i = 0; i < 100; ++i) tracker.record(i % 10 != 0);
  const bool promotes = tracker.level_index() == 1;

  const auto r = rl::train(smoke_config());
  const bool ok = violations.empty() && detects && promotes && r.level_reached >= 2 && r.success_rate >= 0.8;
  return {ok, fmt("level %d, window success %.2f after %ld episodes; table invariants %s, tracker %s", r.level_reached,
                  r.success_rate, r.policy.meta.episodes, violations.empty() && detects ? "ok" : "BROKEN",
                  promotes ? "ok" : "BROKEN")};
}

Verdict steering() {
  auto cfg = smoke_config();
  cfg.levels = 0;
  cfg.target_level = 0;
  cfg.curriculum_path = std::string(SNAKECPG_DATA_DIR) + "/steering_curriculum.csv";
  cfg.max_episodes = 500;
  const auto r = rl::train(cfg);
  rl::SteeringSettings s;
  s.workers = 1;
  const auto study = rl::steering_study(r.policy, s);
  std::ostringstream d;
  d << fmt("R2 %.3f, slope %.3f, monotone %s; bias(psi1) by angle:", study.fit.r2, study.fit.slope,
           study.monotone ? "yes" : "no");
  for (const auto& p : study.points) d << fmt(" %+.0f:%.3f", p.angle, p.bias_psi);
  return {study.monotone && study.fit.r2 >= 0.85, d.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "entrainment threshold anchor", threshold_anchor},
      {2, "zero free-response input", zero_c},
      {3, "describing-function quadrature", quadrature},
      {4, "constant-input bias law", bias_law},
      {5, "duty-cycle bias law", duty_law},
      {6, "frequency law", frequency_law},
      {7, "structural invariants", invariants},
      {8, "velocity sweep trend", velocity_trend},
      {9, "GP tuner", gp_tuner},
      {10, "RL smoke curriculum", rl_smoke},
      {11, "steering linearity", steering},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
