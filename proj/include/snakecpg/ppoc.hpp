#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "snakecpg/env.hpp"
#include "snakecpg/nn.hpp"

// Option-critic PPO: a Gaussian intra-option policy over the four action
// logits, K_f values as options with learned termination, a softmax policy
// over options and an option-value critic.
namespace snakecpg::rl {

inline constexpr int kObsDim = 8;
inline constexpr int kActionDim = 4;

class ObsNormalizer {
 public:
  ObsNormalizer();
  void update(const std::vector<std::array<double, kObsDim>>& batch);
  std::array<double, kObsDim> apply(const std::array<double, kObsDim>& x) const;

  nlohmann::json to_json() const;
  static ObsNormalizer from_json(const nlohmann::json& j);

 private:
  std::array<double, kObsDim> mean_{};
  std::array<double, kObsDim> var_{};
  double count_ = 0.0;
};

struct PolicyMetadata {
  std::uint64_t seed = 0;
  long episodes = 0;
  long steps = 0;
  int level = 1;  // 1-based level reached
  bool options_frozen = true;
};

struct Decision {
  Action mean{};
  Action action{};
  double log_prob = 0.0;
};

class Policy {
 public:
  Policy() = default;
  Policy(Variant variant, double c, std::vector<double> options, const std::vector<int>& hidden,
         const std::vector<int>& option_hidden, double init_log_std, std::mt19937_64& rng);

  nn::Vector actor_input(const std::array<double, kObsDim>& obs, const Action& prev, int option) const;
  nn::Vector critic_input(const std::array<double, kObsDim>& obs, const Action& prev) const;

  Decision act(const nn::Vector& actor_in, bool stochastic, std::mt19937_64& rng) const;
  nn::Vector option_values(const nn::Vector& critic_in) const;    // Q(s, .)
  nn::Vector option_probs(const nn::Vector& critic_in) const;     // pi_Omega(. | s)
  double termination(const nn::Vector& critic_in, int option) const;  // beta(s, option)
  double state_value(const nn::Vector& critic_in) const;           // sum_o pi Q

  int choose_option(const nn::Vector& critic_in, bool stochastic, std::mt19937_64& rng) const;
  int option_index(double K_f) const;

  Variant variant = Variant::foc;
  double c = 0.75;
  std::vector<double> options;
  nn::Mlp actor, critic, terminator, selector;
  nn::Vector log_std;
  ObsNormalizer normalizer;
  PolicyMetadata meta;

  bool finite() const;
  nlohmann::json to_json() const;
  static Policy from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Policy load(const std::string& path);
};

struct TrainConfig {
  Variant variant = Variant::foc;
  double c = -1.0;  // negative selects the variant default
  std::uint64_t seed = 1;
  std::vector<int> hidden = {128, 128};
  std::vector<int> option_hidden = {64, 64};
  double learning_rate = 5e-4;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double option_entropy = 0.01;
  double termination_margin = 0.01;
  double max_grad_norm = 0.5;
  double init_log_std = -0.5;
  int epochs = 10;
  int minibatch = 256;
  int steps_per_env = 512;
  int envs = 4;
  unsigned workers = 1;
  long max_episodes = 12500;
  long max_iterations = 0;  // 0 = unbounded
  std::vector<double> options = {0.5, 0.7, 0.85, 1.0};
  double frozen_option = 1.0;
  bool allow_unfreeze = true;
  long plateau_episodes = 500;
  int levels = 0;             // use the first `levels` curriculum rows; 0 = all
  int target_level = 0;       // stop once this 1-based level's window reaches target_rate
  double target_rate = 0.8;
  std::string curriculum_path;  // empty = built-in table
  std::string checkpoint_path;
  int checkpoint_every = 10;  // iterations
  std::string metrics_path;   // newline-delimited JSON, one record per iteration
  std::string episodes_path;  // CSV, one row per finished trial
  EnvConfig env;

  void check() const;
};

TrainConfig train_config_from(const KeyValueConfig& kv);
KeyValueConfig to_key_values(const TrainConfig& cfg);

struct IterationMetrics {
  long iteration = 0;
  long episodes = 0;
  long steps = 0;
  int level = 1;
  double success_rate = 0.0;
  double mean_reward = 0.0;  // mean return of trials finished this iteration
  bool options_frozen = true;
};

struct TrainResult {
  Policy policy;
  std::vector<IterationMetrics> history;
  int level_reached = 1;
  double success_rate = 0.0;  // window at the final level
  bool target_reached = false;
};

using ProgressCallback = std::function<void(const IterationMetrics&)>;

// Throws DivergenceError if the networks become non-finite; the last
// checkpoint written before that point is left untouched.
TrainResult train(const TrainConfig& cfg, const ProgressCallback& progress = {});

}  // namespace snakecpg::rl
