#include "snakecpg/ppoc.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "snakecpg/errors.hpp"
#include "snakecpg/parallel.hpp"

namespace snakecpg::rl {

namespace {

using nn::Matrix;
using nn::Vector;
using Obs = std::array<double, kObsDim>;

constexpr double kObsClip = 10.0;
constexpr double kActionScale = 3.0;

Vector softmax(const Vector& z) {
  const Vector e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string join(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
  return s;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_layers(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split(text, 'x')) {
    try {
      out.push_back(std::stoi(s));
    } catch (const std::exception&) {
      throw ConfigError("bad layer size list: " + text);
    }
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) {
    try {
      out.push_back(std::stod(s));
    } catch (const std::exception&) {
      throw ConfigError("bad number list: " + text);
    }
  }
  return out;
}

void write_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << text;
    if (!out) throw ConfigError("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

ObsNormalizer::ObsNormalizer() { var_.fill(1.0); }

void ObsNormalizer::update(const std::vector<Obs>& batch) {
  if (batch.empty()) return;
  const double n = static_cast<double>(batch.size());
  Obs bmean{}, bvar{};
  for (const auto& x : batch) {
    for (int i = 0; i < kObsDim; ++i) bmean[i] += x[i] / n;
  }
  for (const auto& x : batch) {
    for (int i = 0; i < kObsDim; ++i) bvar[i] += (x[i] - bmean[i]) * (x[i] - bmean[i]) / n;
  }
  const double total = count_ + n;
  for (int i = 0; i < kObsDim; ++i) {
    const double delta = bmean[i] - mean_[i];
    const double m2 = (count_ > 0 ? var_[i] * count_ : 0.0) + bvar[i] * n + delta * delta * count_ * n / total;
    mean_[i] += delta * n / total;
    var_[i] = m2 / total;
  }
  count_ = total;
}

Obs ObsNormalizer::apply(const Obs& x) const {
  Obs out{};
  for (int i = 0; i < kObsDim; ++i) {
    out[i] = std::clamp((x[i] - mean_[i]) / std::sqrt(var_[i] + 1e-8), -kObsClip, kObsClip);
  }
  return out;
}

nlohmann::json ObsNormalizer::to_json() const {
  return {{"mean", mean_}, {"var", var_}, {"count", count_}};
}

ObsNormalizer ObsNormalizer::from_json(const nlohmann::json& j) {
  ObsNormalizer n;
  n.mean_ = j.at("mean").get<Obs>();
  n.var_ = j.at("var").get<Obs>();
  n.count_ = j.at("count").get<double>();
  return n;
}

Policy::Policy(Variant variant_, double c_, std::vector<double> options_, const std::vector<int>& hidden,
               const std::vector<int>& option_hidden, double init_log_std, std::mt19937_64& rng)
    : variant(variant_), c(c_), options(std::move(options_)) {
  if (options.empty()) throw ConfigError("at least one option is required");
  const int n_opt = static_cast<int>(options.size());
  auto sizes = [](int in, const std::vector<int>& mid, int out) {
    std::vector<int> s{in};
    s.insert(s.end(), mid.begin(), mid.end());
    s.push_back(out);
    return s;
  };
  actor = nn::Mlp(sizes(kObsDim + kActionDim + 1, hidden, kActionDim), rng, 0.01);
  critic = nn::Mlp(sizes(kObsDim + kActionDim, hidden, n_opt), rng, 1.0);
  terminator = nn::Mlp(sizes(kObsDim + kActionDim, option_hidden, n_opt), rng, 0.01);
  terminator.biases().back().setConstant(-2.0);
  selector = nn::Mlp(sizes(kObsDim + kActionDim, option_hidden, n_opt), rng, 0.01);
  log_std = Vector::Constant(kActionDim, init_log_std);
}

Vector Policy::actor_input(const Obs& obs, const Action& prev, int option) const {
  Vector x(kObsDim + kActionDim + 1);
  for (int i = 0; i < kObsDim; ++i) x[i] = obs[i];
  for (int i = 0; i < kActionDim; ++i) x[kObsDim + i] = std::clamp(prev[i], -kActionScale, kActionScale) / kActionScale;
  const auto [lo, hi] = std::minmax_element(options.begin(), options.end());
  const double mid = 0.5 * (*lo + *hi);
  const double half = *hi > *lo ? 0.5 * (*hi - *lo) : 1.0;
  x[kObsDim + kActionDim] = (options.at(option) - mid) / half;
  return x;
}

Vector Policy::critic_input(const Obs& obs, const Action& prev) const {
  Vector x(kObsDim + kActionDim);
  for (int i = 0; i < kObsDim; ++i) x[i] = obs[i];
  for (int i = 0; i < kActionDim; ++i) x[kObsDim + i] = std::clamp(prev[i], -kActionScale, kActionScale) / kActionScale;
  return x;
}

Decision Policy::act(const Vector& actor_in, bool stochastic, std::mt19937_64& rng) const {
  const Vector mu = actor.forward(actor_in);
  std::normal_distribution<double> normal(0.0, 1.0);
  Decision d;
  for (int i = 0; i < kActionDim; ++i) {
    const double sigma = std::exp(log_std[i]);
    const double z = stochastic ? normal(rng) : 0.0;
    d.mean[i] = mu[i];
    d.action[i] = mu[i] + sigma * z;
    d.log_prob += -0.5 * z * z - log_std[i] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return d;
}

Vector Policy::option_values(const Vector& critic_in) const { return critic.forward(critic_in); }

Vector Policy::option_probs(const Vector& critic_in) const { return softmax(selector.forward(critic_in)); }

double Policy::termination(const Vector& critic_in, int option) const {
  return sigmoid(terminator.forward(critic_in)(option, 0));
}

double Policy::state_value(const Vector& critic_in) const {
  return option_probs(critic_in).dot(option_values(critic_in));
}

int Policy::choose_option(const Vector& critic_in, bool stochastic, std::mt19937_64& rng) const {
  const Vector p = option_probs(critic_in);
  if (!stochastic) {
    Eigen::Index best = 0;
    p.maxCoeff(&best);
    return static_cast<int>(best);
  }
  std::discrete_distribution<int> pick(p.data(), p.data() + p.size());
  return pick(rng);
}

int Policy::option_index(double K_f) const {
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (std::abs(options[i] - K_f) < 1e-9) return static_cast<int>(i);
  }
  throw ConfigError("K_f " + format_double(K_f) + " is not one of the policy's options");
}

bool Policy::finite() const {
  return actor.finite() && critic.finite() && terminator.finite() && selector.finite() && log_std.allFinite();
}

nlohmann::json Policy::to_json() const {
  std::vector<double> ls(log_std.data(), log_std.data() + log_std.size());
  return {{"format", "snakecpg-policy-1"},
          {"variant", to_string(variant)},
          {"c", c},
          {"options", options},
          {"log_std", ls},
          {"actor", actor.to_json()},
          {"critic", critic.to_json()},
          {"terminator", terminator.to_json()},
          {"selector", selector.to_json()},
          {"normalizer", normalizer.to_json()},
          {"meta",
           {{"seed", meta.seed},
            {"episodes", meta.episodes},
            {"steps", meta.steps},
            {"level", meta.level},
            {"options_frozen", meta.options_frozen}}}};
}

Policy Policy::from_json(const nlohmann::json& j) {
  try {
    Policy p;
    p.variant = variant_from(j.at("variant").get<std::string>());
    p.c = j.at("c").get<double>();
    p.options = j.at("options").get<std::vector<double>>();
    const auto ls = j.at("log_std").get<std::vector<double>>();
    p.log_std = Eigen::Map<const Vector>(ls.data(), static_cast<Eigen::Index>(ls.size()));
    p.actor = nn::Mlp::from_json(j.at("actor"));
    p.critic = nn::Mlp::from_json(j.at("critic"));
    p.terminator = nn::Mlp::from_json(j.at("terminator"));
    p.selector = nn::Mlp::from_json(j.at("selector"));
    p.normalizer = ObsNormalizer::from_json(j.at("normalizer"));
    const auto& m = j.at("meta");
    p.meta.seed = m.at("seed").get<std::uint64_t>();
    p.meta.episodes = m.at("episodes").get<long>();
    p.meta.steps = m.at("steps").get<long>();
    p.meta.level = m.at("level").get<int>();
    p.meta.options_frozen = m.at("options_frozen").get<bool>();
    const int n_opt = static_cast<int>(p.options.size());
    if (n_opt == 0 || p.log_std.size() != kActionDim || p.actor.inputs() != kObsDim + kActionDim + 1 ||
        p.actor.outputs() != kActionDim || p.critic.inputs() != kObsDim + kActionDim ||
        p.critic.outputs() != n_opt || p.terminator.outputs() != n_opt || p.selector.outputs() != n_opt) {
      throw ConfigError("checkpoint network shapes do not match");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void Policy::save(const std::string& path) const { write_atomically(path, to_json().dump()); }

Policy Policy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint " + path + ": " + e.what());
  }
  return from_json(j);
}

void TrainConfig::check() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(!hidden.empty() && !option_hidden.empty(), "hidden layer lists must not be empty");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0, 1]");
  require(clip > 0.0, "clip must be positive");
  require(value_coef >= 0.0 && entropy_coef >= 0.0 && option_entropy >= 0.0, "coefficients must be non-negative");
  require(max_grad_norm > 0.0, "max_grad_norm must be positive");
  require(epochs > 0 && minibatch > 0 && steps_per_env > 0 && envs > 0, "batch sizes must be positive");
  require(max_episodes > 0 && max_iterations >= 0, "episode and iteration limits must be positive");
  require(!options.empty(), "options must not be empty");
  for (double o : options) require(o > 0.0, "options must be positive");
  require(std::find_if(options.begin(), options.end(),
                       [&](double o) { return std::abs(o - frozen_option) < 1e-9; }) != options.end(),
          "frozen_option must be one of the options");
  require(levels >= 0 && target_level >= 0, "levels must be non-negative");
  require(target_rate > 0.0 && target_rate <= 1.0, "target_rate must be in (0, 1]");
  require(checkpoint_every > 0, "checkpoint_every must be positive");
}

namespace {

template <class T>
struct Field {
  const char* key;
  T TrainConfig::*member;
};

const Field<double> kDoubleFields[] = {
    {"learning_rate", &TrainConfig::learning_rate}, {"gamma", &TrainConfig::gamma},
    {"lambda", &TrainConfig::lambda},               {"clip", &TrainConfig::clip},
    {"value_coef", &TrainConfig::value_coef},       {"entropy_coef", &TrainConfig::entropy_coef},
    {"option_entropy", &TrainConfig::option_entropy},
    {"termination_margin", &TrainConfig::termination_margin},
    {"max_grad_norm", &TrainConfig::max_grad_norm}, {"init_log_std", &TrainConfig::init_log_std},
    {"frozen_option", &TrainConfig::frozen_option}, {"target_rate", &TrainConfig::target_rate},
};

const Field<int> kIntFields[] = {
    {"epochs", &TrainConfig::epochs},       {"minibatch", &TrainConfig::minibatch},
    {"steps_per_env", &TrainConfig::steps_per_env}, {"envs", &TrainConfig::envs},
    {"levels", &TrainConfig::levels},       {"target_level", &TrainConfig::target_level},
    {"checkpoint_every", &TrainConfig::checkpoint_every},
};

const Field<long> kLongFields[] = {
    {"max_episodes", &TrainConfig::max_episodes},
    {"max_iterations", &TrainConfig::max_iterations},
    {"plateau_episodes", &TrainConfig::plateau_episodes},
};

const Field<std::string> kStringFields[] = {
    {"curriculum", &TrainConfig::curriculum_path},
    {"checkpoint", &TrainConfig::checkpoint_path},
    {"metrics", &TrainConfig::metrics_path},
    {"episodes_log", &TrainConfig::episodes_path},
};

KeyValueConfig with_prefix(const KeyValueConfig& kv, const std::string& prefix) {
  KeyValueConfig sub;
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind(prefix, 0) == 0) sub.set(k.substr(prefix.size()), v);
  }
  return sub;
}

}  // namespace

TrainConfig train_config_from(const KeyValueConfig& kv) {
  std::set<std::string> known = {"variant", "c", "seed", "hidden", "option_hidden", "options", "workers",
                                 "allow_unfreeze", "randomize", "warmup", "c_v", "c_g",
                                 "starvation_speed", "starvation_steps", "literal_starvation",
                                 "starvation_time", "missed_steps", "max_steps", "dt", "control_interval"};
  for (const auto& f : kDoubleFields) known.insert(f.key);
  for (const auto& f : kIntFields) known.insert(f.key);
  for (const auto& f : kLongFields) known.insert(f.key);
  for (const auto& f : kStringFields) known.insert(f.key);
  KeyValueConfig own;
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("physics.", 0) != 0 && k.rfind("cpg.", 0) != 0) own.set(k, v);
  }
  own.require_known(known);

  TrainConfig cfg;
  cfg.variant = variant_from(kv.get_string("variant", to_string(cfg.variant)));
  cfg.c = kv.get_double("c", cfg.c);
  cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long>(cfg.seed)));
  if (kv.contains("hidden")) cfg.hidden = parse_layers(kv.get_string("hidden", ""));
  if (kv.contains("option_hidden")) cfg.option_hidden = parse_layers(kv.get_string("option_hidden", ""));
  if (kv.contains("options")) cfg.options = parse_doubles(kv.get_string("options", ""));
  cfg.workers = static_cast<unsigned>(kv.get_int("workers", cfg.workers));
  cfg.allow_unfreeze = kv.get_bool("allow_unfreeze", cfg.allow_unfreeze);
  for (const auto& f : kDoubleFields) cfg.*f.member = kv.get_double(f.key, cfg.*f.member);
  for (const auto& f : kIntFields) cfg.*f.member = static_cast<int>(kv.get_int(f.key, cfg.*f.member));
  for (const auto& f : kLongFields) cfg.*f.member = kv.get_int(f.key, cfg.*f.member);
  for (const auto& f : kStringFields) cfg.*f.member = kv.get_string(f.key, cfg.*f.member);

  auto& env = cfg.env;
  env.variant = cfg.variant;
  env.randomize = kv.get_bool("randomize", env.randomize);
  env.warmup = kv.get_double("warmup", env.warmup);
  env.reward.c_v = kv.get_double("c_v", env.reward.c_v);
  env.reward.c_g = kv.get_double("c_g", env.reward.c_g);
  auto& t = env.termination;
  t.starvation_speed = kv.get_double("starvation_speed", t.starvation_speed);
  t.starvation_steps = static_cast<int>(kv.get_int("starvation_steps", t.starvation_steps));
  t.literal_starvation = kv.get_bool("literal_starvation", t.literal_starvation);
  t.starvation_time = kv.get_double("starvation_time", t.starvation_time);
  t.missed_steps = static_cast<int>(kv.get_int("missed_steps", t.missed_steps));
  t.max_steps = static_cast<int>(kv.get_int("max_steps", t.max_steps));
  env.integration.dt = kv.get_double("dt", env.integration.dt);
  env.integration.control_interval = kv.get_double("control_interval", env.integration.control_interval);
  env.physics = sim::physics_from(with_prefix(kv, "physics."));
  const auto cpg_kv = with_prefix(kv, "cpg.");
  if (!cpg_kv.entries().empty()) env.cpg = cpg::cpg_config_from(cpg_kv).params;
  cfg.check();
  env.reward.check();
  t.check();
  return cfg;
}

KeyValueConfig to_key_values(const TrainConfig& cfg) {
  KeyValueConfig kv;
  kv.set("variant", to_string(cfg.variant));
  kv.set("c", cfg.c);
  kv.set("seed", std::to_string(cfg.seed));
  kv.set("hidden", join(cfg.hidden, 'x'));
  kv.set("option_hidden", join(cfg.option_hidden, 'x'));
  kv.set("options", join(cfg.options));
  kv.set("workers", std::to_string(cfg.workers));
  kv.set("allow_unfreeze", cfg.allow_unfreeze ? "true" : "false");
  for (const auto& f : kDoubleFields) kv.set(f.key, cfg.*f.member);
  for (const auto& f : kIntFields) kv.set(f.key, std::to_string(cfg.*f.member));
  for (const auto& f : kLongFields) kv.set(f.key, std::to_string(cfg.*f.member));
  for (const auto& f : kStringFields) kv.set(f.key, cfg.*f.member);
  const auto& env = cfg.env;
  kv.set("randomize", env.randomize ? "true" : "false");
  kv.set("warmup", env.warmup);
  kv.set("c_v", env.reward.c_v);
  kv.set("c_g", env.reward.c_g);
  const auto& t = env.termination;
  kv.set("starvation_speed", t.starvation_speed);
  kv.set("starvation_steps", std::to_string(t.starvation_steps));
  kv.set("literal_starvation", t.literal_starvation ? "true" : "false");
  kv.set("starvation_time", t.starvation_time);
  kv.set("missed_steps", std::to_string(t.missed_steps));
  kv.set("max_steps", std::to_string(t.max_steps));
  kv.set("dt", env.integration.dt);
  kv.set("control_interval", env.integration.control_interval);
  const auto phys_kv = sim::to_key_values(env.physics);
  for (const auto& [k, v] : phys_kv.entries()) kv.set("physics." + k, v);
  cpg::CpgConfig cc;
  cc.params = env.cpg;
  cc.integration = env.integration;
  const auto cpg_kv = cpg::to_key_values(cc);
  for (const auto& [k, v] : cpg_kv.entries()) {
    if (k.rfind("ic.", 0) != 0 && k != "dt" && k != "control_interval" && k != "c") kv.set("cpg." + k, v);
  }
  return kv;
}

namespace {

struct Transition {
  Vector actor_in, critic_in, critic_next;
  Action action{};
  double log_prob = 0.0;
  int option = 0;
  double reward = 0.0;
  bool done = false;
  bool terminal = false;
  bool chose_option = false;
  double q = 0.0;
  double u_next = 0.0;
  double adv_option = 0.0;
  double adv_termination = 0.0;
  double advantage = 0.0;
  double target = 0.0;
};

struct TrialRecord {
  int env = 0;
  int level = 1;
  Outcome outcome = Outcome::running;
  int steps = 0;
  double ret = 0.0;
  double final_rho = 0.0;
};

struct Worker {
  explicit Worker(GoalEnv e) : env(std::move(e)) {}

  GoalEnv env;
  bool needs_reset = true;
  sim::Observation obs;
  Action prev{};
  int option = 0;
  bool chose = false;
  double ret = 0.0;
  int steps = 0;
  std::vector<Transition> buffer;
  std::vector<Obs> raw;
  std::vector<TrialRecord> finished;
};

struct Snapshot {
  const Policy& policy;
  const CurriculumLevel& level;
  std::vector<double> radii;
  int level_number;
  bool frozen;
  int frozen_index;
  double margin;
};

bool is_terminal(Outcome o) {
  return o == Outcome::success || o == Outcome::starved || o == Outcome::missed_goal;
}

void collect(Worker& w, int env_index, const Snapshot& s, int steps) {
  const Policy& pol = s.policy;
  auto& rng = w.env.rng();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  w.buffer.clear();
  w.raw.clear();
  w.finished.clear();
  for (int k = 0; k < steps; ++k) {
    if (w.needs_reset) {
      if (s.frozen) w.option = s.frozen_index;
      w.obs = w.env.reset(s.level, s.radii, pol.options[w.option]);
      w.prev = {};
      w.ret = 0.0;
      w.steps = 0;
      w.needs_reset = false;
      w.chose = !s.frozen;
      if (!s.frozen) {
        const auto n0 = pol.normalizer.apply(w.obs.vector());
        w.option = pol.choose_option(pol.critic_input(n0, w.prev), true, rng);
      }
    }
    const Obs raw = w.obs.vector();
    w.raw.push_back(raw);
    const Obs norm = pol.normalizer.apply(raw);
    Transition t;
    t.actor_in = pol.actor_input(norm, w.prev, w.option);
    t.critic_in = pol.critic_input(norm, w.prev);
    const Decision d = pol.act(t.actor_in, true, rng);
    t.action = d.action;
    t.log_prob = d.log_prob;
    t.option = w.option;
    t.chose_option = w.chose;
    const Vector q = pol.option_values(t.critic_in);
    t.q = q[w.option];
    if (w.chose) t.adv_option = t.q - pol.option_probs(t.critic_in).dot(q);

    const StepResult r = w.env.step(d.action, pol.options[w.option]);
    t.reward = r.reward;
    t.done = r.outcome != Outcome::running;
    t.terminal = is_terminal(r.outcome);
    const Obs norm_next = pol.normalizer.apply(r.obs.vector());
    t.critic_next = pol.critic_input(norm_next, d.action);
    const Vector qn = pol.option_values(t.critic_next);
    const double vn = pol.option_probs(t.critic_next).dot(qn);
    const double beta = s.frozen ? 0.0 : pol.termination(t.critic_next, w.option);
    t.u_next = (1.0 - beta) * qn[w.option] + beta * vn;
    t.adv_termination = qn[w.option] - vn + s.margin;
    w.buffer.push_back(std::move(t));

    w.ret += r.reward;
    ++w.steps;
    w.prev = d.action;
    w.obs = r.obs;
    w.chose = false;
    if (r.outcome != Outcome::running) {
      w.finished.push_back({env_index, s.level_number, r.outcome, w.steps, w.ret, r.obs.rho});
      w.needs_reset = true;
    } else if (!s.frozen && unit(rng) < beta) {
      w.option = pol.choose_option(w.buffer.back().critic_next, true, rng);
      w.chose = true;
    }
  }
}

void advantages(std::vector<Transition>& buf, double gamma, double lambda) {
  double next = 0.0;
  for (std::size_t i = buf.size(); i-- > 0;) {
    auto& t = buf[i];
    const double delta = t.reward + gamma * (t.terminal ? 0.0 : t.u_next) - t.q;
    const bool last = i + 1 == buf.size();
    t.advantage = delta + (t.done || last ? 0.0 : gamma * lambda * next);
    t.target = t.advantage + t.q;
    next = t.advantage;
  }
}

Matrix stack(const std::vector<const Transition*>& batch, Vector Transition::*field) {
  Matrix m((batch.front()->*field).rows(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = batch[i]->*field;
  return m;
}

class Learner {
 public:
  Learner(Policy& p, const TrainConfig& cfg)
      : p_(p), cfg_(cfg), actor_opt_(p.actor), critic_opt_(p.critic), term_opt_(p.terminator),
        sel_opt_(p.selector), std_opt_(kActionDim) {}

  void update(std::vector<Transition>& data, bool frozen, Rng& rng) {
    double mean = 0.0, sq = 0.0;
    for (const auto& t : data) mean += t.advantage;
    mean /= static_cast<double>(data.size());
    for (const auto& t : data) sq += (t.advantage - mean) * (t.advantage - mean);
    const double sd = std::sqrt(sq / static_cast<double>(data.size())) + 1e-8;
    std::vector<double> adv(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) adv[i] = (data[i].advantage - mean) / sd;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t mb = static_cast<std::size_t>(cfg_.minibatch);
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += mb) {
        const std::size_t end = std::min(order.size(), start + mb);
        std::vector<const Transition*> batch;
        std::vector<double> batch_adv;
        for (std::size_t k = start; k < end; ++k) {
          batch.push_back(&data[order[k]]);
          batch_adv.push_back(adv[order[k]]);
        }
        step(batch, batch_adv, frozen);
      }
    }
  }

 private:
  void step(const std::vector<const Transition*>& batch, const std::vector<double>& adv, bool frozen) {
    const auto B = static_cast<Eigen::Index>(batch.size());
    const double inv = 1.0 / static_cast<double>(B);

    nn::Mlp::Cache actor_cache, critic_cache;
    const Matrix mu = p_.actor.forward(stack(batch, &Transition::actor_in), actor_cache);
    const Matrix q = p_.critic.forward(stack(batch, &Transition::critic_in), critic_cache);
    Matrix d_mu = Matrix::Zero(kActionDim, B);
    Matrix d_q = Matrix::Zero(q.rows(), B);
    Vector d_ls = Vector::Constant(kActionDim, -cfg_.entropy_coef);
    const Vector sigma = p_.log_std.array().exp();
    for (Eigen::Index i = 0; i < B; ++i) {
      const auto& t = *batch[static_cast<std::size_t>(i)];
      double logp = 0.0;
      Vector z(kActionDim);
      for (int j = 0; j < kActionDim; ++j) {
        z[j] = (t.action[j] - mu(j, i)) / sigma[j];
        logp += -0.5 * z[j] * z[j] - p_.log_std[j] - 0.5 * std::log(2.0 * std::numbers::pi);
      }
      const double ratio = std::exp(logp - t.log_prob);
      const double A = adv[static_cast<std::size_t>(i)];
      const bool active = A >= 0.0 ? ratio <= 1.0 + cfg_.clip : ratio >= 1.0 - cfg_.clip;
      if (active) {
        const double g = -A * ratio * inv;
        for (int j = 0; j < kActionDim; ++j) {
          d_mu(j, i) = g * z[j] / sigma[j];
          d_ls[j] += g * (z[j] * z[j] - 1.0);
        }
      }
      d_q(t.option, i) = cfg_.value_coef * (q(t.option, i) - t.target) * inv;
    }
    auto g_actor = p_.actor.backward(actor_cache, d_mu);
    auto g_critic = p_.critic.backward(critic_cache, d_q);
    std::vector<nn::Gradients*> grads{&g_actor, &g_critic};

    nn::Gradients g_term, g_sel;
    if (!frozen) {
      nn::Mlp::Cache term_cache, sel_cache;
      const Matrix zt = p_.terminator.forward(stack(batch, &Transition::critic_next), term_cache);
      const Matrix zs = p_.selector.forward(stack(batch, &Transition::critic_in), sel_cache);
      Matrix d_zt = Matrix::Zero(zt.rows(), B);
      Matrix d_zs = Matrix::Zero(zs.rows(), B);
      for (Eigen::Index i = 0; i < B; ++i) {
        const auto& t = *batch[static_cast<std::size_t>(i)];
        if (!t.done) {
          const double beta = sigmoid(zt(t.option, i));
          d_zt(t.option, i) = beta * (1.0 - beta) * t.adv_termination * inv;
        }
        if (t.chose_option) {
          const Vector pr = softmax(zs.col(i));
          const double H = -(pr.array() * (pr.array() + 1e-12).log()).sum();
          for (Eigen::Index o = 0; o < pr.size(); ++o) {
            const double onehot = o == t.option ? 1.0 : 0.0;
            d_zs(o, i) = (-t.adv_option * (onehot - pr[o]) +
                          cfg_.option_entropy * pr[o] * (std::log(pr[o] + 1e-12) + H)) * inv;
          }
        }
      }
      g_term = p_.terminator.backward(term_cache, d_zt);
      g_sel = p_.selector.backward(sel_cache, d_zs);
      grads.push_back(&g_term);
      grads.push_back(&g_sel);
    }
    nn::clip_global_norm(grads, &d_ls, cfg_.max_grad_norm);
    actor_opt_.step(p_.actor, g_actor, cfg_.learning_rate);
    critic_opt_.step(p_.critic, g_critic, cfg_.learning_rate);
    std_opt_.step(p_.log_std, d_ls, cfg_.learning_rate);
    p_.log_std = p_.log_std.cwiseMax(-5.0).cwiseMin(1.0);
    if (!frozen) {
      term_opt_.step(p_.terminator, g_term, cfg_.learning_rate);
      sel_opt_.step(p_.selector, g_sel, cfg_.learning_rate);
    }
  }

  Policy& p_;
  const TrainConfig& cfg_;
  nn::Adam actor_opt_, critic_opt_, term_opt_, sel_opt_;
  nn::AdamVector std_opt_;
};

std::string metrics_json(const IterationMetrics& m) {
  return nlohmann::json{{"iteration", m.iteration},       {"episodes", m.episodes},
                        {"steps", m.steps},               {"level", m.level},
                        {"success_rate", m.success_rate}, {"mean_reward", m.mean_reward},
                        {"options_frozen", m.options_frozen}}
      .dump();
}

}  // namespace

TrainResult train(const TrainConfig& cfg_in, const ProgressCallback& progress) {
  TrainConfig cfg = cfg_in;
  cfg.check();
  if (cfg.c < 0.0) cfg.c = default_c(cfg.variant);
  if (cfg.variant != Variant::ppoc) {
    cfg.options = {cfg.frozen_option};
    cfg.allow_unfreeze = false;
  }
  cfg.env.variant = cfg.variant;
  cfg.env.c = cfg.c;

  auto levels = cfg.curriculum_path.empty() ? default_curriculum() : load_curriculum(cfg.curriculum_path);
  if (cfg.levels > 0 && static_cast<std::size_t>(cfg.levels) < levels.size()) levels.resize(cfg.levels);
  if (cfg.target_level > static_cast<int>(levels.size())) {
    throw ConfigError("target_level exceeds the number of curriculum levels");
  }
  CurriculumTracker tracker(levels);

  Rng master(cfg.seed);
  Policy policy(cfg.variant, cfg.c, cfg.options, cfg.hidden, cfg.option_hidden, cfg.init_log_std, master);
  policy.meta.seed = cfg.seed;
  const int frozen_index = policy.option_index(cfg.frozen_option);

  std::vector<Worker> workers;
  for (int e = 0; e < cfg.envs; ++e) {
    Worker w(GoalEnv(cfg.env, cfg.seed * 1000003ULL + static_cast<std::uint64_t>(e) + 1));
    w.option = frozen_index;
    workers.push_back(std::move(w));
  }

  std::ofstream metrics_out, episodes_out;
  const std::string header = to_key_values(cfg).dump("# ");
  if (!cfg.metrics_path.empty()) {
    metrics_out.open(cfg.metrics_path);
    if (!metrics_out) throw ConfigError("cannot write " + cfg.metrics_path);
    nlohmann::json cfg_json = to_key_values(cfg).entries();
    metrics_out << nlohmann::json{{"config", cfg_json}, {"seed", cfg.seed}}.dump() << '\n';
  }
  if (!cfg.episodes_path.empty()) {
    episodes_out.open(cfg.episodes_path);
    if (!episodes_out) throw ConfigError("cannot write " + cfg.episodes_path);
    episodes_out << header << "episode,env,level,outcome,steps,return,final_rho\n";
  }

  Learner learner(policy, cfg);
  TrainResult result;
  bool frozen = true;
  long last_improvement = 0;
  int best_level = 0;
  double best_rate = -1.0;

  for (long iteration = 1;; ++iteration) {
    Snapshot snap{policy, tracker.level(), tracker.radii(), static_cast<int>(tracker.level_index()) + 1,
                  frozen, frozen_index, cfg.termination_margin};
    parallel_for(workers.size(), [&](std::size_t i) {
      collect(workers[i], static_cast<int>(i), snap, cfg.steps_per_env);
    }, cfg.workers);

    std::vector<Transition> data;
    std::vector<Obs> raw;
    double ret_sum = 0.0;
    int finished = 0;
    for (auto& w : workers) {
      advantages(w.buffer, cfg.gamma, cfg.lambda);
      std::move(w.buffer.begin(), w.buffer.end(), std::back_inserter(data));
      raw.insert(raw.end(), w.raw.begin(), w.raw.end());
      for (const auto& rec : w.finished) {
        ++policy.meta.episodes;
        ++finished;
        ret_sum += rec.ret;
        tracker.record(rec.outcome == Outcome::success);
        if (episodes_out) {
          episodes_out << policy.meta.episodes << ',' << rec.env << ',' << rec.level << ','
                       << to_string(rec.outcome) << ',' << rec.steps << ',' << format_double(rec.ret)
                       << ',' << format_double(rec.final_rho) << '\n';
        }
      }
    }
    policy.meta.steps += static_cast<long>(data.size());

    Rng shuffle_rng(cfg.seed + 7919ULL * static_cast<std::uint64_t>(iteration));
    learner.update(data, frozen, shuffle_rng);
    policy.normalizer.update(raw);
    if (!policy.finite()) throw DivergenceError("policy parameters became non-finite", iteration);

    const int level_number = static_cast<int>(tracker.level_index()) + 1;
    policy.meta.level = level_number;
    IterationMetrics m;
    m.iteration = iteration;
    m.episodes = policy.meta.episodes;
    m.steps = policy.meta.steps;
    m.level = level_number;
    m.success_rate = tracker.success_rate();
    m.mean_reward = finished > 0 ? ret_sum / finished : 0.0;
    m.options_frozen = frozen;
    result.history.push_back(m);
    if (metrics_out) metrics_out << metrics_json(m) << std::endl;
    if (progress) progress(m);

    if (level_number > best_level || (level_number == best_level && m.success_rate > best_rate + 0.02)) {
      best_level = level_number;
      best_rate = m.success_rate;
      last_improvement = policy.meta.episodes;
    }
    if (frozen && cfg.allow_unfreeze && policy.meta.episodes - last_improvement >= cfg.plateau_episodes) {
      frozen = false;
      policy.meta.options_frozen = false;
    }

    const bool target = cfg.target_level > 0 && level_number == cfg.target_level && tracker.window_full() &&
                        tracker.success_rate() >= cfg.target_rate;
    const bool stop = target || policy.meta.episodes >= cfg.max_episodes ||
                      (cfg.max_iterations > 0 && iteration >= cfg.max_iterations);
    if (!cfg.checkpoint_path.empty() && (stop || iteration % cfg.checkpoint_every == 0)) {
      policy.save(cfg.checkpoint_path);
    }
    if (stop) {
      result.target_reached = target;
      break;
    }
  }
  result.level_reached = static_cast<int>(tracker.level_index()) + 1;
  result.success_rate = tracker.success_rate();
  result.policy = std::move(policy);
  return result;
}

}  // namespace snakecpg::rl
