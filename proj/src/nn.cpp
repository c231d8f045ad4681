#include "snakecpg/nn.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "snakecpg/errors.hpp"

namespace snakecpg::nn {

void Gradients::scale(double s) {
  for (auto& w : dW) w *= s;
  for (auto& b : db) b *= s;
}

double Gradients::squared_norm() const {
  double n = 0.0;
  for (const auto& w : dW) n += w.squaredNorm();
  for (const auto& b : db) n += b.squaredNorm();
  return n;
}

Mlp::Mlp(const std::vector<int>& sizes, std::mt19937_64& rng, double out_gain) {
  if (sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    if (in <= 0 || out <= 0) throw ConfigError("layer sizes must be positive");
    const bool last = l + 2 == sizes.size();
    const double gain = (last ? out_gain : 1.0) / std::sqrt(static_cast<double>(in));
    Matrix W(out, in);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = gain * normal(rng);
    W_.push_back(std::move(W));
    b_.push_back(Vector::Zero(out));
  }
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    Matrix z = (W_[l] * h).colwise() + b_[l];
    h = l + 1 < W_.size() ? Matrix(z.array().tanh()) : z;
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, Cache& cache) const {
  cache.activations.clear();
  cache.activations.push_back(x);
  Matrix h = x;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    Matrix z = (W_[l] * h).colwise() + b_[l];
    if (l + 1 < W_.size()) {
      h = z.array().tanh();
      cache.activations.push_back(h);
    } else {
      h = z;
    }
  }
  return h;
}

Gradients Mlp::backward(const Cache& cache, const Matrix& d_out) const {
  Gradients g = zero_gradients();
  Matrix delta = d_out;
  for (std::size_t l = W_.size(); l-- > 0;) {
    const Matrix& input = cache.activations[l];
    g.dW[l] = delta * input.transpose();
    g.db[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (W_[l].transpose() * delta).cwiseProduct(Matrix((1.0 - input.array().square()).matrix()));
    }
  }
  return g;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& W : W_) g.dW.push_back(Matrix::Zero(W.rows(), W.cols()));
  for (const auto& b : b_) g.db.push_back(Vector::Zero(b.size()));
  return g;
}

bool Mlp::finite() const {
  for (const auto& W : W_) {
    if (!W.allFinite()) return false;
  }
  for (const auto& b : b_) {
    if (!b.allFinite()) return false;
  }
  return true;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < W_.size(); ++l) {
    const auto& W = W_[l];
    std::vector<double> w(W.data(), W.data() + W.size());
    std::vector<double> b(b_[l].data(), b_[l].data() + b_[l].size());
    layers.push_back({{"rows", W.rows()}, {"cols", W.cols()}, {"W", w}, {"b", b}});
  }
  return {{"layers", layers}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net;
  for (const auto& layer : j.at("layers")) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto w = layer.at("W").get<std::vector<double>>();
    const auto b = layer.at("b").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
      throw ConfigError("checkpoint layer has inconsistent shape");
    }
    net.W_.push_back(Eigen::Map<const Matrix>(w.data(), rows, cols));
    net.b_.push_back(Eigen::Map<const Vector>(b.data(), rows));
  }
  if (net.W_.empty()) throw ConfigError("checkpoint network has no layers");
  for (std::size_t l = 1; l < net.W_.size(); ++l) {
    if (net.W_[l].cols() != net.W_[l - 1].rows()) throw ConfigError("checkpoint layers do not chain");
  }
  return net;
}

Adam::Adam(const Mlp& net, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void Adam::step(Mlp& net, const Gradients& g, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    update(net.weights()[l], g.dW[l], m_.dW[l], v_.dW[l]);
    update(net.biases()[l], g.db[l], m_.db[l], v_.db[l]);
  }
}

AdamVector::AdamVector(Eigen::Index n, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(Vector::Zero(n)), v_(Vector::Zero(n)) {}

void AdamVector::step(Vector& x, const Vector& g, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  m_ = beta1_ * m_ + (1.0 - beta1_) * g;
  v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
  x.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void clip_global_norm(std::vector<Gradients*> grads, Vector* extra, double max_norm) {
  double sq = 0.0;
  for (const auto* g : grads) sq += g->squared_norm();
  if (extra) sq += extra->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const double s = max_norm / norm;
  for (auto* g : grads) g->scale(s);
  if (extra) *extra *= s;
}

}  // namespace snakecpg::nn
