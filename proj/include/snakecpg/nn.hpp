#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

// Small dense networks with tanh hidden layers, trained by hand-written
// backprop and Adam. Batches are stored column-wise (features x samples).
namespace snakecpg::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Gradients {
  std::vector<Matrix> dW;
  std::vector<Vector> db;

  void scale(double s);
  double squared_norm() const;
};

class Mlp {
 public:
  Mlp() = default;
  // sizes = {inputs, hidden..., outputs}; the last layer is scaled by `out_gain`.
  Mlp(const std::vector<int>& sizes, std::mt19937_64& rng, double out_gain = 1.0);

  struct Cache {
    std::vector<Matrix> activations;  // input, hidden outputs
  };

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  // dOut is d loss / d output for the batch; returns parameter gradients.
  Gradients backward(const Cache& cache, const Matrix& d_out) const;

  Gradients zero_gradients() const;
  int inputs() const { return static_cast<int>(W_.front().cols()); }
  int outputs() const { return static_cast<int>(W_.back().rows()); }
  bool finite() const;

  std::vector<Matrix>& weights() { return W_; }
  std::vector<Vector>& biases() { return b_; }
  const std::vector<Matrix>& weights() const { return W_; }
  const std::vector<Vector>& biases() const { return b_; }

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<Matrix> W_;
  std::vector<Vector> b_;
};

class Adam {
 public:
  explicit Adam(const Mlp& net, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(Mlp& net, const Gradients& g, double lr);

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  Gradients m_, v_;
};

// Adam for a loose parameter vector (e.g. a log standard deviation).
class AdamVector {
 public:
  AdamVector(Eigen::Index n = 0, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(Vector& x, const Vector& g, double lr);

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  Vector m_, v_;
};

// Scales the gradients down so their joint norm is at most max_norm.
void clip_global_norm(std::vector<Gradients*> grads, Vector* extra, double max_norm);

}  // namespace snakecpg::nn
