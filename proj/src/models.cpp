#include "improvkit/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "improvkit/error.hpp"
#include "improvkit/gaussian.hpp"
#include "improvkit/rng.hpp"

namespace improvkit {

namespace {

void check_dim(int expected, const Eigen::VectorXd& x) {
  if (x.size() != expected)
    throw PreconditionError("input dimension " + std::to_string(x.size()) + ", model expects " +
                            std::to_string(expected));
}

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// Forward pass keeping post-activation values for each layer.
double mlp_forward(const MlpScorer& m, const Eigen::VectorXd& x, std::vector<Eigen::VectorXd>& acts) {
  const std::size_t L = m.weights.size();
  acts.resize(L);
  acts[0] = x;
  for (std::size_t l = 0; l + 1 < L; ++l)
    acts[l + 1] = (m.weights[l] * acts[l] + m.biases[l]).cwiseMax(0.0);
  return (m.weights[L - 1] * acts[L - 1])(0) + m.biases[L - 1](0);
}

}  // namespace

int input_dim(const Scorer& m) {
  return std::visit(overloaded{[](const GlmScorer& g) { return static_cast<int>(g.weights.size()); },
                               [](const MlpScorer& n) { return static_cast<int>(n.weights.front().cols()); }},
                    m);
}

int num_params(const Scorer& m) {
  return std::visit(overloaded{[](const GlmScorer& g) { return static_cast<int>(g.weights.size()) + 1; },
                               [](const MlpScorer& n) {
                                 int k = 0;
                                 for (std::size_t l = 0; l < n.weights.size(); ++l)
                                   k += n.weights[l].size() + n.biases[l].size();
                                 return k;
                               }},
                    m);
}

Eigen::VectorXd get_params(const Scorer& m) {
  Eigen::VectorXd theta(num_params(m));
  if (const auto* g = std::get_if<GlmScorer>(&m)) {
    theta.head(g->weights.size()) = g->weights;
    theta(g->weights.size()) = g->bias;
    return theta;
  }
  const auto& n = std::get<MlpScorer>(m);
  int k = 0;
  for (std::size_t l = 0; l < n.weights.size(); ++l) {
    for (int r = 0; r < n.weights[l].rows(); ++r)
      for (int c = 0; c < n.weights[l].cols(); ++c) theta(k++) = n.weights[l](r, c);
    for (int r = 0; r < n.biases[l].size(); ++r) theta(k++) = n.biases[l](r);
  }
  return theta;
}

void set_params(Scorer& m, const Eigen::VectorXd& theta) {
  if (theta.size() != num_params(m)) throw PreconditionError("parameter vector size mismatch");
  if (auto* g = std::get_if<GlmScorer>(&m)) {
    g->weights = theta.head(g->weights.size());
    g->bias = theta(g->weights.size());
    return;
  }
  auto& n = std::get<MlpScorer>(m);
  int k = 0;
  for (std::size_t l = 0; l < n.weights.size(); ++l) {
    for (int r = 0; r < n.weights[l].rows(); ++r)
      for (int c = 0; c < n.weights[l].cols(); ++c) n.weights[l](r, c) = theta(k++);
    for (int r = 0; r < n.biases[l].size(); ++r) n.biases[l](r) = theta(k++);
  }
}

GlmScorer make_glm(int d) {
  GlmScorer g;
  g.weights = Eigen::VectorXd::Zero(d);
  return g;
}

MlpScorer zero_mlp(int d, const std::vector<int>& hidden) {
  MlpScorer m;
  int in = d;
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden layer width must be >= 1");
    m.weights.push_back(Eigen::MatrixXd::Zero(h, in));
    m.biases.push_back(Eigen::VectorXd::Zero(h));
    in = h;
  }
  m.weights.push_back(Eigen::MatrixXd::Zero(1, in));
  m.biases.push_back(Eigen::VectorXd::Zero(1));
  return m;
}

MlpScorer make_mlp(int d, const std::vector<int>& hidden, std::uint64_t seed) {
  MlpScorer m = zero_mlp(d, hidden);
  Rng rng(derive_seed(seed, streams::kInit));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const double r = 1.0 / std::sqrt(static_cast<double>(m.weights[l].cols()));
    std::uniform_real_distribution<double> u(-r, r);
    for (int i = 0; i < m.weights[l].rows(); ++i)
      for (int j = 0; j < m.weights[l].cols(); ++j) m.weights[l](i, j) = u(rng);
    for (int i = 0; i < m.biases[l].size(); ++i) m.biases[l](i) = u(rng);
  }
  return m;
}

double logit(const Scorer& m, const Eigen::VectorXd& x) {
  check_dim(input_dim(m), x);
  if (const auto* g = std::get_if<GlmScorer>(&m)) return g->weights.dot(x) + g->bias;
  thread_local std::vector<Eigen::VectorXd> acts;
  return mlp_forward(std::get<MlpScorer>(m), x, acts);
}

double score(const Scorer& m, const Eigen::VectorXd& x) { return sigmoid(logit(m, x)); }

Eigen::VectorXd scores(const Scorer& m, const Eigen::MatrixXd& X) {
  if (X.cols() != input_dim(m)) throw PreconditionError("input dimension mismatch");
  Eigen::VectorXd out(X.rows());
  if (const auto* g = std::get_if<GlmScorer>(&m)) {
    out.noalias() = X * g->weights;
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = sigmoid(out(i) + g->bias);
    return out;
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = score(m, X.row(i).transpose());
  return out;
}

double logit_param_grad(const Scorer& m, const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
  check_dim(input_dim(m), x);
  grad.resize(num_params(m));
  if (const auto* g = std::get_if<GlmScorer>(&m)) {
    grad.head(x.size()) = x;
    grad(x.size()) = 1.0;
    return g->weights.dot(x) + g->bias;
  }
  const auto& n = std::get<MlpScorer>(m);
  thread_local std::vector<Eigen::VectorXd> acts;
  const double out = mlp_forward(n, x, acts);
  const std::size_t L = n.weights.size();
  // offsets of each layer's block in theta
  std::vector<int> offset(L);
  int k = 0;
  for (std::size_t l = 0; l < L; ++l) {
    offset[l] = k;
    k += n.weights[l].size() + n.biases[l].size();
  }
  Eigen::VectorXd upstream = Eigen::VectorXd::Ones(1);  // d logit / d pre-activation of layer l
  for (std::size_t li = L; li-- > 0;) {
    const Eigen::VectorXd& a = acts[li];
    int p = offset[li];
    for (int r = 0; r < n.weights[li].rows(); ++r)
      for (int c = 0; c < n.weights[li].cols(); ++c) grad(p++) = upstream(r) * a(c);
    for (int r = 0; r < n.biases[li].size(); ++r) grad(p++) = upstream(r);
    if (li == 0) break;
    Eigen::VectorXd back = n.weights[li].transpose() * upstream;
    for (int r = 0; r < back.size(); ++r)
      if (!(a(r) > 0.0)) back(r) = 0.0;  // ReLU subgradient 0 at the kink
    upstream = std::move(back);
  }
  return out;
}

Eigen::VectorXd logit_input_grad(const Scorer& m, const Eigen::VectorXd& x) {
  check_dim(input_dim(m), x);
  if (const auto* g = std::get_if<GlmScorer>(&m)) return g->weights;
  const auto& n = std::get<MlpScorer>(m);
  thread_local std::vector<Eigen::VectorXd> acts;
  mlp_forward(n, x, acts);
  const std::size_t L = n.weights.size();
  Eigen::VectorXd upstream = n.weights[L - 1].row(0).transpose();
  for (std::size_t li = L - 1; li-- > 0;) {
    const Eigen::VectorXd& post = acts[li + 1];
    for (int r = 0; r < upstream.size(); ++r)
      if (!(post(r) > 0.0)) upstream(r) = 0.0;
    upstream = n.weights[li].transpose() * upstream;
  }
  return upstream;
}

Eigen::VectorXd grad_score_wrt_input(const Scorer& m, const Eigen::VectorXd& x) {
  const double s = score(m, x);
  return s * (1.0 - s) * logit_input_grad(m, x);
}

double loss(int y, double s) {
  const double c = std::clamp(s, kLossClamp, 1.0 - kLossClamp);
  return y == 1 ? -std::log(c) : -std::log(1.0 - c);
}

double loss_grad_logit(int y, double s) {
  if (s < kLossClamp || s > 1.0 - kLossClamp) return 0.0;
  return s - y;
}

}  // namespace improvkit
