#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

namespace improvkit {

struct GlmScorer {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

// Fully connected ReLU network with a single sigmoid output.
// weights[l] is (out x in); the last layer has one row.
struct MlpScorer {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

using Scorer = std::variant<GlmScorer, MlpScorer>;

inline constexpr double kLossClamp = 1e-7;

inline bool is_glm(const Scorer& m) { return std::holds_alternative<GlmScorer>(m); }
int input_dim(const Scorer& m);
int num_params(const Scorer& m);

// Parameters flattened as GLM: (w, b); MLP: per layer row-major W then b.
Eigen::VectorXd get_params(const Scorer& m);
void set_params(Scorer& m, const Eigen::VectorXd& theta);

GlmScorer make_glm(int d);
// hidden: widths of the hidden layers. uniform(+-1/sqrt(fan_in)) init.
MlpScorer make_mlp(int d, const std::vector<int>& hidden, std::uint64_t seed);
// MLP with every parameter zero.
MlpScorer zero_mlp(int d, const std::vector<int>& hidden);

double logit(const Scorer& m, const Eigen::VectorXd& x);
double score(const Scorer& m, const Eigen::VectorXd& x);
// Scores of every row of X.
Eigen::VectorXd scores(const Scorer& m, const Eigen::MatrixXd& X);
inline bool accepted(double s) { return s >= 0.5; }

// Returns the logit and writes d logit / d theta into grad (resized as needed).
double logit_param_grad(const Scorer& m, const Eigen::VectorXd& x, Eigen::VectorXd& grad);
// d logit / d x.
Eigen::VectorXd logit_input_grad(const Scorer& m, const Eigen::VectorXd& x);
// d score / d x = s(1-s) d logit / d x.
Eigen::VectorXd grad_score_wrt_input(const Scorer& m, const Eigen::VectorXd& x);

// Cross-entropy with the score clamped to [eps, 1-eps].
double loss(int y, double s);
// d loss / d logit; zero where the clamp is active.
double loss_grad_logit(int y, double s);

}  // namespace improvkit
