#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pnn/linalg.hpp"

namespace pnn {

enum class Activation { Relu, Identity };
enum class Readout { Flatten, MeanPool };
enum class Mode { Train, Eval };

std::string to_string(Activation a);
std::string to_string(Readout r);
Activation activation_from_string(const std::string& s);
Readout readout_from_string(const std::string& s);

/// Architecture of a precision network: `widths[l]` output features in
/// layer l (the first layer reads a single feature per node), polynomial
/// filters of order `filter_order`, then pooling and an MLP readout with
/// rectified hidden layers ending in one scalar.
struct PnnConfig {
  int filter_order = 2;
  std::vector<int> widths = {8, 8};
  Activation activation = Activation::Relu;
  bool batch_norm = true;
  Readout readout = Readout::Flatten;
  std::vector<int> readout_widths = {64};
  double bn_momentum = 0.1;

  /// L layers of F features each.
  static PnnConfig uniform(int layers, int features, int order);

  int layers() const noexcept { return static_cast<int>(widths.size()); }
  int in_width(int layer) const { return layer == 0 ? 1 : widths.at(static_cast<std::size_t>(layer - 1)); }
  int out_width(int layer) const { return widths.at(static_cast<std::size_t>(layer)); }

  void validate() const;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

/// taps[k](f, j) is the coefficient of Theta^k on the filter from input
/// feature j to output feature f.
struct LayerParams {
  std::vector<Matrix> taps;
  Vector bn_scale;
  Vector bn_shift;
};

struct BnRunning {
  Vector mean;
  Vector var;

  void update(const Vector& batch_mean, const Vector& batch_var, double momentum);
};

/// Learnable coefficients plus batch-norm running statistics. The running
/// statistics are buffers, not parameters: flatten() skips them.
struct PnnParams {
  std::vector<LayerParams> layers;
  std::vector<DenseLayer> readout;
  std::vector<BnRunning> running;

  Index size() const;
  Vector flatten() const;
  /// Inverse of flatten(); `h` must have exactly size() entries.
  void unflatten(const Vector& h);
  /// Same shapes, all learnable entries zero.
  PnnParams zeros_like() const;
  /// Sum of squares of the filter taps only.
  double filter_sq_norm() const;
};

inline constexpr double kBnVarianceFloor = 1e-5;

/// Per-feature normalization of a feature batch (one nodes x samples matrix
/// per feature) pooled over nodes and samples.
struct BatchNormResult {
  std::vector<Matrix> out;
  std::vector<Matrix> normalized;  // before scale/shift
  Vector batch_mean;
  Vector batch_var;
  Vector inv_std;
  std::vector<bool> floored;
};

BatchNormResult batchnorm_forward(const std::vector<Matrix>& x, const Vector& scale,
                                  const Vector& shift, Mode mode, const BnRunning& running);

struct LayerTape {
  std::vector<std::vector<Matrix>> powers;  // [input feature][k] = Theta^k x_j
  std::vector<Matrix> filtered;             // filter-bank sums, before batch norm
  BatchNormResult bn;                       // empty when batch norm is off
  std::vector<Matrix> preact;
  std::vector<Matrix> out;
};

struct ForwardTape {
  Mode mode = Mode::Train;
  std::vector<LayerTape> layers;
  std::vector<Matrix> readout_in;   // input of every dense layer
  std::vector<Matrix> readout_pre;  // output of every dense layer before activation
  Vector predictions;
};

/// sum_k coeffs[k] Theta^k x by repeated multiplication.
Vector filter_apply(const SymMatrix& theta, const Vector& coeffs, const Vector& x);

/// sum_k coeffs[k] mu^k
double spectral_response(const Vector& coeffs, double mu);

/// Fills parameters: taps and readout weights uniform in +-1/sqrt(fan_in),
/// h_0 of every filter raised by 1/F_in so the bank starts near identity.
PnnParams init_params(const PnnConfig& cfg, Index nodes, std::mt19937_64& rng);

/// Forward pass over a batch whose columns are graph signals. Throws
/// NumericalError naming the layer if an activation is non-finite.
ForwardTape pnn_forward(const PnnConfig& cfg, const PnnParams& params, const SymMatrix& theta,
                        const Matrix& batch, Mode mode = Mode::Train);

/// Update running batch-norm statistics from a training-mode tape.
void update_running_stats(const PnnConfig& cfg, PnnParams& params, const ForwardTape& tape);

double task_loss(const Vector& y, const Vector& yhat);

/// Reverse pass. Returns the gradient of sum_b dpred[b] * yhat[b].
struct Backward {
  PnnParams params;
  Matrix theta;  // not symmetrized; empty unless requested
};
Backward pnn_backward(const PnnConfig& cfg, const PnnParams& params, const SymMatrix& theta,
                      const ForwardTape& tape, const Vector& dpred, bool want_theta);

struct ParamGradient {
  double objective = 0.0;
  double loss = 0.0;
  PnnParams grad;
  ForwardTape tape;
};

/// Gradient of alpha * MSE + beta * ||taps||^2 over every learnable entry.
ParamGradient grad_params(const PnnConfig& cfg, const PnnParams& params, const SymMatrix& theta,
                          const Matrix& batch, const Vector& y, double alpha = 1.0,
                          double beta = 0.0);

struct ShiftGradient {
  double objective = 0.0;
  double loss = 0.0;
  SymMatrix grad;
  ForwardTape tape;
};

/// Gradient in theta_tilde of alpha * MSE(theta_tilde) +
/// gamma/2 ||anchor - theta_tilde||_F^2, symmetrized as (G + G^T)/2.
ShiftGradient grad_shift(const PnnConfig& cfg, const PnnParams& params,
                         const SymMatrix& theta_tilde, const Matrix& batch, const Vector& y,
                         const SymMatrix& anchor, double gamma, double alpha);

/// The dense MLP used by the readout, also reused by the PCA baseline.
struct MlpTape {
  std::vector<Matrix> in;
  std::vector<Matrix> pre;
};
Matrix mlp_forward(const std::vector<DenseLayer>& layers, const Matrix& input, MlpTape* tape);
/// Accumulates weight gradients into `grads` and returns d(input).
Matrix mlp_backward(const std::vector<DenseLayer>& layers, const MlpTape& tape,
                    const Matrix& dout, std::vector<DenseLayer>& grads);
std::vector<DenseLayer> init_mlp(Index inputs, const std::vector<int>& hidden,
                                 std::mt19937_64& rng);

}  // namespace pnn
