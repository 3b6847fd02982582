#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnn/glasso.hpp"
#include "pnn/pnn_model.hpp"
#include "pnn/stats.hpp"

namespace pnn {

enum class TrainMode { Sample, GL, Naive, Joint, VNN, PCA };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vector m;
  Vector v;
  long step = 0;

  static AdamState zeros(Index size);
};

/// One bias-corrected Adam step on `params` in place. Throws NumericalError
/// on a non-finite gradient.
void adam_update(Vector& params, const Vector& grads, AdamState& state, double eta,
                 const AdamConfig& cfg);

/// Hyperparameters shared by every training mode. `lambda0` is scaled by
/// sqrt(log n / t) with t the training size; `m_overshoot` sets the spectral
/// bound relative to the smallest covariance eigenvalue.
struct JointConfig {
  double alpha = 0.5;
  double lambda0 = 10.0;
  double gamma = 10.0;
  double eps = 1e-3;
  double eta = 0.01;
  double beta = 0.0;
  double m_overshoot = 2.0;
  int epochs = 10;
  int inner_theta = 20;
  int inner_tilde = 20;
  int inner_h = 20;
  AdamConfig adam;
  std::uint64_t seed = 0;
  double ridge = 0.0;
  bool standardize = false;
  int batch_size = 0;  // 0 uses the whole training split per update
  int pca_components = 0;  // 0 picks min(n, 8)

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double step1_objective = 0.0;
  double task_loss = 0.0;
  double tether_gap = 0.0;  // ||Theta - Theta_tilde||_F after the epoch
  Index zero_count = 0;
};

struct TrainState {
  SymMatrix theta;
  SymMatrix theta_tilde;
  PnnParams params;
  AdamState adam;
  int epoch = 0;
  std::vector<EpochRecord> history;
};

/// Everything needed to predict and to report. `shift` is the operator the
/// network runs on; `precision` is the reported estimate (empty for VNN and
/// PCA). For Joint they differ: shift is Theta_tilde, precision is Theta.
struct TrainedModel {
  TrainMode mode = TrainMode::Joint;
  PnnConfig pnn;
  JointConfig config;
  FeatureTransform transform;
  double target_mean = 0.0;

  SymMatrix shift;
  SymMatrix precision;
  double m_bound = 0.0;
  PnnParams params;

  Matrix components;  // PCA: n x k
  std::vector<DenseLayer> mlp;

  std::vector<EpochRecord> history;
  std::vector<double> loss_trace;  // training MSE before each parameter update
};

/// Hooks into training; every member is optional.
struct TrainHooks {
  IterateObserver step1;
  std::function<void(int iteration, const SymMatrix& theta, const SymMatrix& theta_tilde)> shift_update;
  std::function<void(int epoch, const TrainState&)> epoch_end;
};

TrainedModel train_joint(const Dataset& d, const JointConfig& cfg, const PnnConfig& pnn_cfg,
                         const TrainHooks& hooks = {});
TrainedModel train_naive(const Dataset& d, const JointConfig& cfg, const PnnConfig& pnn_cfg);
/// mode must be Sample, GL or VNN.
TrainedModel train_twostage(const Dataset& d, TrainMode mode, const JointConfig& cfg,
                            const PnnConfig& pnn_cfg);
/// MLP readout on the top-k principal components; cfg supplies the optimizer
/// settings and pnn_cfg.readout_widths the hidden layers.
TrainedModel train_pca_baseline(const Dataset& d, Index k, const JointConfig& cfg,
                                const PnnConfig& pnn_cfg);

/// Dispatches on mode.
TrainedModel train_model(TrainMode mode, const Dataset& d, const JointConfig& cfg,
                         const PnnConfig& pnn_cfg, const TrainHooks& hooks = {});

/// Evaluation-mode predictions for raw (untransformed) samples in columns.
Vector predict(const TrainedModel& m, const Matrix& x);

/// Top-k eigenvectors of c, largest eigenvalue first.
Matrix principal_components(const SymMatrix& c, Index k);

}  // namespace pnn
