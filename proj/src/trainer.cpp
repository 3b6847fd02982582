#include "pnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pnn/datagen.hpp"
#include "pnn/error.hpp"
#include "pnn/metrics.hpp"

namespace pnn {

namespace {

constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kBatchStream = 5;

// Seed-controlled minibatches. With batch_size 0 (or >= t) every call yields
// the full split without copying.
class BatchSampler {
 public:
  BatchSampler(const Matrix& x, const Vector& y, int batch_size, std::uint64_t seed)
      : x_(x), y_(y), rng_(seed) {
    const Index t = x.cols();
    size_ = (batch_size <= 0 || batch_size >= t) ? t : batch_size;
    order_.resize(static_cast<std::size_t>(t));
    std::iota(order_.begin(), order_.end(), Index{0});
    cursor_ = order_.size();
  }

  bool full() const { return size_ == x_.cols(); }

  void next() {
    if (full()) return;
    if (cursor_ + static_cast<std::size_t>(size_) > order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    bx_.resize(x_.rows(), size_);
    by_.resize(size_);
    for (Index b = 0; b < size_; ++b) {
      const Index c = order_[cursor_ + static_cast<std::size_t>(b)];
      bx_.col(b) = x_.col(c);
      by_(b) = y_(c);
    }
    cursor_ += static_cast<std::size_t>(size_);
  }

  const Matrix& x() const { return full() ? x_ : bx_; }
  const Vector& y() const { return full() ? y_ : by_; }

 private:
  const Matrix& x_;
  const Vector& y_;
  std::mt19937_64 rng_;
  Index size_ = 0;
  std::vector<Index> order_;
  std::size_t cursor_ = 0;
  Matrix bx_;
  Vector by_;
};

// Training split after the feature transform, with centered targets.
struct Prepared {
  FeatureTransform transform;
  Matrix x;
  Vector y;
  double target_mean = 0.0;
  SymMatrix c;
  double m_bound = 0.0;
  double lambda = 0.0;
};

Prepared prepare(const Dataset& d, const JointConfig& cfg) {
  cfg.validate();
  if (d.features() < 2 || d.samples() < 2)
    throw ArgumentError("training needs at least 2 features and 2 samples");
  Prepared p;
  p.transform = FeatureTransform::fit(d.x, cfg.standardize);
  p.x = p.transform.apply(d.x);
  p.target_mean = d.y.mean();
  p.y = d.y.array() - p.target_mean;
  p.c = sample_covariance(p.x, false);
  p.m_bound = default_spectral_bound(p.c, cfg.m_overshoot);
  p.lambda = scaled_lambda(cfg.lambda0, d.features(), d.samples());
  return p;
}

SymMatrix feasible_start(const Prepared& p, const JointConfig& cfg) {
  return spectral_norm_clip(psd_project(sample_precision(p.c, cfg.ridge)), p.m_bound);
}

TrainedModel model_shell(TrainMode mode, const Prepared& p, const JointConfig& cfg,
                         const PnnConfig& pnn_cfg) {
  TrainedModel m;
  m.mode = mode;
  m.pnn = pnn_cfg;
  m.config = cfg;
  m.transform = p.transform;
  m.target_mean = p.target_mean;
  m.m_bound = p.m_bound;
  return m;
}

// One Adam step on the network weights with `shift` held fixed.
double param_step(const PnnConfig& pnn_cfg, const JointConfig& cfg, PnnParams& params,
                  AdamState& adam, const SymMatrix& shift, BatchSampler& batches, double alpha) {
  batches.next();
  ParamGradient g = grad_params(pnn_cfg, params, shift, batches.x(), batches.y(), alpha, cfg.beta);
  update_running_stats(pnn_cfg, params, g.tape);
  Vector h = params.flatten();
  adam_update(h, g.grad.flatten(), adam, cfg.eta, cfg.adam);
  params.unflatten(h);
  return g.loss;
}

std::string where(int epoch, const char* step) {
  return "epoch " + std::to_string(epoch) + ", " + step;
}

Vector mlp_flatten(const std::vector<DenseLayer>& layers) {
  Index size = 0;
  for (const auto& l : layers) size += l.weight.size() + l.bias.size();
  Vector h(size);
  Index pos = 0;
  for (const auto& l : layers) {
    h.segment(pos, l.weight.size()) = l.weight.reshaped();
    pos += l.weight.size();
    h.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  }
  return h;
}

void mlp_unflatten(std::vector<DenseLayer>& layers, const Vector& h) {
  Index pos = 0;
  for (auto& l : layers) {
    l.weight.reshaped() = h.segment(pos, l.weight.size());
    pos += l.weight.size();
    l.bias = h.segment(pos, l.bias.size());
    pos += l.bias.size();
  }
}

}  // namespace

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::Sample: return "sample";
    case TrainMode::GL: return "gl";
    case TrainMode::Naive: return "naive";
    case TrainMode::Joint: return "joint";
    case TrainMode::VNN: return "vnn";
    case TrainMode::PCA: return "pca";
  }
  return "joint";
}

TrainMode train_mode_from_string(const std::string& s) {
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (TrainMode m : {TrainMode::Sample, TrainMode::GL, TrainMode::Naive, TrainMode::Joint, TrainMode::VNN,
                      TrainMode::PCA})
    if (to_string(m) == lower) return m;
  throw ArgumentError("unknown training mode '" + s + "'");
}

AdamState AdamState::zeros(Index size) {
  AdamState s;
  s.m = Vector::Zero(size);
  s.v = Vector::Zero(size);
  return s;
}

void adam_update(Vector& params, const Vector& grads, AdamState& state, double eta,
                 const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw ArgumentError("adam_update: gradient length mismatch");
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ArgumentError("adam_update: moment length mismatch");
  if (!grads.allFinite()) throw NumericalError("adam_update: non-finite gradient");
  ++state.step;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.array() -= eta * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

void JointConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("JointConfig: alpha must lie in [0, 1]");
  if (!(lambda0 >= 0.0)) throw ArgumentError("JointConfig: lambda0 must be >= 0");
  if (!(gamma >= 0.0)) throw ArgumentError("JointConfig: gamma must be >= 0");
  if (!(eps > 0.0)) throw ArgumentError("JointConfig: eps must be > 0");
  if (!(eta > 0.0)) throw ArgumentError("JointConfig: eta must be > 0");
  if (!(beta >= 0.0)) throw ArgumentError("JointConfig: beta must be >= 0");
  if (!(m_overshoot >= 1.0)) throw ArgumentError("JointConfig: m_overshoot must be >= 1");
  if (epochs < 1 || inner_theta < 1 || inner_tilde < 1 || inner_h < 1)
    throw ArgumentError("JointConfig: iteration counts must be >= 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.eps > 0.0))
    throw ArgumentError("JointConfig: invalid Adam constants");
  if (!(ridge >= 0.0)) throw ArgumentError("JointConfig: ridge must be >= 0");
  if (batch_size < 0 || batch_size == 1) throw ArgumentError("JointConfig: batch_size must be 0 or >= 2");
  if (pca_components < 0) throw ArgumentError("JointConfig: pca_components must be >= 0");
}

TrainedModel train_joint(const Dataset& d, const JointConfig& cfg, const PnnConfig& pnn_cfg,
                         const TrainHooks& hooks) {
  pnn_cfg.validate();
  const Prepared p = prepare(d, cfg);
  TrainedModel model = model_shell(TrainMode::Joint, p, cfg, pnn_cfg);

  std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream));
  TrainState st;
  st.theta = feasible_start(p, cfg);
  st.theta_tilde = st.theta;
  st.params = init_params(pnn_cfg, d.features(), init_rng);
  st.adam = AdamState::zeros(st.params.size());
  BatchSampler batches(p.x, p.y, cfg.batch_size, derive_seed(cfg.seed, kBatchStream));

  GlassoProblem step1;
  step1.c = p.c;
  step1.lambda = p.lambda;
  step1.eps = cfg.eps;
  step1.gamma = cfg.gamma;
  step1.alpha = cfg.alpha;
  step1.m_bound = p.m_bound;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      step1.tether = st.theta_tilde;
      GlassoSolution s = solve_step1(step1, st.theta, cfg.eta, cfg.inner_theta, hooks.step1);
      st.theta = std::move(s.theta);
      rec.step1_objective = s.objective_trace.back();
    } catch (const Error& e) {
      rethrow_with_context(e, where(epoch, "precision step"));
    }

    try {
      for (int it = 0; it < cfg.inner_tilde; ++it) {
        batches.next();
        const ShiftGradient g = grad_shift(pnn_cfg, st.params, st.theta_tilde, batches.x(), batches.y(),
                                           st.theta, cfg.gamma, cfg.alpha);
        SymMatrix next = st.theta_tilde - cfg.eta * g.grad;
        if (!next.matrix().allFinite())
          throw DivergenceError("shift update became non-finite at iteration " + std::to_string(it), it);
        st.theta_tilde = std::move(next);
        if (hooks.shift_update) hooks.shift_update(it, st.theta, st.theta_tilde);
      }
    } catch (const Error& e) {
      rethrow_with_context(e, where(epoch, "shift step"));
    }

    try {
      for (int it = 0; it < cfg.inner_h; ++it) {
        const double loss = param_step(pnn_cfg, cfg, st.params, st.adam, st.theta_tilde, batches, cfg.alpha);
        model.loss_trace.push_back(loss);
        rec.task_loss = loss;
      }
    } catch (const Error& e) {
      rethrow_with_context(e, where(epoch, "network step"));
    }

    rec.tether_gap = frobenius_distance(st.theta, st.theta_tilde);
    rec.zero_count = count_zeros(st.theta);
    st.history.push_back(rec);
    st.epoch = epoch + 1;
    if (hooks.epoch_end) hooks.epoch_end(epoch, st);
  }

  model.precision = st.theta;
  model.shift = st.theta_tilde;
  model.params = std::move(st.params);
  model.history = std::move(st.history);
  return model;
}

TrainedModel train_naive(const Dataset& d, const JointConfig& cfg, const PnnConfig& pnn_cfg) {
  pnn_cfg.validate();
  const Prepared p = prepare(d, cfg);
  TrainedModel model = model_shell(TrainMode::Naive, p, cfg, pnn_cfg);
  const Index n = d.features();

  std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream));
  SymMatrix theta = feasible_start(p, cfg);
  PnnParams params = init_params(pnn_cfg, n, init_rng);
  AdamState adam = AdamState::zeros(params.size());
  BatchSampler batches(p.x, p.y, cfg.batch_size, derive_seed(cfg.seed, kBatchStream));
  const SymMatrix zero = SymMatrix::zero(n);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      for (int it = 0; it < cfg.inner_theta; ++it) {
        batches.next();
        const ShiftGradient task =
            grad_shift(pnn_cfg, params, theta, batches.x(), batches.y(), zero, 0.0, cfg.alpha);
        const EigPair e = sym_eig(theta);
        const Vector inv = (e.values.array() + cfg.eps).inverse().matrix();
        Matrix g = p.c.matrix() - e.vectors * inv.asDiagonal() * e.vectors.transpose();
        for (Index j = 0; j < n; ++j)
          for (Index i = 0; i < n; ++i)
            if (i != j && theta(i, j) != 0.0) g(i, j) += p.lambda * (theta(i, j) > 0.0 ? 1.0 : -1.0);
        const Matrix step = theta.matrix() - cfg.eta * (task.grad.matrix() + (1.0 - cfg.alpha) * g);
        if (!step.allFinite())
          throw DivergenceError("precision update became non-finite at iteration " + std::to_string(it), it);
        theta = spectral_norm_clip(psd_project(SymMatrix(step)), p.m_bound);
      }
    } catch (const Error& e) {
      rethrow_with_context(e, where(epoch, "precision step"));
    }

    try {
      for (int it = 0; it < cfg.inner_h; ++it) {
        const double loss = param_step(pnn_cfg, cfg, params, adam, theta, batches, cfg.alpha);
        model.loss_trace.push_back(loss);
        rec.task_loss = loss;
      }
    } catch (const Error& e) {
      rethrow_with_context(e, where(epoch, "network step"));
    }
    rec.zero_count = count_zeros(theta);
    model.history.push_back(rec);
  }

  theta = soft_threshold_offdiag(theta, cfg.eta * (1.0 - cfg.alpha) * p.lambda);
  model.precision = theta;
  model.shift = theta;
  model.params = std::move(params);
  return model;
}

TrainedModel train_twostage(const Dataset& d, TrainMode mode, const JointConfig& cfg,
                            const PnnConfig& pnn_cfg) {
  if (mode != TrainMode::Sample && mode != TrainMode::GL && mode != TrainMode::VNN)
    throw ArgumentError("train_twostage: mode must be sample, gl or vnn");
  pnn_cfg.validate();
  const Prepared p = prepare(d, cfg);
  TrainedModel model = model_shell(mode, p, cfg, pnn_cfg);

  try {
    switch (mode) {
      case TrainMode::Sample:
        model.precision = sample_precision(p.c, cfg.ridge);
        model.shift = model.precision;
        break;
      case TrainMode::GL: {
        GlassoProblem gl;
        gl.c = p.c;
        gl.lambda = p.lambda;
        gl.eps = cfg.eps;
        gl.m_bound = p.m_bound;
        model.precision = solve_step1(gl, feasible_start(p, cfg), cfg.eta, cfg.epochs * cfg.inner_theta).theta;
        model.shift = model.precision;
        break;
      }
      default:
        model.shift = p.c;
        break;
    }
  } catch (const Error& e) {
    rethrow_with_context(e, "shift estimation");
  }

  std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream));
  PnnParams params = init_params(pnn_cfg, d.features(), init_rng);
  AdamState adam = AdamState::zeros(params.size());
  BatchSampler batches(p.x, p.y, cfg.batch_size, derive_seed(cfg.seed, kBatchStream));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      for (int it = 0; it < cfg.inner_h; ++it) {
        const double loss = param_step(pnn_cfg, cfg, params, adam, model.shift, batches, 1.0);
        model.loss_trace.push_back(loss);
        rec.task_loss = loss;
      }
    } catch (const Error& e) {
      rethrow_with_context(e, where(epoch, "network step"));
    }
    if (!model.precision.empty()) rec.zero_count = count_zeros(model.precision);
    model.history.push_back(rec);
  }
  model.params = std::move(params);
  return model;
}

Matrix principal_components(const SymMatrix& c, Index k) {
  if (k < 1 || k > c.dim()) throw ArgumentError("principal_components: k must lie in [1, n]");
  const EigPair e = sym_eig(c);
  return e.vectors.rightCols(k).rowwise().reverse();
}

TrainedModel train_pca_baseline(const Dataset& d, Index k, const JointConfig& cfg,
                                const PnnConfig& pnn_cfg) {
  const Prepared p = prepare(d, cfg);
  if (k < 1 || k > d.features()) throw ArgumentError("train_pca_baseline: k must lie in [1, n]");
  TrainedModel model = model_shell(TrainMode::PCA, p, cfg, pnn_cfg);
  model.components = principal_components(p.c, k);
  const Matrix z = model.components.transpose() * p.x;

  std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream));
  model.mlp = init_mlp(k, pnn_cfg.readout_widths, init_rng);
  Vector h = mlp_flatten(model.mlp);
  AdamState adam = AdamState::zeros(h.size());
  BatchSampler batches(z, p.y, cfg.batch_size, derive_seed(cfg.seed, kBatchStream));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    for (int it = 0; it < cfg.inner_h; ++it) {
      batches.next();
      MlpTape tape;
      const Vector pred = mlp_forward(model.mlp, batches.x(), &tape).row(0).transpose();
      const Vector& y = batches.y();
      const double loss = task_loss(y, pred);
      if (!std::isfinite(loss)) throw NumericalError(where(epoch, "PCA readout") + ": non-finite loss");
      std::vector<DenseLayer> grads = model.mlp;
      for (auto& g : grads) {
        g.weight.setZero();
        g.bias.setZero();
      }
      const Matrix dout = (2.0 / static_cast<double>(y.size()) * (pred - y)).transpose();
      mlp_backward(model.mlp, tape, dout, grads);
      adam_update(h, mlp_flatten(grads), adam, cfg.eta, cfg.adam);
      mlp_unflatten(model.mlp, h);
      model.loss_trace.push_back(loss);
      rec.task_loss = loss;
    }
    model.history.push_back(rec);
  }
  return model;
}

TrainedModel train_model(TrainMode mode, const Dataset& d, const JointConfig& cfg,
                         const PnnConfig& pnn_cfg, const TrainHooks& hooks) {
  switch (mode) {
    case TrainMode::Joint: return train_joint(d, cfg, pnn_cfg, hooks);
    case TrainMode::Naive: return train_naive(d, cfg, pnn_cfg);
    case TrainMode::PCA: {
      const Index k = cfg.pca_components > 0 ? std::min<Index>(cfg.pca_components, d.features())
                                             : std::min<Index>(8, d.features());
      return train_pca_baseline(d, k, cfg, pnn_cfg);
    }
    default: return train_twostage(d, mode, cfg, pnn_cfg);
  }
}

Vector predict(const TrainedModel& m, const Matrix& x) {
  if (x.rows() != m.transform.mean.size())
    throw ArgumentError("predict: expected " + std::to_string(m.transform.mean.size()) + " features, got " +
                        std::to_string(x.rows()));
  const Matrix xt = m.transform.apply(x);
  Vector out;
  if (m.mode == TrainMode::PCA) {
    out = mlp_forward(m.mlp, m.components.transpose() * xt, nullptr).row(0).transpose();
  } else {
    out = pnn_forward(m.pnn, m.params, m.shift, xt, Mode::Eval).predictions;
  }
  return out.array() + m.target_mean;
}

}  // namespace pnn
