#include "pnn/pnn_model.hpp"

#include <cmath>
#include <sstream>

#include "pnn/error.hpp"

namespace pnn {

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "identity"; }

std::string to_string(Readout r) { return r == Readout::Flatten ? "flatten" : "mean"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  throw ArgumentError("unknown activation '" + s + "'");
}

Readout readout_from_string(const std::string& s) {
  if (s == "flatten") return Readout::Flatten;
  if (s == "mean") return Readout::MeanPool;
  throw ArgumentError("unknown readout '" + s + "'");
}

PnnConfig PnnConfig::uniform(int layers, int features, int order) {
  PnnConfig cfg;
  cfg.filter_order = order;
  cfg.widths.assign(static_cast<std::size_t>(std::max(layers, 0)), features);
  return cfg;
}

void PnnConfig::validate() const {
  if (widths.empty()) throw ArgumentError("PnnConfig: need at least one layer");
  if (filter_order < 0) throw ArgumentError("PnnConfig: filter order must be >= 0");
  for (int w : widths)
    if (w < 1) throw ArgumentError("PnnConfig: layer widths must be >= 1");
  for (int w : readout_widths)
    if (w < 1) throw ArgumentError("PnnConfig: readout widths must be >= 1");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0))
    throw ArgumentError("PnnConfig: batch-norm momentum must lie in (0, 1]");
}

void BnRunning::update(const Vector& batch_mean, const Vector& batch_var, double momentum) {
  mean = (1.0 - momentum) * mean + momentum * batch_mean;
  var = (1.0 - momentum) * var + momentum * batch_var;
}

// ---------------------------------------------------------------------------
// Parameter vector

Index PnnParams::size() const {
  Index n = 0;
  for (const auto& l : layers) {
    for (const auto& t : l.taps) n += t.size();
    n += l.bn_scale.size() + l.bn_shift.size();
  }
  for (const auto& d : readout) n += d.weight.size() + d.bias.size();
  return n;
}

namespace {

template <typename Params, typename Fn>
void for_each_block(Params& p, Fn&& fn) {
  for (auto& l : p.layers) {
    for (auto& t : l.taps) fn(t.data(), t.size());
    fn(l.bn_scale.data(), l.bn_scale.size());
    fn(l.bn_shift.data(), l.bn_shift.size());
  }
  for (auto& d : p.readout) {
    fn(d.weight.data(), d.weight.size());
    fn(d.bias.data(), d.bias.size());
  }
}

}  // namespace

Vector PnnParams::flatten() const {
  Vector h(size());
  Index pos = 0;
  for_each_block(*this, [&](const double* p, Index n) {
    h.segment(pos, n) = Eigen::Map<const Vector>(p, n);
    pos += n;
  });
  return h;
}

void PnnParams::unflatten(const Vector& h) {
  if (h.size() != size()) throw ArgumentError("PnnParams::unflatten: length mismatch");
  Index pos = 0;
  for_each_block(*this, [&](double* p, Index n) {
    Eigen::Map<Vector>(p, n) = h.segment(pos, n);
    pos += n;
  });
}

PnnParams PnnParams::zeros_like() const {
  PnnParams z = *this;
  for_each_block(z, [](double* p, Index n) { Eigen::Map<Vector>(p, n).setZero(); });
  return z;
}

double PnnParams::filter_sq_norm() const {
  double s = 0.0;
  for (const auto& l : layers)
    for (const auto& t : l.taps) s += t.squaredNorm();
  return s;
}

// ---------------------------------------------------------------------------
// Elementary pieces

Vector filter_apply(const SymMatrix& theta, const Vector& coeffs, const Vector& x) {
  if (coeffs.size() < 1) throw ArgumentError("filter_apply: need at least one coefficient");
  if (x.size() != theta.dim()) throw ArgumentError("filter_apply: signal length differs from shift dimension");
  Vector z = x;
  Vector out = coeffs(0) * z;
  for (Index k = 1; k < coeffs.size(); ++k) {
    z = theta.matrix() * z;
    out += coeffs(k) * z;
  }
  return out;
}

double spectral_response(const Vector& coeffs, double mu) {
  double acc = 0.0;
  for (Index k = coeffs.size(); k-- > 0;) acc = acc * mu + coeffs(k);
  return acc;
}

double task_loss(const Vector& y, const Vector& yhat) {
  if (y.size() == 0) throw ArgumentError("task_loss: empty input");
  if (y.size() != yhat.size()) throw ArgumentError("task_loss: length mismatch");
  return (y - yhat).squaredNorm() / static_cast<double>(y.size());
}

BatchNormResult batchnorm_forward(const std::vector<Matrix>& x, const Vector& scale,
                                  const Vector& shift, Mode mode, const BnRunning& running) {
  const auto features = static_cast<Index>(x.size());
  if (scale.size() != features || shift.size() != features)
    throw ArgumentError("batchnorm_forward: affine parameters do not match feature count");
  BatchNormResult r;
  r.batch_mean = Vector::Zero(features);
  r.batch_var = Vector::Zero(features);
  r.inv_std = Vector::Zero(features);
  r.floored.assign(x.size(), false);
  r.out.resize(x.size());
  r.normalized.resize(x.size());
  for (Index f = 0; f < features; ++f) {
    const Matrix& u = x[static_cast<std::size_t>(f)];
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::Train) {
      if (u.cols() < 2) throw ArgumentError("batchnorm_forward: training mode needs a batch of at least 2");
      mean = u.mean();
      var = (u.array() - mean).square().mean();
      r.batch_mean(f) = mean;
      r.batch_var(f) = var;
    } else {
      mean = running.mean(f);
      var = running.var(f);
    }
    const bool floored = var < kBnVarianceFloor;
    r.floored[static_cast<std::size_t>(f)] = floored;
    r.inv_std(f) = 1.0 / std::sqrt(floored ? kBnVarianceFloor : var);
    r.normalized[static_cast<std::size_t>(f)] = (u.array() - mean) * r.inv_std(f);
    r.out[static_cast<std::size_t>(f)] =
        (r.normalized[static_cast<std::size_t>(f)].array() * scale(f) + shift(f)).matrix();
  }
  return r;
}

std::vector<DenseLayer> init_mlp(Index inputs, const std::vector<int>& hidden,
                                 std::mt19937_64& rng) {
  std::vector<DenseLayer> out;
  Index fan_in = inputs;
  auto add = [&](Index width) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer d;
    d.weight.resize(width, fan_in);
    for (Index j = 0; j < d.weight.cols(); ++j)
      for (Index i = 0; i < d.weight.rows(); ++i) d.weight(i, j) = u(rng);
    d.bias = Vector::Zero(width);
    out.push_back(std::move(d));
    fan_in = width;
  };
  for (int w : hidden) add(w);
  add(1);
  return out;
}

PnnParams init_params(const PnnConfig& cfg, Index nodes, std::mt19937_64& rng) {
  cfg.validate();
  if (nodes < 1) throw ArgumentError("init_params: need at least one node");
  PnnParams p;
  for (int l = 0; l < cfg.layers(); ++l) {
    const int fin = cfg.in_width(l);
    const int fout = cfg.out_width(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fin * (cfg.filter_order + 1)));
    std::uniform_real_distribution<double> u(-bound, bound);
    LayerParams lp;
    for (int k = 0; k <= cfg.filter_order; ++k) {
      Matrix t(fout, fin);
      for (Index j = 0; j < t.cols(); ++j)
        for (Index i = 0; i < t.rows(); ++i) t(i, j) = u(rng);
      if (k == 0) t.array() += 1.0 / fin;
      lp.taps.push_back(std::move(t));
    }
    lp.bn_scale = Vector::Ones(fout);
    lp.bn_shift = Vector::Zero(fout);
    p.layers.push_back(std::move(lp));
    p.running.push_back({Vector::Zero(fout), Vector::Ones(fout)});
  }
  const int last = cfg.out_width(cfg.layers() - 1);
  const Index pooled = cfg.readout == Readout::Flatten ? nodes * last : last;
  p.readout = init_mlp(pooled, cfg.readout_widths, rng);
  return p;
}

// ---------------------------------------------------------------------------
// MLP

Matrix mlp_forward(const std::vector<DenseLayer>& layers, const Matrix& input, MlpTape* tape) {
  Matrix h = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& d = layers[l];
    if (d.weight.cols() != h.rows()) throw ArgumentError("mlp_forward: input width mismatch");
    Matrix pre = (d.weight * h).colwise() + d.bias;
    if (tape) {
      tape->in.push_back(h);
      tape->pre.push_back(pre);
    }
    h = (l + 1 < layers.size()) ? Matrix(pre.cwiseMax(0.0)) : pre;
  }
  return h;
}

Matrix mlp_backward(const std::vector<DenseLayer>& layers, const MlpTape& tape,
                    const Matrix& dout, std::vector<DenseLayer>& grads) {
  Matrix d = dout;
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (l + 1 < layers.size()) d = d.cwiseProduct((tape.pre[l].array() > 0.0).cast<double>().matrix());
    grads[l].weight += d * tape.in[l].transpose();
    grads[l].bias += d.rowwise().sum();
    d = layers[l].weight.transpose() * d;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

Matrix activate(Activation a, const Matrix& z) {
  return a == Activation::Relu ? Matrix(z.cwiseMax(0.0)) : z;
}

Matrix pool(const PnnConfig& cfg, const std::vector<Matrix>& feats) {
  const Index nodes = feats.front().rows();
  const Index batch = feats.front().cols();
  const auto f_count = static_cast<Index>(feats.size());
  if (cfg.readout == Readout::Flatten) {
    Matrix r(nodes * f_count, batch);
    for (Index f = 0; f < f_count; ++f) r.middleRows(f * nodes, nodes) = feats[static_cast<std::size_t>(f)];
    return r;
  }
  Matrix r(f_count, batch);
  for (Index f = 0; f < f_count; ++f) r.row(f) = feats[static_cast<std::size_t>(f)].colwise().mean();
  return r;
}

std::vector<Matrix> unpool(const PnnConfig& cfg, const Matrix& d, Index nodes, Index f_count) {
  std::vector<Matrix> out(static_cast<std::size_t>(f_count));
  for (Index f = 0; f < f_count; ++f) {
    if (cfg.readout == Readout::Flatten) {
      out[static_cast<std::size_t>(f)] = d.middleRows(f * nodes, nodes);
    } else {
      out[static_cast<std::size_t>(f)] =
          Matrix::Ones(nodes, 1) * (d.row(f) / static_cast<double>(nodes));
    }
  }
  return out;
}

}  // namespace

ForwardTape pnn_forward(const PnnConfig& cfg, const PnnParams& params, const SymMatrix& theta,
                        const Matrix& batch, Mode mode) {
  if (batch.rows() != theta.dim())
    throw ArgumentError("pnn_forward: batch signal length differs from shift dimension");
  if (static_cast<int>(params.layers.size()) != cfg.layers())
    throw ArgumentError("pnn_forward: parameter layers do not match config");
  ForwardTape tape;
  tape.mode = mode;
  const Matrix& shift = theta.matrix();
  std::vector<Matrix> current{batch};
  for (int l = 0; l < cfg.layers(); ++l) {
    const LayerParams& lp = params.layers[static_cast<std::size_t>(l)];
    const int fin = cfg.in_width(l);
    const int fout = cfg.out_width(l);
    LayerTape lt;
    lt.powers.resize(static_cast<std::size_t>(fin));
    for (int j = 0; j < fin; ++j) {
      auto& pw = lt.powers[static_cast<std::size_t>(j)];
      pw.reserve(static_cast<std::size_t>(cfg.filter_order + 1));
      pw.push_back(current[static_cast<std::size_t>(j)]);
      for (int k = 1; k <= cfg.filter_order; ++k) pw.push_back(shift * pw.back());
    }
    lt.filtered.assign(static_cast<std::size_t>(fout), Matrix::Zero(batch.rows(), batch.cols()));
    for (int f = 0; f < fout; ++f) {
      Matrix& u = lt.filtered[static_cast<std::size_t>(f)];
      for (int j = 0; j < fin; ++j)
        for (int k = 0; k <= cfg.filter_order; ++k)
          u += lp.taps[static_cast<std::size_t>(k)](f, j) * lt.powers[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    }
    if (cfg.batch_norm) {
      lt.bn = batchnorm_forward(lt.filtered, lp.bn_scale, lp.bn_shift, mode,
                                params.running[static_cast<std::size_t>(l)]);
      lt.preact = lt.bn.out;
    } else {
      lt.preact = lt.filtered;
    }
    lt.out.reserve(static_cast<std::size_t>(fout));
    for (int f = 0; f < fout; ++f) {
      lt.out.push_back(activate(cfg.activation, lt.preact[static_cast<std::size_t>(f)]));
      if (!lt.out.back().allFinite()) {
        std::ostringstream os;
        os << "pnn_forward: non-finite activation in layer " << l;
        throw NumericalError(os.str());
      }
    }
    current = lt.out;
    tape.layers.push_back(std::move(lt));
  }
  MlpTape mt;
  const Matrix out = mlp_forward(params.readout, pool(cfg, current), &mt);
  tape.readout_in = std::move(mt.in);
  tape.readout_pre = std::move(mt.pre);
  tape.predictions = out.row(0).transpose();
  if (!tape.predictions.allFinite()) throw NumericalError("pnn_forward: non-finite prediction in readout");
  return tape;
}

void update_running_stats(const PnnConfig& cfg, PnnParams& params, const ForwardTape& tape) {
  if (!cfg.batch_norm || tape.mode != Mode::Train) return;
  for (std::size_t l = 0; l < tape.layers.size(); ++l)
    params.running[l].update(tape.layers[l].bn.batch_mean, tape.layers[l].bn.batch_var,
                             cfg.bn_momentum);
}

Backward pnn_backward(const PnnConfig& cfg, const PnnParams& params, const SymMatrix& theta,
                      const ForwardTape& tape, const Vector& dpred, bool want_theta) {
  Backward g;
  g.params = params.zeros_like();
  const Index nodes = theta.dim();
  const Matrix& shift = theta.matrix();
  if (want_theta) g.theta = Matrix::Zero(nodes, nodes);

  MlpTape mt{tape.readout_in, tape.readout_pre};
  const Matrix dpooled = mlp_backward(params.readout, mt, dpred.transpose(), g.params.readout);
  std::vector<Matrix> dcur = unpool(cfg, dpooled, nodes, cfg.out_width(cfg.layers() - 1));

  for (int l = cfg.layers(); l-- > 0;) {
    const LayerParams& lp = params.layers[static_cast<std::size_t>(l)];
    LayerParams& gl = g.params.layers[static_cast<std::size_t>(l)];
    const LayerTape& lt = tape.layers[static_cast<std::size_t>(l)];
    const int fin = cfg.in_width(l);
    const int fout = cfg.out_width(l);

    std::vector<Matrix> dfilt(static_cast<std::size_t>(fout));
    for (int f = 0; f < fout; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      Matrix dz = dcur[fi];
      if (cfg.activation == Activation::Relu)
        dz = dz.cwiseProduct((lt.preact[fi].array() > 0.0).cast<double>().matrix());
      if (cfg.batch_norm) {
        const Matrix& xhat = lt.bn.normalized[fi];
        gl.bn_scale(f) += dz.cwiseProduct(xhat).sum();
        gl.bn_shift(f) += dz.sum();
        const Matrix dxhat = dz * lp.bn_scale(f);
        const double inv_std = lt.bn.inv_std(f);
        if (tape.mode == Mode::Eval) {
          dfilt[fi] = dxhat * inv_std;
        } else {
          const double mean_d = dxhat.mean();
          if (lt.bn.floored[fi]) {
            dfilt[fi] = (dxhat.array() - mean_d) * inv_std;
          } else {
            const double mean_dx = dxhat.cwiseProduct(xhat).mean();
            dfilt[fi] = (dxhat.array() - mean_d - xhat.array() * mean_dx) * inv_std;
          }
        }
      } else {
        dfilt[fi] = dz;
      }
    }

    std::vector<Matrix> dprev(static_cast<std::size_t>(fin));
    for (int j = 0; j < fin; ++j) {
      const auto ji = static_cast<std::size_t>(j);
      const auto& pw = lt.powers[ji];
      // adjoint of every power Theta^k x_j, folded from the top order down
      Matrix adj;
      for (int k = cfg.filter_order; k >= 0; --k) {
        const auto ki = static_cast<std::size_t>(k);
        Matrix gk = Matrix::Zero(nodes, pw[0].cols());
        for (int f = 0; f < fout; ++f) {
          const auto fi = static_cast<std::size_t>(f);
          gl.taps[ki](f, j) += dfilt[fi].cwiseProduct(pw[ki]).sum();
          gk += lp.taps[ki](f, j) * dfilt[fi];
        }
        if (k == cfg.filter_order) {
          adj = std::move(gk);
        } else {
          adj = gk + shift.transpose() * adj;
        }
        if (k > 0 && want_theta) g.theta.noalias() += adj * pw[ki - 1].transpose();
      }
      dprev[ji] = std::move(adj);
    }
    dcur = std::move(dprev);
  }
  return g;
}

ParamGradient grad_params(const PnnConfig& cfg, const PnnParams& params, const SymMatrix& theta,
                          const Matrix& batch, const Vector& y, double alpha, double beta) {
  if (y.size() != batch.cols()) throw ArgumentError("grad_params: target count differs from batch size");
  ParamGradient r;
  r.tape = pnn_forward(cfg, params, theta, batch, Mode::Train);
  r.loss = task_loss(y, r.tape.predictions);
  r.objective = alpha * r.loss + beta * params.filter_sq_norm();
  const Vector dpred = alpha * 2.0 * (r.tape.predictions - y) / static_cast<double>(y.size());
  Backward b = pnn_backward(cfg, params, theta, r.tape, dpred, false);
  r.grad = std::move(b.params);
  if (beta > 0.0) {
    for (std::size_t l = 0; l < r.grad.layers.size(); ++l)
      for (std::size_t k = 0; k < r.grad.layers[l].taps.size(); ++k)
        r.grad.layers[l].taps[k] += 2.0 * beta * params.layers[l].taps[k];
  }
  return r;
}

ShiftGradient grad_shift(const PnnConfig& cfg, const PnnParams& params,
                         const SymMatrix& theta_tilde, const Matrix& batch, const Vector& y,
                         const SymMatrix& anchor, double gamma, double alpha) {
  if (y.size() != batch.cols()) throw ArgumentError("grad_shift: target count differs from batch size");
  if (anchor.dim() != theta_tilde.dim()) throw ArgumentError("grad_shift: anchor dimension mismatch");
  ShiftGradient r;
  r.tape = pnn_forward(cfg, params, theta_tilde, batch, Mode::Train);
  r.loss = task_loss(y, r.tape.predictions);
  const Matrix gap = anchor.matrix() - theta_tilde.matrix();
  r.objective = alpha * r.loss + 0.5 * gamma * gap.squaredNorm();
  Matrix g = -gamma * gap;
  if (alpha != 0.0) {
    const Vector dpred = alpha * 2.0 * (r.tape.predictions - y) / static_cast<double>(y.size());
    const Backward b = pnn_backward(cfg, params, theta_tilde, r.tape, dpred, true);
    g += b.theta;
  }
  r.grad = SymMatrix(Matrix(0.5 * (g + g.transpose())));
  return r;
}

}  // namespace pnn
