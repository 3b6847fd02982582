// Command-line front end: synth, glasso, train, experiment, rate-check.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pnn/datagen.hpp"
#include "pnn/error.hpp"
#include "pnn/glasso.hpp"
#include "pnn/harness.hpp"
#include "pnn/metrics.hpp"
#include "pnn/model_io.hpp"
#include "pnn/stats.hpp"
#include "pnn/trainer.hpp"

namespace {

using nlohmann::json;
using namespace pnn;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Argument: return 2;
    case ErrorKind::Domain: return 3;
    case ErrorKind::Numerical: return 4;
    case ErrorKind::Convergence: return 5;
    case ErrorKind::Divergence: return 6;
    case ErrorKind::Parse: return 7;
    case ErrorKind::Io: return 8;
  }
  return 1;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
}

// Flags shared by train and experiment. Values are applied on top of an
// ExperimentConfig only when given on the command line.
struct ConfigFlags {
  std::string config_path;
  std::string mode;
  std::string features, targets;
  bool header = false;
  Index n = 0, t = 0;
  double sparsity = 0, snr = 0;
  bool snr_db = false;
  std::uint64_t data_seed = 0, seed = 0;
  std::vector<double> split;
  int repeats = 0;
  double alpha = 0, lambda0 = 0, gamma = 0, eps = 0, eta = 0, beta = 0, m_overshoot = 0, ridge = 0;
  int epochs = 0, inner_theta = 0, inner_tilde = 0, inner_h = 0, batch_size = 0, pca_components = 0;
  bool standardize = false;
  int layers = 0, filters = 0, order = 0;
  std::string activation, readout;
  bool no_batch_norm = false;
  std::vector<int> readout_widths;
  std::vector<int> grid_layers, grid_filters, grid_orders;
  std::vector<double> grid_lambda0;
  bool paper_grid = false;
  std::vector<double> freeze;
  unsigned workers = 0;
  bool record_timing = false;
  std::string out;

  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool experiment) {
    opts["config"] = app->add_option("--config", config_path, "JSON config file; flags override it");
    opts["mode"] = app->add_option("--mode", mode, "sample, gl, naive, joint, vnn or pca");
    opts["features"] = app->add_option("--features", features, "features CSV (n rows x t columns)");
    opts["targets"] = app->add_option("--targets", targets, "targets CSV (t lines)");
    opts["header"] = app->add_flag("--header", header, "CSV files start with a header line");
    opts["n"] = app->add_option("--n", n, "synthetic: number of features");
    opts["t"] = app->add_option("--t", t, "synthetic: number of samples");
    opts["sparsity"] = app->add_option("--sparsity", sparsity, "synthetic: nonzero fraction of the precision");
    opts["snr"] = app->add_option("--snr", snr, "synthetic: signal-to-noise ratio");
    opts["snr_db"] = app->add_flag("--snr-db", snr_db, "synthetic: --snr is in decibels");
    opts["data_seed"] = app->add_option("--data-seed", data_seed, "synthetic: generator seed");
    opts["seed"] = app->add_option("--seed", seed, "seed for splits and training");
    opts["split"] = app->add_option("--split", split, "train,val,test fractions")->delimiter(',')->expected(3);
    opts["alpha"] = app->add_option("--alpha", alpha);
    opts["lambda0"] = app->add_option("--lambda0", lambda0);
    opts["gamma"] = app->add_option("--gamma", gamma);
    opts["eps"] = app->add_option("--eps", eps);
    opts["eta"] = app->add_option("--eta", eta);
    opts["beta"] = app->add_option("--beta", beta);
    opts["m_overshoot"] = app->add_option("--m-overshoot", m_overshoot);
    opts["ridge"] = app->add_option("--ridge", ridge);
    opts["epochs"] = app->add_option("--epochs", epochs);
    opts["inner_theta"] = app->add_option("--inner-theta", inner_theta);
    opts["inner_tilde"] = app->add_option("--inner-tilde", inner_tilde);
    opts["inner_h"] = app->add_option("--inner-h", inner_h);
    opts["batch_size"] = app->add_option("--batch-size", batch_size, "0 uses the full training split");
    opts["pca_components"] = app->add_option("--pca-components", pca_components);
    opts["standardize"] = app->add_flag("--standardize", standardize);
    opts["layers"] = app->add_option("--layers", layers);
    opts["filters"] = app->add_option("--filters", filters, "filters per layer");
    opts["order"] = app->add_option("--order", order, "polynomial filter order");
    opts["activation"] = app->add_option("--activation", activation, "relu or identity");
    opts["readout"] = app->add_option("--readout", readout, "flatten or mean");
    opts["no_batch_norm"] = app->add_flag("--no-batch-norm", no_batch_norm);
    opts["readout_widths"] = app->add_option("--readout-widths", readout_widths)->delimiter(',');
    opts["out"] = app->add_option("--out", out, experiment ? "results JSON path (a .csv is written alongside)"
                                                             : "path for the trained model");
    if (!experiment) return;
    opts["repeats"] = app->add_option("--repeats", repeats);
    opts["grid_layers"] = app->add_option("--grid-layers", grid_layers)->delimiter(',');
    opts["grid_filters"] = app->add_option("--grid-filters", grid_filters)->delimiter(',');
    opts["grid_orders"] = app->add_option("--grid-orders", grid_orders)->delimiter(',');
    opts["grid_lambda0"] = app->add_option("--grid-lambda0", grid_lambda0)->delimiter(',');
    opts["paper_grid"] = app->add_flag("--paper-grid", paper_grid, "L in {1,2,3}, F in {8,16}, K in {1,2,3}, lambda0 in {1,10,20}");
    opts["freeze"] = app->add_option("--freeze", freeze, "L,F,K,lambda0: skip the grid search")->delimiter(',')->expected(4);
    opts["workers"] = app->add_option("--workers", workers);
    opts["record_timing"] = app->add_flag("--record-timing", record_timing, "store wall time per repeat");
  }

  bool given(const std::string& k) const {
    const auto it = opts.find(k);
    return it != opts.end() && it->second->count() > 0;
  }

  ExperimentConfig build() const {
    ExperimentConfig c;
    if (given("config")) c = experiment_config_from_json(read_text(config_path));
    if (given("mode")) c.mode = train_mode_from_string(mode);
    if (given("features") || given("targets")) {
      c.features_path = features;
      c.targets_path = targets;
      c.synthetic.reset();
    }
    if (given("header")) c.csv_header = header;
    const bool synth_flag = given("n") || given("t") || given("sparsity") || given("snr") || given("snr_db") ||
                            given("data_seed");
    if (synth_flag) {
      if (!c.features_path.empty()) throw ArgumentError("synthetic flags conflict with CSV input");
      SyntheticSpec s = c.synthetic.value_or(SyntheticSpec{});
      if (given("n")) s.n = n;
      if (given("t")) s.t = t;
      if (given("sparsity")) s.sparsity = sparsity;
      if (given("snr")) s.snr = snr;
      if (given("snr_db")) s.snr_in_db = snr_db;
      if (given("data_seed")) s.seed = data_seed;
      c.synthetic = s;
    }
    if (given("seed")) c.seed = seed;
    if (given("split")) c.fractions = {split.at(0), split.at(1), split.at(2)};
    if (given("repeats")) c.repeats = repeats;
    JointConfig& j = c.joint;
    if (given("alpha")) j.alpha = alpha;
    if (given("lambda0")) j.lambda0 = lambda0;
    if (given("gamma")) j.gamma = gamma;
    if (given("eps")) j.eps = eps;
    if (given("eta")) j.eta = eta;
    if (given("beta")) j.beta = beta;
    if (given("m_overshoot")) j.m_overshoot = m_overshoot;
    if (given("ridge")) j.ridge = ridge;
    if (given("epochs")) j.epochs = epochs;
    if (given("inner_theta")) j.inner_theta = inner_theta;
    if (given("inner_tilde")) j.inner_tilde = inner_tilde;
    if (given("inner_h")) j.inner_h = inner_h;
    if (given("batch_size")) j.batch_size = batch_size;
    if (given("pca_components")) j.pca_components = pca_components;
    if (given("standardize")) j.standardize = standardize;
    PnnConfig& p = c.pnn;
    if (given("layers") || given("filters")) {
      const int l = given("layers") ? layers : p.layers();
      const int f = given("filters") ? filters : (p.widths.empty() ? 8 : p.widths.front());
      if (l < 1) throw ArgumentError("--layers must be >= 1");
      p.widths.assign(static_cast<std::size_t>(l), f);
    }
    if (given("order")) p.filter_order = order;
    if (given("activation")) p.activation = activation_from_string(activation);
    if (given("readout")) p.readout = readout_from_string(readout);
    if (given("no_batch_norm")) p.batch_norm = false;
    if (given("readout_widths")) p.readout_widths = readout_widths;
    if (paper_grid) c.grid = HyperGrid{{1, 2, 3}, {8, 16}, {1, 2, 3}, {1.0, 10.0, 20.0}};
    if (given("grid_layers")) c.grid.layers = grid_layers;
    if (given("grid_filters")) c.grid.features = grid_filters;
    if (given("grid_orders")) c.grid.orders = grid_orders;
    if (given("grid_lambda0")) c.grid.lambda0 = grid_lambda0;
    if (given("freeze"))
      c.frozen = HyperChoice{static_cast<int>(freeze.at(0)), static_cast<int>(freeze.at(1)),
                             static_cast<int>(freeze.at(2)), freeze.at(3)};
    if (given("workers")) c.workers = workers;
    if (given("record_timing")) c.record_timing = record_timing;
    if (given("out")) c.output = out;
    c.validate();
    return c;
  }
};

int cmd_synth(const SyntheticSpec& spec, const std::string& fpath, const std::string& tpath,
              const std::string& ppath) {
  const SyntheticInstance inst = generate_instance(spec);
  write_instance_csv(inst, fpath, tpath);
  if (!ppath.empty()) write_csv_matrix(inst.theta0.matrix(), ppath);
  std::cout << "wrote " << spec.n << " x " << spec.t << " features to " << fpath << ", targets to " << tpath;
  if (!ppath.empty()) std::cout << ", precision to " << ppath;
  std::cout << "\n";
  return 0;
}

struct GlassoFlags {
  std::string features, out;
  bool header = false;
  double lambda0 = 10.0, eps = 1e-3, eta = 0.01, alpha = 0.0, gamma = 0.0, m_overshoot = 2.0, ridge = 0.0;
  int iters = 200;
};

int cmd_glasso(const GlassoFlags& g) {
  const Matrix x = load_csv_matrix(g.features, g.header);
  GlassoProblem p;
  p.c = sample_covariance(x, true);
  p.lambda = scaled_lambda(g.lambda0, x.rows(), x.cols());
  p.eps = g.eps;
  p.alpha = g.alpha;
  p.gamma = g.gamma;
  p.m_bound = default_spectral_bound(p.c, g.m_overshoot);
  const SymMatrix init = spectral_norm_clip(psd_project(sample_precision(p.c, g.ridge)), p.m_bound);
  const GlassoSolution s = solve_step1(p, init, g.eta, g.iters);
  if (!g.out.empty()) write_csv_matrix(s.theta.matrix(), g.out);
  const json summary = {{"n", x.rows()},
                        {"t", x.cols()},
                        {"lambda", p.lambda},
                        {"m_bound", p.m_bound},
                        {"iterations", s.iterations},
                        {"objective", s.objective_trace.back()},
                        {"zero_count", count_zeros(s.theta)}};
  std::cout << summary.dump(1) << "\n";
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  Dataset data;
  SymMatrix theta0;
  if (!cfg.features_path.empty()) {
    data = load_csv_dataset(cfg.features_path, cfg.targets_path, cfg.csv_header);
  } else {
    const SyntheticInstance inst = generate_instance(*cfg.synthetic);
    data = inst.dataset();
    theta0 = inst.theta0;
  }
  const DataSplit split = split_dataset(data, cfg.fractions, cfg.seed);
  JointConfig joint = cfg.joint;
  joint.seed = cfg.seed;
  const TrainedModel m = train_model(cfg.mode, split.train, joint, cfg.pnn);
  const RegressionMetrics val = regression_metrics(split.val.y, predict(m, split.val.x));
  const RegressionMetrics test = regression_metrics(split.test.y, predict(m, split.test.x));
  json summary = {{"mode", to_string(cfg.mode)},
                  {"val_mae", val.mae},
                  {"val_mse", val.mse},
                  {"test_mae", test.mae},
                  {"test_mse", test.mse}};
  if (!m.precision.empty()) {
    summary["zero_count"] = count_zeros(m.precision);
    if (!theta0.empty()) summary["precision_l1"] = precision_errors(m.precision, theta0).l1;
  }
  if (!cfg.output.empty()) {
    save_model(m, cfg.output);
    summary["model"] = cfg.output;
  }
  std::cout << summary.dump(1) << "\n";
  return 0;
}

int cmd_experiment(const ExperimentConfig& cfg) {
  const ExperimentResult r = run_experiment(cfg);
  if (!cfg.output.empty()) emit_results(r, cfg.output);
  std::cout << "mode " << r.mode << "  config " << r.config_hash << "  selected L=" << r.selected.layers
            << " F=" << r.selected.features << " K=" << r.selected.order << " lambda0=" << r.selected.lambda0 << "\n";
  for (const auto& [name, a] : r.aggregates)
    if (a.count > 0) std::cout << "  " << name << ": " << a.mean << " +- " << a.std << " (" << a.count << " repeats)\n";
  int failed = 0;
  for (const auto& rec : r.repeats) failed += rec.ok ? 0 : 1;
  if (failed) std::cout << "  " << failed << " repeat(s) failed\n";
  return 0;
}

struct RateFlags {
  SyntheticSpec spec;
  std::vector<Index> t_grid{200, 800, 3200, 12800};
  int repeats = 10;
  RateCheckConfig cfg;
  std::string tether = "truth";
  std::string out;
};

int cmd_rate(RateFlags f) {
  if (f.tether != "truth" && f.tether != "zero") throw ArgumentError("--tether must be truth or zero");
  f.cfg.tether_truth = f.tether == "truth";
  const RateCheckReport r = rate_check(f.spec, f.t_grid, f.repeats, f.cfg);
  const json doc = {{"sample_sizes", r.sample_sizes},
                    {"errors", r.errors},
                    {"slope", r.slope},
                    {"s_nonzero", r.s_nonzero},
                    {"theoretical_rate", r.theoretical_rate}};
  if (!f.out.empty()) write_text(f.out, doc.dump(1) + "\n");
  std::cout << doc.dump(1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Precision neural networks with joint precision estimation"};
  app.require_subcommand(1);

  SyntheticSpec synth_spec;
  std::string synth_features, synth_targets, synth_precision;
  auto* synth = app.add_subcommand("synth", "generate a synthetic instance and write it as CSV");
  synth->add_option("--n", synth_spec.n, "number of features");
  synth->add_option("--t", synth_spec.t, "number of samples");
  synth->add_option("--sparsity", synth_spec.sparsity, "nonzero fraction of the precision matrix");
  synth->add_option("--snr", synth_spec.snr);
  synth->add_flag("--snr-db", synth_spec.snr_in_db);
  synth->add_option("--seed", synth_spec.seed);
  synth->add_option("--out-features", synth_features)->required();
  synth->add_option("--out-targets", synth_targets)->required();
  synth->add_option("--out-precision", synth_precision);

  GlassoFlags gl;
  auto* glasso = app.add_subcommand("glasso", "estimate a sparse precision matrix from a features CSV");
  glasso->add_option("--features", gl.features)->required();
  glasso->add_flag("--header", gl.header);
  glasso->add_option("--lambda0", gl.lambda0);
  glasso->add_option("--eps", gl.eps);
  glasso->add_option("--eta", gl.eta);
  glasso->add_option("--alpha", gl.alpha);
  glasso->add_option("--gamma", gl.gamma);
  glasso->add_option("--m-overshoot", gl.m_overshoot);
  glasso->add_option("--ridge", gl.ridge);
  glasso->add_option("--iters", gl.iters);
  glasso->add_option("--out", gl.out, "precision CSV");

  ConfigFlags train_flags;
  auto* train = app.add_subcommand("train", "train one mode on one split and report metrics");
  train_flags.add(train, false);

  ConfigFlags exp_flags;
  auto* experiment = app.add_subcommand("experiment", "grid search plus repeated train/test runs");
  exp_flags.add(experiment, true);

  RateFlags rate;
  auto* rate_cmd = app.add_subcommand("rate-check", "precision error versus sample size");
  rate_cmd->add_option("--n", rate.spec.n);
  rate_cmd->add_option("--sparsity", rate.spec.sparsity);
  rate_cmd->add_option("--seed", rate.spec.seed);
  rate_cmd->add_option("--t-grid", rate.t_grid)->delimiter(',');
  rate_cmd->add_option("--repeats", rate.repeats);
  rate_cmd->add_option("--lambda0", rate.cfg.lambda0);
  rate_cmd->add_option("--alpha", rate.cfg.alpha);
  rate_cmd->add_option("--gamma", rate.cfg.gamma);
  rate_cmd->add_option("--eps", rate.cfg.eps);
  rate_cmd->add_option("--eta", rate.cfg.eta);
  rate_cmd->add_option("--iters", rate.cfg.iters);
  rate_cmd->add_option("--tether", rate.tether, "truth or zero");
  rate_cmd->add_option("--out", rate.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Argument);
  }

  try {
    if (*synth) return cmd_synth(synth_spec, synth_features, synth_targets, synth_precision);
    if (*glasso) return cmd_glasso(gl);
    if (*train) return cmd_train(train_flags.build());
    if (*experiment) return cmd_experiment(exp_flags.build());
    if (*rate_cmd) return cmd_rate(rate);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
