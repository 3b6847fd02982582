// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails. Pass criterion numbers to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "glasso_oracle.hpp"
#include "pnn/datagen.hpp"
#include "pnn/glasso.hpp"
#include "pnn/harness.hpp"
#include "pnn/linalg.hpp"
#include "pnn/metrics.hpp"
#include "pnn/pnn_model.hpp"
#include "pnn/trainer.hpp"
#include "pnn_oracle.hpp"
#include "test_util.hpp"

using namespace pnn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

struct InvariantCounter {
  double m_bound = 0.0;
  long iterates = 0;
  long threshold_checked = 0;
  long violations = 0;
  double worst_min_eig = 0.0;
  double worst_norm_excess = -1e300;

  void operator()(const Step1Iterate& it) {
    ++iterates;
    const Vector w = sym_eigenvalues(it.theta);
    worst_min_eig = std::min(worst_min_eig, w(0));
    worst_norm_excess = std::max(worst_norm_excess, w.cwiseAbs().maxCoeff() - m_bound);
    if (w(0) < -1e-10 || w.cwiseAbs().maxCoeff() > m_bound + 1e-10) ++violations;
    if (!it.projected) {
      for (const auto& [i, j] : it.killed) {
        ++threshold_checked;
        if (it.theta(i, j) != 0.0 || it.theta(j, i) != 0.0) ++violations;
      }
    }
  }

  std::string summary() const {
    return std::to_string(iterates) + " iterates, min eigenvalue " + fmt(worst_min_eig) + ", max |eig| - M " +
           fmt(worst_norm_excess) + ", " + std::to_string(threshold_checked) + " thresholded entries checked, " +
           std::to_string(violations) + " violations";
  }
};

Outcome gradient_correctness() {
  std::mt19937_64 rng(2024);
  double worst_params = 0.0;
  double worst_shift = 0.0;
  std::set<std::tuple<int, int, bool>> covered;
  for (int trial = 0; trial < 50; ++trial) {
    const int layers = 1 + trial % 3;
    const int order = (trial / 3) % 4;
    const bool bn = (trial / 12) % 2 == 0;
    covered.emplace(layers, order, bn);
    PnnConfig cfg = pnn::testing::random_config(rng, layers, order, bn);
    if (trial % 5 == 1) cfg.activation = Activation::Identity;
    if (trial % 7 == 2) cfg.readout = Readout::MeanPool;
    const Index nodes = 4 + trial % 4;
    PnnParams p = init_params(cfg, nodes, rng);
    pnn::testing::jitter(p, rng);
    const SymMatrix theta = pnn::testing::random_pd(nodes, rng, 0.3, 1.5);
    const SymMatrix anchor = pnn::testing::random_pd(nodes, rng, 0.3, 1.5);
    const Matrix batch = pnn::testing::random_matrix(nodes, 6, rng);
    const Vector y = pnn::testing::random_matrix(6, 1, rng).col(0);
    worst_params = std::max(worst_params,
                            pnn::testing::check_param_gradient(cfg, p, theta, batch, y, 0.6, 0.05, 25, rng));
    worst_shift = std::max(
        worst_shift, pnn::testing::check_shift_gradient(cfg, p, theta, batch, y, anchor, 2.0, 0.4, 25, rng));
  }
  return {worst_params < 1e-5 && worst_shift < 1e-5 && covered.size() == 24u,
          "worst relative error: params " + fmt(worst_params) + ", shift " + fmt(worst_shift) + " over " +
              std::to_string(covered.size()) + " (L, K, batch norm) combinations"};
}

Outcome glasso_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticSpec spec;
    spec.n = 5;
    spec.t = 200;
    spec.sparsity = 0.44;
    spec.seed = 500 + seed;
    const SymMatrix c = sample_covariance(generate_instance(spec).x, true);
    GlassoProblem p;
    p.c = c;
    p.lambda = scaled_lambda(2.0, 5, 200);
    p.eps = 1e-3;
    p.m_bound = default_spectral_bound(c);
    const auto oracle = pnn::testing::dual_bcd_glasso(c.matrix(), p.lambda);
    const SymMatrix theta_star(Matrix(oracle.theta - p.eps * Matrix::Identity(5, 5)));
    const double f_star = gl_objective(theta_star, p);
    const SymMatrix init = spectral_norm_clip(psd_project(sample_precision(c)), p.m_bound);
    const GlassoSolution s = solve_step1(p, init, 0.05, 20000);
    worst = std::max(worst, std::abs(gl_objective(s.theta, p) - f_star) / std::abs(f_star));
  }
  return {worst <= 1e-6, "worst relative objective gap " + fmt(worst) + " over 10 instances"};
}

Outcome spectral_equivalence() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Index> size(2, 12);
  std::uniform_int_distribution<Index> order(0, 4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = size(rng);
    const SymMatrix theta = pnn::testing::random_sym(n, rng);
    const Vector h = pnn::testing::random_matrix(order(rng) + 1, 1, rng).col(0);
    const Vector x = pnn::testing::random_matrix(n, 1, rng).col(0);
    const EigPair e = sym_eig(theta);
    Vector response(n);
    for (Index i = 0; i < n; ++i) response(i) = spectral_response(h, e.values(i));
    const Vector spectral = e.vectors * response.asDiagonal() * e.vectors.transpose() * x;
    worst = std::max(worst, pnn::testing::max_abs_diff(filter_apply(theta, h, x), spectral));
  }
  return {worst <= 1e-8, "worst absolute difference " + fmt(worst) + " over 100 triples"};
}

Outcome estimation_rate() {
  SyntheticSpec spec;
  spec.n = 20;
  spec.sparsity = 0.2;
  spec.seed = 4;
  const RateCheckReport r = rate_check(spec, {200, 800, 3200, 12800}, 10);
  std::string errs;
  for (double e : r.errors) errs += (errs.empty() ? "" : ", ") + fmt(e);
  return {r.slope >= -0.7 && r.slope <= -0.3, "slope " + fmt(r.slope) + ", mean Frobenius errors " + errs};
}

Outcome joint_invariants() {
  SyntheticSpec spec;
  spec.n = 20;
  spec.t = 100;
  const Dataset d = generate_instance(spec).dataset();
  const JointConfig cfg;
  InvariantCounter counter;
  counter.m_bound = default_spectral_bound(sample_covariance(d), cfg.m_overshoot);
  TrainHooks hooks;
  hooks.step1 = std::ref(counter);
  const TrainedModel m = train_joint(d, cfg, PnnConfig{}, hooks);
  const long expected = static_cast<long>(cfg.epochs) * cfg.inner_theta;
  return {counter.violations == 0 && counter.iterates == expected && counter.threshold_checked > 0,
          counter.summary() + ", final zero count " + std::to_string(count_zeros(m.precision))};
}

Outcome sparsity_trends() {
  const std::vector<double> levels{0.1, 0.2, 0.4, 0.6};
  const std::vector<TrainMode> modes{TrainMode::Joint, TrainMode::GL, TrainMode::Sample, TrainMode::Naive};
  std::map<TrainMode, HyperChoice> chosen;
  std::map<std::pair<TrainMode, double>, ExperimentResult> results;
  for (TrainMode mode : modes) {
    ExperimentConfig c;
    c.mode = mode;
    c.synthetic->sparsity = 0.2;
    c.grid = HyperGrid{{1, 2, 3}, {8, 16}, {1, 2, 3}, {1.0, 10.0, 20.0}};
    results[{mode, 0.2}] = run_experiment(c);
    chosen[mode] = results[{mode, 0.2}].selected;
  }
  for (TrainMode mode : modes)
    for (double s : levels) {
      if (s == 0.2) continue;
      ExperimentConfig c;
      c.mode = mode;
      c.synthetic->sparsity = s;
      c.frozen = chosen[mode];
      results[{mode, s}] = run_experiment(c);
    }

  const double cells = 20.0 * 20.0;
  auto mae = [&](TrainMode m, double s) { return results.at({m, s}).aggregate("mae").mean; };
  auto zeros = [&](TrainMode m, double s) { return results.at({m, s}).aggregate("zero_count").mean; };
  std::ostringstream table;
  int joint_best = 0;
  bool sample_zero = true;
  bool density_ok = true;
  double naive_zeros = 0.0, gl_zeros = 0.0;
  for (double s : levels) {
    const double j = mae(TrainMode::Joint, s);
    if (j <= mae(TrainMode::GL, s) && j <= mae(TrainMode::Sample, s) && j <= mae(TrainMode::Naive, s)) ++joint_best;
    for (const auto& rec : results.at({TrainMode::Sample, s}).repeats)
      sample_zero = sample_zero && rec.zero_count.value_or(-1) == 0;
    const double gl_density = 1.0 - zeros(TrainMode::GL, s) / cells;
    const double joint_density = 1.0 - zeros(TrainMode::Joint, s) / cells;
    density_ok = density_ok && std::abs(gl_density - s) <= 0.15 && std::abs(joint_density - s) <= 0.15;
    naive_zeros += zeros(TrainMode::Naive, s);
    gl_zeros += zeros(TrainMode::GL, s);
    table << "\n    sparsity " << s << ": mae joint " << fmt(j) << " gl " << fmt(mae(TrainMode::GL, s)) << " sample "
          << fmt(mae(TrainMode::Sample, s)) << " naive " << fmt(mae(TrainMode::Naive, s)) << "; density joint "
          << fmt(joint_density) << " gl " << fmt(gl_density) << "; zeros naive " << fmt(zeros(TrainMode::Naive, s))
          << " gl " << fmt(zeros(TrainMode::GL, s));
  }
  const bool a = joint_best >= 3;
  const bool d = naive_zeros < gl_zeros;
  std::ostringstream detail;
  detail << "(a) joint best on " << joint_best << "/4 " << (a ? "ok" : "FAIL") << ", (b) sample zeros "
         << (sample_zero ? "ok" : "FAIL") << ", (c) density within 0.15 " << (density_ok ? "ok" : "FAIL")
         << ", (d) naive zeros < gl zeros " << (d ? "ok" : "FAIL");
  for (TrainMode mode : modes) {
    const HyperChoice& h = chosen[mode];
    detail << "\n    selected " << to_string(mode) << ": L" << h.layers << " F" << h.features << " K" << h.order
           << " lambda0 " << h.lambda0;
  }
  detail << table.str();
  return {a && sample_zero && density_ok && d, detail.str()};
}

Outcome csv_pipeline(const fs::path& work) {
  SyntheticSpec spec;
  spec.n = 68;
  spec.t = 1142;
  spec.seed = 68;
  const SyntheticInstance inst = generate_instance(spec);
  const std::string fx = (work / "surrogate_x.csv").string();
  const std::string fy = (work / "surrogate_y.csv").string();
  write_instance_csv(inst, fx, fy);

  ExperimentConfig c;
  c.mode = TrainMode::Joint;
  c.synthetic.reset();
  c.features_path = fx;
  c.targets_path = fy;
  c.repeats = 2;
  c.joint.epochs = 3;
  c.joint.batch_size = 64;
  c.frozen = HyperChoice{1, 4, 1, 10.0};
  c.pnn.readout_widths = {16};
  const ExperimentResult r = run_experiment(c);
  const std::string out = (work / "surrogate_results.json").string();
  emit_results(r, out);
  std::ifstream csv((work / "surrogate_results.csv").string());
  std::string header;
  std::getline(csv, header);
  const bool columns = header == "repeat,seed,ok,mae,mse,precision_l1,precision_frobenius,zero_count,wall_time";
  bool zeros = true;
  for (const auto& rec : r.repeats) zeros = zeros && rec.ok && rec.zero_count.value_or(0) > 0;

  const Dataset d = load_csv_dataset(fx, fy);
  const DataSplit split = split_dataset(d, c.fractions, r.seeds.front());
  JointConfig jc = c.joint;
  jc.lambda0 = 10.0;
  InvariantCounter counter;
  counter.m_bound = default_spectral_bound(sample_covariance(split.train), jc.m_overshoot);
  TrainHooks hooks;
  hooks.step1 = std::ref(counter);
  train_joint(split.train, jc, PnnConfig::uniform(1, 4, 1), hooks);

  return {columns && zeros && counter.violations == 0 && counter.threshold_checked > 0,
          "mae " + fmt(r.aggregate("mae").mean) + ", mse " + fmt(r.aggregate("mse").mean) + ", zero count " +
              fmt(r.aggregate("zero_count").mean) + ", columns " + (columns ? "ok" : "FAIL") + "; " +
              counter.summary()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism(const fs::path& work) {
  const std::string base = std::string(PNN_CLI_PATH) +
                           " experiment --mode joint --n 10 --t 80 --repeats 3 --seed 5 --epochs 2"
                           " --grid-lambda0 1,10 --grid-orders 1,2 --workers 2 --out ";
  for (const char* name : {"run_a.json", "run_b.json"}) {
    const std::string cmd = base + (work / name).string() + " > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
  }
  const bool json = slurp(work / "run_a.json") == slurp(work / "run_b.json");
  const bool csv = slurp(work / "run_a.csv") == slurp(work / "run_b.csv");
  return {json && csv && !slurp(work / "run_a.json").empty(),
          std::string("json ") + (json ? "identical" : "differs") + ", csv " + (csv ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = fs::temp_directory_path() / "pnn_acceptance";
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"graphical lasso oracle equivalence", glasso_oracle},
      {"spectral filter equivalence", spectral_equivalence},
      {"precision estimation rate", estimation_rate},
      {"constraint invariants during joint training", joint_invariants},
      {"sparsity sweep trends", sparsity_trends},
      {"csv pipeline on a surrogate dataset", [&] { return csv_pipeline(work); }},
      {"byte-identical experiment outputs", [&] { return cli_determinism(work); }},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first << ", "
              << fmt(secs) << " s): " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
