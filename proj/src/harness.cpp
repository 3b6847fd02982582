#include "pnn/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "json_codec.hpp"
#include "pnn/error.hpp"
#include "pnn/metrics.hpp"

namespace pnn {

namespace {

using nlohmann::json;

constexpr const char* kResultsFormat = "pnn-results/1";
constexpr std::uint64_t kSplitStream = 11;
constexpr std::uint64_t kTrainStream = 12;
constexpr std::uint64_t kDataStream = 13;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, const std::string& path, long row, long col) {
  const std::string_view t = trim(cell);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    std::ostringstream os;
    os << path << ": row " << row << ", column " << col << ": cannot read '" << t << "' as a finite number";
    throw ParseError(os.str(), row, col);
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (header && !lines.empty()) lines.erase(lines.begin());
  return lines;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Runs job(i) for i in [0, count) on up to `workers` threads. Each job must
// only touch its own output slot.
template <typename Job>
void run_pool(std::size_t count, unsigned workers, Job&& job) {
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  for (auto& th : pool) th.join();
}

bool uses_lambda(TrainMode m) { return m == TrainMode::GL || m == TrainMode::Naive || m == TrainMode::Joint; }

HyperChoice choice_from(const ExperimentConfig& cfg) {
  HyperChoice c;
  c.layers = cfg.pnn.layers();
  c.features = cfg.pnn.widths.empty() ? 0 : cfg.pnn.widths.front();
  c.order = cfg.pnn.filter_order;
  c.lambda0 = cfg.joint.lambda0;
  return c;
}

bool touches_architecture(const ExperimentConfig& cfg) {
  return cfg.frozen.has_value() || !cfg.grid.layers.empty() || !cfg.grid.features.empty();
}

void apply_choice(const HyperChoice& c, bool arch, PnnConfig& pnn, JointConfig& joint) {
  if (arch) pnn.widths.assign(static_cast<std::size_t>(c.layers), c.features);
  pnn.filter_order = c.order;
  joint.lambda0 = c.lambda0;
}

std::vector<HyperChoice> grid_cells(const ExperimentConfig& cfg) {
  const HyperChoice base = choice_from(cfg);
  if (cfg.mode == TrainMode::PCA) return {base};
  auto or_base = [](const auto& list, auto value) {
    using T = decltype(value);
    return list.empty() ? std::vector<T>{value} : std::vector<T>(list.begin(), list.end());
  };
  const auto ls = or_base(cfg.grid.layers, base.layers);
  const auto fs = or_base(cfg.grid.features, base.features);
  const auto ks = or_base(cfg.grid.orders, base.order);
  const auto lams = uses_lambda(cfg.mode) ? or_base(cfg.grid.lambda0, base.lambda0) : std::vector<double>{base.lambda0};
  std::vector<HyperChoice> cells;
  for (int l : ls)
    for (int f : fs)
      for (int k : ks)
        for (double lam : lams) cells.push_back({l, f, k, lam});
  return cells;
}

struct RepeatData {
  Dataset data;
  SymMatrix theta0;  // empty for CSV input
};

RepeatData repeat_data(const ExperimentConfig& cfg, const Dataset* csv, int repeat) {
  if (csv) return {*csv, {}};
  SyntheticSpec spec = *cfg.synthetic;
  spec.seed = derive_seed(spec.seed, kDataStream + 100 * static_cast<std::uint64_t>(repeat));
  const SyntheticInstance inst = generate_instance(spec);
  return {inst.dataset(), inst.theta0};
}

json choice_json(const HyperChoice& c) {
  return {{"layers", c.layers}, {"features", c.features}, {"order", c.order}, {"lambda0", c.lambda0}};
}

HyperChoice choice_from_json(const json& j, HyperChoice c = {}) {
  codec::reject_unknown(j, {"layers", "features", "order", "lambda0"}, "hyperparameters");
  codec::read_if(j, "layers", c.layers);
  codec::read_if(j, "features", c.features);
  codec::read_if(j, "order", c.order);
  codec::read_if(j, "lambda0", c.lambda0);
  return c;
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

const std::vector<std::string> kMetricNames = {"mae", "mse", "precision_l1", "precision_frobenius", "zero_count"};

}  // namespace

Matrix load_csv_matrix(const std::string& path, bool header) {
  const auto rows = read_lines(path, header);
  if (rows.empty()) throw ParseError(path + ": no data rows");
  const long base_row = header ? 2 : 1;
  std::vector<std::vector<double>> cells;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> vals;
    std::string_view line = rows[r];
    long col = 1;
    while (true) {
      const auto comma = line.find(',');
      vals.push_back(parse_cell(line.substr(0, comma), path, base_row + static_cast<long>(r), col));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
      ++col;
    }
    if (!cells.empty() && vals.size() != cells.front().size()) {
      std::ostringstream os;
      os << path << ": row " << base_row + static_cast<long>(r) << " has " << vals.size() << " columns, expected "
         << cells.front().size();
      throw ParseError(os.str(), base_row + static_cast<long>(r), -1);
    }
    cells.push_back(std::move(vals));
  }
  Matrix x(static_cast<Index>(cells.size()), static_cast<Index>(cells.front().size()));
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return x;
}

void write_csv_matrix(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt_double(m(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

Dataset load_csv_dataset(const std::string& features_path, const std::string& targets_path, bool header) {
  Matrix x = load_csv_matrix(features_path, header);
  const Index t = x.cols();
  const long base_row = header ? 2 : 1;

  const auto trows = read_lines(targets_path, header);
  Vector y(static_cast<Index>(trows.size()));
  for (std::size_t r = 0; r < trows.size(); ++r)
    y(static_cast<Index>(r)) = parse_cell(trows[r], targets_path, base_row + static_cast<long>(r), 1);
  if (y.size() != t) {
    std::ostringstream os;
    os << "targets file '" << targets_path << "' has " << y.size() << " values but features file has " << t
       << " columns";
    throw ArgumentError(os.str());
  }
  return Dataset(std::move(x), std::move(y));
}

void SplitFractions::validate() const {
  if (!(train > 0.0 && val > 0.0 && test > 0.0)) throw ArgumentError("split fractions must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");
}

DataSplit split_dataset(const Dataset& d, const SplitFractions& f, std::uint64_t seed) {
  f.validate();
  const Index t = d.samples();
  // The small slack keeps products such as 0.29 * 100 from flooring to 28.
  const auto n_train = static_cast<Index>(std::floor(static_cast<double>(t) * f.train + 1e-9));
  const auto n_val = static_cast<Index>(std::floor(static_cast<double>(t) * f.val + 1e-9));
  const Index n_test = t - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    std::ostringstream os;
    os << "split_dataset: " << t << " samples give an empty split (" << n_train << ", " << n_val << ", " << n_test
       << ")";
    throw ArgumentError(os.str());
  }
  DataSplit s;
  s.order.resize(static_cast<std::size_t>(t));
  std::iota(s.order.begin(), s.order.end(), Index{0});
  std::mt19937_64 rng(derive_seed(seed, kSplitStream));
  std::shuffle(s.order.begin(), s.order.end(), rng);
  const auto at = [&](Index a, Index b) { return std::vector<Index>(s.order.begin() + a, s.order.begin() + b); };
  s.train = d.subset(at(0, n_train));
  s.val = d.subset(at(n_train, n_train + n_val));
  s.test = d.subset(at(n_train + n_val, t));
  return s;
}

void ExperimentConfig::validate() const {
  fractions.validate();
  if (repeats < 1) throw ArgumentError("repeats must be >= 1");
  if (features_path.empty() != targets_path.empty())
    throw ArgumentError("features and targets paths must be given together");
  if (features_path.empty() && !synthetic) throw ArgumentError("no data source: give a synthetic spec or CSV paths");
  if (synthetic && features_path.empty()) synthetic->validate();
  joint.validate();
  pnn.validate();
  for (int v : grid.layers)
    if (v < 1) throw ArgumentError("grid: layers must be >= 1");
  for (int v : grid.features)
    if (v < 1) throw ArgumentError("grid: features must be >= 1");
  for (int v : grid.orders)
    if (v < 0) throw ArgumentError("grid: orders must be >= 0");
  for (double v : grid.lambda0)
    if (!(v >= 0.0)) throw ArgumentError("grid: lambda0 must be >= 0");
}

const Aggregate& ExperimentResult::aggregate(const std::string& name) const {
  for (const auto& [k, v] : aggregates)
    if (k == name) return v;
  throw ArgumentError("no aggregate named '" + name + "'");
}

Aggregate aggregate_values(const std::vector<double>& values) {
  Aggregate a;
  a.count = static_cast<int>(values.size());
  if (values.empty()) return a;
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

namespace {

json config_to_json(const ExperimentConfig& cfg, bool runtime) {
  json data;
  if (!cfg.features_path.empty()) {
    data["csv"] = {{"features", cfg.features_path}, {"targets", cfg.targets_path}, {"header", cfg.csv_header}};
  } else if (cfg.synthetic) {
    const SyntheticSpec& s = *cfg.synthetic;
    data["synthetic"] = {{"n", s.n},     {"t", s.t},           {"sparsity", s.sparsity},
                         {"snr", s.snr}, {"snr_in_db", s.snr_in_db}, {"seed", s.seed}};
  }
  json grid = {{"layers", cfg.grid.layers},
               {"features", cfg.grid.features},
               {"orders", cfg.grid.orders},
               {"lambda0", cfg.grid.lambda0}};
  json j = {{"mode", to_string(cfg.mode)},
            {"data", data},
            {"split", {cfg.fractions.train, cfg.fractions.val, cfg.fractions.test}},
            {"repeats", cfg.repeats},
            {"seed", cfg.seed},
            {"joint", codec::encode(cfg.joint)},
            {"pnn", codec::encode(cfg.pnn)},
            {"grid", grid},
            {"frozen", cfg.frozen ? choice_json(*cfg.frozen) : json(nullptr)}};
  if (runtime) {
    j["output"] = cfg.output;
    j["workers"] = cfg.workers;
    j["record_timing"] = cfg.record_timing;
  }
  return j;
}

}  // namespace

std::string experiment_config_json(const ExperimentConfig& cfg) { return config_to_json(cfg, true).dump(1); }

ExperimentConfig experiment_config_from_json(const std::string& json_text, ExperimentConfig cfg) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  try {
    codec::reject_unknown(j,
                          {"mode", "data", "split", "repeats", "seed", "joint", "pnn", "grid", "frozen", "output",
                           "workers", "record_timing"},
                          "config");
    if (j.contains("mode")) cfg.mode = train_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("data")) {
      const json& d = j.at("data");
      codec::reject_unknown(d, {"synthetic", "csv"}, "config.data");
      if (d.contains("synthetic") && d.contains("csv")) throw ArgumentError("config.data: give synthetic or csv, not both");
      if (d.contains("synthetic")) {
        const json& s = d.at("synthetic");
        codec::reject_unknown(s, {"n", "t", "sparsity", "snr", "snr_in_db", "seed"}, "config.data.synthetic");
        SyntheticSpec spec = cfg.synthetic.value_or(SyntheticSpec{});
        codec::read_if(s, "n", spec.n);
        codec::read_if(s, "t", spec.t);
        codec::read_if(s, "sparsity", spec.sparsity);
        codec::read_if(s, "snr", spec.snr);
        codec::read_if(s, "snr_in_db", spec.snr_in_db);
        codec::read_if(s, "seed", spec.seed);
        cfg.synthetic = spec;
        cfg.features_path.clear();
        cfg.targets_path.clear();
      }
      if (d.contains("csv")) {
        const json& c = d.at("csv");
        codec::reject_unknown(c, {"features", "targets", "header"}, "config.data.csv");
        codec::read_if(c, "features", cfg.features_path);
        codec::read_if(c, "targets", cfg.targets_path);
        codec::read_if(c, "header", cfg.csv_header);
        cfg.synthetic.reset();
      }
    }
    if (j.contains("split")) {
      const auto f = j.at("split").get<std::vector<double>>();
      if (f.size() != 3) throw ArgumentError("config.split: expected three fractions");
      cfg.fractions = {f[0], f[1], f[2]};
    }
    codec::read_if(j, "repeats", cfg.repeats);
    codec::read_if(j, "seed", cfg.seed);
    if (j.contains("joint")) codec::decode(j.at("joint"), cfg.joint);
    if (j.contains("pnn")) codec::decode(j.at("pnn"), cfg.pnn);
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      codec::reject_unknown(g, {"layers", "features", "orders", "lambda0"}, "config.grid");
      codec::read_if(g, "layers", cfg.grid.layers);
      codec::read_if(g, "features", cfg.grid.features);
      codec::read_if(g, "orders", cfg.grid.orders);
      codec::read_if(g, "lambda0", cfg.grid.lambda0);
    }
    if (j.contains("frozen")) {
      if (j.at("frozen").is_null())
        cfg.frozen.reset();
      else
        cfg.frozen = choice_from_json(j.at("frozen"), choice_from(cfg));
    }
    codec::read_if(j, "output", cfg.output);
    codec::read_if(j, "workers", cfg.workers);
    codec::read_if(j, "record_timing", cfg.record_timing);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg, false).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<Dataset> csv;
  if (!cfg.features_path.empty()) csv = load_csv_dataset(cfg.features_path, cfg.targets_path, cfg.csv_header);
  const Dataset* csv_ptr = csv ? &*csv : nullptr;
  const bool arch = touches_architecture(cfg);

  ExperimentResult res;
  res.mode = to_string(cfg.mode);
  res.config_hash = config_hash(cfg);
  for (int r = 0; r < cfg.repeats; ++r) res.seeds.push_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));

  // Hyperparameter selection sees only the training and validation parts of
  // the first repeat's split.
  if (cfg.frozen) {
    res.selected = *cfg.frozen;
  } else {
    const auto cells = grid_cells(cfg);
    if (cells.size() == 1) {
      res.selected = cells.front();
    } else {
      const RepeatData rd = repeat_data(cfg, csv_ptr, 0);
      const DataSplit split = split_dataset(rd.data, cfg.fractions, res.seeds.front());
      res.grid_scores.resize(cells.size());
      run_pool(cells.size(), cfg.workers, [&](std::size_t i) {
        GridScore& gs = res.grid_scores[i];
        gs.choice = cells[i];
        try {
          PnnConfig pnn = cfg.pnn;
          JointConfig joint = cfg.joint;
          apply_choice(cells[i], arch, pnn, joint);
          joint.seed = derive_seed(res.seeds.front(), kTrainStream);
          const TrainedModel m = train_model(cfg.mode, split.train, joint, pnn);
          gs.val_mae = regression_metrics(split.val.y, predict(m, split.val.x)).mae;
          gs.ok = std::isfinite(gs.val_mae);
        } catch (const std::exception&) {
          gs.ok = false;
        }
        if (!gs.ok) gs.val_mae = 0.0;
      });
      const GridScore* best = nullptr;
      for (const auto& gs : res.grid_scores)
        if (gs.ok && (!best || gs.val_mae < best->val_mae)) best = &gs;
      if (!best) throw ConvergenceError("run_experiment: every grid cell failed to train");
      res.selected = best->choice;
    }
  }

  res.repeats.resize(static_cast<std::size_t>(cfg.repeats));
  run_pool(res.repeats.size(), cfg.workers, [&](std::size_t r) {
    RepeatRecord& rec = res.repeats[r];
    rec.repeat = static_cast<int>(r);
    rec.seed = res.seeds[r];
    const auto start = std::chrono::steady_clock::now();
    try {
      const RepeatData rd = repeat_data(cfg, csv_ptr, static_cast<int>(r));
      const DataSplit split = split_dataset(rd.data, cfg.fractions, rec.seed);
      PnnConfig pnn = cfg.pnn;
      JointConfig joint = cfg.joint;
      apply_choice(res.selected, arch, pnn, joint);
      joint.seed = derive_seed(rec.seed, kTrainStream);
      const TrainedModel m = train_model(cfg.mode, split.train, joint, pnn);
      const RegressionMetrics met = regression_metrics(split.test.y, predict(m, split.test.x));
      rec.mae = met.mae;
      rec.mse = met.mse;
      if (!m.precision.empty()) {
        rec.zero_count = count_zeros(m.precision);
        if (!rd.theta0.empty()) {
          const PrecisionErrors pe = precision_errors(m.precision, rd.theta0);
          rec.precision_l1 = pe.l1;
          rec.precision_frobenius = pe.frobenius;
        }
      }
      rec.ok = std::isfinite(rec.mae) && std::isfinite(rec.mse);
      if (!rec.ok) rec.error = "non-finite test metrics";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    if (!rec.ok) {
      rec.mae = rec.mse = 0.0;
      rec.precision_l1.reset();
      rec.precision_frobenius.reset();
      rec.zero_count.reset();
    }
    if (cfg.record_timing)
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  bool any_ok = false;
  for (const auto& rec : res.repeats) any_ok = any_ok || rec.ok;
  if (!any_ok) throw ConvergenceError("run_experiment: every repeat failed; first error: " + res.repeats.front().error);

  for (const auto& name : kMetricNames) {
    std::vector<double> vals;
    for (const auto& rec : res.repeats) {
      if (!rec.ok) continue;
      if (name == "mae") vals.push_back(rec.mae);
      if (name == "mse") vals.push_back(rec.mse);
      if (name == "precision_l1" && rec.precision_l1) vals.push_back(*rec.precision_l1);
      if (name == "precision_frobenius" && rec.precision_frobenius) vals.push_back(*rec.precision_frobenius);
      if (name == "zero_count" && rec.zero_count) vals.push_back(static_cast<double>(*rec.zero_count));
    }
    res.aggregates.emplace_back(name, aggregate_values(vals));
  }
  return res;
}

std::string results_json(const ExperimentResult& r) {
  json grid = json::array();
  for (const auto& g : r.grid_scores)
    grid.push_back({{"choice", choice_json(g.choice)}, {"ok", g.ok}, {"val_mae", g.val_mae}});
  json reps = json::array();
  for (const auto& rec : r.repeats)
    reps.push_back({{"repeat", rec.repeat},
                    {"seed", rec.seed},
                    {"ok", rec.ok},
                    {"error", rec.error},
                    {"mae", rec.mae},
                    {"mse", rec.mse},
                    {"precision_l1", opt_json(rec.precision_l1)},
                    {"precision_frobenius", opt_json(rec.precision_frobenius)},
                    {"zero_count", opt_json(rec.zero_count)},
                    {"wall_time", opt_json(rec.wall_time)}});
  json agg = json::array();
  for (const auto& [name, a] : r.aggregates)
    agg.push_back({{"metric", name}, {"mean", a.mean}, {"std", a.std}, {"count", a.count}});
  const json doc = {{"format", kResultsFormat},
                    {"mode", r.mode},
                    {"config_hash", r.config_hash},
                    {"seeds", r.seeds},
                    {"selected", choice_json(r.selected)},
                    {"grid", grid},
                    {"repeats", reps},
                    {"aggregates", agg}};
  return doc.dump(1) + "\n";
}

std::string results_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "repeat,seed,ok,mae,mse,precision_l1,precision_frobenius,zero_count,wall_time\n";
  const auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
  for (const auto& rec : r.repeats) {
    os << rec.repeat << ',' << rec.seed << ',' << (rec.ok ? 1 : 0) << ',' << fmt_double(rec.mae) << ','
       << fmt_double(rec.mse) << ',' << opt(rec.precision_l1) << ',' << opt(rec.precision_frobenius) << ','
       << (rec.zero_count ? std::to_string(*rec.zero_count) : std::string()) << ',' << opt(rec.wall_time) << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

void emit_results(const ExperimentResult& r, const std::string& path) {
  write_file(path, results_json(r));
  write_file(std::filesystem::path(path).replace_extension(".csv").string(), results_csv(r));
}

ExperimentResult read_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    const json doc = json::parse(ss.str());
    if (doc.at("format").get<std::string>() != kResultsFormat)
      throw ParseError(path + ": unsupported format tag");
    ExperimentResult r;
    r.mode = doc.at("mode").get<std::string>();
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    r.selected = choice_from_json(doc.at("selected"));
    for (const auto& g : doc.at("grid"))
      r.grid_scores.push_back({choice_from_json(g.at("choice")), g.at("ok").get<bool>(), g.at("val_mae").get<double>()});
    for (const auto& j : doc.at("repeats")) {
      RepeatRecord rec;
      rec.repeat = j.at("repeat").get<int>();
      rec.seed = j.at("seed").get<std::uint64_t>();
      rec.ok = j.at("ok").get<bool>();
      rec.error = j.at("error").get<std::string>();
      rec.mae = j.at("mae").get<double>();
      rec.mse = j.at("mse").get<double>();
      rec.precision_l1 = opt_from<double>(j.at("precision_l1"));
      rec.precision_frobenius = opt_from<double>(j.at("precision_frobenius"));
      rec.zero_count = opt_from<Index>(j.at("zero_count"));
      rec.wall_time = opt_from<double>(j.at("wall_time"));
      r.repeats.push_back(std::move(rec));
    }
    for (const auto& a : doc.at("aggregates"))
      r.aggregates.emplace_back(a.at("metric").get<std::string>(),
                                Aggregate{a.at("mean").get<double>(), a.at("std").get<double>(), a.at("count").get<int>()});
    return r;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace pnn
