#include "pnn/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "pnn/error.hpp"

namespace pnn {

namespace {

using nlohmann::json;

json to_json_matrix(const Matrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from(const json& j) {
  const Index r = j.at("rows").get<Index>();
  const Index c = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (r < 0 || c < 0 || static_cast<std::size_t>(r * c) != data.size())
    throw ParseError("model: matrix shape does not match its data");
  Matrix m(r, c);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json to_json_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
}

json to_json_sym(const SymMatrix& s) { return s.empty() ? json(nullptr) : to_json_matrix(s.matrix()); }

SymMatrix sym_from(const json& j) {
  if (j.is_null()) return {};
  return SymMatrix(matrix_from(j));
}

json to_json_dense(const std::vector<DenseLayer>& layers) {
  json arr = json::array();
  for (const auto& l : layers) arr.push_back({{"weight", to_json_matrix(l.weight)}, {"bias", to_json_vector(l.bias)}});
  return arr;
}

std::vector<DenseLayer> dense_from(const json& j) {
  std::vector<DenseLayer> out;
  for (const auto& l : j) out.push_back({matrix_from(l.at("weight")), vector_from(l.at("bias"))});
  return out;
}

json params_json(const PnnParams& p) {
  json layers = json::array();
  for (const auto& l : p.layers) {
    json taps = json::array();
    for (const auto& t : l.taps) taps.push_back(to_json_matrix(t));
    layers.push_back({{"taps", taps}, {"bn_scale", to_json_vector(l.bn_scale)}, {"bn_shift", to_json_vector(l.bn_shift)}});
  }
  json running = json::array();
  for (const auto& r : p.running) running.push_back({{"mean", to_json_vector(r.mean)}, {"var", to_json_vector(r.var)}});
  return {{"layers", layers}, {"readout", to_json_dense(p.readout)}, {"running", running}};
}

PnnParams params_from(const json& j) {
  PnnParams p;
  for (const auto& l : j.at("layers")) {
    LayerParams lp;
    for (const auto& t : l.at("taps")) lp.taps.push_back(matrix_from(t));
    lp.bn_scale = vector_from(l.at("bn_scale"));
    lp.bn_shift = vector_from(l.at("bn_shift"));
    p.layers.push_back(std::move(lp));
  }
  p.readout = dense_from(j.at("readout"));
  for (const auto& r : j.at("running")) p.running.push_back({vector_from(r.at("mean")), vector_from(r.at("var"))});
  return p;
}

}  // namespace

std::string model_to_json(const TrainedModel& m) {
  json history = json::array();
  for (const auto& h : m.history)
    history.push_back({{"epoch", h.epoch},
                       {"step1_objective", h.step1_objective},
                       {"task_loss", h.task_loss},
                       {"tether_gap", h.tether_gap},
                       {"zero_count", h.zero_count}});
  const json doc = {{"format", kModelFormat},
                    {"mode", to_string(m.mode)},
                    {"pnn", codec::encode(m.pnn)},
                    {"config", codec::encode(m.config)},
                    {"transform", {{"mean", to_json_vector(m.transform.mean)}, {"scale", to_json_vector(m.transform.scale)}}},
                    {"target_mean", m.target_mean},
                    {"shift", to_json_sym(m.shift)},
                    {"precision", to_json_sym(m.precision)},
                    {"m_bound", m.m_bound},
                    {"params", params_json(m.params)},
                    {"components", to_json_matrix(m.components)},
                    {"mlp", to_json_dense(m.mlp)},
                    {"history", history},
                    {"loss_trace", m.loss_trace}};
  return doc.dump(1);
}

TrainedModel model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kModelFormat)
      throw ParseError("model: unsupported format tag '" + doc.at("format").get<std::string>() + "'");
    TrainedModel m;
    m.mode = train_mode_from_string(doc.at("mode").get<std::string>());
    codec::decode(doc.at("pnn"), m.pnn);
    codec::decode(doc.at("config"), m.config);
    m.transform.mean = vector_from(doc.at("transform").at("mean"));
    m.transform.scale = vector_from(doc.at("transform").at("scale"));
    m.target_mean = doc.at("target_mean").get<double>();
    m.shift = sym_from(doc.at("shift"));
    m.precision = sym_from(doc.at("precision"));
    m.m_bound = doc.at("m_bound").get<double>();
    m.params = params_from(doc.at("params"));
    m.components = matrix_from(doc.at("components"));
    m.mlp = dense_from(doc.at("mlp"));
    for (const auto& h : doc.at("history"))
      m.history.push_back({h.at("epoch").get<int>(), h.at("step1_objective").get<double>(),
                           h.at("task_loss").get<double>(), h.at("tether_gap").get<double>(),
                           h.at("zero_count").get<Index>()});
    m.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

void save_model(const TrainedModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << model_to_json(m) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace pnn
