#pragma once

// JSON encoding shared by model files and experiment configs. Decoders fill
// only the keys present and reject unknown ones.

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "pnn/error.hpp"
#include "pnn/pnn_model.hpp"
#include "pnn/trainer.hpp"

namespace pnn::codec {

using nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ArgumentError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ArgumentError(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline json encode(const PnnConfig& c) {
  return {{"filter_order", c.filter_order},
          {"widths", c.widths},
          {"activation", to_string(c.activation)},
          {"batch_norm", c.batch_norm},
          {"readout", to_string(c.readout)},
          {"readout_widths", c.readout_widths},
          {"bn_momentum", c.bn_momentum}};
}

inline void decode(const json& j, PnnConfig& c) {
  reject_unknown(j, {"filter_order", "widths", "activation", "batch_norm", "readout", "readout_widths", "bn_momentum"},
                 "pnn");
  read_if(j, "filter_order", c.filter_order);
  read_if(j, "widths", c.widths);
  if (j.contains("activation")) c.activation = activation_from_string(j.at("activation").get<std::string>());
  read_if(j, "batch_norm", c.batch_norm);
  if (j.contains("readout")) c.readout = readout_from_string(j.at("readout").get<std::string>());
  read_if(j, "readout_widths", c.readout_widths);
  read_if(j, "bn_momentum", c.bn_momentum);
}

inline json encode(const JointConfig& c) {
  return {{"alpha", c.alpha},
          {"lambda0", c.lambda0},
          {"gamma", c.gamma},
          {"eps", c.eps},
          {"eta", c.eta},
          {"beta", c.beta},
          {"m_overshoot", c.m_overshoot},
          {"epochs", c.epochs},
          {"inner_theta", c.inner_theta},
          {"inner_tilde", c.inner_tilde},
          {"inner_h", c.inner_h},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
          {"seed", c.seed},
          {"ridge", c.ridge},
          {"standardize", c.standardize},
          {"batch_size", c.batch_size},
          {"pca_components", c.pca_components}};
}

inline void decode(const json& j, JointConfig& c) {
  reject_unknown(j,
                 {"alpha", "lambda0", "gamma", "eps", "eta", "beta", "m_overshoot", "epochs", "inner_theta",
                  "inner_tilde", "inner_h", "adam", "seed", "ridge", "standardize", "batch_size", "pca_components"},
                 "joint");
  read_if(j, "alpha", c.alpha);
  read_if(j, "lambda0", c.lambda0);
  read_if(j, "gamma", c.gamma);
  read_if(j, "eps", c.eps);
  read_if(j, "eta", c.eta);
  read_if(j, "beta", c.beta);
  read_if(j, "m_overshoot", c.m_overshoot);
  read_if(j, "epochs", c.epochs);
  read_if(j, "inner_theta", c.inner_theta);
  read_if(j, "inner_tilde", c.inner_tilde);
  read_if(j, "inner_h", c.inner_h);
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    reject_unknown(a, {"beta1", "beta2", "eps"}, "joint.adam");
    read_if(a, "beta1", c.adam.beta1);
    read_if(a, "beta2", c.adam.beta2);
    read_if(a, "eps", c.adam.eps);
  }
  read_if(j, "seed", c.seed);
  read_if(j, "ridge", c.ridge);
  read_if(j, "standardize", c.standardize);
  read_if(j, "batch_size", c.batch_size);
  read_if(j, "pca_components", c.pca_components);
}

}  // namespace pnn::codec
