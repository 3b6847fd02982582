#pragma once

#include <string>

#include "pnn/trainer.hpp"

namespace pnn {

inline constexpr const char* kModelFormat = "pnn-model/1";

/// JSON document holding the configuration snapshot and every matrix and
/// parameter of a trained model. Doubles round-trip exactly.
std::string model_to_json(const TrainedModel& m);
/// Throws ParseError on malformed input or an unknown format tag.
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& m, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace pnn
