#pragma once

#include <string>

#include "comet/metrics.hpp"
#include "comet/model.hpp"
#include "comet/pipeline.hpp"

namespace comet {

std::string change_graph_to_json(const ChangeGraph& graph);
std::string dependency_graph_to_json(const DependencyGraph& deps);
std::string mask_to_json(const AttentionMask& mask);
std::string serialized_script_to_json(const SerializedScript& script);
std::string eval_report_to_json(const EvalReport& report);
std::string prediction_to_json(const Prediction& prediction);
std::string inspect_to_json(const Preprocessed& pre, bool dump_masks);
std::string epoch_log_to_json(const std::vector<EpochStats>& log);

// Reads a JSON config file over the ModelConfig defaults; unknown keys are
// rejected. Throws std::runtime_error on unreadable or invalid files.
ModelConfig load_config_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace comet
