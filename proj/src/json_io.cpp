#include "comet/json_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace comet {

namespace {

nlohmann::json mask_matrix(const AttentionMask& mask) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < mask.size; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < mask.size; ++j) row.push_back(mask.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string change_graph_to_json(const ChangeGraph& graph) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const ChangeGraphNode& n : graph.nodes) {
        nlohmann::json node = {{"operation", node_op_name(n.operation)},
                               {"type", node_type_name(n.node_type)},
                               {"value", n.value},
                               {"origin", node_origin_name(n.origin)},
                               {"order", n.source_order}};
        if (n.old_value) node["old_value"] = *n.old_value;
        j["nodes"].push_back(std::move(node));
    }
    j["relation_set"] = nlohmann::json::array();
    for (const auto& [a, b] : graph.relation_set)
        j["relation_set"].push_back({a, b});
    j["changed_set"] = nlohmann::json::array();
    for (int c : graph.changed_set) j["changed_set"].push_back(c);
    return j.dump();
}

std::string dependency_graph_to_json(const DependencyGraph& deps) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [from, to] : deps.edges) j.push_back({from, to});
    return j.dump();
}

std::string mask_to_json(const AttentionMask& mask) {
    return mask_matrix(mask).dump();
}

std::string serialized_script_to_json(const SerializedScript& script) {
    nlohmann::json j = nlohmann::json::array();
    for (const Token& t : script.tokens) j.push_back(t.text);
    return j.dump();
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::json j = {{"accuracy", report.accuracy},
                        {"recall_at_5", report.recall_at_5},
                        {"aed", report.aed},
                        {"red", report.red},
                        {"gleu", report.gleu},
                        {"sari", report.sari},
                        {"n", report.n},
                        {"excluded_degenerate", report.excluded_degenerate}};
    return j.dump();
}

std::string prediction_to_json(const Prediction& prediction) {
    nlohmann::json j;
    j["id"] = prediction.id;
    j["no_update"] = prediction.no_update;
    j["updated_comment"] = prediction.updated_comment;
    j["candidates"] = prediction.candidates;
    if (!prediction.diagnostic.empty()) j["diagnostic"] = prediction.diagnostic;
    return j.dump();
}

std::string inspect_to_json(const Preprocessed& pre, bool dump_masks) {
    nlohmann::json j;
    j["id"] = pre.id;
    j["parsed"] = pre.parsed;
    j["truncated"] = pre.truncated;
    j["code_edit_script"] =
        nlohmann::json::parse(serialized_script_to_json(pre.code_script));
    if (pre.comment_script) {
        nlohmann::json target = nlohmann::json::array();
        for (const auto& t : pre.target_texts) target.push_back(t);
        j["comment_edit_script"] = std::move(target);
    }
    j["change_graph"] = nlohmann::json::parse(change_graph_to_json(pre.graph));
    j["flow_edges"] =
        nlohmann::json::parse(dependency_graph_to_json(pre.deps));
    if (dump_masks) {
        j["change_mask"] = mask_matrix(pre.change_mask);
        j["dependency_mask"] = mask_matrix(pre.dep_mask);
        j["fused_mask"] = mask_matrix(pre.fused_mask);
    }
    return j.dump();
}

std::string epoch_log_to_json(const std::vector<EpochStats>& log) {
    nlohmann::json j = nlohmann::json::array();
    for (const EpochStats& e : log)
        j.push_back({{"epoch", e.epoch},
                     {"train_loss", e.train_loss},
                     {"valid_perplexity", e.valid_perplexity}});
    return j.dump();
}

ModelConfig load_config_file(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path));
    ModelConfig c;
    auto take_int = [&](const char* key, int& out) {
        if (j.contains(key)) {
            out = j.at(key).get<int>();
            j.erase(key);
        }
    };
    auto take_double = [&](const char* key, double& out) {
        if (j.contains(key)) {
            out = j.at(key).get<double>();
            j.erase(key);
        }
    };
    take_int("embed_dim", c.embed_dim);
    take_int("encoder_hidden", c.encoder_hidden);
    take_int("decoder_hidden", c.decoder_hidden);
    take_int("layers", c.layers);
    take_int("attn_hidden", c.attn_hidden);
    take_double("dropout", c.dropout);
    take_double("learning_rate", c.learning_rate);
    take_int("batch_size", c.batch_size);
    take_int("beam_width", c.beam_width);
    take_double("beta", c.beta);
    take_int("vocab_cap", c.vocab_cap);
    take_int("epochs", c.epochs);
    take_int("max_decode_len", c.max_decode_len);
    take_int("length_cap", c.length_cap);
    take_int("type_classes", c.type_classes);
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<unsigned long long>();
        j.erase("seed");
    }
    if (j.contains("token_only_fallback")) {
        c.token_only_fallback = j.at("token_only_fallback").get<bool>();
        j.erase("token_only_fallback");
    }
    if (!j.empty())
        throw std::runtime_error("unknown config key: " +
                                 j.begin().key());
    if (c.dropout < 0.0 || c.dropout >= 1.0)
        throw std::runtime_error("dropout must be in [0, 1)");
    if (c.embed_dim <= 0 || c.encoder_hidden <= 0 || c.decoder_hidden <= 0 ||
        c.layers <= 0 || c.batch_size <= 0 || c.beam_width <= 0 ||
        c.beta < 0.0)
        throw std::runtime_error("config values must be positive");
    return c;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace comet
