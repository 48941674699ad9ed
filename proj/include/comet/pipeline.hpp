#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "comet/ast.hpp"
#include "comet/change_graph.hpp"
#include "comet/corpus.hpp"
#include "comet/dataflow.hpp"
#include "comet/edit_script.hpp"
#include "comet/masks.hpp"
#include "comet/metrics.hpp"
#include "comet/model.hpp"

namespace comet {

// Everything preprocess produces for one sample, before vocabulary lookup.
struct Preprocessed {
    std::string id;
    bool parsed = false;        // syntax pipeline succeeded
    bool truncated = false;     // a stream hit the length cap

    std::vector<std::string> code_texts;
    std::vector<std::vector<double>> code_features;
    std::vector<std::string> syntax_texts;
    std::vector<std::vector<double>> syntax_features;
    std::vector<std::string> comment_texts;
    std::vector<std::vector<double>> comment_features;
    AttentionMask fused_mask;

    std::vector<std::string> target_texts;  // train/eval only
    WordSeq old_comment_tokens;
    WordSeq new_comment_tokens;  // train/eval only

    // inspection artifacts
    SerializedScript code_script;
    std::optional<EditScript> comment_script;
    ChangeGraph graph;
    DependencyGraph deps;
    AttentionMask change_mask;
    AttentionMask dep_mask;
};

// Runs tokenize -> diff -> syntax -> dataflow -> masks for one sample. On
// parse failure with the fallback enabled the syntax stream degrades to a
// placeholder with a uniform mask; with the fallback disabled a ParseError
// escapes to the caller.
Preprocessed preprocess(const Sample& sample, const ModelConfig& config,
                        bool with_target);

struct BuiltVocabs {
    Vocabulary code;
    Vocabulary syntax;
    Vocabulary script;
};

BuiltVocabs build_vocabs(const std::vector<Preprocessed>& items,
                         const ModelConfig& config);

ModelInputs to_model_inputs(const Preprocessed& pre, const Vocabulary& code,
                            const Vocabulary& syntax,
                            const Vocabulary& script);

// -- command-level operations ------------------------------------------------

struct TrainArtifacts {
    std::vector<EpochStats> log;
    std::size_t used_samples = 0;
    std::size_t rejected_samples = 0;
};

TrainArtifacts run_train(const ModelConfig& config,
                         const std::vector<Sample>& train_samples,
                         const std::vector<Sample>& valid_samples,
                         std::unique_ptr<Model>& out_model);

struct Prediction {
    std::string id;
    bool no_update = false;          // every hypothesis failed to apply
    WordSeq updated_comment;         // top surviving hypothesis (or the old)
    std::vector<WordSeq> candidates; // surviving hypotheses, ranked
    std::string diagnostic;
};

Prediction predict_sample(Model& model, const Sample& sample,
                          const ModelConfig& config);

EvalReport run_eval(Model& model, const std::vector<Sample>& samples,
                    const ModelConfig& config,
                    std::vector<Prediction>* out_predictions = nullptr);

}  // namespace comet
