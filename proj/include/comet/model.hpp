#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "comet/autodiff.hpp"
#include "comet/masks.hpp"
#include "comet/vocab.hpp"

namespace comet {

struct ModelConfig {
    int embed_dim = 64;
    int encoder_hidden = 64;  // per direction
    int decoder_hidden = 128;
    int layers = 2;
    int attn_hidden = 64;
    double dropout = 0.6;
    double learning_rate = 0.001;
    int batch_size = 32;
    int beam_width = 5;
    double beta = 1.0;
    int vocab_cap = 50000;
    unsigned long long seed = 1;
    int epochs = 30;
    int max_decode_len = 200;
    int length_cap = 200;
    int type_classes = 8;
    bool token_only_fallback = true;

    int encoder_state() const { return 2 * encoder_hidden; }
    int syntax_state() const { return 4 * encoder_hidden; }
    int joint_context() const {
        return encoder_state() * 2 + syntax_state();
    }
};

// Per-stream feature widths (one-hot indicator blocks).
inline constexpr int kCodeFeatures = 6;    // 5 span kinds + in-return
inline constexpr int kCommentFeatures = 1; // matches a changed AST node
inline int syntax_features(const ModelConfig& cfg) {
    return 4 + cfg.type_classes;  // node operation + coarse type class
}

struct StreamInput {
    std::vector<int> token_ids;
    std::vector<std::vector<double>> features;  // aligned to token_ids
};

// Everything the model consumes for one sample.
struct ModelInputs {
    StreamInput code;
    StreamInput syntax;
    StreamInput comment;
    AttentionMask fused_mask;  // size == syntax length (or 1x1 zero bias)
    std::vector<std::string> code_texts;
    std::vector<std::string> comment_texts;
    std::vector<std::string> target_texts;  // serialized script, no EOS
};

struct Hypothesis {
    std::vector<std::string> tokens;
    double log_prob = 0.0;
    double score = 0.0;  // length-normalized
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;           // mean NLL per target token
    double valid_perplexity = 0.0;
};

class Model {
public:
    Model(ModelConfig config, Vocabulary code_vocab, Vocabulary syntax_vocab,
          Vocabulary script_vocab);

    const ModelConfig& config() const { return cfg_; }
    const Vocabulary& script_vocab() const { return script_vocab_; }
    const Vocabulary& code_vocab() const { return code_vocab_; }
    const Vocabulary& syntax_vocab() const { return syntax_vocab_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // Teacher-forced mean NLL per target token over a batch; accumulates
    // gradients when `train` is set.
    double batch_loss(const std::vector<const ModelInputs*>& batch, bool train,
                      std::mt19937_64& dropout_rng);

    std::vector<Hypothesis> beam_search(const ModelInputs& inputs,
                                        int width) const;
    Hypothesis greedy_decode(const ModelInputs& inputs) const;
    // Ancestral sampling under the grammar mask (always yields valid scripts).
    std::vector<std::string> sample_decode(const ModelInputs& inputs,
                                           std::mt19937_64& rng) const;

    // One decode-step distribution for inspection/tests: returns the final
    // masked mixture over the extended vocabulary plus its token texts.
    std::vector<std::pair<std::string, double>> step_distribution(
        const ModelInputs& inputs,
        const std::vector<std::string>& prefix) const;

    std::string to_json() const;
    static Model from_json(const std::string& text);

    double parameter_l2() const;

    // First-layer per-direction recurrent states of one encoder stream
    // (0 = code, 1 = syntax, 2 = comment); inspection/testing hook.
    struct DirectionStates {
        std::vector<std::vector<double>> forward;
        std::vector<std::vector<double>> backward;
    };
    DirectionStates debug_bigru_layer0(const ModelInputs& inputs,
                                       int stream) const;

    struct ExtVocab;

private:
    friend class Trainer;

    ModelConfig cfg_;
    Vocabulary code_vocab_;
    Vocabulary syntax_vocab_;
    Vocabulary script_vocab_;
    ParamStore params_;

    void init_params();
    ExtVocab extended_vocab(const ModelInputs& inputs) const;
};

// Adam with the joint cross-entropy objective; keeps the parameters of the
// best-validation-perplexity epoch.
class Trainer {
public:
    using StopCheck = std::function<bool(const EpochStats&, Model&)>;

    Trainer(Model& model) : model_(model) {}

    // Runs up to `epochs` epochs; an optional callback after each epoch may
    // stop early (its view of the model uses the latest parameters).
    std::vector<EpochStats> fit(const std::vector<ModelInputs>& train_set,
                                const std::vector<ModelInputs>& valid_set,
                                int epochs, const StopCheck& stop = {});

private:
    Model& model_;
};

double validation_perplexity(Model& model,
                             const std::vector<ModelInputs>& valid_set);

}  // namespace comet
