#include "comet/pipeline.hpp"

#include <algorithm>
#include <set>

#include "comet/error.hpp"
#include "comet/grammar.hpp"
#include "comet/tokenize.hpp"
#include "comet/tree_diff.hpp"

namespace comet {

namespace {

std::vector<Span> return_spans(const Ast& ast) {
    std::vector<Span> spans;
    for (const auto& node : ast.nodes)
        if (node.type == NodeType::ReturnStatement) spans.push_back(node.span);
    return spans;
}

bool within_any(const std::optional<Span>& span, const std::vector<Span>& outer) {
    if (!span) return false;
    for (const Span& o : outer)
        if (o.begin <= span->begin && span->end <= o.end) return true;
    return false;
}

enum class Region { None, Keep, Insert, Del, UpdateFrom, UpdateTo };

std::vector<std::vector<double>> code_stream_features(
    const SerializedScript& script, const std::vector<Span>& old_returns,
    const std::vector<Span>& new_returns) {
    std::vector<std::vector<double>> feats;
    feats.reserve(script.tokens.size());
    Region region = Region::None;
    for (const Token& tok : script.tokens) {
        bool keyword = tok.kind == TokenKind::EditKeyword;
        if (keyword) {
            const std::string& t = tok.text;
            if (t == kw::kKeepOpen) region = Region::Keep;
            else if (t == kw::kInsertOpen) region = Region::Insert;
            else if (t == kw::kDelOpen) region = Region::Del;
            else if (t == kw::kUpdateFrom) region = Region::UpdateFrom;
            else if (t == kw::kUpdateTo) region = Region::UpdateTo;
            else if (t == kw::kKeepClose || t == kw::kInsertClose ||
                     t == kw::kDelClose || t == kw::kUpdateClose)
                region = Region::None;
            // the escape keyword leaves the region untouched
        }
        std::vector<double> f(kCodeFeatures, 0.0);
        if (!keyword) {
            switch (region) {
                case Region::Insert: f[0] = 1.0; break;
                case Region::Del: f[1] = 1.0; break;
                case Region::UpdateFrom: f[2] = 1.0; break;
                case Region::UpdateTo: f[3] = 1.0; break;
                case Region::Keep: f[4] = 1.0; break;
                case Region::None: break;
            }
            bool from_new =
                region == Region::Insert || region == Region::UpdateTo;
            f[5] = within_any(tok.span, from_new ? new_returns : old_returns)
                       ? 1.0
                       : 0.0;
        }
        feats.push_back(std::move(f));
    }
    return feats;
}

int type_class_of(NodeType type, int classes) {
    int cls;
    switch (type) {
        case NodeType::VariableDeclaration: cls = 0; break;
        case NodeType::IfStatement: cls = 1; break;  // selection
        case NodeType::WhileStatement:
        case NodeType::ForStatement: cls = 2; break;
        case NodeType::ReturnStatement: cls = 3; break;
        case NodeType::MethodInvocation: cls = 4; break;
        case NodeType::Assignment: cls = 5; break;
        case NodeType::Parameter: cls = 6; break;
        default: cls = 7; break;
    }
    return std::min(cls, classes - 1);
}

int op_index(NodeOp op) {
    switch (op) {
        case NodeOp::Keep: return 0;
        case NodeOp::Insert: return 1;
        case NodeOp::Del: return 2;
        case NodeOp::Update: return 3;
    }
    return 0;
}

// Truncates a serialized script at the last action boundary within `cap`.
std::vector<std::string> truncate_script(const std::vector<std::string>& texts,
                                         std::size_t cap) {
    if (texts.size() <= cap) return texts;
    GrammarAutomaton g;
    std::size_t last_boundary = 0;
    for (std::size_t i = 0; i < std::min(texts.size(), cap); ++i) {
        if (!g.step(texts[i])) break;
        if (g.allows_eos()) last_boundary = i + 1;
    }
    return std::vector<std::string>(texts.begin(),
                                    texts.begin() + last_boundary);
}

}  // namespace

Preprocessed preprocess(const Sample& sample, const ModelConfig& config,
                        bool with_target) {
    Preprocessed pre;
    pre.id = sample.id;

    TokenSeq old_code = tokenize_code(sample.old_code);
    TokenSeq new_code = tokenize_code(sample.new_code);
    SubtokenSeq old_sub = split_subtokens(old_code);
    SubtokenSeq new_sub = split_subtokens(new_code);

    EditScript code_diff = diff_tokens(old_sub.subtokens, new_sub.subtokens);
    pre.code_script = serialize(code_diff);

    Ast old_ast, new_ast;
    pre.parsed = true;
    try {
        old_ast = parse_java_subset(sample.old_code);
        new_ast = parse_java_subset(sample.new_code);
    } catch (const ParseError&) {
        if (!config.token_only_fallback) throw;
        pre.parsed = false;
    }

    std::vector<Span> old_returns, new_returns;
    if (pre.parsed) {
        old_returns = return_spans(old_ast);
        new_returns = return_spans(new_ast);

        TreeDiff diff = tree_diff(old_ast, new_ast);
        pre.graph = build_change_graph(old_ast, new_ast, diff);
        pre.deps = build_dependency_graph(old_ast, new_ast, pre.graph);
        pre.change_mask = change_guided_mask(pre.graph);
        pre.dep_mask = dependency_mask(pre.deps, pre.graph.size());
        pre.fused_mask = fuse_masks(pre.change_mask, pre.dep_mask, config.beta);
    }

    for (const Token& t : pre.code_script.tokens)
        pre.code_texts.push_back(t.text);
    pre.code_features =
        code_stream_features(pre.code_script, old_returns, new_returns);

    if (pre.parsed && !pre.graph.nodes.empty()) {
        for (const ChangeGraphNode& node : pre.graph.nodes) {
            pre.syntax_texts.push_back(node.value);
            std::vector<double> f(4 + config.type_classes, 0.0);
            f[op_index(node.operation)] = 1.0;
            f[4 + type_class_of(node.node_type, config.type_classes)] = 1.0;
            pre.syntax_features.push_back(std::move(f));
        }
    } else {
        // light variant: placeholder stream, neutral mask
        pre.syntax_texts.push_back(Vocabulary::bos_text());
        pre.syntax_features.push_back(
            std::vector<double>(4 + config.type_classes, 0.0));
        pre.fused_mask = AttentionMask::filled(1, 0.0);
    }

    TokenSeq old_comment = clean_comment(sample.old_comment);
    pre.old_comment_tokens = token_texts(old_comment);

    std::set<std::string> changed_names;
    if (pre.parsed) {
        for (const ChangeGraphNode& node : pre.graph.nodes) {
            if (node.operation == NodeOp::Keep) continue;
            changed_names.insert(node.value);
            for (auto& part : split_identifier(node.value))
                changed_names.insert(part);
            if (node.old_value) {
                changed_names.insert(*node.old_value);
                for (auto& part : split_identifier(*node.old_value))
                    changed_names.insert(part);
            }
        }
    }
    for (const Token& t : old_comment) {
        pre.comment_texts.push_back(t.text);
        pre.comment_features.push_back(
            {changed_names.count(t.text) ? 1.0 : 0.0});
    }
    if (pre.comment_texts.empty()) {
        pre.comment_texts.push_back(Vocabulary::bos_text());
        pre.comment_features.push_back({0.0});
    }
    if (pre.code_texts.empty()) {
        pre.code_texts.push_back(Vocabulary::bos_text());
        pre.code_features.push_back(std::vector<double>(kCodeFeatures, 0.0));
    }

    if (with_target) {
        TokenSeq new_comment = clean_comment(sample.new_comment);
        pre.new_comment_tokens = token_texts(new_comment);
        EditScript script = build_comment_edit_seq(old_comment, new_comment);
        pre.comment_script = script;
        for (const Token& t : serialize(script).tokens)
            pre.target_texts.push_back(t.text);
    }

    // Length caps.
    const auto cap = static_cast<std::size_t>(config.length_cap);
    auto cap_stream = [&](std::vector<std::string>& texts,
                          std::vector<std::vector<double>>& feats) {
        if (texts.size() > cap) {
            texts.resize(cap);
            feats.resize(cap);
            pre.truncated = true;
        }
    };
    cap_stream(pre.code_texts, pre.code_features);
    cap_stream(pre.comment_texts, pre.comment_features);
    if (pre.syntax_texts.size() > cap) {
        pre.syntax_texts.resize(cap);
        pre.syntax_features.resize(cap);
        AttentionMask cut = AttentionMask::filled(cap, 0.0);
        for (std::size_t i = 0; i < cap; ++i)
            for (std::size_t j = 0; j < cap; ++j)
                cut.at(i, j) = pre.fused_mask.at(i, j);
        pre.fused_mask = std::move(cut);
        pre.truncated = true;
    }
    if (pre.target_texts.size() > cap) {
        pre.target_texts = truncate_script(pre.target_texts, cap);
        pre.truncated = true;
    }
    return pre;
}

BuiltVocabs build_vocabs(const std::vector<Preprocessed>& items,
                         const ModelConfig& config) {
    std::map<std::string, long> code_counts, syntax_counts, script_counts;
    for (const Preprocessed& pre : items) {
        for (const auto& t : pre.code_texts) ++code_counts[t];
        for (const auto& t : pre.syntax_texts) ++syntax_counts[t];
        for (const auto& t : pre.comment_texts) ++script_counts[t];
        for (const auto& t : pre.target_texts) ++script_counts[t];
    }
    std::vector<std::string> script_reserved = {
        kw::kKeepOpen,   kw::kKeepClose,   kw::kInsertOpen, kw::kInsertClose,
        kw::kDelOpen,    kw::kDelClose,    kw::kUpdateFrom, kw::kUpdateTo,
        kw::kUpdateClose, kw::kInsertTag,  kw::kEscape,     kw::kBeginOfComment,
    };
    BuiltVocabs vocabs{
        Vocabulary::build(code_counts, config.vocab_cap, script_reserved),
        Vocabulary::build(syntax_counts, config.vocab_cap),
        Vocabulary::build(script_counts, config.vocab_cap, script_reserved),
    };
    return vocabs;
}

ModelInputs to_model_inputs(const Preprocessed& pre, const Vocabulary& code,
                            const Vocabulary& syntax,
                            const Vocabulary& script) {
    ModelInputs inputs;
    for (std::size_t i = 0; i < pre.code_texts.size(); ++i)
        inputs.code.token_ids.push_back(code.lookup(pre.code_texts[i]));
    inputs.code.features = pre.code_features;
    for (std::size_t i = 0; i < pre.syntax_texts.size(); ++i)
        inputs.syntax.token_ids.push_back(syntax.lookup(pre.syntax_texts[i]));
    inputs.syntax.features = pre.syntax_features;
    for (std::size_t i = 0; i < pre.comment_texts.size(); ++i)
        inputs.comment.token_ids.push_back(script.lookup(pre.comment_texts[i]));
    inputs.comment.features = pre.comment_features;
    inputs.fused_mask = pre.fused_mask;
    inputs.code_texts = pre.code_texts;
    inputs.comment_texts = pre.comment_texts;
    inputs.target_texts = pre.target_texts;
    return inputs;
}

TrainArtifacts run_train(const ModelConfig& config,
                         const std::vector<Sample>& train_samples,
                         const std::vector<Sample>& valid_samples,
                         std::unique_ptr<Model>& out_model) {
    TrainArtifacts artifacts;
    std::vector<Preprocessed> train_pre;
    for (const Sample& s : train_samples) {
        try {
            train_pre.push_back(preprocess(s, config, /*with_target=*/true));
        } catch (const std::exception&) {
            ++artifacts.rejected_samples;
        }
    }
    artifacts.used_samples = train_pre.size();
    if (train_pre.empty())
        throw std::runtime_error("no usable training samples");

    BuiltVocabs vocabs = build_vocabs(train_pre, config);
    std::vector<ModelInputs> train_inputs;
    for (const auto& pre : train_pre)
        train_inputs.push_back(
            to_model_inputs(pre, vocabs.code, vocabs.syntax, vocabs.script));

    std::vector<ModelInputs> valid_inputs;
    for (const Sample& s : valid_samples) {
        try {
            Preprocessed pre = preprocess(s, config, /*with_target=*/true);
            valid_inputs.push_back(
                to_model_inputs(pre, vocabs.code, vocabs.syntax, vocabs.script));
        } catch (const std::exception&) {
            ++artifacts.rejected_samples;
        }
    }

    out_model = std::make_unique<Model>(config, vocabs.code, vocabs.syntax,
                                        vocabs.script);
    Trainer trainer(*out_model);
    artifacts.log = trainer.fit(train_inputs, valid_inputs, config.epochs);
    return artifacts;
}

Prediction predict_sample(Model& model, const Sample& sample,
                          const ModelConfig& config) {
    Prediction out;
    out.id = sample.id;
    Preprocessed pre = preprocess(sample, config, /*with_target=*/false);
    ModelInputs inputs = to_model_inputs(pre, model.code_vocab(),
                                         model.syntax_vocab(),
                                         model.script_vocab());
    std::vector<Hypothesis> hyps =
        model.beam_search(inputs, config.beam_width);

    TokenSeq old_comment;
    for (const auto& t : pre.old_comment_tokens)
        old_comment.push_back(comment_word(t));

    for (const Hypothesis& hyp : hyps) {
        TokenSeq stream;
        for (const auto& t : hyp.tokens)
            stream.push_back(comment_word(t));
        try {
            EditScript script = deserialize(stream, ScriptSide::CommentSide);
            TokenSeq updated = apply_edits(old_comment, script);
            out.candidates.push_back(token_texts(updated));
        } catch (const ScriptFormatError&) {
            continue;  // filtered: malformed hypothesis
        } catch (const ApplyError&) {
            continue;  // filtered: not applicable to this comment
        }
    }
    if (out.candidates.empty()) {
        out.no_update = true;
        out.updated_comment = pre.old_comment_tokens;
        out.diagnostic = hyps.empty()
                             ? "decoder produced no hypotheses"
                             : "no hypothesis applied to the old comment";
    } else {
        out.updated_comment = out.candidates.front();
    }
    return out;
}

EvalReport run_eval(Model& model, const std::vector<Sample>& samples,
                    const ModelConfig& config,
                    std::vector<Prediction>* out_predictions) {
    std::vector<EvalRecord> records;
    for (const Sample& s : samples) {
        Prediction p = predict_sample(model, s, config);
        EvalRecord record;
        record.old_comment = token_texts(clean_comment(s.old_comment));
        record.gold = token_texts(clean_comment(s.new_comment));
        if (p.candidates.empty())
            record.predictions.push_back(record.old_comment);
        else
            record.predictions = p.candidates;
        records.push_back(std::move(record));
        if (out_predictions) out_predictions->push_back(std::move(p));
    }
    return evaluate(records);
}

}  // namespace comet
