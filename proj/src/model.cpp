#include "comet/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "comet/edit_script.hpp"
#include "comet/grammar.hpp"

#include "json.hpp"

namespace comet {

namespace {

// ---------------------------------------------------------------------------
// Engines: the forward math is written once against this interface. The tape
// engine records for backprop; the eager engine just evaluates (inference)
// and can be trimmed to bound memory during long decodes.

class TapeEngine {
public:
    using V = Tape::V;

    TapeEngine(ParamStore* store, std::mt19937_64* dropout_rng, double dropout,
               bool train)
        : tape_(store),
          dropout_rng_(dropout_rng),
          dropout_(dropout),
          train_(train) {}

    V input(Tensor t) { return tape_.input(std::move(t)); }
    V embed_row(const std::string& name, int row) {
        return tape_.param_row(name, row);
    }
    V matvec_param(const std::string& name, V x) {
        return tape_.matvec(param(name), x);
    }
    V affine(const std::string& w, const std::string& b, V x) {
        return tape_.add(tape_.matvec(param(w), x), param(b));
    }
    V add(V a, V b) { return tape_.add(a, b); }
    V sub(V a, V b) { return tape_.sub(a, b); }
    V mul(V a, V b) { return tape_.mul(a, b); }
    V scale(V a, double s) { return tape_.scale(a, s); }
    V sigmoid(V a) { return tape_.sigmoid(a); }
    V tanh_(V a) { return tape_.tanh_(a); }
    V concat(const std::vector<V>& parts) { return tape_.concat(parts); }
    V slice(V a, int begin, int len) { return tape_.slice(a, begin, len); }
    V dot(V a, V b) { return tape_.dot(a, b); }
    V softmax(V s) { return tape_.softmax(s); }
    V softmax_bias(V s, const std::vector<double>& bias) {
        return tape_.softmax_bias(s, bias);
    }
    V weighted_sum(V w, const std::vector<V>& vs) {
        return tape_.weighted_sum(w, vs);
    }
    V pick(V v, int i) { return tape_.pick(v, i); }
    V log_(V a) { return tape_.log_(a); }
    V mix(V g, V a, V b) { return tape_.mix(g, a, b); }
    V pointer_mix(V g, V gen, V copy, const std::vector<int>& map, int n) {
        return tape_.pointer_mix(g, gen, copy, map, n);
    }
    V mask_renorm(V p, const std::vector<double>& m) {
        return tape_.mask_renorm(p, m);
    }
    V dropout(V a) {
        return tape_.dropout(a, dropout_, *dropout_rng_, train_);
    }

    const Tensor& value(V id) const { return tape_.value(id); }
    void backward(V root) { tape_.backward(root); }

    std::size_t checkpoint() const { return 0; }
    void trim(std::size_t) {}  // training keeps full history

private:
    Tape tape_;
    std::mt19937_64* dropout_rng_;
    double dropout_;
    bool train_;
    std::unordered_map<std::string, V> param_cache_;

    V param(const std::string& name) {
        auto it = param_cache_.find(name);
        if (it != param_cache_.end()) return it->second;
        V id = tape_.param(name);
        param_cache_.emplace(name, id);
        return id;
    }
};

class EagerEngine {
public:
    using V = int;

    explicit EagerEngine(const ParamStore* store) : store_(store) {}

    V input(Tensor t) { return push(std::move(t)); }
    V embed_row(const std::string& name, int row) {
        const Tensor& w = store_->value(name);
        Tensor out(w.cols, 1);
        for (int j = 0; j < w.cols; ++j) out[j] = w(row, j);
        return push(std::move(out));
    }
    V matvec_param(const std::string& name, V x) {
        const Tensor& w = store_->value(name);
        const Tensor& xv = vals_[x];
        Tensor out(w.rows, 1);
        for (int i = 0; i < w.rows; ++i) {
            double acc = 0.0;
            for (int j = 0; j < w.cols; ++j) acc += w(i, j) * xv[j];
            out[i] = acc;
        }
        return push(std::move(out));
    }
    V affine(const std::string& w, const std::string& b, V x) {
        V wx = matvec_param(w, x);
        const Tensor& bv = store_->value(b);
        Tensor out = vals_[wx];
        for (int k = 0; k < out.size(); ++k) out.data[k] += bv.data[k];
        return push(std::move(out));
    }
    V add(V a, V b) {
        Tensor out = vals_[a];
        for (int k = 0; k < out.size(); ++k) out.data[k] += vals_[b].data[k];
        return push(std::move(out));
    }
    V sub(V a, V b) {
        Tensor out = vals_[a];
        for (int k = 0; k < out.size(); ++k) out.data[k] -= vals_[b].data[k];
        return push(std::move(out));
    }
    V mul(V a, V b) {
        Tensor out = vals_[a];
        for (int k = 0; k < out.size(); ++k) out.data[k] *= vals_[b].data[k];
        return push(std::move(out));
    }
    V scale(V a, double s) {
        Tensor out = vals_[a];
        for (double& v : out.data) v *= s;
        return push(std::move(out));
    }
    V sigmoid(V a) {
        Tensor out = vals_[a];
        for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
        return push(std::move(out));
    }
    V tanh_(V a) {
        Tensor out = vals_[a];
        for (double& v : out.data) v = std::tanh(v);
        return push(std::move(out));
    }
    V concat(const std::vector<V>& parts) {
        int total = 0;
        for (V p : parts) total += vals_[p].rows;
        Tensor out(total, 1);
        int off = 0;
        for (V p : parts) {
            for (int i = 0; i < vals_[p].rows; ++i) out[off + i] = vals_[p][i];
            off += vals_[p].rows;
        }
        return push(std::move(out));
    }
    V slice(V a, int begin, int len) {
        Tensor out(len, 1);
        for (int i = 0; i < len; ++i) out[i] = vals_[a][begin + i];
        return push(std::move(out));
    }
    V dot(V a, V b) {
        Tensor out(1, 1);
        double acc = 0.0;
        for (int k = 0; k < vals_[a].size(); ++k)
            acc += vals_[a].data[k] * vals_[b].data[k];
        out[0] = acc;
        return push(std::move(out));
    }
    V softmax(V s) {
        Tensor out = vals_[s];
        double mx = *std::max_element(out.data.begin(), out.data.end());
        double sum = 0.0;
        for (double& v : out.data) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : out.data) v /= sum;
        return push(std::move(out));
    }
    V softmax_bias(V s, const std::vector<double>& bias) {
        const Tensor& sv = vals_[s];
        Tensor out(sv.rows, 1);
        bool any_open = false;
        for (double b : bias)
            if (!is_blocked(b)) any_open = true;
        if (!any_open) {
            for (double& v : out.data) v = 1.0 / sv.rows;
            return push(std::move(out));
        }
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < sv.rows; ++k)
            if (!is_blocked(bias[k])) mx = std::max(mx, sv[k] + bias[k]);
        double sum = 0.0;
        for (int k = 0; k < sv.rows; ++k) {
            if (is_blocked(bias[k])) continue;
            out[k] = std::exp(sv[k] + bias[k] - mx);
            sum += out[k];
        }
        for (double& v : out.data) v /= sum;
        return push(std::move(out));
    }
    V weighted_sum(V w, const std::vector<V>& vs) {
        int d = vals_[vs[0]].rows;
        Tensor out(d, 1);
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (int k = 0; k < d; ++k)
                out[k] += vals_[w][static_cast<int>(i)] * vals_[vs[i]][k];
        return push(std::move(out));
    }
    V pick(V v, int i) {
        Tensor out(1, 1);
        out[0] = vals_[v][i];
        return push(std::move(out));
    }
    V log_(V a) {
        Tensor out = vals_[a];
        for (double& v : out.data) v = std::log(v);
        return push(std::move(out));
    }
    V mix(V g, V a, V b) {
        double gv = vals_[g][0];
        Tensor out = vals_[a];
        for (int k = 0; k < out.size(); ++k)
            out.data[k] = gv * out.data[k] + (1.0 - gv) * vals_[b].data[k];
        return push(std::move(out));
    }
    V pointer_mix(V g, V gen, V copy, const std::vector<int>& map, int n) {
        double gv = vals_[g][0];
        Tensor out(n, 1);
        for (int i = 0; i < vals_[gen].rows; ++i) out[i] = gv * vals_[gen][i];
        for (int p = 0; p < vals_[copy].rows; ++p)
            out[map[p]] += (1.0 - gv) * vals_[copy][p];
        return push(std::move(out));
    }
    V mask_renorm(V p, const std::vector<double>& m) {
        const Tensor& pv = vals_[p];
        double z = 0.0;
        for (int k = 0; k < pv.rows; ++k) z += pv[k] * m[k];
        Tensor out(pv.rows, 1);
        for (int k = 0; k < pv.rows; ++k) out[k] = pv[k] * m[k] / z;
        return push(std::move(out));
    }
    V dropout(V a) { return a; }  // inference

    const Tensor& value(V id) const { return vals_[id]; }
    Tensor take(V id) { return vals_[id]; }

    std::size_t checkpoint() const { return vals_.size(); }
    void trim(std::size_t mark) { vals_.resize(mark); }

private:
    const ParamStore* store_;
    std::vector<Tensor> vals_;

    V push(Tensor t) {
        vals_.push_back(std::move(t));
        return static_cast<V>(vals_.size() - 1);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Extended vocabulary (pointer targets)

struct Model::ExtVocab {
    int base = 0;
    std::vector<std::string> ext_texts;
    std::unordered_map<std::string, int> ext_index;  // text -> base+k
    std::vector<int> copy_map;  // copy position -> merged id
    std::vector<std::string> copy_texts;

    int size() const { return base + static_cast<int>(ext_texts.size()); }

    const std::string& text_of(const Vocabulary& vocab, int id) const {
        if (id < base) return vocab.token(id);
        return ext_texts[id - base];
    }
};

Model::ExtVocab Model::extended_vocab(const ModelInputs& inputs) const {
    ExtVocab ev;
    ev.base = script_vocab_.size();
    auto add_position = [&](const std::string& text) {
        int id = script_vocab_.lookup(text);
        if (id != Vocabulary::kUnk || text == Vocabulary::unk_text()) {
            ev.copy_map.push_back(id);
        } else {
            auto it = ev.ext_index.find(text);
            int ext_id;
            if (it != ev.ext_index.end()) {
                ext_id = it->second;
            } else {
                ext_id = ev.base + static_cast<int>(ev.ext_texts.size());
                ev.ext_texts.push_back(text);
                ev.ext_index.emplace(text, ext_id);
            }
            ev.copy_map.push_back(ext_id);
        }
        ev.copy_texts.push_back(text);
    };
    for (const auto& t : inputs.code_texts) add_position(t);
    for (const auto& t : inputs.comment_texts) add_position(t);
    return ev;
}

// ---------------------------------------------------------------------------
// Construction

Model::Model(ModelConfig config, Vocabulary code_vocab, Vocabulary syntax_vocab,
             Vocabulary script_vocab)
    : cfg_(config),
      code_vocab_(std::move(code_vocab)),
      syntax_vocab_(std::move(syntax_vocab)),
      script_vocab_(std::move(script_vocab)) {
    init_params();
}

void Model::init_params() {
    std::mt19937_64 rng(cfg_.seed);
    const int E = cfg_.embed_dim;
    const int H = cfg_.encoder_hidden;
    const int D = cfg_.decoder_hidden;
    const int A = cfg_.attn_hidden;

    params_.create("emb.code", code_vocab_.size(), E, rng);
    params_.create("emb.syntax", syntax_vocab_.size(), E, rng);
    params_.create("emb.comment", script_vocab_.size(), E, rng);

    auto make_gru = [&](const std::string& prefix, int input, int hidden) {
        params_.create(prefix + ".W", 3 * hidden, input, rng);
        params_.create(prefix + ".U", 3 * hidden, hidden, rng);
        params_.create(prefix + ".b", 3 * hidden, 1, rng);
    };
    auto make_encoder = [&](const std::string& prefix, int feat) {
        for (int l = 0; l < cfg_.layers; ++l) {
            int in = l == 0 ? E + feat : 2 * H;
            make_gru(prefix + ".l" + std::to_string(l) + ".fwd", in, H);
            make_gru(prefix + ".l" + std::to_string(l) + ".bwd", in, H);
        }
    };
    make_encoder("enc.code", kCodeFeatures);
    make_encoder("enc.syntax", syntax_features(cfg_));
    make_encoder("enc.comment", kCommentFeatures);

    const int S = cfg_.encoder_state();  // 2H
    params_.create("syn_attn.Wq", S, S, rng);
    params_.create("syn_attn.Wk", S, S, rng);
    params_.create("syn_attn.Wv", S, S, rng);

    const int summary = 3 * S;
    for (int l = 0; l < cfg_.layers; ++l) {
        params_.create("dec.init.l" + std::to_string(l) + ".W", D, summary, rng);
        params_.create("dec.init.l" + std::to_string(l) + ".b", D, 1, rng);
    }

    const int C = cfg_.joint_context();
    for (int l = 0; l < cfg_.layers; ++l) {
        int in = l == 0 ? E + C : D;
        make_gru("dec.l" + std::to_string(l), in, D);
    }

    auto make_scorer = [&](const std::string& prefix, int state_width) {
        params_.create(prefix + ".W1", A, D + state_width, rng);
        params_.create(prefix + ".b1", A, 1, rng);
        params_.create(prefix + ".w2", 1, A, rng);
        params_.create(prefix + ".b2", 1, 1, rng);
    };
    make_scorer("attn.code", S);
    make_scorer("attn.syntax", cfg_.syntax_state());
    make_scorer("attn.comment", S);
    make_scorer("copy_attn", S);

    params_.create("out.W", script_vocab_.size(), D + C, rng);
    params_.create("out.b", script_vocab_.size(), 1, rng);
    params_.create("gate.w", 1, D + C + E, rng);
    params_.create("gate.b", 1, 1, rng);
}

// ---------------------------------------------------------------------------
// Forward pieces (templated over the engine)

namespace {

// Gates packed [z; r; c]; the candidate applies the reset gate to Uh only.
template <class Eng>
typename Eng::V gru_step(Eng& eng, const std::string& prefix,
                         typename Eng::V x, typename Eng::V h, int hidden) {
    using V = typename Eng::V;
    V wx = eng.affine(prefix + ".W", prefix + ".b", x);  // Wx + b (3H)
    V uh = eng.matvec_param(prefix + ".U", h);       // Uh (3H)
    V z = eng.sigmoid(
        eng.add(eng.slice(wx, 0, hidden), eng.slice(uh, 0, hidden)));
    V r = eng.sigmoid(
        eng.add(eng.slice(wx, hidden, hidden), eng.slice(uh, hidden, hidden)));
    V cand = eng.tanh_(eng.add(eng.slice(wx, 2 * hidden, hidden),
                               eng.mul(r, eng.slice(uh, 2 * hidden, hidden))));
    // h' = h + z * (cand - h)
    return eng.add(h, eng.mul(z, eng.sub(cand, h)));
}

template <class Eng>
struct EncodedT {
    std::vector<typename Eng::V> code_states;
    std::vector<typename Eng::V> syntax_states;   // recurrent ++ attended
    std::vector<typename Eng::V> comment_states;
    typename Eng::V summary;  // concat of per-stream finals
};

template <class Eng>
struct StepStateT {
    std::vector<typename Eng::V> hidden;  // per decoder layer
};

template <class Eng>
class Forward {
public:
    using V = typename Eng::V;

    Forward(const Model& model, const ModelConfig& cfg, Eng& eng)
        : model_(model), cfg_(cfg), eng_(eng) {}

    std::vector<V> encode_stream(const std::string& prefix,
                                 const std::string& emb_name,
                                 const StreamInput& stream, V* final_out) {
        const int H = cfg_.encoder_hidden;
        const std::size_t n = stream.token_ids.size();
        assert(n > 0);
        std::vector<V> xs(n);
        for (std::size_t t = 0; t < n; ++t) {
            V emb = eng_.embed_row(emb_name, stream.token_ids[t]);
            Tensor feat(static_cast<int>(stream.features[t].size()), 1);
            for (std::size_t k = 0; k < stream.features[t].size(); ++k)
                feat[static_cast<int>(k)] = stream.features[t][k];
            xs[t] = eng_.concat({emb, eng_.input(std::move(feat))});
        }
        V fwd_final = 0, bwd_final = 0;
        for (int l = 0; l < cfg_.layers; ++l) {
            std::string fwd = prefix + ".l" + std::to_string(l) + ".fwd";
            std::string bwd = prefix + ".l" + std::to_string(l) + ".bwd";
            std::vector<V> hs_f(n), hs_b(n);
            V h = eng_.input(Tensor::zeros(H));
            for (std::size_t t = 0; t < n; ++t)
                hs_f[t] = h = gru_step(eng_, fwd, xs[t], h, H);
            h = eng_.input(Tensor::zeros(H));
            for (std::size_t t = n; t-- > 0;)
                hs_b[t] = h = gru_step(eng_, bwd, xs[t], h, H);
            for (std::size_t t = 0; t < n; ++t)
                xs[t] = eng_.concat({hs_f[t], hs_b[t]});
            if (l == cfg_.layers - 1) {
                fwd_final = hs_f[n - 1];
                bwd_final = hs_b[0];
            }
        }
        if (final_out) *final_out = eng_.concat({fwd_final, bwd_final});
        return xs;
    }

    // Single-head scaled-dot self-attention over the syntax states with the
    // fused structure mask as additive bias; output concatenated to input.
    std::vector<V> syntax_attention(const std::vector<V>& states,
                                    const AttentionMask& mask) {
        const std::size_t n = states.size();
        assert(mask.size == n);
        const double inv_sqrt_d =
            1.0 / std::sqrt(static_cast<double>(cfg_.encoder_state()));
        std::vector<V> q(n), k(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = eng_.matvec_param("syn_attn.Wq", states[i]);
            k[i] = eng_.matvec_param("syn_attn.Wk", states[i]);
            v[i] = eng_.matvec_param("syn_attn.Wv", states[i]);
        }
        std::vector<V> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<V> scores(n);
            for (std::size_t j = 0; j < n; ++j)
                scores[j] = eng_.scale(eng_.dot(q[i], k[j]), inv_sqrt_d);
            V packed = eng_.concat(scores);
            std::vector<double> bias(n);
            for (std::size_t j = 0; j < n; ++j) bias[j] = mask.at(i, j);
            V alpha = eng_.softmax_bias(packed, bias);
            V ctx = eng_.weighted_sum(alpha, v);
            out[i] = eng_.concat({states[i], ctx});
        }
        return out;
    }

    EncodedT<Eng> encode_all(const ModelInputs& inputs) {
        EncodedT<Eng> enc;
        V code_final, syn_final, comment_final;
        enc.code_states =
            encode_stream("enc.code", "emb.code", inputs.code, &code_final);
        auto syn_rec = encode_stream("enc.syntax", "emb.syntax", inputs.syntax,
                                     &syn_final);
        enc.syntax_states = syntax_attention(syn_rec, inputs.fused_mask);
        enc.comment_states = encode_stream("enc.comment", "emb.comment",
                                           inputs.comment, &comment_final);
        enc.summary = eng_.concat({code_final, syn_final, comment_final});
        return enc;
    }

    StepStateT<Eng> initial_state(const EncodedT<Eng>& enc) {
        StepStateT<Eng> st;
        for (int l = 0; l < cfg_.layers; ++l) {
            std::string p = "dec.init.l" + std::to_string(l);
            st.hidden.push_back(
                eng_.tanh_(eng_.affine(p + ".W", p + ".b", enc.summary)));
        }
        return st;
    }

    V attend(const std::string& prefix, V query,
             const std::vector<V>& states) {
        std::vector<V> scores(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) {
            V joint = eng_.concat({query, states[i]});
            V hidden =
                eng_.tanh_(eng_.affine(prefix + ".W1", prefix + ".b1", joint));
            scores[i] = eng_.affine(prefix + ".w2", prefix + ".b2", hidden);
        }
        V alpha = eng_.softmax(eng_.concat(scores));
        return eng_.weighted_sum(alpha, states);
    }

    // Returns the masked mixture distribution over the extended vocabulary.
    V decode_step(const EncodedT<Eng>& enc, StepStateT<Eng>& state,
                  int prev_token_id, const Model::ExtVocab& ev,
                  const std::vector<double>& grammar_mask) {
        V query = state.hidden.back();
        V c_code = attend("attn.code", query, enc.code_states);
        V c_syn = attend("attn.syntax", query, enc.syntax_states);
        V c_comment = attend("attn.comment", query, enc.comment_states);
        V joint = eng_.concat({c_code, c_syn, c_comment});

        int emb_id = prev_token_id < model_.script_vocab().size()
                         ? prev_token_id
                         : Vocabulary::kUnk;
        V prev_emb = eng_.embed_row("emb.comment", emb_id);

        V x = eng_.concat({prev_emb, joint});
        for (int l = 0; l < cfg_.layers; ++l) {
            std::string p = "dec.l" + std::to_string(l);
            state.hidden[l] =
                gru_step(eng_, p, x, state.hidden[l], cfg_.decoder_hidden);
            x = state.hidden[l];
        }
        V h_top = state.hidden.back();

        V feat = eng_.dropout(eng_.concat({h_top, joint}));
        V gen = eng_.softmax(eng_.affine("out.W", "out.b", feat));

        std::vector<V> copy_states = enc.code_states;
        // syntax states are wider; copy attention spans code and comment
        copy_states.insert(copy_states.end(), enc.comment_states.begin(),
                           enc.comment_states.end());
        std::vector<V> copy_scores(copy_states.size());
        for (std::size_t i = 0; i < copy_states.size(); ++i) {
            V joint_i = eng_.concat({h_top, copy_states[i]});
            V hidden = eng_.tanh_(eng_.affine("copy_attn.W1", "copy_attn.b1",
                                              joint_i));
            copy_scores[i] =
                eng_.affine("copy_attn.w2", "copy_attn.b2", hidden);
        }
        V copy_alpha = eng_.softmax(eng_.concat(copy_scores));

        V gate_in = eng_.concat({h_top, joint, prev_emb});
        V gate = eng_.sigmoid(eng_.affine("gate.w", "gate.b", gate_in));

        V mixed = eng_.pointer_mix(gate, gen, copy_alpha, ev.copy_map,
                                   ev.size());
        return eng_.mask_renorm(mixed, grammar_mask);
    }

private:
    const Model& model_;
    const ModelConfig& cfg_;
    Eng& eng_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Grammar masking over the extended vocabulary

namespace {

// Distinguishes keyword classes so per-step validity is computed once per
// class rather than per vocabulary entry.
struct MaskBuilder {
    const Vocabulary& vocab;
    const Model::ExtVocab& ev;

    // budget_left: tokens we may still emit including EOS; < 0 disables the
    // budget constraint (training).
    std::vector<double> build(const GrammarAutomaton& g, int budget_left) const {
        std::vector<double> mask(ev.size(), 0.0);
        auto consider = [&](int id, const std::string& text) {
            if (id == Vocabulary::kPad || id == Vocabulary::kBos) return;
            if (id == Vocabulary::kEos) {
                if (g.allows_eos() && (budget_left < 0 || budget_left >= 1))
                    mask[id] = 1.0;
                return;
            }
            if (!g.allows(text)) return;
            if (budget_left >= 0) {
                GrammarAutomaton next = g;
                next.step(text);
                if (1 + next.min_tokens_to_accept() + 1 > budget_left) return;
            }
            mask[id] = 1.0;
        };
        for (int id = 0; id < vocab.size(); ++id) consider(id, vocab.token(id));
        for (std::size_t k = 0; k < ev.ext_texts.size(); ++k)
            consider(ev.base + static_cast<int>(k), ev.ext_texts[k]);
        return mask;
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Loss

double Model::batch_loss(const std::vector<const ModelInputs*>& batch,
                         bool train, std::mt19937_64& dropout_rng) {
    long total_tokens = 0;
    for (const ModelInputs* s : batch)
        total_tokens += static_cast<long>(s->target_texts.size()) + 1;  // EOS
    if (total_tokens == 0) throw std::invalid_argument("empty batch");

    double total_nll = 0.0;
    for (const ModelInputs* sample : batch) {
        TapeEngine eng(&params_, &dropout_rng, cfg_.dropout, train);
        Forward<TapeEngine> fwd(*this, cfg_, eng);
        auto enc = fwd.encode_all(*sample);
        auto state = fwd.initial_state(enc);
        ExtVocab ev = extended_vocab(*sample);
        MaskBuilder mb{script_vocab_, ev};
        GrammarAutomaton g;

        std::vector<int> targets;
        for (const auto& text : sample->target_texts) {
            int id = script_vocab_.lookup(text);
            if (id == Vocabulary::kUnk) {
                auto it = ev.ext_index.find(text);
                if (it != ev.ext_index.end()) id = it->second;
            }
            targets.push_back(id);
        }
        targets.push_back(Vocabulary::kEos);

        std::vector<Tape::V> step_nlls;
        int prev = Vocabulary::kBos;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            std::vector<double> mask = mb.build(g, -1);
            Tape::V dist = fwd.decode_step(enc, state, prev, ev, mask);
            Tape::V p = eng.pick(dist, targets[t]);
            step_nlls.push_back(eng.scale(eng.log_(p), -1.0));
            if (t + 1 < targets.size()) {
                const std::string& text = sample->target_texts[t];
                if (!g.step(text))
                    throw std::runtime_error(
                        "target script violates the action grammar at '" +
                        text + "'");
            }
            prev = targets[t];
        }
        Tape::V sum = step_nlls[0];
        for (std::size_t k = 1; k < step_nlls.size(); ++k)
            sum = eng.add(sum, step_nlls[k]);
        double sample_nll = eng.value(sum)[0];
        if (!std::isfinite(sample_nll))
            throw std::runtime_error("non-finite loss; aborting");
        total_nll += sample_nll;
        if (train) {
            Tape::V root = eng.scale(sum, 1.0 / static_cast<double>(total_tokens));
            eng.backward(root);
        }
    }
    return total_nll / static_cast<double>(total_tokens);
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

struct BeamHyp {
    std::vector<std::string> tokens;
    std::vector<int> token_ids;
    double log_prob = 0.0;
    StepStateT<EagerEngine> state;
    GrammarAutomaton grammar;
    int prev_id = Vocabulary::kBos;
};

double normalized_score(double log_prob, std::size_t emitted) {
    return log_prob / static_cast<double>(emitted + 1);  // + EOS
}

}  // namespace

std::vector<Hypothesis> Model::beam_search(const ModelInputs& inputs,
                                           int width) const {
    assert(width >= 1);
    EagerEngine eng(&params_);
    Forward<EagerEngine> fwd(*this, cfg_, eng);
    auto enc = fwd.encode_all(inputs);
    ExtVocab ev = extended_vocab(inputs);
    MaskBuilder mb{script_vocab_, ev};
    const std::size_t base_mark = eng.checkpoint();

    std::vector<BeamHyp> live(1);
    live[0].state = fwd.initial_state(enc);
    std::vector<Hypothesis> finished;

    struct Candidate {
        std::size_t hyp;
        int token_id;
        double log_prob;  // cumulative
        double step_prob;
    };

    for (int step = 0; step < cfg_.max_decode_len && !live.empty(); ++step) {
        int budget_left = cfg_.max_decode_len - step;
        std::vector<Candidate> candidates;
        std::vector<StepStateT<EagerEngine>> new_states(live.size());
        for (std::size_t h = 0; h < live.size(); ++h) {
            std::vector<double> mask = mb.build(live[h].grammar, budget_left);
            StepStateT<EagerEngine> st = live[h].state;
            EagerEngine::V dist =
                fwd.decode_step(enc, st, live[h].prev_id, ev, mask);
            new_states[h] = st;
            const Tensor& p = eng.value(dist);
            for (int i = 0; i < p.rows; ++i) {
                if (p[i] <= 0.0) continue;
                candidates.push_back(Candidate{
                    h, i, live[h].log_prob + std::log(p[i]), p[i]});
            }
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) {
                             if (a.log_prob != b.log_prob)
                                 return a.log_prob > b.log_prob;
                             return a.token_id < b.token_id;
                         });

        // Snapshot hidden tensors, then trim the engine so memory stays flat.
        std::vector<std::vector<Tensor>> hidden_copies(new_states.size());
        for (std::size_t h = 0; h < new_states.size(); ++h)
            for (auto v : new_states[h].hidden)
                hidden_copies[h].push_back(eng.take(v));

        std::vector<BeamHyp> next_live;
        int taken = 0;
        for (const Candidate& c : candidates) {
            if (taken >= width) break;
            ++taken;
            if (c.token_id == Vocabulary::kEos) {
                Hypothesis done;
                done.tokens = live[c.hyp].tokens;
                done.log_prob = c.log_prob;
                done.score = normalized_score(c.log_prob, done.tokens.size());
                finished.push_back(std::move(done));
                continue;
            }
            BeamHyp nh;
            nh.tokens = live[c.hyp].tokens;
            nh.tokens.push_back(
                c.token_id < ev.base ? script_vocab_.token(c.token_id)
                                     : ev.ext_texts[c.token_id - ev.base]);
            nh.token_ids = live[c.hyp].token_ids;
            nh.token_ids.push_back(c.token_id);
            nh.log_prob = c.log_prob;
            nh.grammar = live[c.hyp].grammar;
            bool ok = nh.grammar.step(nh.tokens.back());
            assert(ok);
            (void)ok;
            nh.prev_id = c.token_id;
            nh.state.hidden.clear();
            next_live.push_back(std::move(nh));
        }

        // Rebuild surviving states on the trimmed engine.
        eng.trim(base_mark);
        {
            std::size_t idx = 0;
            int taken2 = 0;
            for (const Candidate& c : candidates) {
                if (taken2 >= width) break;
                ++taken2;
                if (c.token_id == Vocabulary::kEos) continue;
                BeamHyp& nh = next_live[idx++];
                for (Tensor& t : hidden_copies[c.hyp])
                    nh.state.hidden.push_back(eng.input(t));
            }
        }
        live = std::move(next_live);
        if (static_cast<int>(finished.size()) >= width) break;
    }

    std::stable_sort(finished.begin(), finished.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                         return a.score > b.score;
                     });
    // distinct token sequences only
    std::vector<Hypothesis> out;
    for (auto& h : finished) {
        bool dup = false;
        for (const auto& o : out)
            if (o.tokens == h.tokens) dup = true;
        if (!dup) out.push_back(std::move(h));
        if (static_cast<int>(out.size()) >= width) break;
    }
    return out;
}

Hypothesis Model::greedy_decode(const ModelInputs& inputs) const {
    EagerEngine eng(&params_);
    Forward<EagerEngine> fwd(*this, cfg_, eng);
    auto enc = fwd.encode_all(inputs);
    ExtVocab ev = extended_vocab(inputs);
    MaskBuilder mb{script_vocab_, ev};
    const std::size_t base_mark = eng.checkpoint();

    Hypothesis hyp;
    auto state = fwd.initial_state(enc);
    GrammarAutomaton g;
    int prev = Vocabulary::kBos;
    for (int step = 0; step < cfg_.max_decode_len; ++step) {
        int budget_left = cfg_.max_decode_len - step;
        std::vector<double> mask = mb.build(g, budget_left);
        EagerEngine::V dist = fwd.decode_step(enc, state, prev, ev, mask);
        const Tensor& p = eng.value(dist);
        int best = 0;
        for (int i = 1; i < p.rows; ++i)
            if (p[i] > p[best]) best = i;
        hyp.log_prob += std::log(p[best]);
        if (best == Vocabulary::kEos) break;
        const std::string& text = best < ev.base
                                      ? script_vocab_.token(best)
                                      : ev.ext_texts[best - ev.base];
        hyp.tokens.push_back(text);
        bool ok = g.step(text);
        assert(ok);
        (void)ok;
        prev = best;

        std::vector<Tensor> hiddens;
        for (auto v : state.hidden) hiddens.push_back(eng.take(v));
        eng.trim(base_mark);
        state.hidden.clear();
        for (Tensor& t : hiddens) state.hidden.push_back(eng.input(t));
    }
    hyp.score = normalized_score(hyp.log_prob, hyp.tokens.size());
    return hyp;
}

std::vector<std::string> Model::sample_decode(const ModelInputs& inputs,
                                              std::mt19937_64& rng) const {
    EagerEngine eng(&params_);
    Forward<EagerEngine> fwd(*this, cfg_, eng);
    auto enc = fwd.encode_all(inputs);
    ExtVocab ev = extended_vocab(inputs);
    MaskBuilder mb{script_vocab_, ev};
    const std::size_t base_mark = eng.checkpoint();

    std::vector<std::string> out;
    auto state = fwd.initial_state(enc);
    GrammarAutomaton g;
    int prev = Vocabulary::kBos;
    for (int step = 0; step < cfg_.max_decode_len; ++step) {
        int budget_left = cfg_.max_decode_len - step;
        std::vector<double> mask = mb.build(g, budget_left);
        EagerEngine::V dist = fwd.decode_step(enc, state, prev, ev, mask);
        const Tensor& p = eng.value(dist);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double r = u(rng);
        int chosen = p.rows - 1;
        double acc = 0.0;
        for (int i = 0; i < p.rows; ++i) {
            acc += p[i];
            if (r <= acc) {
                chosen = i;
                break;
            }
        }
        if (chosen == Vocabulary::kEos) break;
        const std::string& text = chosen < ev.base
                                      ? script_vocab_.token(chosen)
                                      : ev.ext_texts[chosen - ev.base];
        out.push_back(text);
        bool ok = g.step(text);
        assert(ok && "sampled token escaped the grammar mask");
        (void)ok;
        prev = chosen;

        std::vector<Tensor> hiddens;
        for (auto v : state.hidden) hiddens.push_back(eng.take(v));
        eng.trim(base_mark);
        state.hidden.clear();
        for (Tensor& t : hiddens) state.hidden.push_back(eng.input(t));
    }
    return out;
}

std::vector<std::pair<std::string, double>> Model::step_distribution(
    const ModelInputs& inputs, const std::vector<std::string>& prefix) const {
    EagerEngine eng(&params_);
    Forward<EagerEngine> fwd(*this, cfg_, eng);
    auto enc = fwd.encode_all(inputs);
    ExtVocab ev = extended_vocab(inputs);
    MaskBuilder mb{script_vocab_, ev};

    auto state = fwd.initial_state(enc);
    GrammarAutomaton g;
    int prev = Vocabulary::kBos;
    EagerEngine::V dist = 0;
    for (std::size_t t = 0; t <= prefix.size(); ++t) {
        std::vector<double> mask = mb.build(g, -1);
        dist = fwd.decode_step(enc, state, prev, ev, mask);
        if (t == prefix.size()) break;
        const std::string& text = prefix[t];
        int id = script_vocab_.lookup(text);
        if (id == Vocabulary::kUnk) {
            auto it = ev.ext_index.find(text);
            if (it != ev.ext_index.end()) id = it->second;
        }
        if (!g.step(text))
            throw std::invalid_argument("prefix violates the action grammar");
        prev = id;
    }
    const Tensor& p = eng.value(dist);
    std::vector<std::pair<std::string, double>> out;
    for (int i = 0; i < p.rows; ++i)
        out.emplace_back(i < ev.base ? script_vocab_.token(i)
                                     : ev.ext_texts[i - ev.base],
                         p[i]);
    return out;
}

Model::DirectionStates Model::debug_bigru_layer0(const ModelInputs& inputs,
                                                 int stream) const {
    const StreamInput* si = stream == 0   ? &inputs.code
                            : stream == 1 ? &inputs.syntax
                                          : &inputs.comment;
    const char* prefix = stream == 0   ? "enc.code"
                         : stream == 1 ? "enc.syntax"
                                       : "enc.comment";
    const char* emb = stream == 0   ? "emb.code"
                      : stream == 1 ? "emb.syntax"
                                    : "emb.comment";
    EagerEngine eng(&params_);
    const int H = cfg_.encoder_hidden;
    const std::size_t n = si->token_ids.size();
    std::vector<EagerEngine::V> xs(n);
    for (std::size_t t = 0; t < n; ++t) {
        EagerEngine::V e = eng.embed_row(emb, si->token_ids[t]);
        Tensor feat(static_cast<int>(si->features[t].size()), 1);
        for (std::size_t k = 0; k < si->features[t].size(); ++k)
            feat[static_cast<int>(k)] = si->features[t][k];
        xs[t] = eng.concat({e, eng.input(std::move(feat))});
    }
    DirectionStates out;
    std::string fwd = std::string(prefix) + ".l0.fwd";
    std::string bwd = std::string(prefix) + ".l0.bwd";
    EagerEngine::V h = eng.input(Tensor::zeros(H));
    for (std::size_t t = 0; t < n; ++t) {
        h = gru_step(eng, fwd, xs[t], h, H);
        out.forward.push_back(eng.value(h).data);
    }
    h = eng.input(Tensor::zeros(H));
    out.backward.resize(n);
    for (std::size_t t = n; t-- > 0;) {
        h = gru_step(eng, bwd, xs[t], h, H);
        out.backward[t] = eng.value(h).data;
    }
    return out;
}

double Model::parameter_l2() const {
    double acc = 0.0;
    params_.for_each([&](const std::string&, const Tensor& v, const Tensor&) {
        for (double x : v.data) acc += x * x;
    });
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

nlohmann::json vocab_to_json(const Vocabulary& v) {
    return nlohmann::json(v.tokens());
}

Vocabulary vocab_from_json(const nlohmann::json& j) {
    Vocabulary v;
    for (const auto& t : j) v.add(t.get<std::string>());
    return v;
}

nlohmann::json config_to_json(const ModelConfig& c) {
    return nlohmann::json{{"embed_dim", c.embed_dim},
                          {"encoder_hidden", c.encoder_hidden},
                          {"decoder_hidden", c.decoder_hidden},
                          {"layers", c.layers},
                          {"attn_hidden", c.attn_hidden},
                          {"dropout", c.dropout},
                          {"learning_rate", c.learning_rate},
                          {"batch_size", c.batch_size},
                          {"beam_width", c.beam_width},
                          {"beta", c.beta},
                          {"vocab_cap", c.vocab_cap},
                          {"seed", c.seed},
                          {"epochs", c.epochs},
                          {"max_decode_len", c.max_decode_len},
                          {"length_cap", c.length_cap},
                          {"type_classes", c.type_classes},
                          {"token_only_fallback", c.token_only_fallback}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.embed_dim = j.at("embed_dim").get<int>();
    c.encoder_hidden = j.at("encoder_hidden").get<int>();
    c.decoder_hidden = j.at("decoder_hidden").get<int>();
    c.layers = j.at("layers").get<int>();
    c.attn_hidden = j.at("attn_hidden").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.beam_width = j.at("beam_width").get<int>();
    c.beta = j.at("beta").get<double>();
    c.vocab_cap = j.at("vocab_cap").get<int>();
    c.seed = j.at("seed").get<unsigned long long>();
    c.epochs = j.at("epochs").get<int>();
    c.max_decode_len = j.at("max_decode_len").get<int>();
    c.length_cap = j.at("length_cap").get<int>();
    c.type_classes = j.at("type_classes").get<int>();
    c.token_only_fallback = j.at("token_only_fallback").get<bool>();
    return c;
}

constexpr int kCheckpointVersion = 1;

}  // namespace

std::string Model::to_json() const {
    nlohmann::json j;
    j["format_version"] = kCheckpointVersion;
    j["config"] = config_to_json(cfg_);
    j["vocab"] = {{"code", vocab_to_json(code_vocab_)},
                  {"syntax", vocab_to_json(syntax_vocab_)},
                  {"script", vocab_to_json(script_vocab_)}};
    nlohmann::json params = nlohmann::json::object();
    params_.for_each([&](const std::string& name, const Tensor& v,
                         const Tensor&) {
        params[name] = {{"rows", v.rows}, {"cols", v.cols}, {"data", v.data}};
    });
    j["params"] = std::move(params);
    return j.dump();
}

Model Model::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    int version = j.at("format_version").get<int>();
    if (version != kCheckpointVersion)
        throw std::runtime_error(
            "checkpoint format version " + std::to_string(version) +
            " is not supported (expected " +
            std::to_string(kCheckpointVersion) + ")");
    ModelConfig cfg = config_from_json(j.at("config"));
    Model model(cfg, vocab_from_json(j.at("vocab").at("code")),
                vocab_from_json(j.at("vocab").at("syntax")),
                vocab_from_json(j.at("vocab").at("script")));
    for (auto& [name, pj] : j.at("params").items()) {
        Tensor& v = model.params_.value(name);
        int rows = pj.at("rows").get<int>();
        int cols = pj.at("cols").get<int>();
        if (rows != v.rows || cols != v.cols)
            throw std::runtime_error("checkpoint shape mismatch for " + name);
        v.data = pj.at("data").get<std::vector<double>>();
    }
    return model;
}

// ---------------------------------------------------------------------------
// Training

double validation_perplexity(Model& model,
                             const std::vector<ModelInputs>& valid_set) {
    if (valid_set.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::mt19937_64 unused(0);
    std::vector<const ModelInputs*> refs;
    for (const auto& s : valid_set) refs.push_back(&s);
    double mean_nll = model.batch_loss(refs, /*train=*/false, unused);
    return std::exp(mean_nll);
}

std::vector<EpochStats> Trainer::fit(const std::vector<ModelInputs>& train_set,
                                     const std::vector<ModelInputs>& valid_set,
                                     int epochs, const StopCheck& stop) {
    const ModelConfig& cfg = model_.config();
    std::mt19937_64 shuffle_rng(cfg.seed * 7919 + 1);
    std::mt19937_64 dropout_rng(cfg.seed * 104729 + 2);

    // Adam state
    std::map<std::string, std::pair<Tensor, Tensor>> adam;
    model_.params().for_each(
        [&](const std::string& name, const Tensor& v, const Tensor&) {
            adam.emplace(name, std::make_pair(Tensor(v.rows, v.cols),
                                              Tensor(v.rows, v.cols)));
        });
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    std::vector<EpochStats> log;
    double best_ppl = std::numeric_limits<double>::infinity();
    std::string best_snapshot;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_nll = 0.0;
        long epoch_batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size) {
            std::vector<const ModelInputs*> batch;
            for (std::size_t k = start;
                 k < std::min(order.size(),
                              start + static_cast<std::size_t>(cfg.batch_size));
                 ++k)
                batch.push_back(&train_set[order[k]]);
            model_.params().zero_grads();
            double loss = model_.batch_loss(batch, /*train=*/true, dropout_rng);
            epoch_nll += loss;
            ++epoch_batches;

            ++step;
            double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            model_.params().for_each([&](const std::string& name, Tensor& v,
                                         Tensor& g) {
                auto& [m, u] = adam.at(name);
                for (int k = 0; k < v.size(); ++k) {
                    m.data[k] = beta1 * m.data[k] + (1 - beta1) * g.data[k];
                    u.data[k] =
                        beta2 * u.data[k] + (1 - beta2) * g.data[k] * g.data[k];
                    double mhat = m.data[k] / bc1;
                    double uhat = u.data[k] / bc2;
                    v.data[k] -=
                        cfg.learning_rate * mhat / (std::sqrt(uhat) + eps);
                }
            });
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_batches ? epoch_nll / epoch_batches : 0.0;
        stats.valid_perplexity = validation_perplexity(model_, valid_set);
        log.push_back(stats);

        if (!valid_set.empty() && stats.valid_perplexity < best_ppl) {
            best_ppl = stats.valid_perplexity;
            best_snapshot = model_.to_json();
        }
        if (stop && stop(stats, model_)) break;
    }
    if (!best_snapshot.empty()) {
        Model best = Model::from_json(best_snapshot);
        best.params().for_each([&](const std::string& name, Tensor& v,
                                   Tensor&) {
            model_.params().value(name).data = v.data;
        });
    }
    return log;
}

}  // namespace comet
