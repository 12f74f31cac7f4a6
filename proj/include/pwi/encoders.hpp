// Sentence-pair encoders: token layout construction (joint vs. separate),
// embedding lookup, BiLSTM context, a small trainable self-attention
// encoder, and an import path for precomputed contextual embeddings.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pwi/error.hpp"
#include "pwi/ops.hpp"
#include "pwi/serialize.hpp"
#include "pwi/tensor.hpp"
#include "pwi/vocab.hpp"

namespace pwi {

enum class EncodingScheme { Joint, Separate };

inline const char* to_string(EncodingScheme s) {
    return s == EncodingScheme::Joint ? "joint" : "separate";
}

// Half-open token index range inside an encoder input sequence.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t length() const { return end - begin; }
};

struct TokenizedPair {
    EncodingScheme scheme = EncodingScheme::Joint;
    std::vector<int> s1_ids;  // raw sentence tokens, no specials
    std::vector<int> s2_ids;

    // joint: one sequence [CLS] s1 [SEP] s2 [SEP] with 0/1 segment ids
    std::vector<int> joint_ids;
    std::vector<int> segment_ids;

    // separate: [CLS] s [SEP] per sentence
    std::vector<int> sep1_ids;
    std::vector<int> sep2_ids;

    // where the sentence tokens sit inside the sequence(s); specials excluded
    Span s1_span;
    Span s2_span;
};

inline std::vector<int> to_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const std::string& t : tokens) ids.push_back(vocab.id(t));
    return ids;
}

inline TokenizedPair encode_joint(const std::string& s1, const std::string& s2,
                                  const Vocabulary& vocab) {
    TokenizedPair p;
    p.scheme = EncodingScheme::Joint;
    p.s1_ids = to_ids(tokenize(s1), vocab);
    p.s2_ids = to_ids(tokenize(s2), vocab);
    if (p.s1_ids.empty() || p.s2_ids.empty())
        throw InputError("both sentences must be non-empty after tokenization");

    p.joint_ids.push_back(Vocabulary::kCls);
    p.joint_ids.insert(p.joint_ids.end(), p.s1_ids.begin(), p.s1_ids.end());
    p.joint_ids.push_back(Vocabulary::kSep);
    p.joint_ids.insert(p.joint_ids.end(), p.s2_ids.begin(), p.s2_ids.end());
    p.joint_ids.push_back(Vocabulary::kSep);

    const std::size_t n1 = p.s1_ids.size(), n2 = p.s2_ids.size();
    p.segment_ids.assign(n1 + 2, 0);
    p.segment_ids.insert(p.segment_ids.end(), n2 + 1, 1);
    p.s1_span = {1, 1 + n1};
    p.s2_span = {2 + n1, 2 + n1 + n2};
    return p;
}

inline TokenizedPair encode_separate(const std::string& s1, const std::string& s2,
                                     const Vocabulary& vocab) {
    TokenizedPair p;
    p.scheme = EncodingScheme::Separate;
    p.s1_ids = to_ids(tokenize(s1), vocab);
    p.s2_ids = to_ids(tokenize(s2), vocab);
    if (p.s1_ids.empty() || p.s2_ids.empty())
        throw InputError("both sentences must be non-empty after tokenization");

    auto wrap = [](const std::vector<int>& ids) {
        std::vector<int> seq;
        seq.push_back(Vocabulary::kCls);
        seq.insert(seq.end(), ids.begin(), ids.end());
        seq.push_back(Vocabulary::kSep);
        return seq;
    };
    p.sep1_ids = wrap(p.s1_ids);
    p.sep2_ids = wrap(p.s2_ids);
    p.s1_span = {1, 1 + p.s1_ids.size()};
    p.s2_span = {1, 1 + p.s2_ids.size()};
    return p;
}

// Per-token context for both sentences. Either the four directional halves
// are present (BiLSTM path) or the two unified matrices are.
struct ContextVectors {
    std::optional<Tensor> s1_fwd, s1_bwd, s2_fwd, s2_bwd;  // each [len, h]
    std::optional<Tensor> s1_unified, s2_unified;          // each [len, h]

    bool directional() const { return s1_fwd.has_value(); }

    std::size_t len1() const { return directional() ? s1_fwd->dim(0) : s1_unified->dim(0); }
    std::size_t len2() const { return directional() ? s2_fwd->dim(0) : s2_unified->dim(0); }
    std::size_t hidden() const { return directional() ? s1_fwd->dim(1) : s1_unified->dim(1); }
};

// ---------------------------------------------------------------------------
// BiLSTM
// ---------------------------------------------------------------------------

// One direction; gate rows stacked [input, forget, cell, output].
struct LstmParams {
    Tensor w_input;   // [4H, in]
    Tensor w_hidden;  // [4H, H]
    Tensor bias;      // [4H]

    static LstmParams init(std::size_t in_dim, std::size_t hidden, std::mt19937_64& rng) {
        LstmParams p;
        p.w_input = Tensor::uniform({4 * hidden, in_dim}, -0.05, 0.05, rng);
        p.w_hidden = Tensor::uniform({4 * hidden, hidden}, -0.05, 0.05, rng);
        p.bias = Tensor::zeros({4 * hidden}, true);
        return p;
    }

    std::size_t hidden() const { return w_hidden.dim(1); }
};

struct BiLstmParams {
    LstmParams fwd;
    LstmParams bwd;

    static BiLstmParams init(std::size_t in_dim, std::size_t hidden, std::mt19937_64& rng) {
        return {LstmParams::init(in_dim, hidden, rng), LstmParams::init(in_dim, hidden, rng)};
    }

    std::vector<Tensor> parameters() {
        return {fwd.w_input, fwd.w_hidden, fwd.bias, bwd.w_input, bwd.w_hidden, bwd.bias};
    }
};

// Standard LSTM recurrence over the rows of embedded [n, in]; returns the
// per-token hidden states [n, H] in original token order.
inline Tensor run_lstm(const Tensor& embedded, const LstmParams& params, bool reverse) {
    if (embedded.rank() != 2 || embedded.dim(0) < 1)
        throw ShapeError("run_lstm: need a [n, in] sequence, got " + shape_str(embedded.shape()));
    const std::size_t n = embedded.dim(0), hidden = params.hidden();
    Tensor h = Tensor::zeros({hidden});
    Tensor c = Tensor::zeros({hidden});
    std::vector<Tensor> states(n);
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t t = reverse ? n - 1 - step : step;
        Tensor x = row(embedded, t);
        Tensor z = add(add(matvec(params.w_input, x), matvec(params.w_hidden, h)), params.bias);
        Tensor gi = sigmoid(slice(z, 0, hidden));
        Tensor gf = sigmoid(slice(z, hidden, 2 * hidden));
        Tensor gg = tanh(slice(z, 2 * hidden, 3 * hidden));
        Tensor go = sigmoid(slice(z, 3 * hidden, 4 * hidden));
        c = add(mul(gf, c), mul(gi, gg));
        h = mul(go, tanh(c));
        states[t] = h;
    }
    return stack_rows(states);
}

struct BiLstmOutput {
    Tensor fwd;  // [n, H]
    Tensor bwd;  // [n, H]
};

inline BiLstmOutput run_bilstm(const Tensor& embedded, const BiLstmParams& params) {
    return {run_lstm(embedded, params.fwd, false), run_lstm(embedded, params.bwd, true)};
}

// Directional context for both sentences from their unified vectors.
inline ContextVectors bilstm_context(const Tensor& s1_vectors, const Tensor& s2_vectors,
                                     const BiLstmParams& params) {
    ContextVectors cv;
    BiLstmOutput o1 = run_bilstm(s1_vectors, params);
    BiLstmOutput o2 = run_bilstm(s2_vectors, params);
    cv.s1_fwd = o1.fwd;
    cv.s1_bwd = o1.bwd;
    cv.s2_fwd = o2.fwd;
    cv.s2_bwd = o2.bwd;
    return cv;
}

// ---------------------------------------------------------------------------
// stand-in self-attention encoder
// ---------------------------------------------------------------------------

struct StandInConfig {
    std::size_t layers = 2;
    std::size_t hidden = 64;
    std::size_t heads = 4;
    std::size_t ff = 128;
    std::size_t max_len = 128;

    std::size_t head_dim() const { return hidden / heads; }

    void validate() const {
        if (heads == 0 || hidden % heads != 0)
            throw ConfigError("stand-in encoder: head count " + std::to_string(heads) +
                              " must divide hidden size " + std::to_string(hidden));
    }
};

struct StandInHeadParams {
    Tensor wq, wk, wv;  // each [h, d]
};

struct StandInLayerParams {
    std::vector<StandInHeadParams> heads;
    Tensor ff_w1;  // [h, ff]
    Tensor ff_b1;  // [ff]
    Tensor ff_w2;  // [ff, h]
    Tensor ff_b2;  // [h]
};

struct StandInEncoderParams {
    StandInConfig config;
    Tensor position;  // [max_len, h], learned
    std::vector<StandInLayerParams> layers;

    static StandInEncoderParams init(const StandInConfig& cfg, std::mt19937_64& rng) {
        cfg.validate();
        StandInEncoderParams p;
        p.config = cfg;
        p.position = Tensor::uniform({cfg.max_len, cfg.hidden}, -0.05, 0.05, rng);
        const std::size_t d = cfg.head_dim();
        for (std::size_t l = 0; l < cfg.layers; ++l) {
            StandInLayerParams lp;
            for (std::size_t h = 0; h < cfg.heads; ++h)
                lp.heads.push_back({Tensor::uniform({cfg.hidden, d}, -0.05, 0.05, rng),
                                    Tensor::uniform({cfg.hidden, d}, -0.05, 0.05, rng),
                                    Tensor::uniform({cfg.hidden, d}, -0.05, 0.05, rng)});
            lp.ff_w1 = Tensor::uniform({cfg.hidden, cfg.ff}, -0.05, 0.05, rng);
            lp.ff_b1 = Tensor::zeros({cfg.ff}, true);
            lp.ff_w2 = Tensor::uniform({cfg.ff, cfg.hidden}, -0.05, 0.05, rng);
            lp.ff_b2 = Tensor::zeros({cfg.hidden}, true);
            p.layers.push_back(std::move(lp));
        }
        return p;
    }

    std::vector<Tensor> parameters() {
        std::vector<Tensor> out{position};
        for (auto& l : layers) {
            for (auto& h : l.heads) {
                out.push_back(h.wq);
                out.push_back(h.wk);
                out.push_back(h.wv);
            }
            out.push_back(l.ff_w1);
            out.push_back(l.ff_b1);
            out.push_back(l.ff_w2);
            out.push_back(l.ff_b2);
        }
        return out;
    }
};

// Row-stochastic attention matrices captured per layer and head.
struct AttentionTrace {
    std::vector<std::vector<double>> matrices;  // each L*L, row-major
    std::size_t seq_len = 0;
};

// Runs the stacked self-attention layers over one id sequence.
inline Tensor standin_encode_sequence(const std::vector<int>& ids, const Tensor& embed_table,
                                      const StandInEncoderParams& params,
                                      AttentionTrace* trace = nullptr) {
    const StandInConfig& cfg = params.config;
    if (ids.size() > cfg.max_len)
        throw InputError("sequence of " + std::to_string(ids.size()) +
                         " tokens exceeds encoder maximum " + std::to_string(cfg.max_len));
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));

    Tensor x = add(embedding(embed_table, ids), slice_rows(params.position, 0, ids.size()));
    if (trace) trace->seq_len = ids.size();
    for (const StandInLayerParams& layer : params.layers) {
        std::vector<Tensor> head_outputs;
        for (const StandInHeadParams& head : layer.heads) {
            Tensor q = matmul(x, head.wq);
            Tensor k = matmul(x, head.wk);
            Tensor v = matmul(x, head.wv);
            Tensor scores = mul_scalar(matmul(q, transpose(k)), scale);
            Tensor attn = softmax(scores, 1);
            if (trace) trace->matrices.push_back(attn.values());
            head_outputs.push_back(matmul(attn, v));
        }
        x = add(x, concat(head_outputs, 1));
        Tensor f = relu(add_row_bias(matmul(x, layer.ff_w1), layer.ff_b1));
        x = add(x, add_row_bias(matmul(f, layer.ff_w2), layer.ff_b2));
    }
    return x;
}

// Encodes the pair under its layout and slices the sentence spans back out
// (CLS/SEP positions dropped). Separate layouts run the encoder per
// sentence, so neither output can depend on the other sentence.
inline ContextVectors standin_encode(const TokenizedPair& pair, const Tensor& embed_table,
                                     const StandInEncoderParams& params,
                                     AttentionTrace* trace = nullptr) {
    ContextVectors cv;
    if (pair.scheme == EncodingScheme::Joint) {
        Tensor out = standin_encode_sequence(pair.joint_ids, embed_table, params, trace);
        cv.s1_unified = slice_rows(out, pair.s1_span.begin, pair.s1_span.end);
        cv.s2_unified = slice_rows(out, pair.s2_span.begin, pair.s2_span.end);
    } else {
        Tensor o1 = standin_encode_sequence(pair.sep1_ids, embed_table, params, trace);
        Tensor o2 = standin_encode_sequence(pair.sep2_ids, embed_table, params);
        cv.s1_unified = slice_rows(o1, pair.s1_span.begin, pair.s1_span.end);
        cv.s2_unified = slice_rows(o2, pair.s2_span.begin, pair.s2_span.end);
    }
    return cv;
}

// Plain embedding-lookup context (the non-attention path; context modeling
// is then up to the BiLSTM).
inline ContextVectors embedding_context(const TokenizedPair& pair, const Tensor& embed_table) {
    ContextVectors cv;
    cv.s1_unified = embedding(embed_table, pair.s1_ids);
    cv.s2_unified = embedding(embed_table, pair.s2_ids);
    return cv;
}

// ---------------------------------------------------------------------------
// imported contextual embeddings
// ---------------------------------------------------------------------------

// Read-only store of precomputed per-token vectors, keyed "<pair_id>/s1"
// and "<pair_id>/s2" in a named-tensor file.
class EmbeddingStore {
public:
    static EmbeddingStore load(const std::string& path) {
        EmbeddingStore s;
        s.map_ = NamedTensorMap::load(path);
        return s;
    }

    static std::string key1(const std::string& pair_id) { return pair_id + "/s1"; }
    static std::string key2(const std::string& pair_id) { return pair_id + "/s2"; }

    bool contains(const std::string& pair_id) const {
        return map_.contains(key1(pair_id)) && map_.contains(key2(pair_id));
    }

    // Unified context vectors for one pair; lengths/width are checked
    // against the tokenization and the configured hidden size.
    ContextVectors context_for(const std::string& pair_id, std::size_t n1, std::size_t n2,
                               std::size_t hidden) const {
        ContextVectors cv;
        cv.s1_unified = fetch(key1(pair_id), pair_id, n1, hidden);
        cv.s2_unified = fetch(key2(pair_id), pair_id, n2, hidden);
        return cv;
    }

    const NamedTensorMap& map() const { return map_; }

private:
    Tensor fetch(const std::string& key, const std::string& pair_id, std::size_t len,
                 std::size_t hidden) const {
        if (!map_.contains(key))
            throw DataError("embedding store has no entry for pair id '" + pair_id + "' (key '" +
                            key + "')");
        const NamedArray& a = map_.get(key);
        if (a.dims.size() != 2)
            throw ConfigError("embedding entry '" + key + "' is not a rank-2 array");
        if (a.dims[1] != hidden)
            throw ConfigError("embedding entry '" + key + "' has width " +
                              std::to_string(a.dims[1]) + ", configured hidden size is " +
                              std::to_string(hidden));
        if (a.dims[0] != len)
            throw ConfigError("embedding entry '" + key + "' has " + std::to_string(a.dims[0]) +
                              " rows, tokenization yields " + std::to_string(len) + " tokens");
        return Tensor::from({static_cast<std::size_t>(a.dims[0]),
                             static_cast<std::size_t>(a.dims[1])},
                            a.values);
    }

    NamedTensorMap map_;
};

// Writes per-pair sentence arrays in the store's key scheme.
inline void export_embeddings(const std::string& path,
                              const std::vector<std::tuple<std::string, NamedArray, NamedArray>>&
                                  pairs) {
    NamedTensorMap m;
    for (const auto& [id, a1, a2] : pairs) {
        m.put(EmbeddingStore::key1(id), a1);
        m.put(EmbeddingStore::key2(id), a2);
    }
    m.save(path);
}

}  // namespace pwi
