// End-to-end model: contextual encoder, optional BiLSTM re-encoding,
// pairwise interaction cube with focus, and the deep CNN classifier.
//
// Checkpoints are a named-tensor file plus a "<path>.meta" text file
// carrying the configuration and vocabulary; loading restores a model
// that scores identically to the saved one.
#pragma once

#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pwi/classifier.hpp"
#include "pwi/config.hpp"
#include "pwi/encoders.hpp"
#include "pwi/error.hpp"
#include "pwi/interaction.hpp"
#include "pwi/serialize.hpp"
#include "pwi/vocab.hpp"

namespace pwi {

struct PairInput {
    std::string id;
    std::string s1;
    std::string s2;
};

// Intermediate products of one forward pass, for inspection and tests.
struct ForwardTrace {
    TokenizedPair pair;
    SimCube cube;  // after focus
    AttentionTrace attention;
};

class Model {
  public:
    Model(ExperimentConfig cfg, Vocabulary vocab)
        : cfg_(std::move(cfg)), vocab_(std::move(vocab)) {
        cfg_.validate();
        std::mt19937_64 rng(cfg_.seed + kSeedOffsetInit);
        if (cfg_.encoder != EncoderKind::Import) {
            embedding_ = Tensor::uniform({vocab_.size(), cfg_.embed_dim}, -0.05, 0.05, rng);
        }
        if (cfg_.encoder == EncoderKind::StandIn) {
            standin_ = StandInEncoderParams::init(cfg_.standin_config(), rng);
        }
        if (cfg_.bilstm) {
            lstm_ = BiLstmParams::init(cfg_.encoder_width(), cfg_.lstm_hidden, rng);
        }
        classifier_ = ClassifierParams::init(cfg_.classifier_config(),
                                             cfg_.interaction_channels(), rng);
    }

    const ExperimentConfig& config() const { return cfg_; }
    const Vocabulary& vocab() const { return vocab_; }

    void attach_embeddings(EmbeddingStore store) { store_ = std::move(store); }

    // Distribution over classes; requires a pair id when the encoder imports
    // precomputed vectors.
    Tensor forward(const PairInput& in, ForwardTrace* trace = nullptr) {
        TokenizedPair tp = cfg_.encoding == EncodingScheme::Joint
                               ? encode_joint(in.s1, in.s2, vocab_)
                               : encode_separate(in.s1, in.s2, vocab_);
        ContextVectors base = base_context(tp, in, trace ? &trace->attention : nullptr);
        ContextVectors ctx =
            cfg_.bilstm ? bilstm_context(*base.s1_unified, *base.s2_unified, *lstm_) : base;
        SimCube cube = build_simcube(ctx);
        apply_focus(cube, cfg_.focus_passes);
        Tensor grid = pad_to_grid(cube.grid, cfg_.classifier.grid_size);
        Tensor dist = cnn_forward(grid, cfg_.classifier_config(), classifier_);
        if (trace) {
            trace->pair = tp;
            trace->cube = cube;
        }
        return dist;
    }

    std::vector<Tensor> parameters() {
        std::vector<Tensor> out;
        if (embedding_) out.push_back(*embedding_);
        if (standin_) {
            auto p = standin_->parameters();
            out.insert(out.end(), p.begin(), p.end());
        }
        if (lstm_) {
            auto p = lstm_->parameters();
            out.insert(out.end(), p.begin(), p.end());
        }
        auto p = classifier_.parameters();
        out.insert(out.end(), p.begin(), p.end());
        return out;
    }

    void save_checkpoint(const std::string& path) const {
        NamedTensorMap map;
        visit_params(const_cast<Model&>(*this),
                     [&](const std::string& name, Tensor& t) { map.put_tensor(name, t); });
        map.save(path);
        std::ofstream meta(path + ".meta", std::ios::binary);
        if (!meta) throw DataError("cannot write checkpoint metadata: " + path + ".meta");
        meta << "format=pwi-checkpoint-1\n";
        meta << cfg_.serialize();
        for (std::size_t id = 0; id < vocab_.size(); ++id)
            meta << "vocab." << id << "=" << vocab_.token(static_cast<int>(id)) << "\n";
    }

    static Model load_checkpoint(const std::string& path,
                                 const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
        std::ifstream meta(path + ".meta", std::ios::binary);
        if (!meta) throw DataError("cannot open checkpoint metadata: " + path + ".meta");
        ExperimentConfig cfg;
        std::vector<std::string> tokens;
        std::string line;
        bool tagged = false;
        while (std::getline(meta, line)) {
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw DataError("checkpoint metadata: malformed line '" + line + "'");
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            if (key == "format") {
                if (value != "pwi-checkpoint-1")
                    throw DataError("unsupported checkpoint format: " + value);
                tagged = true;
            } else if (key.rfind("vocab.", 0) == 0) {
                std::size_t id = detail::parse_uint("checkpoint vocab id", key.substr(6));
                if (id != tokens.size())
                    throw DataError("checkpoint metadata: vocabulary ids out of order");
                tokens.push_back(value);
            } else {
                cfg.set(key, value);
            }
        }
        if (!tagged) throw DataError("checkpoint metadata: missing format tag");
        for (const auto& [key, value] : overrides) cfg.set(key, value);
        Model m(cfg, Vocabulary::from_tokens(tokens));
        NamedTensorMap map = NamedTensorMap::load(path);
        visit_params(m, [&](const std::string& name, Tensor& t) { map.load_into(name, t); });
        if (cfg.encoder == EncoderKind::Import) m.attach_embeddings(EmbeddingStore::load(cfg.import_path));
        return m;
    }

  private:
    ContextVectors base_context(const TokenizedPair& tp, const PairInput& in,
                                AttentionTrace* attn) {
        switch (cfg_.encoder) {
            case EncoderKind::StandIn:
                return standin_encode(tp, *embedding_, *standin_, attn);
            case EncoderKind::Embedding:
                return embedding_context(tp, *embedding_);
            case EncoderKind::Import: {
                if (!store_)
                    throw ConfigError("import encoder has no embedding store attached");
                if (in.id.empty())
                    throw InputError("import encoder requires a pair id to look up vectors");
                return store_->context_for(in.id, tp.s1_ids.size(), tp.s2_ids.size(),
                                           cfg_.embed_dim);
            }
        }
        throw ContractError("unreachable encoder kind");
    }

    // Single enumeration of named parameters, shared by save and load so
    // key order and coverage cannot drift apart.
    template <typename Fn>
    static void visit_params(Model& m, Fn&& fn) {
        if (m.embedding_) fn("embedding.table", *m.embedding_);
        if (m.standin_) {
            fn("standin.position", m.standin_->position);
            for (std::size_t l = 0; l < m.standin_->layers.size(); ++l) {
                auto& layer = m.standin_->layers[l];
                const std::string base = "standin.layer" + std::to_string(l);
                for (std::size_t h = 0; h < layer.heads.size(); ++h) {
                    const std::string hb = base + ".head" + std::to_string(h);
                    fn(hb + ".wq", layer.heads[h].wq);
                    fn(hb + ".wk", layer.heads[h].wk);
                    fn(hb + ".wv", layer.heads[h].wv);
                }
                fn(base + ".ff.w1", layer.ff_w1);
                fn(base + ".ff.b1", layer.ff_b1);
                fn(base + ".ff.w2", layer.ff_w2);
                fn(base + ".ff.b2", layer.ff_b2);
            }
        }
        if (m.lstm_) {
            fn("lstm.forward.w_input", m.lstm_->fwd.w_input);
            fn("lstm.forward.w_hidden", m.lstm_->fwd.w_hidden);
            fn("lstm.forward.bias", m.lstm_->fwd.bias);
            fn("lstm.backward.w_input", m.lstm_->bwd.w_input);
            fn("lstm.backward.w_hidden", m.lstm_->bwd.w_hidden);
            fn("lstm.backward.bias", m.lstm_->bwd.bias);
        }
        for (std::size_t b = 0; b < m.classifier_.blocks.size(); ++b)
            for (std::size_t c = 0; c < m.classifier_.blocks[b].size(); ++c) {
                const std::string base =
                    "classifier.block" + std::to_string(b) + ".conv" + std::to_string(c);
                fn(base + ".kernel", m.classifier_.blocks[b][c].kernel);
                fn(base + ".bias", m.classifier_.blocks[b][c].bias);
            }
        for (std::size_t f = 0; f < m.classifier_.fc.size(); ++f) {
            const std::string base = f + 1 < m.classifier_.fc.size()
                                         ? "classifier.fc" + std::to_string(f)
                                         : std::string("classifier.out");
            fn(base + ".weight", m.classifier_.fc[f].weight);
            fn(base + ".bias", m.classifier_.fc[f].bias);
        }
    }

    ExperimentConfig cfg_;
    Vocabulary vocab_;
    std::optional<Tensor> embedding_;
    std::optional<StandInEncoderParams> standin_;
    std::optional<BiLstmParams> lstm_;
    ClassifierParams classifier_;
    std::optional<EmbeddingStore> store_;
};

}  // namespace pwi
