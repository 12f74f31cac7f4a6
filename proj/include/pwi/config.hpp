// Flat key=value experiment configuration.
//
// Unknown keys are rejected, values are validated on parse, and
// serialize() followed by parse() reproduces the configuration exactly.
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pwi/classifier.hpp"
#include "pwi/encoders.hpp"
#include "pwi/error.hpp"

namespace pwi {

enum class TaskKind { Similarity, Ranking };
enum class EncoderKind { StandIn, Import, Embedding };
enum class LossKind { Auto, KL, NLL };
enum class OptimizerKind { Adam, RmsProp };
enum class SearchMode { Grid, Random };

inline std::string to_string(TaskKind t) {
    return t == TaskKind::Similarity ? "similarity" : "ranking";
}
inline std::string to_string(EncoderKind e) {
    switch (e) {
        case EncoderKind::StandIn: return "standin";
        case EncoderKind::Import: return "import";
        default: return "embedding";
    }
}
inline std::string to_string(LossKind l) {
    switch (l) {
        case LossKind::Auto: return "auto";
        case LossKind::KL: return "kl";
        default: return "nll";
    }
}
inline std::string to_string(OptimizerKind o) {
    return o == OptimizerKind::Adam ? "adam" : "rmsprop";
}
inline std::string to_string(SearchMode m) { return m == SearchMode::Grid ? "grid" : "random"; }

// Deterministic sub-seeds: every randomized stage derives its generator
// from the experiment seed plus a fixed offset.
inline constexpr std::uint64_t kSeedOffsetInit = 0;      // parameter initialization
inline constexpr std::uint64_t kSeedOffsetShuffle = 1;   // per-epoch example order
inline constexpr std::uint64_t kSeedOffsetSearch = 2;    // random-search draws
inline constexpr std::uint64_t kSeedOffsetTrial = 1000;  // + trial index, per-trial training

struct ExperimentConfig {
    TaskKind task = TaskKind::Similarity;
    EncoderKind encoder = EncoderKind::StandIn;
    EncodingScheme encoding = EncodingScheme::Joint;
    bool bilstm = true;
    std::uint64_t seed = 42;

    std::size_t embed_dim = 64;   // embedding width; stand-in hidden size
    std::size_t lstm_hidden = 32;
    std::size_t standin_layers = 2;
    std::size_t standin_heads = 4;
    std::size_t standin_ff = 128;
    std::size_t standin_max_len = 128;
    std::string import_path;

    ClassifierConfig classifier;   // classifier.classes resolved via classes()
    std::size_t focus_passes = 1;

    LossKind loss = LossKind::Auto;
    OptimizerKind optimizer = OptimizerKind::RmsProp;
    double lr = 1e-3;
    std::size_t batch = 8;
    std::size_t epochs = 10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double rms_alpha = 0.99;
    double eps = 1e-8;

    SearchMode search_mode = SearchMode::Grid;
    std::vector<double> search_lrs = {5e-5, 4e-5, 3e-5, 2e-5};
    std::vector<std::size_t> search_epochs = {5, 4, 3, 2};
    double search_lr_lo = 5e-5;
    double search_lr_hi = 5e-4;
    std::size_t search_epochs_lo = 3;
    std::size_t search_epochs_hi = 15;
    std::size_t search_trials = 8;

    bool operator==(const ExperimentConfig&) const = default;

    std::size_t classes() const { return task == TaskKind::Similarity ? 5 : 2; }
    LossKind resolved_loss() const {
        if (loss != LossKind::Auto) return loss;
        return task == TaskKind::Similarity ? LossKind::KL : LossKind::NLL;
    }
    std::size_t interaction_channels() const { return bilstm ? 12 : 3; }
    std::size_t context_width() const { return bilstm ? lstm_hidden : encoder_width(); }
    std::size_t encoder_width() const { return embed_dim; }

    StandInConfig standin_config() const {
        return {standin_layers, embed_dim, standin_heads, standin_ff, standin_max_len};
    }
    ClassifierConfig classifier_config() const {
        ClassifierConfig c = classifier;
        c.classes = classes();
        return c;
    }

    void validate() const {
        if (embed_dim == 0) throw ConfigError("config: embed.dim must be positive");
        if (lstm_hidden == 0) throw ConfigError("config: lstm.hidden must be positive");
        if (encoder == EncoderKind::StandIn) standin_config().validate();
        if (encoder == EncoderKind::Import && import_path.empty())
            throw ConfigError("config: encoder=import requires import.path");
        classifier_config().validate();
        if (focus_passes < 1 || focus_passes > 2)
            throw ConfigError("config: focus.passes must be 1 or 2");
        if (batch == 0) throw ConfigError("config: optimizer.batch must be positive");
        if (lr <= 0.0) throw ConfigError("config: optimizer.lr must be positive");
        if (search_mode == SearchMode::Grid && (search_lrs.empty() || search_epochs.empty()))
            throw ConfigError("config: grid search needs search.lrs and search.epochs");
        if (search_lr_lo <= 0.0 || search_lr_hi < search_lr_lo)
            throw ConfigError("config: random search needs 0 < search.lr_lo <= search.lr_hi");
        if (search_epochs_lo < 1 || search_epochs_hi < search_epochs_lo)
            throw ConfigError("config: random search needs 1 <= search.epochs_lo <= search.epochs_hi");
        if (search_trials == 0) throw ConfigError("config: search.trials must be positive");
    }

    void set(const std::string& key, const std::string& value);
    std::string serialize() const;

    static ExperimentConfig parse(const std::string& text) {
        ExperimentConfig cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string trimmed = detail_config::trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
            try {
                cfg.set(detail_config::trim(trimmed.substr(0, eq)),
                        detail_config::trim(trimmed.substr(eq + 1)));
            } catch (const ConfigError& e) {
                throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return cfg;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    struct detail_config {
        static std::string trim(const std::string& s) {
            auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return "";
            auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }
    };
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double d = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
        std::uint64_t u = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return u;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw ConfigError(key + ": expected on/off, got '" + value + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<ConvBlockSpec> parse_blocks(const std::string& value) {
    std::vector<ConvBlockSpec> blocks;
    for (const std::string& part : split(value, ',')) {
        auto x = part.find('x');
        if (x == std::string::npos)
            throw ConfigError("classifier.blocks: expected <convs>x<channels>, got '" + part + "'");
        blocks.push_back({static_cast<std::size_t>(parse_uint("classifier.blocks", part.substr(0, x))),
                          static_cast<std::size_t>(parse_uint("classifier.blocks", part.substr(x + 1)))});
    }
    return blocks;
}

inline std::string format_double(double d) {
    std::ostringstream out;
    out.precision(17);
    out << d;
    return out.str();
}

}  // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "task") {
        if (value == "similarity") task = TaskKind::Similarity;
        else if (value == "ranking") task = TaskKind::Ranking;
        else throw ConfigError("task: expected similarity|ranking, got '" + value + "'");
    } else if (key == "encoder") {
        if (value == "standin") encoder = EncoderKind::StandIn;
        else if (value == "import") encoder = EncoderKind::Import;
        else if (value == "embedding") encoder = EncoderKind::Embedding;
        else throw ConfigError("encoder: expected standin|import|embedding, got '" + value + "'");
    } else if (key == "encoding") {
        if (value == "joint") encoding = EncodingScheme::Joint;
        else if (value == "separate") encoding = EncodingScheme::Separate;
        else throw ConfigError("encoding: expected joint|separate, got '" + value + "'");
    } else if (key == "bilstm") {
        bilstm = parse_bool(key, value);
    } else if (key == "seed") {
        seed = parse_uint(key, value);
    } else if (key == "embed.dim") {
        embed_dim = parse_uint(key, value);
    } else if (key == "lstm.hidden") {
        lstm_hidden = parse_uint(key, value);
    } else if (key == "standin.layers") {
        standin_layers = parse_uint(key, value);
    } else if (key == "standin.heads") {
        standin_heads = parse_uint(key, value);
    } else if (key == "standin.ff") {
        standin_ff = parse_uint(key, value);
    } else if (key == "standin.max_len") {
        standin_max_len = parse_uint(key, value);
    } else if (key == "import.path") {
        import_path = value;
    } else if (key == "classifier.grid") {
        classifier.grid_size = parse_uint(key, value);
    } else if (key == "classifier.blocks") {
        classifier.blocks = parse_blocks(value);
    } else if (key == "classifier.fc") {
        classifier.fc_widths.clear();
        for (const std::string& part : split(value, ','))
            classifier.fc_widths.push_back(parse_uint(key, part));
    } else if (key == "focus.passes") {
        focus_passes = parse_uint(key, value);
    } else if (key == "loss") {
        if (value == "auto") loss = LossKind::Auto;
        else if (value == "kl") loss = LossKind::KL;
        else if (value == "nll") loss = LossKind::NLL;
        else throw ConfigError("loss: expected auto|kl|nll, got '" + value + "'");
    } else if (key == "optimizer") {
        if (value == "adam") optimizer = OptimizerKind::Adam;
        else if (value == "rmsprop") optimizer = OptimizerKind::RmsProp;
        else throw ConfigError("optimizer: expected adam|rmsprop, got '" + value + "'");
    } else if (key == "optimizer.lr") {
        lr = parse_double(key, value);
    } else if (key == "optimizer.batch") {
        batch = parse_uint(key, value);
    } else if (key == "optimizer.epochs") {
        epochs = parse_uint(key, value);
    } else if (key == "optimizer.beta1") {
        adam_beta1 = parse_double(key, value);
    } else if (key == "optimizer.beta2") {
        adam_beta2 = parse_double(key, value);
    } else if (key == "optimizer.alpha") {
        rms_alpha = parse_double(key, value);
    } else if (key == "optimizer.eps") {
        eps = parse_double(key, value);
    } else if (key == "search.mode") {
        if (value == "grid") search_mode = SearchMode::Grid;
        else if (value == "random") search_mode = SearchMode::Random;
        else throw ConfigError("search.mode: expected grid|random, got '" + value + "'");
    } else if (key == "search.lrs") {
        search_lrs.clear();
        for (const std::string& part : split(value, ',')) search_lrs.push_back(parse_double(key, part));
    } else if (key == "search.epochs") {
        search_epochs.clear();
        for (const std::string& part : split(value, ','))
            search_epochs.push_back(parse_uint(key, part));
    } else if (key == "search.lr_lo") {
        search_lr_lo = parse_double(key, value);
    } else if (key == "search.lr_hi") {
        search_lr_hi = parse_double(key, value);
    } else if (key == "search.epochs_lo") {
        search_epochs_lo = parse_uint(key, value);
    } else if (key == "search.epochs_hi") {
        search_epochs_hi = parse_uint(key, value);
    } else if (key == "search.trials") {
        search_trials = parse_uint(key, value);
    } else {
        throw ConfigError("unknown config key: '" + key + "'");
    }
}

inline std::string ExperimentConfig::serialize() const {
    using detail::format_double;
    std::ostringstream out;
    out << "task=" << to_string(task) << "\n";
    out << "encoder=" << to_string(encoder) << "\n";
    out << "encoding=" << to_string(encoding) << "\n";
    out << "bilstm=" << (bilstm ? "on" : "off") << "\n";
    out << "seed=" << seed << "\n";
    out << "embed.dim=" << embed_dim << "\n";
    out << "lstm.hidden=" << lstm_hidden << "\n";
    out << "standin.layers=" << standin_layers << "\n";
    out << "standin.heads=" << standin_heads << "\n";
    out << "standin.ff=" << standin_ff << "\n";
    out << "standin.max_len=" << standin_max_len << "\n";
    if (!import_path.empty()) out << "import.path=" << import_path << "\n";
    out << "classifier.grid=" << classifier.grid_size << "\n";
    out << "classifier.blocks=";
    for (std::size_t b = 0; b < classifier.blocks.size(); ++b) {
        if (b) out << ",";
        out << classifier.blocks[b].convs << "x" << classifier.blocks[b].channels;
    }
    out << "\n";
    out << "classifier.fc=";
    for (std::size_t f = 0; f < classifier.fc_widths.size(); ++f) {
        if (f) out << ",";
        out << classifier.fc_widths[f];
    }
    out << "\n";
    out << "focus.passes=" << focus_passes << "\n";
    out << "loss=" << to_string(loss) << "\n";
    out << "optimizer=" << to_string(optimizer) << "\n";
    out << "optimizer.lr=" << format_double(lr) << "\n";
    out << "optimizer.batch=" << batch << "\n";
    out << "optimizer.epochs=" << epochs << "\n";
    out << "optimizer.beta1=" << format_double(adam_beta1) << "\n";
    out << "optimizer.beta2=" << format_double(adam_beta2) << "\n";
    out << "optimizer.alpha=" << format_double(rms_alpha) << "\n";
    out << "optimizer.eps=" << format_double(eps) << "\n";
    out << "search.mode=" << to_string(search_mode) << "\n";
    out << "search.lrs=";
    for (std::size_t i = 0; i < search_lrs.size(); ++i) {
        if (i) out << ",";
        out << format_double(search_lrs[i]);
    }
    out << "\n";
    out << "search.epochs=";
    for (std::size_t i = 0; i < search_epochs.size(); ++i) {
        if (i) out << ",";
        out << search_epochs[i];
    }
    out << "\n";
    out << "search.lr_lo=" << format_double(search_lr_lo) << "\n";
    out << "search.lr_hi=" << format_double(search_lr_hi) << "\n";
    out << "search.epochs_lo=" << search_epochs_lo << "\n";
    out << "search.epochs_hi=" << search_epochs_hi << "\n";
    out << "search.trials=" << search_trials << "\n";
    return out.str();
}

}  // namespace pwi
