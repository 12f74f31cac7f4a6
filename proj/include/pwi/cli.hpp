// Command-line front end.
//
// Subcommands: train, eval, score, gridsearch, randomsearch, ablate,
// dump-cube. Exit codes: 0 success, 2 configuration or usage errors,
// 3 data errors, 4 numeric errors.
#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "pwi/config.hpp"
#include "pwi/dataset.hpp"
#include "pwi/error.hpp"
#include "pwi/interaction.hpp"
#include "pwi/model.hpp"
#include "pwi/training.hpp"

namespace pwi::cli {

namespace detail {

inline std::pair<std::string, std::string> split_override(const std::string& kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
    return {kv.substr(0, eq), kv.substr(eq + 1)};
}

inline ExperimentConfig make_config(const std::string& config_path,
                                    const std::vector<std::string>& sets,
                                    const std::optional<std::uint64_t>& seed) {
    ExperimentConfig cfg =
        config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    for (const std::string& kv : sets) {
        auto [key, value] = split_override(kv);
        cfg.set(key, value);
    }
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
}

inline Vocabulary build_vocab(const Dataset& ds) {
    Vocabulary v;
    for (const SimilarityExample& e : ds.similarity) {
        v.add_sentence(e.s1);
        v.add_sentence(e.s2);
    }
    for (const RankingGroup& g : ds.ranking) {
        v.add_sentence(g.question);
        for (const RankingCandidate& c : g.candidates) v.add_sentence(c.text);
    }
    return v;
}

inline std::vector<std::pair<std::string, std::string>> override_pairs(
    const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& kv : sets) out.push_back(split_override(kv));
    return out;
}

inline void report_metrics(std::ostream& out, TaskKind task, const EvalReport& report) {
    if (task == TaskKind::Similarity) {
        out << "pearson_r=" << report.primary << "\n";
        out << "spearman_rho=" << report.secondary << "\n";
    } else {
        out << "map=" << report.primary << "\n";
        out << "mrr=" << report.secondary << "\n";
    }
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write output file: " + path);
    return f;
}

struct SearchArgs {
    std::string config_path;
    std::string data_path;
    std::string dev_path;
    std::string out_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
};

inline void run_search_command(const SearchArgs& args, SearchMode mode, std::ostream& out,
                               std::ostream& err) {
    ExperimentConfig cfg = make_config(args.config_path, args.sets, args.seed);
    Dataset train = load_dataset(args.data_path, cfg.task);
    Dataset dev = load_dataset(args.dev_path, cfg.task);
    if (dev.empty()) throw DataError("search: the dev split is empty");
    Vocabulary vocab = build_vocab(train);
    std::optional<EmbeddingStore> store;
    if (cfg.encoder == EncoderKind::Import) store = EmbeddingStore::load(cfg.import_path);

    std::vector<TrialPlan> plans =
        mode == SearchMode::Grid
            ? plan_grid(cfg.search_lrs, cfg.search_epochs)
            : plan_random(cfg.search_lr_lo, cfg.search_lr_hi, cfg.search_epochs_lo,
                          cfg.search_epochs_hi, cfg.search_trials, cfg.seed);
    auto trainer = [&](const TrialPlan& plan) -> double {
        ExperimentConfig trial_cfg = cfg;
        trial_cfg.lr = plan.lr;
        trial_cfg.epochs = plan.epochs;
        trial_cfg.seed = cfg.seed + kSeedOffsetTrial + plan.index;
        Model model(trial_cfg, vocab);
        if (store) model.attach_embeddings(*store);
        try {
            train_model(model, train, &dev);
            return evaluate_model(model, dev).primary;
        } catch (const NumericError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    std::vector<TrialResult> results = run_search(plans, trainer, thread_budget());

    if (args.out_path.empty()) {
        write_leaderboard_csv(out, results);
    } else {
        std::ofstream f = open_out(args.out_path);
        write_leaderboard_csv(f, results);
        err << "leaderboard written: " << args.out_path << "\n";
    }
    const TrialResult& best = results[select_best(results)];
    out << "best: trial=" << best.plan.index << " lr=" << best.plan.lr
        << " epochs=" << best.plan.epochs << " dev_metric=" << best.dev_metric << "\n";
}

}  // namespace detail

// Runs one CLI invocation; `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"pairwise word interaction models for sentence pair scoring"};
    app.require_subcommand(1);

    std::string config_path, data_path, dev_path, out_path, checkpoint, s1, s2, pair_id;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::uint64_t seed_value = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* c = cmd->add_option("--config", config_path, "experiment configuration file");
        if (needs_config) c->required();
        cmd->add_option("--set", sets, "override a config key, key=value (repeatable)");
        cmd->add_option("--seed", seed_value, "override the experiment seed")
            ->each([&](const std::string&) { seed = seed_value; });
    };

    CLI::App* train = app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(train, true);
    train->add_option("--data", data_path, "training TSV")->required();
    train->add_option("--dev", dev_path, "development TSV");
    train->add_option("--out", out_path, "checkpoint path to write")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
    eval->add_option("--data", data_path, "evaluation TSV")->required();
    eval->add_option("--set", sets, "override a config key, key=value (repeatable)");

    CLI::App* score = app.add_subcommand("score", "score a single sentence pair");
    score->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
    score->add_option("s1", s1, "first sentence")->required();
    score->add_option("s2", s2, "second sentence")->required();
    score->add_option("--id", pair_id, "pair id for imported vector lookup");

    CLI::App* grid = app.add_subcommand("gridsearch", "exhaustive hyperparameter search");
    add_common(grid, true);
    grid->add_option("--data", data_path, "training TSV")->required();
    grid->add_option("--dev", dev_path, "development TSV")->required();
    grid->add_option("--out", out_path, "leaderboard CSV path");

    CLI::App* random = app.add_subcommand("randomsearch", "randomized hyperparameter search");
    add_common(random, true);
    random->add_option("--data", data_path, "training TSV")->required();
    random->add_option("--dev", dev_path, "development TSV")->required();
    random->add_option("--out", out_path, "leaderboard CSV path");

    CLI::App* ablate =
        app.add_subcommand("ablate", "train the encoding x bilstm grid and compare");
    add_common(ablate, true);
    ablate->add_option("--data", data_path, "training TSV")->required();
    ablate->add_option("--dev", dev_path, "development TSV")->required();
    ablate->add_option("--out", out_path, "results CSV path");

    CLI::App* dump = app.add_subcommand("dump-cube", "write the focused similarity cube as CSV");
    dump->add_option("--checkpoint", checkpoint, "checkpoint path")->required();
    dump->add_option("s1", s1, "first sentence")->required();
    dump->add_option("s2", s2, "second sentence")->required();
    dump->add_option("--id", pair_id, "pair id for imported vector lookup");
    dump->add_option("--out", out_path, "CSV path, stdout when omitted");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (train->parsed()) {
            ExperimentConfig cfg = detail::make_config(config_path, sets, seed);
            Dataset train_ds = load_dataset(data_path, cfg.task);
            Dataset dev_ds;
            if (!dev_path.empty()) dev_ds = load_dataset(dev_path, cfg.task);
            if (train_ds.task == TaskKind::Ranking && train_ds.dropped_queries > 0)
                err << "note: dropped " << train_ds.dropped_queries
                    << " queries without positive candidates\n";
            Model model(cfg, detail::build_vocab(train_ds));
            if (cfg.encoder == EncoderKind::Import)
                model.attach_embeddings(EmbeddingStore::load(cfg.import_path));
            TrainOptions opts;
            opts.log = &err;
            TrainResult result = train_model(model, train_ds, dev_ds.empty() ? nullptr : &dev_ds, opts);
            model.save_checkpoint(out_path);
            std::ofstream csv = detail::open_out(out_path + ".epochs.csv");
            write_epoch_csv(csv, result.history);
            out << "checkpoint written: " << out_path << "\n";
            if (!result.history.empty()) {
                const EpochStats& last = result.history.back();
                out << "final: train_metric=" << last.train_metric
                    << " dev_metric=" << last.dev_metric << "\n";
            }
        } else if (eval->parsed()) {
            Model model = Model::load_checkpoint(checkpoint, detail::override_pairs(sets));
            Dataset ds = load_dataset(data_path, model.config().task);
            detail::report_metrics(out, model.config().task, evaluate_model(model, ds));
        } else if (score->parsed()) {
            Model model = Model::load_checkpoint(checkpoint);
            Tensor dist = model.forward({pair_id, s1, s2});
            if (model.config().task == TaskKind::Similarity)
                out << "score=" << predicted_score(dist.values()) << "\n";
            else
                out << "positive_probability=" << dist.values()[1] << "\n";
        } else if (grid->parsed() || random->parsed()) {
            detail::SearchArgs sargs{config_path, data_path, dev_path, out_path, sets, seed};
            detail::run_search_command(
                sargs, grid->parsed() ? SearchMode::Grid : SearchMode::Random, out, err);
        } else if (ablate->parsed()) {
            ExperimentConfig base = detail::make_config(config_path, sets, seed);
            Dataset train_ds = load_dataset(data_path, base.task);
            Dataset dev_ds = load_dataset(dev_path, base.task);
            if (dev_ds.empty()) throw DataError("ablate: the dev split is empty");
            Vocabulary vocab = detail::build_vocab(train_ds);
            std::optional<EmbeddingStore> store;
            if (base.encoder == EncoderKind::Import)
                store = EmbeddingStore::load(base.import_path);
            std::ostringstream csv;
            csv.precision(17);
            csv << "configuration,dev_metric\n";
            out << "configuration     dev_metric\n";
            for (EncodingScheme enc : {EncodingScheme::Joint, EncodingScheme::Separate}) {
                for (bool bilstm : {true, false}) {
                    ExperimentConfig cfg = base;
                    cfg.encoding = enc;
                    cfg.bilstm = bilstm;
                    Model model(cfg, vocab);
                    if (store) model.attach_embeddings(*store);
                    double metric = std::numeric_limits<double>::quiet_NaN();
                    try {
                        train_model(model, train_ds, &dev_ds);
                        metric = evaluate_model(model, dev_ds).primary;
                    } catch (const NumericError&) {
                    }
                    std::string label = enc == EncodingScheme::Joint ? "JOINT" : "SEP";
                    if (!bilstm) label += " - BiLSTM";
                    out << label << std::string(18 - label.size(), ' ') << metric << "\n";
                    csv << label << "," << metric << "\n";
                }
            }
            if (!out_path.empty()) {
                std::ofstream f = detail::open_out(out_path);
                f << csv.str();
                err << "results written: " << out_path << "\n";
            }
        } else if (dump->parsed()) {
            Model model = Model::load_checkpoint(checkpoint);
            ForwardTrace trace;
            model.forward({pair_id, s1, s2}, &trace);
            if (out_path.empty()) {
                dump_cube_csv(trace.cube, out);
            } else {
                std::ofstream f = detail::open_out(out_path);
                dump_cube_csv(trace.cube, f);
                err << "cube written: " << out_path << "\n";
            }
        }
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace pwi::cli
