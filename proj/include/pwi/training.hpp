// Losses, optimizers, the training loop, and hyperparameter search.
//
// Training is deterministic for a fixed seed: parameter init, shuffling,
// and random search draw from generators seeded at fixed offsets from the
// experiment seed.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pwi/config.hpp"
#include "pwi/dataset.hpp"
#include "pwi/error.hpp"
#include "pwi/metrics.hpp"
#include "pwi/model.hpp"
#include "pwi/ops.hpp"

namespace pwi {

// Mass of a real score y in [1,5] split between the two nearest classes:
// p[floor(y)-1] = floor(y)-y+1 and p[floor(y)] = y-floor(y).
inline std::vector<double> sparse_target(double y) {
    if (y < 1.0 || y > 5.0)
        throw InputError("sparse_target: score " + std::to_string(y) + " outside [1,5]");
    std::vector<double> p(5, 0.0);
    const double f = std::floor(y);
    const std::size_t lo = static_cast<std::size_t>(f) - 1;
    p[lo] = f - y + 1.0;
    if (y > f) p[lo + 1] = y - f;
    return p;
}

// KL(target || q) against a predicted distribution q. Only classes with
// target mass contribute; a zero prediction there raises a numeric error
// through log().
inline Tensor kl_loss(const std::vector<double>& target, const Tensor& q) {
    if (q.rank() != 1 || q.dim(0) != target.size())
        throw ShapeError("kl_loss: target size " + std::to_string(target.size()) +
                         " vs prediction " + shape_str(q.shape()));
    Tensor acc = Tensor::scalar(0.0);
    double entropy = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] <= 0.0) continue;
        entropy += target[i] * std::log(target[i]);
        acc = sub(acc, mul_scalar(log(at(q, i)), target[i]));
    }
    return add_scalar(acc, entropy);
}

// Negative log-likelihood of the gold class.
inline Tensor nll_loss(std::size_t gold, const Tensor& q) {
    if (q.rank() != 1 || gold >= q.dim(0))
        throw InputError("nll_loss: gold class " + std::to_string(gold) + " outside prediction " +
                         shape_str(q.shape()));
    return neg(log(at(q, gold)));
}

namespace detail {

inline void check_finite_grads(std::vector<Tensor>& params) {
    for (Tensor& p : params)
        for (double g : p.grad())
            if (!std::isfinite(g))
                throw NumericError("optimizer: non-finite gradient, step aborted");
}

}  // namespace detail

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t step = 0;
};

// Bias-corrected Adam. Verifies all gradients are finite before touching
// any parameter or moment.
inline void adam_step(std::vector<Tensor>& params, AdamState& state, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (state.m.empty()) {
        for (Tensor& p : params) {
            state.m.emplace_back(p.size(), 0.0);
            state.v.emplace_back(p.size(), 0.0);
        }
    }
    if (state.m.size() != params.size())
        throw ContractError("adam_step: optimizer state does not match parameter list");
    detail::check_finite_grads(params);
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::vector<double>& g = params[i].grad();
        double* w = params[i].data();
        for (std::size_t k = 0; k < g.size(); ++k) {
            state.m[i][k] = beta1 * state.m[i][k] + (1.0 - beta1) * g[k];
            state.v[i][k] = beta2 * state.v[i][k] + (1.0 - beta2) * g[k] * g[k];
            const double mhat = state.m[i][k] / c1;
            const double vhat = state.v[i][k] / c2;
            w[k] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

struct RmsPropState {
    std::vector<std::vector<double>> v;
};

inline void rmsprop_step(std::vector<Tensor>& params, RmsPropState& state, double lr,
                         double alpha = 0.99, double eps = 1e-8) {
    if (state.v.empty())
        for (Tensor& p : params) state.v.emplace_back(p.size(), 0.0);
    if (state.v.size() != params.size())
        throw ContractError("rmsprop_step: optimizer state does not match parameter list");
    detail::check_finite_grads(params);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::vector<double>& g = params[i].grad();
        double* w = params[i].data();
        for (std::size_t k = 0; k < g.size(); ++k) {
            state.v[i][k] = alpha * state.v[i][k] + (1.0 - alpha) * g[k] * g[k];
            w[k] -= lr * g[k] / (std::sqrt(state.v[i][k]) + eps);
        }
    }
}

struct TrainItem {
    PairInput input;
    double score = 0.0;  // similarity gold
    int label = 0;       // ranking gold
};

// Flattens a dataset into per-pair training items. Ranking candidates get
// synthetic ids "<query_id>:<index>" so imported vectors can address them.
inline std::vector<TrainItem> collect_items(const Dataset& ds) {
    std::vector<TrainItem> items;
    if (ds.task == TaskKind::Similarity) {
        for (const SimilarityExample& e : ds.similarity)
            items.push_back({{e.id, e.s1, e.s2}, e.score, 0});
    } else {
        for (const RankingGroup& g : ds.ranking)
            for (std::size_t c = 0; c < g.candidates.size(); ++c)
                items.push_back({{g.query_id + ":" + std::to_string(c), g.question,
                                  g.candidates[c].text},
                                 0.0,
                                 g.candidates[c].label});
    }
    return items;
}

inline Tensor item_loss(Model& model, const TrainItem& item, TaskKind task, LossKind loss) {
    Tensor dist = model.forward(item.input);
    if (loss == LossKind::KL) {
        std::vector<double> target;
        if (task == TaskKind::Similarity) {
            target = sparse_target(item.score);
        } else {
            target = {item.label == 0 ? 1.0 : 0.0, item.label == 1 ? 1.0 : 0.0};
        }
        return kl_loss(target, dist);
    }
    std::size_t gold;
    if (task == TaskKind::Similarity) {
        gold = static_cast<std::size_t>(std::llround(item.score)) - 1;
    } else {
        gold = static_cast<std::size_t>(item.label);
    }
    return nll_loss(gold, dist);
}

struct EvalReport {
    double primary = std::numeric_limits<double>::quiet_NaN();    // Pearson r or MAP
    double secondary = std::numeric_limits<double>::quiet_NaN();  // Spearman rho or MRR
};

// Scores every pair without recording gradients and computes the task
// metrics. Undefined correlations propagate as numeric errors.
inline EvalReport evaluate_model(Model& model, const Dataset& ds) {
    EvalReport report;
    if (ds.task == TaskKind::Similarity) {
        std::vector<double> preds, golds;
        for (const SimilarityExample& e : ds.similarity) {
            Tensor dist = model.forward({e.id, e.s1, e.s2});
            preds.push_back(predicted_score(dist.values()));
            golds.push_back(e.score);
        }
        report.primary = pearson(preds, golds);
        report.secondary = spearman(preds, golds);
    } else {
        std::vector<std::vector<int>> ranked;
        for (const RankingGroup& g : ds.ranking) {
            std::vector<double> scores;
            std::vector<int> labels;
            for (std::size_t c = 0; c < g.candidates.size(); ++c) {
                Tensor dist = model.forward({g.query_id + ":" + std::to_string(c), g.question,
                                             g.candidates[c].text});
                scores.push_back(dist.values()[1]);
                labels.push_back(g.candidates[c].label);
            }
            ranked.push_back(rank_labels_by_score(scores, labels));
        }
        report.primary = mean_average_precision(ranked);
        report.secondary = mean_reciprocal_rank(ranked);
    }
    return report;
}

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_metric = std::numeric_limits<double>::quiet_NaN();
    double dev_metric = std::numeric_limits<double>::quiet_NaN();
};

struct TrainOptions {
    std::optional<double> stop_at_train_metric;
    std::ostream* log = nullptr;
};

struct TrainResult {
    std::vector<EpochStats> history;
    double best_dev_metric = std::numeric_limits<double>::quiet_NaN();
};

// Mini-batch training driven by the model's configuration. Per-epoch
// metrics that happen to be undefined are recorded as NaN rather than
// aborting the run.
inline TrainResult train_model(Model& model, const Dataset& train, const Dataset* dev,
                               const TrainOptions& opts = {}) {
    const ExperimentConfig& cfg = model.config();
    if (train.task != cfg.task) throw ContractError("train_model: dataset task mismatch");
    std::vector<TrainItem> items = collect_items(train);
    if (items.empty()) throw DataError("train_model: training set is empty");
    std::vector<Tensor> params = model.parameters();
    const LossKind loss = cfg.resolved_loss();
    AdamState adam;
    RmsPropState rms;
    std::mt19937_64 shuffle_rng(cfg.seed + kSeedOffsetShuffle);
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t end = std::min(order.size(), start + cfg.batch);
            for (Tensor& p : params) p.zero_grad();
            TapeScope scope;
            Tensor total = Tensor::scalar(0.0);
            for (std::size_t i = start; i < end; ++i)
                total = add(total, item_loss(model, items[order[i]], cfg.task, loss));
            Tensor batch_loss = mul_scalar(total, 1.0 / static_cast<double>(end - start));
            scope.backward(batch_loss);
            loss_sum += batch_loss.item() * static_cast<double>(end - start);
            if (cfg.optimizer == OptimizerKind::Adam)
                adam_step(params, adam, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.eps);
            else
                rmsprop_step(params, rms, cfg.lr, cfg.rms_alpha, cfg.eps);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(items.size());
        try {
            stats.train_metric = evaluate_model(model, train).primary;
        } catch (const NumericError&) {
        }
        if (dev && !dev->empty()) {
            try {
                stats.dev_metric = evaluate_model(model, *dev).primary;
            } catch (const NumericError&) {
            }
        }
        result.history.push_back(stats);
        if (opts.log)
            *opts.log << "epoch " << epoch << ": loss=" << stats.train_loss
                      << " train=" << stats.train_metric << " dev=" << stats.dev_metric << "\n";
        if (!std::isnan(stats.dev_metric) &&
            (std::isnan(result.best_dev_metric) || stats.dev_metric > result.best_dev_metric))
            result.best_dev_metric = stats.dev_metric;
        if (opts.stop_at_train_metric && stats.train_metric >= *opts.stop_at_train_metric) break;
    }
    return result;
}

inline void write_epoch_csv(std::ostream& out, const std::vector<EpochStats>& history) {
    out << "epoch,train_loss,train_metric,dev_metric\n";
    std::ostringstream buf;
    buf.precision(17);
    for (const EpochStats& s : history)
        buf << s.epoch << "," << s.train_loss << "," << s.train_metric << "," << s.dev_metric
            << "\n";
    out << buf.str();
}

struct TrialPlan {
    std::size_t index = 0;
    double lr = 0.0;
    std::size_t epochs = 0;
};

struct TrialResult {
    TrialPlan plan;
    double dev_metric = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
};

// Full cross product, learning-rate major.
inline std::vector<TrialPlan> plan_grid(const std::vector<double>& lrs,
                                        const std::vector<std::size_t>& epochs) {
    std::vector<TrialPlan> plans;
    for (double lr : lrs)
        for (std::size_t ep : epochs) plans.push_back({plans.size(), lr, ep});
    return plans;
}

// Learning rate log-uniform in [lo, hi], epochs uniform over the integer
// range. Draws come in trial order from one seeded generator.
inline std::vector<TrialPlan> plan_random(double lr_lo, double lr_hi, std::size_t ep_lo,
                                          std::size_t ep_hi, std::size_t trials,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed + kSeedOffsetSearch);
    std::uniform_real_distribution<double> log_lr(std::log(lr_lo), std::log(lr_hi));
    std::uniform_int_distribution<std::size_t> ep(ep_lo, ep_hi);
    std::vector<TrialPlan> plans;
    for (std::size_t i = 0; i < trials; ++i) {
        const double lr = std::exp(log_lr(rng));
        plans.push_back({i, lr, ep(rng)});
    }
    return plans;
}

inline std::vector<TrialPlan> plan_trials(const ExperimentConfig& cfg) {
    if (cfg.search_mode == SearchMode::Grid) return plan_grid(cfg.search_lrs, cfg.search_epochs);
    return plan_random(cfg.search_lr_lo, cfg.search_lr_hi, cfg.search_epochs_lo,
                       cfg.search_epochs_hi, cfg.search_trials, cfg.seed);
}

// Worker pool size: PWI_THREADS when set, otherwise the hardware thread
// count.
inline std::size_t thread_budget() {
    if (const char* env = std::getenv("PWI_THREADS")) {
        const std::uint64_t v = detail::parse_uint("PWI_THREADS", env);
        if (v == 0) throw ConfigError("PWI_THREADS: expected a positive integer");
        return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Runs every trial through `trainer`, in parallel when allowed. Results
// keep plan order regardless of scheduling.
inline std::vector<TrialResult> run_search(
    const std::vector<TrialPlan>& plans,
    const std::function<double(const TrialPlan&)>& trainer, std::size_t threads) {
    std::vector<TrialResult> results(plans.size());
    auto run_one = [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        double metric = trainer(plans[i]);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        results[i] = {plans[i], metric, dt.count()};
    };
    threads = std::min<std::size_t>(std::max<std::size_t>(threads, 1), plans.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < plans.size(); ++i) run_one(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= plans.size()) return;
                try {
                    run_one(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

// Highest dev metric wins; NaN always loses. Ties prefer the lower
// learning rate, then fewer epochs.
inline std::size_t select_best(const std::vector<TrialResult>& results) {
    if (results.empty()) throw ContractError("select_best: no trial results");
    std::size_t best = 0;
    auto better = [](const TrialResult& a, const TrialResult& b) {
        const bool an = std::isnan(a.dev_metric), bn = std::isnan(b.dev_metric);
        if (an != bn) return !an;
        if (!an && a.dev_metric != b.dev_metric) return a.dev_metric > b.dev_metric;
        if (a.plan.lr != b.plan.lr) return a.plan.lr < b.plan.lr;
        if (a.plan.epochs != b.plan.epochs) return a.plan.epochs < b.plan.epochs;
        return a.plan.index < b.plan.index;
    };
    for (std::size_t i = 1; i < results.size(); ++i)
        if (better(results[i], results[best])) best = i;
    return best;
}

// Leaderboard rows sorted best first with the same preference order used
// for selection.
inline void write_leaderboard_csv(std::ostream& out, std::vector<TrialResult> results) {
    std::stable_sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
        const bool an = std::isnan(a.dev_metric), bn = std::isnan(b.dev_metric);
        if (an != bn) return !an;
        if (!an && a.dev_metric != b.dev_metric) return a.dev_metric > b.dev_metric;
        if (a.plan.lr != b.plan.lr) return a.plan.lr < b.plan.lr;
        return a.plan.epochs < b.plan.epochs;
    });
    out << "trial,lr,epochs,dev_metric,seconds\n";
    std::ostringstream buf;
    buf.precision(17);
    for (const TrialResult& r : results)
        buf << r.plan.index << "," << r.plan.lr << "," << r.plan.epochs << "," << r.dev_metric
            << "," << r.seconds << "\n";
    out << buf.str();
}

}  // namespace pwi
