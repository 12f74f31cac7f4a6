#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pwi/metrics.hpp"
#include "pwi/training.hpp"

using namespace pwi;

TEST(SparseTarget, Boundaries) {
    EXPECT_EQ(sparse_target(5.0), (std::vector<double>{0, 0, 0, 0, 1}));
    EXPECT_EQ(sparse_target(1.0), (std::vector<double>{1, 0, 0, 0, 0}));
}

TEST(SparseTarget, SplitsMassBetweenNeighbours) {
    EXPECT_EQ(sparse_target(3.5), (std::vector<double>{0, 0, 0.5, 0.5, 0}));
    std::vector<double> p = sparse_target(2.25);
    EXPECT_DOUBLE_EQ(p[1], 0.75);
    EXPECT_DOUBLE_EQ(p[2], 0.25);
}

TEST(SparseTarget, OutOfRangeRejected) {
    EXPECT_THROW(sparse_target(0.99), InputError);
    EXPECT_THROW(sparse_target(5.01), InputError);
}

TEST(SparseTarget, RoundTripExactOnHundredthGrid) {
    for (int k = 0; k <= 400; ++k) {
        const double y = 1.0 + static_cast<double>(k) / 100.0;
        EXPECT_EQ(predicted_score(sparse_target(y)), y) << "y=" << y;
    }
}

TEST(KlLoss, ZeroWhenEqual) {
    Tensor q = Tensor::from({2}, {0.5, 0.5});
    EXPECT_NEAR(kl_loss({0.5, 0.5}, q).item(), 0.0, 1e-15);
}

TEST(KlLoss, HandValueLnTwo) {
    Tensor q = Tensor::from({2}, {0.5, 0.5});
    EXPECT_NEAR(kl_loss({1.0, 0.0}, q).item(), std::log(2.0), 1e-12);
}

TEST(KlLoss, NonNegativeOnRandomPairs) {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        double p0 = u(rng), p1 = u(rng), q0 = u(rng), q1 = u(rng);
        std::vector<double> p{p0 / (p0 + p1), p1 / (p0 + p1)};
        Tensor q = Tensor::from({2}, {q0 / (q0 + q1), q1 / (q0 + q1)});
        EXPECT_GE(kl_loss(p, q).item(), -1e-12);
    }
}

TEST(KlLoss, ZeroPredictionAtSupportedClassRejected) {
    Tensor q = Tensor::from({2}, {0.0, 1.0});
    EXPECT_THROW(kl_loss({1.0, 0.0}, q).item(), NumericError);
    // unsupported class may carry zero prediction
    EXPECT_NO_THROW(kl_loss({0.0, 1.0}, q).item());
}

TEST(KlLoss, GradientMatchesFiniteDifferences) {
    Tensor logits = Tensor::from({5}, {0.2, -0.1, 0.4, 0.0, -0.3}, true);
    oracle::GradCheck r = oracle::grad_check(
        {logits}, [&] { return kl_loss(sparse_target(3.3), softmax(logits, 0)); });
    EXPECT_LE(r.max_rel, 1e-4);
}

TEST(NllLoss, HandValues) {
    Tensor q = Tensor::from({2}, {0.5, 1.0});
    EXPECT_NEAR(nll_loss(1, q).item(), 0.0, 1e-15);
    EXPECT_NEAR(nll_loss(0, q).item(), std::log(2.0), 1e-12);
}

TEST(NllLoss, StrictlyDecreasingInConfidence) {
    double prev = 1e9;
    for (double qg : {0.2, 0.4, 0.6, 0.8, 0.99}) {
        Tensor q = Tensor::from({2}, {qg, 1.0 - qg});
        const double loss = nll_loss(0, q).item();
        EXPECT_LT(loss, prev);
        prev = loss;
    }
}

TEST(NllLoss, GoldOutOfRangeRejected) {
    Tensor q = Tensor::from({2}, {0.5, 0.5});
    EXPECT_THROW(nll_loss(2, q), InputError);
}

TEST(Adam, SingleStepHandValue) {
    std::vector<Tensor> params{Tensor::scalar(1.0, true)};
    params[0].impl()->grad[0] = 1.0;
    AdamState state;
    adam_step(params, state, 0.1);
    // m-hat = v-hat = 1 after bias correction, so w' ~ 1 - lr
    EXPECT_NEAR(params[0].values()[0], 0.9, 1e-8);
    EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    std::vector<Tensor> params{Tensor::scalar(2.5, true)};
    AdamState state;
    adam_step(params, state, 0.1);
    EXPECT_DOUBLE_EQ(params[0].values()[0], 2.5);
}

TEST(Adam, IndependentParametersUpdateIndependently) {
    std::vector<Tensor> params{Tensor::scalar(1.0, true), Tensor::scalar(1.0, true)};
    params[0].impl()->grad[0] = 1.0;
    AdamState state;
    adam_step(params, state, 0.1);
    EXPECT_LT(params[0].values()[0], 1.0);
    EXPECT_DOUBLE_EQ(params[1].values()[0], 1.0);
}

TEST(RmsProp, SingleStepHandValue) {
    std::vector<Tensor> params{Tensor::scalar(1.0, true)};
    params[0].impl()->grad[0] = 1.0;
    RmsPropState state;
    rmsprop_step(params, state, 0.1);
    EXPECT_NEAR(state.v[0][0], 0.01, 1e-12);
    EXPECT_NEAR(params[0].values()[0], 0.0, 1e-6);
}

TEST(RmsProp, ZeroGradientLeavesParameters) {
    std::vector<Tensor> params{Tensor::scalar(-1.5, true)};
    RmsPropState state;
    rmsprop_step(params, state, 0.1);
    EXPECT_DOUBLE_EQ(params[0].values()[0], -1.5);
}

// The update is nearly scale-free: doubling the gradient changes the step
// by far less than 2x.
TEST(RmsProp, ScaleFreeProperty) {
    std::vector<Tensor> a{Tensor::scalar(1.0, true)};
    a[0].impl()->grad[0] = 1.0;
    RmsPropState sa;
    rmsprop_step(a, sa, 0.1);
    const double step1 = 1.0 - a[0].values()[0];

    std::vector<Tensor> b{Tensor::scalar(1.0, true)};
    b[0].impl()->grad[0] = 2.0;
    RmsPropState sb;
    rmsprop_step(b, sb, 0.1);
    const double step2 = 1.0 - b[0].values()[0];
    EXPECT_LT(step2, 2.0 * step1);
    EXPECT_NEAR(step2, step1, 1e-6);
}

TEST(Optimizers, NonFiniteGradientAbortsBeforeMutation) {
    std::vector<Tensor> params{Tensor::scalar(1.0, true), Tensor::scalar(2.0, true)};
    params[0].impl()->grad[0] = 1.0;
    params[1].impl()->grad[0] = std::nan("");
    AdamState astate;
    EXPECT_THROW(adam_step(params, astate, 0.1), NumericError);
    EXPECT_DOUBLE_EQ(params[0].values()[0], 1.0);
    EXPECT_EQ(astate.step, 0u);
    RmsPropState rstate;
    EXPECT_THROW(rmsprop_step(params, rstate, 0.1), NumericError);
    EXPECT_DOUBLE_EQ(params[0].values()[0], 1.0);
}

TEST(Pearson, PerfectAndInverted) {
    EXPECT_DOUBLE_EQ(pearson({1, 2, 3}, {1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(pearson({1, 2, 3}, {-1, -2, -3}), -1.0);
}

TEST(Pearson, HandValue) {
    EXPECT_NEAR(pearson({1, 2, 3}, {1, 2, 4}), 0.98198, 1e-5);
}

TEST(Pearson, ZeroVarianceRejected) {
    EXPECT_THROW(pearson({1, 2, 3}, {2, 2, 2}), NumericError);
}

TEST(Spearman, RankInvariance) {
    // y = exp(x) is strictly increasing in x
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {std::exp(1.0), std::exp(2.0), std::exp(3.0),
                                             std::exp(4.0)}),
                     1.0);
}

TEST(Spearman, HandValue) {
    EXPECT_NEAR(spearman({1, 2, 3}, {3, 1, 2}), -0.5, 1e-12);
}

TEST(Spearman, TiesShareAverageRanks) {
    std::vector<double> r = average_ranks({10.0, 20.0, 20.0, 30.0});
    EXPECT_DOUBLE_EQ(r[0], 1.0);
    EXPECT_DOUBLE_EQ(r[1], 2.5);
    EXPECT_DOUBLE_EQ(r[2], 2.5);
    EXPECT_DOUBLE_EQ(r[3], 4.0);
}

TEST(Spearman, AllTiedRejected) {
    EXPECT_THROW(spearman({1, 2, 3}, {5, 5, 5}), NumericError);
}

TEST(RankingMetrics, HandValues) {
    EXPECT_NEAR(average_precision({1, 0, 1}), 0.83333, 1e-5);
    EXPECT_DOUBLE_EQ(average_precision({1, 1, 1}), 1.0);
    EXPECT_DOUBLE_EQ(mean_average_precision({{1, 1}, {0, 1}}), 0.75);
    EXPECT_DOUBLE_EQ(reciprocal_rank({1, 0}), 1.0);
    EXPECT_DOUBLE_EQ(reciprocal_rank({0, 0, 1}), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(mean_reciprocal_rank({{1}, {0, 1}}), 0.75);
}

TEST(RankingMetrics, NoPositiveRejected) {
    EXPECT_THROW(average_precision({0, 0}), ContractError);
    EXPECT_THROW(reciprocal_rank({0}), ContractError);
}

TEST(RankingMetrics, MatchBruteForceOnRandomQueries) {
    std::mt19937_64 rng(72);
    std::uniform_int_distribution<std::size_t> len(1, 8);
    std::uniform_int_distribution<int> lab(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> ranked(len(rng));
        bool any = false;
        for (int& l : ranked) any |= (l = lab(rng)) == 1;
        if (!any) ranked[ranked.size() / 2] = 1;
        EXPECT_NEAR(average_precision(ranked), oracle::average_precision(ranked), 1e-12);
        EXPECT_NEAR(reciprocal_rank(ranked), oracle::reciprocal_rank(ranked), 1e-12);
    }
}

TEST(RankingMetrics, ScoreTiesKeepCandidateOrder) {
    std::vector<int> ranked = rank_labels_by_score({0.5, 0.5, 0.9}, {0, 1, 1});
    EXPECT_EQ(ranked, (std::vector<int>{1, 0, 1}));
}

TEST(PredictedScore, HandValues) {
    EXPECT_DOUBLE_EQ(predicted_score({0, 0, 0, 0, 1}), 5.0);
    EXPECT_DOUBLE_EQ(predicted_score({0.2, 0.2, 0.2, 0.2, 0.2}), 3.0);
}

TEST(Search, GridEnumeratesFullCrossProduct) {
    ExperimentConfig cfg;
    std::vector<TrialPlan> plans = plan_grid(cfg.search_lrs, cfg.search_epochs);
    ASSERT_EQ(plans.size(), 16u);
    EXPECT_DOUBLE_EQ(plans[0].lr, 5e-5);
    EXPECT_EQ(plans[0].epochs, 5u);
    EXPECT_DOUBLE_EQ(plans[15].lr, 2e-5);
    EXPECT_EQ(plans[15].epochs, 2u);
    std::set<std::pair<double, std::size_t>> unique;
    for (const TrialPlan& p : plans) unique.insert({p.lr, p.epochs});
    EXPECT_EQ(unique.size(), 16u);
}

TEST(Search, SinglePointGrid) {
    std::vector<TrialPlan> plans = plan_grid({3e-4}, {7});
    ASSERT_EQ(plans.size(), 1u);
    EXPECT_DOUBLE_EQ(plans[0].lr, 3e-4);
    EXPECT_EQ(plans[0].epochs, 7u);
}

TEST(Search, RandomDrawsStayInBounds) {
    std::vector<TrialPlan> plans = plan_random(5e-5, 5e-4, 3, 15, 1000, 99);
    ASSERT_EQ(plans.size(), 1000u);
    for (const TrialPlan& p : plans) {
        EXPECT_GE(p.lr, 5e-5);
        EXPECT_LE(p.lr, 5e-4);
        EXPECT_GE(p.epochs, 3u);
        EXPECT_LE(p.epochs, 15u);
    }
}

TEST(Search, RandomIsSeedDeterministic) {
    std::vector<TrialPlan> a = plan_random(5e-5, 5e-4, 3, 15, 20, 7);
    std::vector<TrialPlan> b = plan_random(5e-5, 5e-4, 3, 15, 20, 7);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].lr, b[i].lr);
        EXPECT_EQ(a[i].epochs, b[i].epochs);
    }
    std::vector<TrialPlan> c = plan_random(5e-5, 5e-4, 3, 15, 20, 8);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].lr != c[i].lr;
    EXPECT_TRUE(differs);
}

TEST(Search, SingleTrialRandom) {
    std::vector<TrialPlan> plans = plan_random(1e-4, 1e-4, 5, 5, 1, 3);
    ASSERT_EQ(plans.size(), 1u);
    EXPECT_NEAR(plans[0].lr, 1e-4, 1e-18);
    EXPECT_EQ(plans[0].epochs, 5u);
}

TEST(Search, FakeTrainerArgmaxMatchesExhaustiveScan) {
    std::vector<TrialPlan> plans = plan_grid({1e-4, 2e-4}, {2, 3});
    const std::vector<double> table{0.4, 0.9, 0.9, 0.1};
    auto trainer = [&](const TrialPlan& p) { return table[p.index]; };
    std::vector<TrialResult> results = run_search(plans, trainer, 1);
    // exhaustive scan with the documented preference order
    std::size_t expect = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const bool better =
            table[i] > table[expect] ||
            (table[i] == table[expect] && plans[i].lr < plans[expect].lr) ||
            (table[i] == table[expect] && plans[i].lr == plans[expect].lr &&
             plans[i].epochs < plans[expect].epochs);
        if (better) expect = i;
    }
    EXPECT_EQ(select_best(results), expect);
    EXPECT_EQ(expect, 1u);  // 0.9 tie resolved toward the lower lr
}

TEST(Search, NanMetricLosesToAnyNumber) {
    std::vector<TrialPlan> plans = plan_grid({1e-4, 2e-4}, {2});
    std::vector<TrialResult> results = run_search(
        plans,
        [](const TrialPlan& p) {
            return p.index == 0 ? std::numeric_limits<double>::quiet_NaN() : 0.05;
        },
        1);
    EXPECT_EQ(select_best(results), 1u);
}

TEST(Search, ParallelMatchesSerial) {
    std::vector<TrialPlan> plans = plan_grid({1e-4, 2e-4, 3e-4}, {2, 3, 4});
    auto trainer = [](const TrialPlan& p) { return static_cast<double>(p.index) * 0.1; };
    std::vector<TrialResult> serial = run_search(plans, trainer, 1);
    std::vector<TrialResult> parallel = run_search(plans, trainer, 4);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].plan.index, parallel[i].plan.index);
        EXPECT_EQ(serial[i].dev_metric, parallel[i].dev_metric);
    }
}

TEST(Search, LeaderboardSortedBestFirst) {
    std::vector<TrialPlan> plans = plan_grid({1e-4, 2e-4}, {2, 3});
    std::vector<TrialResult> results = run_search(
        plans, [](const TrialPlan& p) { return p.index == 2 ? 0.9 : 0.1; }, 1);
    std::ostringstream os;
    write_leaderboard_csv(os, results);
    std::istringstream in(os.str());
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "trial,lr,epochs,dev_metric,seconds");
    EXPECT_EQ(first.substr(0, 2), "2,");
}

TEST(ThreadBudget, ReadsEnvironment) {
    setenv("PWI_THREADS", "3", 1);
    EXPECT_EQ(thread_budget(), 3u);
    setenv("PWI_THREADS", "zero", 1);
    EXPECT_THROW(thread_budget(), ConfigError);
    setenv("PWI_THREADS", "0", 1);
    EXPECT_THROW(thread_budget(), ConfigError);
    unsetenv("PWI_THREADS");
    EXPECT_GE(thread_budget(), 1u);
}

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.embed_dim = 6;
    cfg.lstm_hidden = 4;
    cfg.standin_layers = 1;
    cfg.standin_heads = 2;
    cfg.standin_ff = 8;
    cfg.standin_max_len = 16;
    cfg.classifier.grid_size = 4;
    cfg.classifier.blocks = {{1, 3}};
    cfg.classifier.fc_widths = {5};
    cfg.batch = 2;
    cfg.epochs = 5;
    cfg.lr = 0.01;
    return cfg;
}

Dataset small_similarity() {
    Dataset ds;
    ds.task = TaskKind::Similarity;
    ds.similarity = {
        {"p1", "a cat sat here", "a cat sat here", 5.0},
        {"p2", "a cat sat here", "dogs bark loudly outside", 1.2},
        {"p3", "birds fly south", "birds fly south today", 4.1},
        {"p4", "rain fell hard", "the sun was bright", 1.8},
    };
    return ds;
}

Vocabulary vocab_for(const Dataset& ds) {
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

}  // namespace

TEST(CollectItems, SimilarityKeepsIdsAndScores) {
    Dataset ds = small_similarity();
    std::vector<TrainItem> items = collect_items(ds);
    ASSERT_EQ(items.size(), 4u);
    EXPECT_EQ(items[0].input.id, "p1");
    EXPECT_DOUBLE_EQ(items[1].score, 1.2);
}

TEST(CollectItems, RankingGetsSyntheticPerCandidateIds) {
    Dataset ds;
    ds.task = TaskKind::Ranking;
    ds.ranking.push_back({"q7", "what is this", {{"first answer", 0}, {"second answer", 1}}});
    std::vector<TrainItem> items = collect_items(ds);
    ASSERT_EQ(items.size(), 2u);
    EXPECT_EQ(items[0].input.id, "q7:0");
    EXPECT_EQ(items[1].input.id, "q7:1");
    EXPECT_EQ(items[0].input.s1, "what is this");
    EXPECT_EQ(items[1].label, 1);
}

TEST(TrainModel, LossDecreasesOnTinyFixture) {
    Dataset ds = small_similarity();
    ExperimentConfig cfg = small_config();
    Model model(cfg, vocab_for(ds));
    TrainResult r = train_model(model, ds, nullptr);
    ASSERT_EQ(r.history.size(), 5u);
    EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
}

TEST(TrainModel, ZeroEpochsTouchesNothing) {
    Dataset ds = small_similarity();
    ExperimentConfig cfg = small_config();
    cfg.epochs = 0;
    Model model(cfg, vocab_for(ds));
    std::vector<std::vector<double>> before;
    for (Tensor& p : model.parameters()) before.push_back(p.values());
    TrainResult r = train_model(model, ds, nullptr);
    EXPECT_TRUE(r.history.empty());
    std::vector<Tensor> after = model.parameters();
    for (std::size_t i = 0; i < after.size(); ++i) EXPECT_EQ(after[i].values(), before[i]);
}

TEST(TrainModel, SameSeedIsBitwiseDeterministic) {
    Dataset ds = small_similarity();
    ExperimentConfig cfg = small_config();
    cfg.epochs = 2;
    Model a(cfg, vocab_for(ds));
    Model b(cfg, vocab_for(ds));
    train_model(a, ds, nullptr);
    train_model(b, ds, nullptr);
    std::vector<Tensor> pa = a.parameters(), pb = b.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].values(), pb[i].values());
}

TEST(TrainModel, DifferentSeedDiverges) {
    Dataset ds = small_similarity();
    ExperimentConfig cfg = small_config();
    cfg.epochs = 1;
    Model a(cfg, vocab_for(ds));
    cfg.seed = 43;
    Model b(cfg, vocab_for(ds));
    train_model(a, ds, nullptr);
    train_model(b, ds, nullptr);
    bool differs = false;
    std::vector<Tensor> pa = a.parameters(), pb = b.parameters();
    for (std::size_t i = 0; i < pa.size() && !differs; ++i)
        differs = pa[i].values() != pb[i].values();
    EXPECT_TRUE(differs);
}

TEST(TrainModel, EmptyTrainingSetRejected) {
    Dataset ds;
    ds.task = TaskKind::Similarity;
    ExperimentConfig cfg = small_config();
    Vocabulary v;
    v.add_sentence("just some words");
    Model model(cfg, v);
    EXPECT_THROW(train_model(model, ds, nullptr), DataError);
}

TEST(TrainModel, TaskMismatchRejected) {
    Dataset ds;
    ds.task = TaskKind::Ranking;
    ds.ranking.push_back({"q1", "a question", {{"an answer", 1}}});
    ExperimentConfig cfg = small_config();  // task stays Similarity
    Model model(cfg, vocab_for(ds));
    EXPECT_THROW(train_model(model, ds, nullptr), ContractError);
}

TEST(TrainModel, EarlyStopCutsHistoryShort) {
    Dataset ds = small_similarity();
    ExperimentConfig cfg = small_config();
    cfg.epochs = 5;
    Model model(cfg, vocab_for(ds));
    TrainOptions opts;
    opts.stop_at_train_metric = -1.1;  // any defined correlation clears this
    TrainResult r = train_model(model, ds, nullptr, opts);
    EXPECT_EQ(r.history.size(), 1u);
}

TEST(TrainModel, DevMetricTracksBest) {
    Dataset train = small_similarity();
    Dataset dev = small_similarity();
    ExperimentConfig cfg = small_config();
    cfg.epochs = 3;
    Model model(cfg, vocab_for(train));
    TrainResult r = train_model(model, train, &dev);
    double best = -2.0;
    for (const EpochStats& s : r.history)
        if (!std::isnan(s.dev_metric) && s.dev_metric > best) best = s.dev_metric;
    EXPECT_DOUBLE_EQ(r.best_dev_metric, best);
}

TEST(EvaluateModel, RankingReportStaysInUnitRange) {
    Dataset ds;
    ds.task = TaskKind::Ranking;
    ds.ranking.push_back(
        {"q1", "where is the station", {{"down the road", 1}, {"a green apple", 0}}});
    ds.ranking.push_back({"q2", "who won the game", {{"the home team", 1}}});
    ExperimentConfig cfg = small_config();
    cfg.task = TaskKind::Ranking;
    Model model(cfg, vocab_for(ds));
    EvalReport report = evaluate_model(model, ds);
    EXPECT_GE(report.primary, 0.0);
    EXPECT_LE(report.primary, 1.0);
    EXPECT_GE(report.secondary, 0.0);
    EXPECT_LE(report.secondary, 1.0);
}

TEST(EpochCsv, HeaderAndRowLayout) {
    std::vector<EpochStats> history{{1, 0.5, 0.1, 0.2}, {2, 0.4, 0.3, 0.35}};
    std::ostringstream os;
    write_epoch_csv(os, history);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "epoch,train_loss,train_metric,dev_metric");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 6), "1,0.5,");
}
