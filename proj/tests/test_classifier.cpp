#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "classbd/common.hpp"
#include "classbd/graph.hpp"
#include "classbd/metrics.hpp"
#include "classbd/optim.hpp"
#include "classbd/wdcnn.hpp"
#include "oracles.hpp"

using namespace classbd;

namespace {

nn::WdcnnConfig default_cfg(std::size_t classes) {
    nn::WdcnnConfig cfg;
    cfg.num_classes = classes;
    return cfg;
}

} // namespace

TEST_CASE("wdcnn: output shape is (batch, num_classes)") {
    ad::ParameterStore store;
    nn::Wdcnn net(store, "cls", default_cfg(10), 2048);
    net.init(5);
    ad::Graph g;
    ad::Var out = net.forward(g, g.input(ad::Tensor({4, 2048}, oracle::random_signal(4 * 2048, 1))));
    CHECK(out->value.shape == std::vector<std::size_t>{4, 10});
    for (double v : out->value.data) CHECK(std::isfinite(v));
}

TEST_CASE("wdcnn: identical rows in one batch give identical logits") {
    ad::ParameterStore store;
    nn::Wdcnn net(store, "cls", default_cfg(6), 2048);
    net.init(6);
    const auto row = oracle::random_signal(2048, 2);
    ad::Tensor x = ad::Tensor::zeros({2, 2048});
    std::copy(row.begin(), row.end(), x.data.begin());
    std::copy(row.begin(), row.end(), x.data.begin() + 2048);
    ad::Graph g;
    ad::Var out = net.forward(g, g.input(x));
    for (std::size_t c = 0; c < 6; ++c)
        CHECK(out->value.data[c] == out->value.data[6 + c]);
}

TEST_CASE("wdcnn: gradients pass central differences") {
    nn::WdcnnConfig cfg;
    cfg.first_kernel = 16;
    cfg.first_stride = 4;
    cfg.stage_channels = {4, 8};
    cfg.fc_width = 16;
    cfg.num_classes = 3;
    ad::ParameterStore store;
    nn::Wdcnn net(store, "cls", cfg, 128);
    net.init(9);

    const ad::Tensor x({2, 128}, oracle::random_signal(256, 3));
    const std::vector<int> labels{0, 2};
    auto loss_fn = [&]() {
        ad::Graph g;
        return g.cross_entropy(net.forward(g, g.input(x)), labels)->value.data[0];
    };
    {
        ad::Graph g;
        ad::Var root = g.cross_entropy(net.forward(g, g.input(x)), labels);
        store.zero_grads();
        g.backward(root);
    }
    std::mt19937_64 rng(12);
    std::vector<opt::ParamCoord> coords;
    for (auto* p : store.all())
        for (int i = 0; i < 4; ++i) coords.push_back({p->name, rng() % p->size()});
    const auto report = opt::finite_difference_check(store, coords, loss_fn, 1e-5, 1e-4);
    for (const auto& e : report.entries) {
        INFO(e.param << "[" << e.index << "]: " << e.analytic << " vs " << e.numeric);
        CHECK_FALSE(e.over_tolerance);
    }
}

TEST_CASE("wdcnn: config that collapses the feature map is rejected") {
    nn::WdcnnConfig cfg;
    cfg.num_classes = 4;
    cfg.stage_channels = {8, 8, 8, 8, 8, 8, 8, 8};
    CHECK_THROWS_AS(cfg.validate(128), ValidationError);
}

TEST_CASE("wdcnn: no hidden side channel besides the deconvolved input") {
    // feeding a precomputed y through a fresh graph reproduces the logits
    ad::ParameterStore store;
    nn::WdcnnConfig cfg;
    cfg.first_kernel = 16;
    cfg.first_stride = 4;
    cfg.stage_channels = {4, 8};
    cfg.fc_width = 16;
    cfg.num_classes = 3;
    nn::Wdcnn net(store, "cls", cfg, 128);
    net.init(77);
    const ad::Tensor y({1, 128}, oracle::random_signal(128, 8));
    ad::Graph g1, g2;
    const auto a = net.forward(g1, g1.input(y))->value;
    const auto b = net.forward(g2, g2.input(y))->value;
    CHECK(a.data == b.data);
}

TEST_CASE("predict: argmax with lowest-index tie break") {
    CHECK(nn::predict(ad::Tensor({1, 3}, {0.0, 1.0, 0.0})) == std::vector<int>{1});
    CHECK(nn::predict(ad::Tensor({1, 3}, {0.5, 0.5, 0.5})) == std::vector<int>{0});
    CHECK(nn::predict(ad::Tensor({2, 2}, {0.1, 0.9, 3.0, -1.0})) == std::vector<int>({1, 0}));
}

TEST_CASE("predict: invariant to constant logit shifts") {
    const auto logits = oracle::random_signal(5 * 7, 21);
    ad::Tensor a({5, 7}, logits);
    auto shifted = logits;
    for (auto& v : shifted) v += 123.25;
    ad::Tensor b({5, 7}, shifted);
    CHECK(nn::predict(a) == nn::predict(b));
}

TEST_CASE("metrics: perfect predictions") {
    const std::vector<int> labels{0, 1, 2, 1, 0, 2};
    const auto rep = metrics::evaluate_metrics(labels, labels, 3);
    CHECK(rep.macro.f1 == doctest::Approx(1.0));
    CHECK(rep.macro.fpr == doctest::Approx(0.0));
}

TEST_CASE("metrics: binary confusion arithmetic") {
    // positive class 1: TP=3, FP=1, FN=1, TN=5
    std::vector<int> labels, preds;
    for (int i = 0; i < 3; ++i) { labels.push_back(1); preds.push_back(1); } // TP
    labels.push_back(0); preds.push_back(1);                                 // FP
    labels.push_back(1); preds.push_back(0);                                 // FN
    for (int i = 0; i < 5; ++i) { labels.push_back(0); preds.push_back(0); } // TN
    const auto rep = metrics::evaluate_metrics(preds, labels, 2);
    CHECK(rep.per_class[1].precision == doctest::Approx(0.75));
    CHECK(rep.per_class[1].recall == doctest::Approx(0.75));
    CHECK(rep.per_class[1].f1 == doctest::Approx(0.75));
    CHECK(rep.per_class[1].fpr == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("metrics: collapsed predictor on a balanced set scores macro 1/3") {
    std::vector<int> labels, preds;
    const int n = 10;
    for (int i = 0; i < 2 * n; ++i) {
        labels.push_back(i < n ? 0 : 1);
        preds.push_back(0);
    }
    const auto rep = metrics::evaluate_metrics(preds, labels, 2);
    CHECK(rep.per_class[0].recall == doctest::Approx(1.0));
    CHECK(rep.per_class[1].recall == doctest::Approx(0.0));
    CHECK(rep.macro.f1 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("metrics: absent class convention and bounds") {
    // class 2 never appears in labels or predictions
    const std::vector<int> labels{0, 1, 0, 1};
    const std::vector<int> preds{0, 1, 1, 1};
    const auto rep = metrics::evaluate_metrics(preds, labels, 3);
    CHECK(rep.per_class[2].precision == 1.0);
    CHECK(rep.per_class[2].recall == 1.0);
    CHECK(rep.per_class[2].f1 == 1.0);
    CHECK(rep.per_class[2].fpr == 0.0);
    for (const auto& m : rep.per_class) {
        for (double v : {m.precision, m.recall, m.f1, m.fpr}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("metrics: FPR is zero iff there are no false positives") {
    const std::vector<int> labels{0, 0, 1, 1};
    const std::vector<int> clean{0, 0, 1, 1};
    const std::vector<int> dirty{0, 1, 1, 1};
    CHECK(metrics::evaluate_metrics(clean, labels, 2).per_class[1].fpr == 0.0);
    CHECK(metrics::evaluate_metrics(dirty, labels, 2).per_class[1].fpr > 0.0);
}

TEST_CASE("metrics: length mismatch rejected") {
    CHECK_THROWS_AS(metrics::evaluate_metrics({0, 1}, {0}, 2), ValidationError);
}
