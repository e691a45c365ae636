// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "beamtrack/rnn.hpp"

using namespace beamtrack;

namespace {

LstmParams zero_lstm(int input, int hidden)
{
    Rng rng(0);
    LstmParams p = LstmParams::init(input, hidden, rng);
    for (auto* m : {&p.Wi, &p.Wf, &p.Wo, &p.Wg, &p.Ui, &p.Uf, &p.Uo, &p.Ug})
        m->setZero();
    for (auto* v : {&p.bi, &p.bf, &p.bo, &p.bg})
        v->setZero();
    return p;
}

std::vector<Eigen::VectorXd> random_sequence(int steps, int dim, Rng& rng)
{
    std::vector<Eigen::VectorXd> seq(steps);
    for (auto& v : seq) {
        v.resize(dim);
        for (int i = 0; i < dim; ++i)
            v[i] = uniform(rng, 0.0, 1.0);
    }
    return seq;
}

// Central-difference gradient of the scalar loss with respect to one entry.
double numeric_grad(RnnNetwork& net, double& entry, const std::vector<Eigen::VectorXd>& windows,
                    const Eigen::VectorXd& label, double eps = 1e-5)
{
    const double saved = entry;
    entry = saved + eps;
    const double up = bce_loss(network_forward(net, windows), label);
    entry = saved - eps;
    const double down = bce_loss(network_forward(net, windows), label);
    entry = saved;
    return (up - down) / (2.0 * eps);
}

template <class F>
void for_each_tensor_pair(RnnNetwork& net, NetworkGrads& grads, F&& f)
{
    auto lstm = [&](LstmParams& p, LstmGrads& g) {
        f(p.Wi, g.Wi);
        f(p.Wf, g.Wf);
        f(p.Wo, g.Wo);
        f(p.Wg, g.Wg);
        f(p.Ui, g.Ui);
        f(p.Uf, g.Uf);
        f(p.Uo, g.Uo);
        f(p.Ug, g.Ug);
        f(p.bi, g.bi);
        f(p.bf, g.bf);
        f(p.bo, g.bo);
        f(p.bg, g.bg);
    };
    lstm(net.lstm1, grads.lstm1);
    lstm(net.bilstm_fwd, grads.bilstm_fwd);
    lstm(net.bilstm_bwd, grads.bilstm_bwd);
    f(net.dense_weights, grads.dense_weights);
    f(net.dense_bias, grads.dense_bias);
}

} // namespace

TEST_CASE("lstm_forward: all-zero parameters output zeros")
{
    const LstmParams p = zero_lstm(3, 4);
    std::vector<Eigen::MatrixXd> inputs(5, Eigen::MatrixXd::Random(3, 2));
    const auto outputs = lstm_forward(p, inputs, {}, {});
    for (const auto& h : outputs)
        CHECK(h.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("lstm_forward: saturated forget gate preserves the cell state")
{
    LstmParams p = zero_lstm(2, 3);
    p.bf.setConstant(50.0);  // forget gate pinned open
    p.bi.setConstant(-50.0); // input gate closed
    std::vector<Eigen::MatrixXd> inputs(6, Eigen::MatrixXd::Ones(2, 1));
    const Eigen::MatrixXd c0 = Eigen::Vector3d(0.3, -0.7, 1.2);
    const Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(3, 1);

    LstmCache cache;
    (void)lstm_forward(p, inputs, h0, c0, &cache);
    for (const auto& step : cache.steps)
        for (int i = 0; i < 3; ++i)
            CHECK(step.c(i, 0) == doctest::Approx(c0(i, 0)).epsilon(1e-9));
}

TEST_CASE("lstm_forward: output shape is steps x hidden")
{
    Rng rng(42);
    const LstmParams p = LstmParams::init(5, 7, rng);
    std::vector<Eigen::MatrixXd> inputs(3, Eigen::MatrixXd::Random(5, 1));
    const auto outputs = lstm_forward(p, inputs, {}, {});
    REQUIRE(outputs.size() == 3);
    for (const auto& h : outputs) {
        CHECK(h.rows() == 7);
        CHECK(h.cols() == 1);
    }
}

TEST_CASE("lstm_forward: rejects dimension mismatches and non-finite inputs")
{
    Rng rng(42);
    const LstmParams p = LstmParams::init(5, 7, rng);
    std::vector<Eigen::MatrixXd> bad(2, Eigen::MatrixXd::Random(4, 1));
    CHECK_THROWS_AS((void)lstm_forward(p, bad, {}, {}), std::invalid_argument);

    std::vector<Eigen::MatrixXd> poisoned(2, Eigen::MatrixXd::Random(5, 1));
    poisoned[1](0, 0) = std::nan("");
    CHECK_THROWS_WITH_AS((void)lstm_forward(p, poisoned, {}, {}),
                         doctest::Contains("step 1"), std::runtime_error);
}

TEST_CASE("network_forward: outputs live strictly inside (0,1)")
{
    Rng rng(7);
    const RnnNetwork net = RnnNetwork::init(9, 6, 9, rng);
    const auto windows = random_sequence(4, 9, rng);
    const Eigen::VectorXd probs = network_forward(net, windows);
    REQUIRE(probs.size() == 9);
    for (int i = 0; i < 9; ++i) {
        CHECK(probs[i] > 0.0);
        CHECK(probs[i] < 1.0);
    }
}

TEST_CASE("network_forward: zero dense layer outputs one half everywhere")
{
    Rng rng(7);
    RnnNetwork net = RnnNetwork::init(5, 4, 5, rng);
    net.dense_weights.setZero();
    net.dense_bias.setZero();
    const auto windows = random_sequence(3, 5, rng);
    const Eigen::VectorXd probs = network_forward(net, windows);
    for (int i = 0; i < 5; ++i)
        CHECK(probs[i] == doctest::Approx(0.5));
}

TEST_CASE("network_forward: deterministic for identical inputs")
{
    Rng rng(13);
    const RnnNetwork net = RnnNetwork::init(7, 5, 7, rng);
    const auto windows = random_sequence(6, 7, rng);
    const Eigen::VectorXd a = network_forward(net, windows);
    const Eigen::VectorXd b = network_forward(net, windows);
    for (int i = 0; i < a.size(); ++i)
        CHECK(a[i] == b[i]);
}

TEST_CASE("bce_loss: closed forms")
{
    SUBCASE("perfect prediction is (numerically) zero loss")
    {
        Eigen::VectorXd y(3), p(3);
        y << 1, 0, 0;
        p << 1.0 - 1e-12, 1e-12, 1e-12;
        CHECK(bce_loss(p, y) == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("uniform half probabilities cost ln 2 per element")
    {
        Eigen::VectorXd y(5), p(5);
        y << 0, 0, 1, 0, 0;
        p.setConstant(0.5);
        CHECK(bce_loss(p, y) == doctest::Approx(5.0 * std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("clamp bounds the per-element loss near 27.6")
    {
        Eigen::VectorXd y(1), p(1);
        y << 1;
        p << 0.0;
        CHECK(bce_loss(p, y) == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
    }
}

TEST_CASE("backward: label equal to the prediction zeroes the dense gradients")
{
    Rng rng(3);
    const RnnNetwork net = RnnNetwork::init(5, 4, 5, rng);
    const auto windows = random_sequence(3, 5, rng);
    const Eigen::VectorXd probs = network_forward(net, windows);
    const NetworkGrads grads = backward(net, windows, probs);
    CHECK(grads.dense_bias.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(grads.dense_weights.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("backward: matches central finite differences on every tensor")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        RnnNetwork net = RnnNetwork::init(5, 4, 5, rng);
        const auto windows = random_sequence(3, 5, rng);
        Eigen::VectorXd label = Eigen::VectorXd::Zero(5);
        label[seed % 5] = 1.0;

        NetworkGrads grads = backward(net, windows, label);

        // Central differences of an O(1) loss at eps=1e-5 carry ~1e-10 of
        // round-off; the denominator floor keeps that noise from dominating
        // entries whose true gradient is itself below the noise scale.
        double max_rel = 0.0;
        for_each_tensor_pair(net, grads, [&](auto& param, auto& grad) {
            for (Eigen::Index r = 0; r < param.rows(); ++r)
                for (Eigen::Index c = 0; c < param.cols(); ++c) {
                    const double numeric = numeric_grad(net, param(r, c), windows, label);
                    const double analytic = grad(r, c);
                    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-5});
                    max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
                }
        });
        CHECK(max_rel <= 1e-4);
    }
}

TEST_CASE("backward: tied biLSTM directions receive equal gradients on length-1 sequences")
{
    Rng rng(5);
    RnnNetwork net = RnnNetwork::init(4, 3, 4, rng);
    net.bilstm_bwd = net.bilstm_fwd; // weight tying
    // Symmetric readout so both halves of the concat see identical weights.
    net.dense_weights.rightCols(3) = net.dense_weights.leftCols(3);

    const auto windows = random_sequence(1, 4, rng);
    Eigen::VectorXd label = Eigen::VectorXd::Zero(4);
    label[2] = 1.0;

    const NetworkGrads grads = backward(net, windows, label);
    auto check_equal = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        CHECK((a - b).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
    };
    check_equal(grads.bilstm_fwd.Wi, grads.bilstm_bwd.Wi);
    check_equal(grads.bilstm_fwd.Ug, grads.bilstm_bwd.Ug);
    check_equal(grads.bilstm_fwd.bf, grads.bilstm_bwd.bf);
}

TEST_CASE("offset_from_probabilities: argmax positions and tie rules")
{
    Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
    p[2] = 1.0;
    CHECK(offset_from_probabilities(p, 2) == 0);

    p.setZero();
    p[4] = 0.9;
    CHECK(offset_from_probabilities(p, 2) == 2);

    p.setConstant(0.1);
    p[1] = 0.7;
    p[3] = 0.7; // exact two-way tie at offsets -1/+1
    CHECK(offset_from_probabilities(p, 2) == -1);

    p.setConstant(0.25); // total tie: smallest correction wins
    CHECK(offset_from_probabilities(p, 2) == 0);
}

TEST_CASE("train: lr = 0 leaves parameters bit-identical")
{
    Rng rng(21);
    Dataset ds;
    ds.half_width = 2;
    ds.probes_per_frame = 1;
    Dataset::Sequence seq;
    for (int k = 0; k < 6; ++k) {
        FeatureWindow w;
        w.values = Eigen::VectorXd::Constant(5, 0.5);
        w.half_width = 2;
        seq.windows.push_back(w);
        seq.labels.push_back(make_label(0, 0, 2));
    }
    ds.sequences.push_back(seq);

    RnnNetwork net = RnnNetwork::init(5, 4, 5, rng);
    const RnnNetwork before = net;
    TrainConfig cfg;
    cfg.context_len = 2;
    cfg.hidden_dim = 4;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    cfg.batch_size = 2;
    Rng train_rng(1);
    (void)train(net, ds, cfg, train_rng);
    CHECK(net.dense_weights == before.dense_weights);
    CHECK(net.lstm1.Wi == before.lstm1.Wi);
    CHECK(net.bilstm_bwd.Ug == before.bilstm_bwd.Ug);
}

TEST_CASE("train: overfits a single pair to near-zero loss")
{
    Rng rng(2);
    Dataset ds;
    ds.half_width = 2;
    ds.probes_per_frame = 1;
    Dataset::Sequence seq;
    FeatureWindow w;
    w.values.resize(5);
    w.values << 0.1, 0.4, 1.0, 0.3, 0.0;
    w.half_width = 2;
    seq.windows.push_back(w);
    seq.labels.push_back(make_label(7, 8, 2)); // offset +1
    ds.sequences.push_back(seq);

    RnnNetwork net = RnnNetwork::init(5, 8, 5, rng);
    TrainConfig cfg;
    cfg.context_len = 1;
    cfg.hidden_dim = 8;
    cfg.learning_rate = 0.5;
    cfg.epochs = 200;
    cfg.batch_size = 1;
    Rng train_rng(3);
    const TrainTrace trace = train(net, ds, cfg, train_rng);
    CHECK(trace.epoch_mean_loss.back() < 0.01);
    CHECK(predict_offset(net, {seq.windows[0]}) == 1);
}

TEST_CASE("train: loss trend decreases and reruns are bit-reproducible")
{
    Rng data_rng(11);
    Dataset ds;
    ds.half_width = 2;
    ds.probes_per_frame = 1;
    for (int s = 0; s < 4; ++s) {
        Dataset::Sequence seq;
        int pos = 10;
        for (int k = 0; k < 30; ++k) {
            FeatureWindow w;
            w.values.resize(5);
            for (int i = 0; i < 5; ++i)
                w.values[i] = uniform(data_rng, 0.0, 0.3);
            const int drift = (k % 3 == 0) ? 1 : 0; // learnable slow drift
            w.values[2] = 1.0;
            w.values[3] = 0.5 + 0.5 * drift;
            w.half_width = 2;
            seq.windows.push_back(w);
            seq.labels.push_back(make_label(pos, pos + drift, 2));
            pos += drift;
        }
        ds.sequences.push_back(seq);
    }

    auto run_once = [&]() {
        Rng rng(55);
        RnnNetwork net = RnnNetwork::init(5, 6, 5, rng);
        TrainConfig cfg;
        cfg.context_len = 4;
        cfg.hidden_dim = 6;
        cfg.learning_rate = 0.05;
        cfg.epochs = 10;
        cfg.batch_size = 8;
        Rng train_rng(56);
        const TrainTrace trace = train(net, ds, cfg, train_rng);
        return std::make_pair(net, trace);
    };

    const auto [net_a, trace_a] = run_once();
    const auto [net_b, trace_b] = run_once();
    CHECK(trace_a.epoch_mean_loss.back() < trace_a.epoch_mean_loss.front());
    REQUIRE(trace_a.epoch_mean_loss.size() == trace_b.epoch_mean_loss.size());
    for (std::size_t e = 0; e < trace_a.epoch_mean_loss.size(); ++e)
        CHECK(trace_a.epoch_mean_loss[e] == trace_b.epoch_mean_loss[e]);
    CHECK(net_a.dense_weights == net_b.dense_weights);
    CHECK(net_a.lstm1.Ui == net_b.lstm1.Ui);
}

TEST_CASE("model serialization round-trips exactly")
{
    Rng rng(31);
    const RnnNetwork net = RnnNetwork::init(7, 5, 7, rng);
    const std::string path = "model_roundtrip_test.txt";
    save_network(net, path, "seed=1 config_hash=deadbeef");
    const RnnNetwork loaded = load_network(path);
    std::remove(path.c_str());

    CHECK(loaded.dense_weights == net.dense_weights);
    CHECK(loaded.dense_bias == net.dense_bias);
    CHECK(loaded.lstm1.Wg == net.lstm1.Wg);
    CHECK(loaded.bilstm_fwd.Uo == net.bilstm_fwd.Uo);
    CHECK(loaded.bilstm_bwd.bf == net.bilstm_bwd.bf);

    Rng in_rng(9);
    const auto windows = random_sequence(3, 7, in_rng);
    const Eigen::VectorXd a = network_forward(net, windows);
    const Eigen::VectorXd b = network_forward(loaded, windows);
    for (int i = 0; i < a.size(); ++i)
        CHECK(a[i] == b[i]);
}
