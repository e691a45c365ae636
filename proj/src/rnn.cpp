// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/rnn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace beamtrack {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x)
{
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

void fill_uniform(Eigen::Ref<Eigen::MatrixXd> m, double bound, Rng& rng)
{
    // Row-major fill order so initialization is layout-independent.
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = uniform(rng, -bound, bound);
}

} // namespace

LstmParams LstmParams::init(int input, int hidden, Rng& rng)
{
    if (input < 1 || hidden < 1)
        throw std::invalid_argument("LstmParams::init: dimensions must be >= 1");
    LstmParams p;
    const double wb = 1.0 / std::sqrt(double(input));
    const double ub = 1.0 / std::sqrt(double(hidden));
    for (auto* m : {&p.Wi, &p.Wf, &p.Wo, &p.Wg}) {
        m->resize(hidden, input);
        fill_uniform(*m, wb, rng);
    }
    for (auto* m : {&p.Ui, &p.Uf, &p.Uo, &p.Ug}) {
        m->resize(hidden, hidden);
        fill_uniform(*m, ub, rng);
    }
    p.bi = Eigen::VectorXd::Zero(hidden);
    p.bf = Eigen::VectorXd::Constant(hidden, 1.0); // keeps early gradients flowing
    p.bo = Eigen::VectorXd::Zero(hidden);
    p.bg = Eigen::VectorXd::Zero(hidden);
    return p;
}

LstmGrads LstmGrads::zeros(int input, int hidden)
{
    LstmGrads g;
    for (auto* m : {&g.Wi, &g.Wf, &g.Wo, &g.Wg})
        *m = Eigen::MatrixXd::Zero(hidden, input);
    for (auto* m : {&g.Ui, &g.Uf, &g.Uo, &g.Ug})
        *m = Eigen::MatrixXd::Zero(hidden, hidden);
    for (auto* v : {&g.bi, &g.bf, &g.bo, &g.bg})
        *v = Eigen::VectorXd::Zero(hidden);
    return g;
}

std::vector<Eigen::MatrixXd> lstm_forward(const LstmParams& params,
                                          const std::vector<Eigen::MatrixXd>& inputs,
                                          const Eigen::MatrixXd& h0, const Eigen::MatrixXd& c0,
                                          LstmCache* cache)
{
    if (inputs.empty())
        throw std::invalid_argument("lstm_forward: empty input sequence");
    const int hidden = params.hidden_dim();
    const Eigen::Index batch = inputs.front().cols();

    Eigen::MatrixXd h = h0.size() ? h0 : Eigen::MatrixXd::Zero(hidden, batch);
    Eigen::MatrixXd c = c0.size() ? c0 : Eigen::MatrixXd::Zero(hidden, batch);
    if (h.rows() != hidden || c.rows() != hidden || h.cols() != batch || c.cols() != batch)
        throw std::invalid_argument("lstm_forward: state dimension mismatch");

    std::vector<Eigen::MatrixXd> outputs;
    outputs.reserve(inputs.size());
    if (cache) {
        cache->steps.clear();
        cache->steps.reserve(inputs.size());
    }

    for (std::size_t t = 0; t < inputs.size(); ++t) {
        const Eigen::MatrixXd& x = inputs[t];
        if (x.rows() != params.input_dim() || x.cols() != batch)
            throw std::invalid_argument("lstm_forward: input dimension mismatch at step " + std::to_string(t));

        Eigen::MatrixXd i = sigmoid((params.Wi * x + params.Ui * h).colwise() + params.bi);
        Eigen::MatrixXd f = sigmoid((params.Wf * x + params.Uf * h).colwise() + params.bf);
        Eigen::MatrixXd o = sigmoid((params.Wo * x + params.Uo * h).colwise() + params.bo);
        Eigen::MatrixXd g = ((params.Wg * x + params.Ug * h).colwise() + params.bg).array().tanh().matrix();
        Eigen::MatrixXd c_new = f.cwiseProduct(c) + i.cwiseProduct(g);
        Eigen::MatrixXd tanh_c = c_new.array().tanh().matrix();
        Eigen::MatrixXd h_new = o.cwiseProduct(tanh_c);

        if (!h_new.allFinite() || !c_new.allFinite())
            throw std::runtime_error("lstm_forward: non-finite activation at step " + std::to_string(t));

        if (cache)
            cache->steps.push_back({x, h, c, std::move(i), std::move(f), std::move(o), std::move(g), c_new,
                                    std::move(tanh_c)});
        h = std::move(h_new);
        c = std::move(c_new);
        outputs.push_back(h);
    }
    return outputs;
}

std::vector<Eigen::MatrixXd> lstm_backward(const LstmParams& params, const LstmCache& cache,
                                           const std::vector<Eigen::MatrixXd>& d_outputs,
                                           LstmGrads& grads)
{
    const int steps = static_cast<int>(cache.steps.size());
    if (static_cast<int>(d_outputs.size()) != steps)
        throw std::invalid_argument("lstm_backward: gradient/cache length mismatch");
    if (steps == 0)
        return {};

    const Eigen::Index batch = cache.steps.front().x.cols();
    const int hidden = params.hidden_dim();
    Eigen::MatrixXd dh_rec = Eigen::MatrixXd::Zero(hidden, batch);
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(hidden, batch);
    std::vector<Eigen::MatrixXd> dx(steps);

    for (int t = steps - 1; t >= 0; --t) {
        const LstmStepCache& s = cache.steps[t];
        const Eigen::MatrixXd dh = d_outputs[t] + dh_rec;

        const Eigen::MatrixXd d_o = dh.cwiseProduct(s.tanh_c);
        dc += dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());

        const Eigen::MatrixXd d_i = dc.cwiseProduct(s.g);
        const Eigen::MatrixXd d_f = dc.cwiseProduct(s.c_prev);
        const Eigen::MatrixXd d_g = dc.cwiseProduct(s.i);
        const Eigen::MatrixXd dc_prev = dc.cwiseProduct(s.f);

        const Eigen::MatrixXd dz_i = d_i.cwiseProduct(s.i).cwiseProduct((1.0 - s.i.array()).matrix());
        const Eigen::MatrixXd dz_f = d_f.cwiseProduct(s.f).cwiseProduct((1.0 - s.f.array()).matrix());
        const Eigen::MatrixXd dz_o = d_o.cwiseProduct(s.o).cwiseProduct((1.0 - s.o.array()).matrix());
        const Eigen::MatrixXd dz_g = d_g.cwiseProduct((1.0 - s.g.array().square()).matrix());

        grads.Wi.noalias() += dz_i * s.x.transpose();
        grads.Wf.noalias() += dz_f * s.x.transpose();
        grads.Wo.noalias() += dz_o * s.x.transpose();
        grads.Wg.noalias() += dz_g * s.x.transpose();
        grads.Ui.noalias() += dz_i * s.h_prev.transpose();
        grads.Uf.noalias() += dz_f * s.h_prev.transpose();
        grads.Uo.noalias() += dz_o * s.h_prev.transpose();
        grads.Ug.noalias() += dz_g * s.h_prev.transpose();
        grads.bi += dz_i.rowwise().sum();
        grads.bf += dz_f.rowwise().sum();
        grads.bo += dz_o.rowwise().sum();
        grads.bg += dz_g.rowwise().sum();

        dx[t] = params.Wi.transpose() * dz_i + params.Wf.transpose() * dz_f +
                params.Wo.transpose() * dz_o + params.Wg.transpose() * dz_g;
        dh_rec = params.Ui.transpose() * dz_i + params.Uf.transpose() * dz_f +
                 params.Uo.transpose() * dz_o + params.Ug.transpose() * dz_g;
        dc = dc_prev;
    }
    return dx;
}

RnnNetwork RnnNetwork::init(int input, int hidden, int output, Rng& rng)
{
    if (output < 1)
        throw std::invalid_argument("RnnNetwork::init: output dimension must be >= 1");
    RnnNetwork net;
    net.lstm1 = LstmParams::init(input, hidden, rng);
    net.bilstm_fwd = LstmParams::init(hidden, hidden, rng);
    net.bilstm_bwd = LstmParams::init(hidden, hidden, rng);
    net.dense_weights.resize(output, 2 * hidden);
    fill_uniform(net.dense_weights, 1.0 / std::sqrt(2.0 * hidden), rng);
    net.dense_bias = Eigen::VectorXd::Zero(output);
    return net;
}

void RnnNetwork::validate() const
{
    if (bilstm_fwd.input_dim() != lstm1.hidden_dim() || bilstm_bwd.input_dim() != lstm1.hidden_dim())
        throw std::invalid_argument("RnnNetwork: biLSTM input dim must equal lstm1 hidden dim");
    if (dense_weights.cols() != bilstm_fwd.hidden_dim() + bilstm_bwd.hidden_dim())
        throw std::invalid_argument("RnnNetwork: dense input dim must equal concatenated hidden dims");
    if (dense_weights.rows() != dense_bias.size())
        throw std::invalid_argument("RnnNetwork: dense weight/bias mismatch");
}

NetworkGrads NetworkGrads::zeros(const RnnNetwork& net)
{
    NetworkGrads g;
    g.lstm1 = LstmGrads::zeros(net.lstm1.input_dim(), net.lstm1.hidden_dim());
    g.bilstm_fwd = LstmGrads::zeros(net.bilstm_fwd.input_dim(), net.bilstm_fwd.hidden_dim());
    g.bilstm_bwd = LstmGrads::zeros(net.bilstm_bwd.input_dim(), net.bilstm_bwd.hidden_dim());
    g.dense_weights = Eigen::MatrixXd::Zero(net.dense_weights.rows(), net.dense_weights.cols());
    g.dense_bias = Eigen::VectorXd::Zero(net.dense_bias.size());
    return g;
}

Eigen::MatrixXd network_forward_batch(const RnnNetwork& net, const std::vector<Eigen::MatrixXd>& inputs,
                                      ForwardCache* cache)
{
    net.validate();
    std::vector<Eigen::MatrixXd> h1 =
        lstm_forward(net.lstm1, inputs, {}, {}, cache ? &cache->lstm1 : nullptr);
    std::vector<Eigen::MatrixXd> reversed(h1.rbegin(), h1.rend());

    const std::vector<Eigen::MatrixXd> hf =
        lstm_forward(net.bilstm_fwd, h1, {}, {}, cache ? &cache->fwd : nullptr);
    const std::vector<Eigen::MatrixXd> hb =
        lstm_forward(net.bilstm_bwd, reversed, {}, {}, cache ? &cache->bwd : nullptr);

    // Final summary: forward state after the full pass plus backward state
    // after the full reversed pass.
    Eigen::MatrixXd concat(hf.back().rows() + hb.back().rows(), hf.back().cols());
    concat.topRows(hf.back().rows()) = hf.back();
    concat.bottomRows(hb.back().rows()) = hb.back();

    Eigen::MatrixXd probs = sigmoid((net.dense_weights * concat).colwise() + net.dense_bias);
    if (cache) {
        cache->h1 = std::move(h1);
        cache->concat = std::move(concat);
        cache->probs = probs;
    }
    return probs;
}

Eigen::VectorXd network_forward(const RnnNetwork& net, const std::vector<Eigen::VectorXd>& windows)
{
    std::vector<Eigen::MatrixXd> inputs;
    inputs.reserve(windows.size());
    for (const auto& w : windows)
        inputs.push_back(w);
    return network_forward_batch(net, inputs, nullptr).col(0);
}

double bce_loss(const Eigen::Ref<const Eigen::VectorXd>& probs,
                const Eigen::Ref<const Eigen::VectorXd>& label)
{
    if (probs.size() != label.size())
        throw std::invalid_argument("bce_loss: length mismatch");
    const Eigen::ArrayXd p = probs.array().max(1e-12).min(1.0 - 1e-12);
    const Eigen::ArrayXd y = label.array();
    return -(y * p.log() + (1.0 - y) * (1.0 - p).log()).sum();
}

NetworkGrads backward_batch(const RnnNetwork& net, const ForwardCache& cache,
                            const Eigen::MatrixXd& labels)
{
    NetworkGrads grads = NetworkGrads::zeros(net);
    const int hidden_f = net.bilstm_fwd.hidden_dim();
    const int hidden_b = net.bilstm_bwd.hidden_dim();
    const Eigen::Index batch = cache.probs.cols();
    const int steps = static_cast<int>(cache.h1.size());

    // Summed BCE through the sigmoid collapses to probs - labels.
    const Eigen::MatrixXd dlogits = cache.probs - labels;
    grads.dense_weights = dlogits * cache.concat.transpose();
    grads.dense_bias = dlogits.rowwise().sum();
    const Eigen::MatrixXd dconcat = net.dense_weights.transpose() * dlogits;

    std::vector<Eigen::MatrixXd> d_out_f(steps, Eigen::MatrixXd::Zero(hidden_f, batch));
    std::vector<Eigen::MatrixXd> d_out_b(steps, Eigen::MatrixXd::Zero(hidden_b, batch));
    d_out_f.back() = dconcat.topRows(hidden_f);
    d_out_b.back() = dconcat.bottomRows(hidden_b);

    const std::vector<Eigen::MatrixXd> dh1_fwd = lstm_backward(net.bilstm_fwd, cache.fwd, d_out_f, grads.bilstm_fwd);
    const std::vector<Eigen::MatrixXd> dh1_bwd_rev =
        lstm_backward(net.bilstm_bwd, cache.bwd, d_out_b, grads.bilstm_bwd);

    std::vector<Eigen::MatrixXd> dh1(steps);
    for (int t = 0; t < steps; ++t)
        dh1[t] = dh1_fwd[t] + dh1_bwd_rev[steps - 1 - t];

    lstm_backward(net.lstm1, cache.lstm1, dh1, grads.lstm1);
    return grads;
}

NetworkGrads backward(const RnnNetwork& net, const std::vector<Eigen::VectorXd>& windows,
                      const Eigen::Ref<const Eigen::VectorXd>& label)
{
    std::vector<Eigen::MatrixXd> inputs;
    inputs.reserve(windows.size());
    for (const auto& w : windows)
        inputs.push_back(w);
    ForwardCache cache;
    network_forward_batch(net, inputs, &cache);
    return backward_batch(net, cache, label);
}

void TrainConfig::validate() const
{
    if (context_len < 1 || hidden_dim < 1 || epochs < 1 || batch_size < 1)
        throw std::invalid_argument("TrainConfig: counts must be >= 1");
    if (learning_rate < 0.0 || !(grad_clip_norm > 0.0))
        throw std::invalid_argument("TrainConfig: learning_rate must be >= 0 and grad_clip_norm > 0");
}

namespace {

template <class NetLike, class F>
void for_each_lstm_tensor(NetLike& p, F&& f)
{
    f(p.Wi);
    f(p.Wf);
    f(p.Wo);
    f(p.Wg);
    f(p.Ui);
    f(p.Uf);
    f(p.Uo);
    f(p.Ug);
    f(p.bi);
    f(p.bf);
    f(p.bo);
    f(p.bg);
}

template <class NetLike, class F>
void for_each_tensor(NetLike& n, F&& f)
{
    for_each_lstm_tensor(n.lstm1, f);
    for_each_lstm_tensor(n.bilstm_fwd, f);
    for_each_lstm_tensor(n.bilstm_bwd, f);
    f(n.dense_weights);
    f(n.dense_bias);
}

template <class A, class B, class C, class F>
void for_each_lstm_tensor3(A& a, B& b, C& c, F&& f)
{
    f(a.Wi, b.Wi, c.Wi);
    f(a.Wf, b.Wf, c.Wf);
    f(a.Wo, b.Wo, c.Wo);
    f(a.Wg, b.Wg, c.Wg);
    f(a.Ui, b.Ui, c.Ui);
    f(a.Uf, b.Uf, c.Uf);
    f(a.Uo, b.Uo, c.Uo);
    f(a.Ug, b.Ug, c.Ug);
    f(a.bi, b.bi, c.bi);
    f(a.bf, b.bf, c.bf);
    f(a.bo, b.bo, c.bo);
    f(a.bg, b.bg, c.bg);
}

double global_norm(const NetworkGrads& g)
{
    double sq = 0.0;
    for_each_tensor(g, [&](const auto& t) { sq += t.squaredNorm(); });
    return std::sqrt(sq);
}

void scale(NetworkGrads& g, double factor)
{
    for_each_tensor(g, [&](auto& t) { t *= factor; });
}

} // namespace

TrainTrace train(RnnNetwork& net, const Dataset& data, const TrainConfig& cfg, Rng& rng)
{
    cfg.validate();
    net.validate();
    if (data.sequences.empty())
        throw std::invalid_argument("train: empty dataset");
    const int dim = net.input_dim();
    if (dim != 2 * data.half_width + 1 || net.output_dim() != dim)
        throw std::invalid_argument("train: network width does not match the dataset window");

    struct Example {
        int seq;
        int k;
    };
    std::vector<Example> examples;
    for (int s = 0; s < static_cast<int>(data.sequences.size()); ++s) {
        const int len = static_cast<int>(data.sequences[s].windows.size());
        for (int k = cfg.context_len - 1; k < len; ++k)
            examples.push_back({s, k});
    }
    if (examples.empty())
        throw std::invalid_argument("train: no sequence long enough for the configured context");

    NetworkGrads velocity = NetworkGrads::zeros(net);
    TrainTrace trace;
    trace.epoch_mean_loss.reserve(cfg.epochs);

    std::vector<Eigen::MatrixXd> inputs(cfg.context_len);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(examples.begin(), examples.end(), rng);
        double loss_sum = 0.0;
        std::size_t seen = 0;

        for (std::size_t start = 0; start < examples.size(); start += cfg.batch_size) {
            const int batch = static_cast<int>(std::min<std::size_t>(cfg.batch_size, examples.size() - start));
            for (auto& m : inputs)
                m.resize(dim, batch);
            Eigen::MatrixXd labels(dim, batch);
            for (int b = 0; b < batch; ++b) {
                const Example& ex = examples[start + b];
                const auto& seq = data.sequences[ex.seq];
                for (int t = 0; t < cfg.context_len; ++t)
                    inputs[t].col(b) = seq.windows[ex.k - cfg.context_len + 1 + t].values;
                labels.col(b) = seq.labels[ex.k].values;
            }

            ForwardCache cache;
            const Eigen::MatrixXd probs = network_forward_batch(net, inputs, &cache);
            double batch_loss = 0.0;
            for (int b = 0; b < batch; ++b)
                batch_loss += bce_loss(probs.col(b), labels.col(b));
            if (!std::isfinite(batch_loss))
                throw TrainingDivergence("train: non-finite loss in epoch " + std::to_string(epoch) +
                                         " at example offset " + std::to_string(start));
            loss_sum += batch_loss;
            seen += batch;

            if (cfg.learning_rate == 0.0)
                continue; // parameters must stay bit-identical

            NetworkGrads grads = backward_batch(net, cache, labels);
            scale(grads, 1.0 / batch);
            const double norm = global_norm(grads);
            if (norm > cfg.grad_clip_norm)
                scale(grads, cfg.grad_clip_norm / norm);

            // Classical momentum: v <- 0.9 v - lr g, theta <- theta + v.
            auto update = [&](auto& value, const auto& grad, auto& vel) {
                vel = 0.9 * vel - cfg.learning_rate * grad;
                value += vel;
            };
            for_each_lstm_tensor3(net.lstm1, grads.lstm1, velocity.lstm1, update);
            for_each_lstm_tensor3(net.bilstm_fwd, grads.bilstm_fwd, velocity.bilstm_fwd, update);
            for_each_lstm_tensor3(net.bilstm_bwd, grads.bilstm_bwd, velocity.bilstm_bwd, update);
            update(net.dense_weights, grads.dense_weights, velocity.dense_weights);
            update(net.dense_bias, grads.dense_bias, velocity.dense_bias);
        }
        trace.epoch_mean_loss.push_back(loss_sum / double(seen));
    }
    return trace;
}

int offset_from_probabilities(const Eigen::Ref<const Eigen::VectorXd>& probs, int half_width)
{
    if (probs.size() != 2 * half_width + 1)
        throw std::invalid_argument("offset_from_probabilities: length must be 2L+1");
    int best = 0;
    for (int j = 1; j < probs.size(); ++j) {
        const int cand_off = j - half_width;
        const int best_off = best - half_width;
        if (probs[j] > probs[best]) {
            best = j;
        } else if (probs[j] == probs[best]) {
            if (std::abs(cand_off) < std::abs(best_off) ||
                (std::abs(cand_off) == std::abs(best_off) && cand_off < best_off))
                best = j;
        }
    }
    return best - half_width;
}

int predict_offset(const RnnNetwork& net, const std::vector<FeatureWindow>& context)
{
    if (context.empty())
        throw std::invalid_argument("predict_offset: empty context");
    std::vector<Eigen::VectorXd> windows;
    windows.reserve(context.size());
    for (const auto& w : context)
        windows.push_back(w.values);
    const Eigen::VectorXd probs = network_forward(net, windows);
    return offset_from_probabilities(probs, (static_cast<int>(probs.size()) - 1) / 2);
}

namespace {

constexpr const char* kModelMagic = "beamtrack-rnn-v1";

void write_double(std::ostream& os, double v)
{
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, res.ptr - buf);
    os.put('\n');
}

} // namespace

void save_network(const RnnNetwork& net, const std::string& path, const std::string& comment)
{
    net.validate();
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("save_network: cannot open " + path);
    os << kModelMagic << '\n';
    if (!comment.empty())
        os << (comment.front() == '#' ? "" : "# ") << comment << '\n';
    os << net.input_dim() << ' ' << net.hidden_dim() << ' ' << net.output_dim() << '\n';
    for_each_tensor(net, [&](const auto& t) {
        for (Eigen::Index r = 0; r < t.rows(); ++r)
            for (Eigen::Index c = 0; c < t.cols(); ++c)
                write_double(os, t(r, c));
    });
    if (!os)
        throw std::runtime_error("save_network: write failed for " + path);
}

RnnNetwork load_network(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("load_network: cannot open " + path);
    std::string magic;
    std::getline(is, magic);
    if (magic != kModelMagic)
        throw std::runtime_error("load_network: unrecognized model header in " + path);
    std::string line;
    while (is.peek() == '#')
        std::getline(is, line); // comment lines
    int input = 0, hidden = 0, output = 0;
    is >> input >> hidden >> output;
    if (!is || input < 1 || hidden < 1 || output < 1)
        throw std::runtime_error("load_network: malformed dimensions in " + path);

    Rng dummy(0);
    RnnNetwork net = RnnNetwork::init(input, hidden, output, dummy);
    for_each_tensor(net, [&](auto& t) {
        for (Eigen::Index r = 0; r < t.rows(); ++r)
            for (Eigen::Index c = 0; c < t.cols(); ++c)
                if (!(is >> t(r, c)))
                    throw std::runtime_error("load_network: truncated model file " + path);
    });
    return net;
}

} // namespace beamtrack
