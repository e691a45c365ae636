// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "beamtrack/dataset.hpp"
#include "beamtrack/rng.hpp"

namespace beamtrack {

/// Gate parameters of one LSTM layer (input, forget, output, candidate).
struct LstmParams {
    Eigen::MatrixXd Wi, Wf, Wo, Wg; // hidden x input
    Eigen::MatrixXd Ui, Uf, Uo, Ug; // hidden x hidden
    Eigen::VectorXd bi, bf, bo, bg;

    int input_dim() const { return static_cast<int>(Wi.cols()); }
    int hidden_dim() const { return static_cast<int>(Wi.rows()); }

    /// Uniform +-1/sqrt(fan_in) weights; forget-gate bias starts at 1.
    static LstmParams init(int input, int hidden, Rng& rng);
};

/// Accumulated gradients with the same shapes as LstmParams.
struct LstmGrads {
    Eigen::MatrixXd Wi, Wf, Wo, Wg, Ui, Uf, Uo, Ug;
    Eigen::VectorXd bi, bf, bo, bg;

    static LstmGrads zeros(int input, int hidden);
};

struct LstmStepCache {
    Eigen::MatrixXd x, h_prev, c_prev, i, f, o, g, c, tanh_c;
};
struct LstmCache {
    std::vector<LstmStepCache> steps;
};

/// Unrolls the standard cell (sigmoid gates, tanh candidate) over the input
/// sequence. Each inputs[t] holds one column per batch element. Throws with
/// the offending step index if an activation goes non-finite.
std::vector<Eigen::MatrixXd> lstm_forward(const LstmParams& params,
                                          const std::vector<Eigen::MatrixXd>& inputs,
                                          const Eigen::MatrixXd& h0, const Eigen::MatrixXd& c0,
                                          LstmCache* cache = nullptr);

/// Exact BPTT through the cached unroll. d_outputs[t] is dL/dh_t excluding the
/// recurrent path; returns dL/dx_t per step and accumulates into grads.
std::vector<Eigen::MatrixXd> lstm_backward(const LstmParams& params, const LstmCache& cache,
                                           const std::vector<Eigen::MatrixXd>& d_outputs,
                                           LstmGrads& grads);

/// LSTM -> biLSTM -> dense -> elementwise sigmoid classifier over feature
/// windows. The dense layer reads the concatenation of the forward direction's
/// last state and the backward direction's state after the full reversed pass.
struct RnnNetwork {
    LstmParams lstm1;
    LstmParams bilstm_fwd;
    LstmParams bilstm_bwd;
    Eigen::MatrixXd dense_weights; // output_dim x 2*hidden
    Eigen::VectorXd dense_bias;

    int input_dim() const { return lstm1.input_dim(); }
    int hidden_dim() const { return lstm1.hidden_dim(); }
    int output_dim() const { return static_cast<int>(dense_bias.size()); }

    static RnnNetwork init(int input, int hidden, int output, Rng& rng);
    void validate() const;
};

struct NetworkGrads {
    LstmGrads lstm1, bilstm_fwd, bilstm_bwd;
    Eigen::MatrixXd dense_weights;
    Eigen::VectorXd dense_bias;

    static NetworkGrads zeros(const RnnNetwork& net);
};

struct ForwardCache {
    LstmCache lstm1, fwd, bwd;
    std::vector<Eigen::MatrixXd> h1; // lstm1 outputs per step
    Eigen::MatrixXd concat;          // 2H x batch
    Eigen::MatrixXd probs;           // output_dim x batch
};

/// Batched forward pass; each inputs[t] is input_dim x batch. Returns the
/// final-step sigmoid outputs, one column per batch element, each in (0, 1).
Eigen::MatrixXd network_forward_batch(const RnnNetwork& net, const std::vector<Eigen::MatrixXd>& inputs,
                                      ForwardCache* cache = nullptr);

/// Single-sequence convenience wrapper.
Eigen::VectorXd network_forward(const RnnNetwork& net, const std::vector<Eigen::VectorXd>& windows);

/// Summed binary cross-entropy with probabilities clamped to
/// [1e-12, 1 - 1e-12].
double bce_loss(const Eigen::Ref<const Eigen::VectorXd>& probs,
                const Eigen::Ref<const Eigen::VectorXd>& label);

/// Gradients of bce_loss(network_forward(windows), label) for one sequence.
NetworkGrads backward(const RnnNetwork& net, const std::vector<Eigen::VectorXd>& windows,
                      const Eigen::Ref<const Eigen::VectorXd>& label);

/// Batched counterpart used by train(); labels has one column per sequence.
NetworkGrads backward_batch(const RnnNetwork& net, const ForwardCache& cache,
                            const Eigen::MatrixXd& labels);

struct TrainConfig {
    int context_len = 8;
    int hidden_dim = 32;
    double learning_rate = 1e-2;
    int epochs = 8;
    int batch_size = 32;
    double grad_clip_norm = 5.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainTrace {
    std::vector<double> epoch_mean_loss;
};

/// Thrown when the training loss goes non-finite.
struct TrainingDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mini-batch gradient descent with momentum 0.9 and global-norm clipping over
/// rolling contexts of context_len consecutive windows.
TrainTrace train(RnnNetwork& net, const Dataset& data, const TrainConfig& cfg, Rng& rng);

/// Offset encoded by the argmax position; ties break toward the smallest
/// magnitude, then toward the negative side.
int offset_from_probabilities(const Eigen::Ref<const Eigen::VectorXd>& probs, int half_width);

/// Grid-offset prediction from the most recent feature windows.
int predict_offset(const RnnNetwork& net, const std::vector<FeatureWindow>& context);

/// Versioned text format: magic line, optional '#' comment lines, dimensions,
/// then every tensor row-major in declaration order.
void save_network(const RnnNetwork& net, const std::string& path, const std::string& comment = "");
RnnNetwork load_network(const std::string& path);

} // namespace beamtrack
