// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace beamtrack {

namespace {

// Re-acquisition detector parameters (see the module notes in README).
constexpr int kPowerSmoothing = 3;
constexpr int kMedianHistory = 10;
constexpr double kReacqRatio = 0.25;
constexpr int kMinHistory = 5;

double frame_start_time(const ScenarioConfig& cfg, int absolute_frame)
{
    return absolute_frame * cfg.trajectory.frame_period_s;
}

double slot_seconds(const ScenarioConfig& cfg, FrameKind kind)
{
    return cfg.trajectory.frame_period_s / cfg.frame.total(kind);
}

// Probe j of p, placed uniformly across the SP block at the end of the frame.
double probe_time(const ScenarioConfig& cfg, FrameKind kind, int absolute_frame, int j, int p)
{
    const double slot = slot_seconds(cfg, kind);
    const double sp_start = kind == FrameKind::Initialization ? cfg.frame.t_acq + cfg.frame.t_fb_i + cfg.frame.t_dl
                                                              : cfg.frame.t_fb_sp + cfg.frame.t_dl;
    return frame_start_time(cfg, absolute_frame) + (sp_start + (j + 0.5) * cfg.frame.t_sp / p) * slot;
}

PseudoSpectrum initial_sweep(const ScenarioConfig& cfg, const Codebook& cb, const ChannelState& state,
                             int absolute_frame, Rng& rng)
{
    const double t0 = frame_start_time(cfg, absolute_frame);
    const double dt = cfg.frame.t_acq * slot_seconds(cfg, FrameKind::Initialization) / cb.size();
    return beam_sweep(state, cfg.geometry, cb, cfg.noise_std, t0, dt, rng);
}

double median_of(std::deque<double> values)
{
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace

void ScenarioConfig::validate() const
{
    geometry.validate();
    trajectory.validate();
    link_budget.validate();
    frame.validate();
    if (codebook.count < 2 || !(codebook.step_deg > 0.0))
        throw std::invalid_argument("ScenarioConfig: malformed codebook grid");
    if (!(noise_std >= 0.0) || !(power > 0.0))
        throw std::invalid_argument("ScenarioConfig: noise_std must be >= 0 and power > 0");
    if (probes_per_frame < 1)
        throw std::invalid_argument("ScenarioConfig: probes_per_frame must be >= 1");
    if (window_half_width < 1)
        throw std::invalid_argument("ScenarioConfig: window_half_width must be >= 1");
    if (probes_per_frame > 2 * window_half_width + 1)
        throw std::invalid_argument("ScenarioConfig: more probes than window bins");
    if (realizations < 1)
        throw std::invalid_argument("ScenarioConfig: realizations must be >= 1");
    if (track_start_frame < 0 || eval_start_frame < track_start_frame)
        throw std::invalid_argument("ScenarioConfig: evaluation window precedes tracking start");
    if (eval_frames < 0)
        throw std::invalid_argument("ScenarioConfig: eval_frames must be >= 0");
    for (std::size_t i = 1; i < segment_bounds.size(); ++i)
        if (segment_bounds[i] <= segment_bounds[i - 1])
            throw std::invalid_argument("ScenarioConfig: segment bounds must be increasing");
    if (trajectory_jitter_deg < 0.0)
        throw std::invalid_argument("ScenarioConfig: trajectory_jitter_deg must be >= 0");
}

Codebook ScenarioConfig::make_codebook() const
{
    return build_codebook(geometry, codebook.start_deg, codebook.step_deg, codebook.count);
}

Rng scenario_rng(const ScenarioConfig& cfg, int realization, StreamPurpose purpose)
{
    return make_rng(cfg.seed, std::uint64_t(realization) * 8 + std::uint64_t(purpose));
}

std::vector<ChannelState> realize_states(const ScenarioConfig& cfg, int realization)
{
    Rng rng = scenario_rng(cfg, realization, StreamPurpose::Realization);
    const double jitter = uniform(rng, -cfg.trajectory_jitter_deg, cfg.trajectory_jitter_deg);
    const double phase = uniform(rng, 0.0, 2.0 * 3.14159265358979323846);
    const TrajectorySpec jittered = rotate_spec(cfg.trajectory, cfg.link_budget.bs_position_m, jitter);
    return to_channel_states(generate_trajectory(jittered), cfg.link_budget, phase);
}

RunRecord simulate_training_run(const ScenarioConfig& cfg, const Codebook& cb, int realization)
{
    const std::vector<ChannelState> states = realize_states(cfg, realization);
    const int frames = std::min<int>(cfg.eval_start_frame, static_cast<int>(states.size()));
    if (frames < 2)
        throw std::invalid_argument("simulate_training_run: fewer than 2 training frames");

    Rng rng = scenario_rng(cfg, realization, StreamPurpose::TrainingProbes);
    RunRecord rec;
    rec.initial_spectrum = initial_sweep(cfg, cb, states[0], 0, rng).values;
    rec.probes.resize(frames);
    rec.main_index.resize(frames);
    for (int k = 0; k < frames; ++k) {
        rec.main_index[k] = cb.nearest_index(states[k].theta_deg);
        const FrameKind kind = k == 0 ? FrameKind::Initialization : FrameKind::Secondary;
        const std::vector<int> bins = probe_bins(rec.main_index[k], cb.size(), cfg.probes_per_frame);
        rec.probes[k].reserve(bins.size());
        for (std::size_t j = 0; j < bins.size(); ++j) {
            const double t = probe_time(cfg, kind, k, static_cast<int>(j), cfg.probes_per_frame);
            rec.probes[k].emplace_back(
                bins[j], measure(states[k], cfg.geometry, cb.vectors.col(bins[j]), cfg.noise_std, t, rng));
        }
    }
    return rec;
}

TrackResult track_oracle(const std::vector<ChannelState>& states, const Codebook& cb,
                         const ScenarioConfig& cfg, int start_frame)
{
    if (states.empty())
        throw std::invalid_argument("track_oracle: empty state sequence");
    const int n = static_cast<int>(states.size());
    TrackResult res;
    res.start_frame = start_frame;
    res.theta_true_deg.resize(n);
    res.theta_hat_deg.resize(n);
    res.rates.resize(n);
    res.frame_kinds.assign(n, FrameKind::Initialization);
    for (int k = 0; k < n; ++k) {
        const double theta_hat = cb.angles_deg[cb.nearest_index(states[k].theta_deg)];
        res.theta_true_deg[k] = states[k].theta_deg;
        res.theta_hat_deg[k] = theta_hat;
        res.rates[k] = instantaneous_rate(states[k], theta_hat, FrameKind::Initialization, cfg.frame,
                                          cfg.power, cfg.noise_std, frame_start_time(cfg, start_frame + k),
                                          cfg.geometry);
    }
    return res;
}

TrackResult track_pf(const std::vector<ChannelState>& states, const Codebook& cb, const PfConfig& pf_cfg,
                     const ScenarioConfig& cfg, Rng& probe_rng, Rng& algo_rng, int start_frame)
{
    if (states.empty())
        throw std::invalid_argument("track_pf: empty state sequence");
    const int n = static_cast<int>(states.size());
    TrackResult res;
    res.start_frame = start_frame;
    res.theta_true_deg.resize(n);
    res.theta_hat_deg.resize(n);
    res.rates.resize(n);
    res.frame_kinds.assign(n, FrameKind::Secondary);

    const PseudoSpectrum sweep = initial_sweep(cfg, cb, states[0], start_frame, probe_rng);
    ParticleSet ps = pf_init(pf_cfg, sweep, cb, algo_rng);

    double theta_hat = cb.angles_deg[sweep.main_index];
    res.frame_kinds[0] = FrameKind::Initialization;
    res.theta_true_deg[0] = states[0].theta_deg;
    res.theta_hat_deg[0] = theta_hat;
    res.rates[0] = instantaneous_rate(states[0], theta_hat, FrameKind::Initialization, cfg.frame, cfg.power,
                                      cfg.noise_std, frame_start_time(cfg, start_frame), cfg.geometry);

    for (int k = 1; k < n; ++k) {
        const int beam_idx = cb.nearest_index(theta_hat);
        const auto beam = cb.vectors.col(beam_idx);
        const double t = probe_time(cfg, FrameKind::Secondary, start_frame + k, 0, 1);
        const std::complex<double> z = measure(states[k], cfg.geometry, beam, cfg.noise_std, t, probe_rng);

        const PfStepResult step = pf_step(ps, z, beam, pf_cfg, cfg.noise_std, cfg.geometry, algo_rng);
        theta_hat = step.theta_hat_deg;

        res.theta_true_deg[k] = states[k].theta_deg;
        res.theta_hat_deg[k] = theta_hat;
        // The deployed beam is the codebook entry nearest the estimate.
        const double beam_angle = cb.angles_deg[cb.nearest_index(theta_hat)];
        res.rates[k] = instantaneous_rate(states[k], beam_angle, FrameKind::Secondary, cfg.frame, cfg.power,
                                          cfg.noise_std, frame_start_time(cfg, start_frame + k), cfg.geometry);
    }
    res.pf_diverged = ps.diverged;
    return res;
}

TrackResult track_rnn(const std::vector<ChannelState>& states, const Codebook& cb, const RnnNetwork& net,
                      const ScenarioConfig& cfg, Rng& probe_rng, int start_frame, int context_len)
{
    if (states.empty())
        throw std::invalid_argument("track_rnn: empty state sequence");
    const int half_width = cfg.window_half_width;
    if (net.input_dim() != 2 * half_width + 1)
        throw std::invalid_argument("track_rnn: network width does not match the scenario window");
    if (context_len < 1)
        throw std::invalid_argument("track_rnn: context_len must be >= 1");

    const int n = static_cast<int>(states.size());
    const int grid = cb.size();
    TrackResult res;
    res.start_frame = start_frame;
    res.theta_true_deg.resize(n);
    res.theta_hat_deg.resize(n);
    res.rates.resize(n);
    res.frame_kinds.assign(n, FrameKind::Secondary);

    PseudoSpectrum w = initial_sweep(cfg, cb, states[0], start_frame, probe_rng);
    int main_idx = w.main_index;

    std::deque<FeatureWindow> context;
    context.push_back(extract_window(w, main_idx, half_width));

    std::deque<double> raw_power{std::abs(w.values[main_idx])};
    std::deque<double> smoothed_power;

    auto push_power = [&](double value) {
        raw_power.push_back(value);
        while (raw_power.size() > kPowerSmoothing)
            raw_power.pop_front();
        double mean = 0.0;
        for (double v : raw_power)
            mean += v;
        smoothed_power.push_back(mean / double(raw_power.size()));
        while (smoothed_power.size() > std::size_t(kMedianHistory) + 1)
            smoothed_power.pop_front();
    };

    auto record = [&](int k, FrameKind kind) {
        res.theta_true_deg[k] = states[k].theta_deg;
        res.theta_hat_deg[k] = cb.angles_deg[main_idx];
        res.frame_kinds[k] = kind;
        res.rates[k] = instantaneous_rate(states[k], cb.angles_deg[main_idx], kind, cfg.frame, cfg.power,
                                          cfg.noise_std, frame_start_time(cfg, start_frame + k), cfg.geometry);
    };

    record(0, FrameKind::Initialization);
    int offset = predict_offset(net, {context.begin(), context.end()});
    main_idx = std::clamp(main_idx + offset, 0, grid - 1);

    for (int k = 1; k < n; ++k) {
        // Secondary probing around the current beam.
        const std::vector<int> bins = probe_bins(main_idx, grid, cfg.probes_per_frame);
        for (std::size_t j = 0; j < bins.size(); ++j) {
            const double t = probe_time(cfg, FrameKind::Secondary, start_frame + k, static_cast<int>(j),
                                        cfg.probes_per_frame);
            w.values[bins[j]] =
                measure(states[k], cfg.geometry, cb.vectors.col(bins[j]), cfg.noise_std, t, probe_rng);
        }
        push_power(std::abs(w.values[main_idx]));

        // Re-acquire when the smoothed main-beam power collapses against its
        // recent median.
        bool reacquire = false;
        if (smoothed_power.size() >= std::size_t(kMinHistory) + 1) {
            std::deque<double> history(smoothed_power.begin(), smoothed_power.end() - 1);
            while (history.size() > std::size_t(kMedianHistory))
                history.pop_front();
            reacquire = smoothed_power.back() < kReacqRatio * median_of(history);
        }

        if (reacquire) {
            w = initial_sweep(cfg, cb, states[k], start_frame + k, probe_rng);
            main_idx = w.main_index;
            context.clear();
            raw_power.assign(1, std::abs(w.values[main_idx]));
            smoothed_power.clear();
            res.reacquisitions.push_back(start_frame + k);
            record(k, FrameKind::Initialization);
        } else {
            record(k, FrameKind::Secondary);
        }

        context.push_back(extract_window(w, main_idx, half_width));
        while (context.size() > std::size_t(context_len))
            context.pop_front();
        offset = predict_offset(net, {context.begin(), context.end()});
        main_idx = std::clamp(main_idx + offset, 0, grid - 1);
    }
    return res;
}

TrackerSummary evaluate(const std::vector<TrackResult>& results, const ScenarioConfig& cfg,
                        const Codebook& cb)
{
    if (results.empty())
        throw std::invalid_argument("evaluate: no realizations");

    // Evaluation window relative to each result's start.
    int eval_len = cfg.eval_frames;
    for (const TrackResult& r : results) {
        const int avail = r.frames() - (cfg.eval_start_frame - r.start_frame);
        if (avail < 1)
            throw std::invalid_argument("evaluate: result does not cover the evaluation window");
        eval_len = eval_len > 0 ? std::min(eval_len, avail) : avail;
    }

    TrackerSummary summary;
    summary.eval_frames = eval_len;
    summary.frame_mean_theta = Eigen::VectorXd::Zero(eval_len);
    summary.frame_mean_rate = Eigen::VectorXd::Zero(eval_len);
    summary.frame_mean_true = Eigen::VectorXd::Zero(eval_len);

    double sq_sum = 0.0;
    double rate_sum = 0.0;
    for (const TrackResult& r : results) {
        const int offset = cfg.eval_start_frame - r.start_frame;
        for (int k = 0; k < eval_len; ++k) {
            const double err = r.theta_hat_deg[offset + k] - r.theta_true_deg[offset + k];
            sq_sum += err * err;
            rate_sum += r.rates[offset + k];
            summary.frame_mean_theta[k] += r.theta_hat_deg[offset + k];
            summary.frame_mean_rate[k] += r.rates[offset + k];
            summary.frame_mean_true[k] += r.theta_true_deg[offset + k];
        }
    }
    const double count = double(results.size()) * eval_len;
    summary.mse_deg2 = sq_sum / count;
    summary.mean_rate = rate_sum / count;
    summary.frame_mean_theta /= double(results.size());
    summary.frame_mean_rate /= double(results.size());
    summary.frame_mean_true /= double(results.size());

    summary.frame_binned_theta = summary.frame_mean_theta;
    for (int k = 0; k < eval_len; ++k)
        summary.frame_binned_theta[k] = cb.angles_deg[cb.nearest_index(summary.frame_mean_theta[k])];

    // Per-segment MSE over the configured eval-relative cut points.
    if (cfg.segment_bounds.size() >= 2) {
        for (std::size_t s = 0; s + 1 < cfg.segment_bounds.size(); ++s) {
            const int lo = std::max(0, cfg.segment_bounds[s]);
            const int hi = std::min(eval_len, cfg.segment_bounds[s + 1]);
            double seg_sq = 0.0;
            int seg_count = 0;
            for (const TrackResult& r : results) {
                const int offset = cfg.eval_start_frame - r.start_frame;
                for (int k = lo; k < hi; ++k) {
                    const double err = r.theta_hat_deg[offset + k] - r.theta_true_deg[offset + k];
                    seg_sq += err * err;
                    ++seg_count;
                }
            }
            summary.segment_mse.push_back(seg_count > 0 ? seg_sq / seg_count : 0.0);
        }
    }
    return summary;
}

} // namespace beamtrack
