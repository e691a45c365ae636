// SPDX-License-Identifier: Apache-2.0
//
// beamtrack: experiment driver for the beam-tracking workbench.
//
// Subcommands:
//   generate  teacher-forced dataset CSV for the configured (L, p)
//   train     train the recurrent tracker, write model + loss trace
//   track     run oracle/PF(/RNN with --model) trackers, write per-frame CSV
//   report    sweep (L, p) cells and write a summary MSE/rate table
//
// Exit codes: 0 ok, 2 config parse, 3 validation, 4 training divergence,
// 5 I/O failure.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "beamtrack/config.hpp"
#include "beamtrack/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitIo = 5;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    std::string out_override;
};

beamtrack::ExperimentConfig load_and_override(const CommonArgs& args)
{
    beamtrack::ExperimentConfig cfg = beamtrack::load_experiment_config(args.config_path);
    if (args.has_seed)
        cfg.scenario.seed = args.seed_override;
    if (!args.out_override.empty())
        cfg.output_dir = args.out_override;
    cfg.validate();
    return cfg;
}

std::string out_path(const beamtrack::ExperimentConfig& cfg, const std::string& name)
{
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

beamtrack::Dataset build_dataset(const beamtrack::ScenarioConfig& scenario, const beamtrack::Codebook& cb)
{
    std::vector<beamtrack::RunRecord> runs;
    runs.reserve(scenario.realizations);
    for (int r = 0; r < scenario.realizations; ++r)
        runs.push_back(beamtrack::simulate_training_run(scenario, cb, r));
    return beamtrack::generate_dataset(runs, scenario.window_half_width, scenario.probes_per_frame);
}

int run_generate(const CommonArgs& args)
{
    const auto cfg = load_and_override(args);
    const auto cb = cfg.scenario.make_codebook();
    const auto data = build_dataset(cfg.scenario, cb);
    const auto header = beamtrack::artifact_header(cfg.scenario.seed, beamtrack::config_hash(cfg));
    beamtrack::write_dataset_csv(out_path(cfg, "dataset.csv"), data, header);
    std::cout << "wrote " << out_path(cfg, "dataset.csv") << " (" << data.sequences.size()
              << " realizations)\n";
    return kExitOk;
}

int run_train(const CommonArgs& args)
{
    const auto cfg = load_and_override(args);
    const auto cb = cfg.scenario.make_codebook();
    const auto data = build_dataset(cfg.scenario, cb);

    const int width = 2 * cfg.scenario.window_half_width + 1;
    beamtrack::Rng init_rng = beamtrack::make_rng(cfg.train.seed, 0);
    beamtrack::RnnNetwork net = beamtrack::RnnNetwork::init(width, cfg.train.hidden_dim, width, init_rng);
    beamtrack::Rng train_rng = beamtrack::make_rng(cfg.train.seed, 1);
    const beamtrack::TrainTrace trace = beamtrack::train(net, data, cfg.train, train_rng);

    const auto header = beamtrack::artifact_header(cfg.scenario.seed, beamtrack::config_hash(cfg));
    beamtrack::save_network(net, out_path(cfg, "model.txt"), header);
    beamtrack::write_loss_csv(out_path(cfg, "loss.csv"), trace, header);
    std::cout << "wrote " << out_path(cfg, "model.txt") << " final_loss="
              << trace.epoch_mean_loss.back() << '\n';
    return kExitOk;
}

int run_track(const CommonArgs& args, const std::string& model_path)
{
    const auto cfg = load_and_override(args);
    const auto& scenario = cfg.scenario;
    const auto cb = scenario.make_codebook();

    beamtrack::RnnNetwork net;
    const bool with_rnn = !model_path.empty();
    if (with_rnn)
        net = beamtrack::load_network(model_path);

    std::vector<beamtrack::NamedTracks> tracks;
    tracks.push_back({"oracle", {}});
    tracks.push_back({"pf", {}});
    if (with_rnn)
        tracks.push_back({"rnn", {}});

    for (int r = 0; r < scenario.realizations; ++r) {
        const auto states = beamtrack::realize_states(scenario, r);
        if (scenario.track_start_frame >= static_cast<int>(states.size()))
            throw std::invalid_argument("track: track_start_frame beyond the trajectory");
        const std::vector<beamtrack::ChannelState> tail(states.begin() + scenario.track_start_frame,
                                                        states.end());
        tracks[0].results.push_back(
            beamtrack::track_oracle(tail, cb, scenario, scenario.track_start_frame));

        beamtrack::Rng pf_probe = beamtrack::scenario_rng(scenario, r, beamtrack::StreamPurpose::PfProbes);
        beamtrack::Rng pf_algo = beamtrack::scenario_rng(scenario, r, beamtrack::StreamPurpose::PfAlgorithm);
        tracks[1].results.push_back(
            beamtrack::track_pf(tail, cb, cfg.pf, scenario, pf_probe, pf_algo, scenario.track_start_frame));

        if (with_rnn) {
            beamtrack::Rng rnn_probe =
                beamtrack::scenario_rng(scenario, r, beamtrack::StreamPurpose::RnnProbes);
            tracks[2].results.push_back(beamtrack::track_rnn(tail, cb, net, scenario, rnn_probe,
                                                             scenario.track_start_frame,
                                                             cfg.train.context_len));
        }
    }

    const auto header = beamtrack::artifact_header(scenario.seed, beamtrack::config_hash(cfg));
    beamtrack::write_track_csv(out_path(cfg, "track.csv"), tracks, header);
    std::cout << "wrote " << out_path(cfg, "track.csv") << '\n';
    return kExitOk;
}

int run_report(const CommonArgs& args)
{
    const auto cfg = load_and_override(args);
    std::vector<std::pair<int, int>> cells = cfg.sweep;
    if (cells.empty())
        cells.emplace_back(cfg.scenario.window_half_width, cfg.scenario.probes_per_frame);

    std::vector<beamtrack::ReportRow> rows;
    for (const auto& [half_width, probes] : cells) {
        const auto scenario = beamtrack::sweep_cell_scenario(cfg.scenario, half_width, probes);
        const auto cb = scenario.make_codebook();
        const auto data = build_dataset(scenario, cb);

        const int width = 2 * half_width + 1;
        beamtrack::Rng init_rng = beamtrack::make_rng(cfg.train.seed, 0);
        beamtrack::RnnNetwork net =
            beamtrack::RnnNetwork::init(width, cfg.train.hidden_dim, width, init_rng);
        beamtrack::Rng train_rng = beamtrack::make_rng(cfg.train.seed, 1);
        beamtrack::train(net, data, cfg.train, train_rng);

        std::vector<beamtrack::TrackResult> oracle, pf, rnn;
        for (int r = 0; r < scenario.realizations; ++r) {
            const auto states = beamtrack::realize_states(scenario, r);
            const std::vector<beamtrack::ChannelState> tail(states.begin() + scenario.track_start_frame,
                                                            states.end());
            oracle.push_back(beamtrack::track_oracle(tail, cb, scenario, scenario.track_start_frame));
            beamtrack::Rng pf_probe =
                beamtrack::scenario_rng(scenario, r, beamtrack::StreamPurpose::PfProbes);
            beamtrack::Rng pf_algo =
                beamtrack::scenario_rng(scenario, r, beamtrack::StreamPurpose::PfAlgorithm);
            pf.push_back(beamtrack::track_pf(tail, cb, cfg.pf, scenario, pf_probe, pf_algo,
                                             scenario.track_start_frame));
            beamtrack::Rng rnn_probe =
                beamtrack::scenario_rng(scenario, r, beamtrack::StreamPurpose::RnnProbes);
            rnn.push_back(beamtrack::track_rnn(tail, cb, net, scenario, rnn_probe,
                                               scenario.track_start_frame, cfg.train.context_len));
        }

        const int window_len = width;
        for (const auto& [name, results] :
             {std::pair<const char*, const std::vector<beamtrack::TrackResult>*>{"oracle", &oracle},
              {"pf", &pf},
              {"rnn", &rnn}}) {
            const auto summary = beamtrack::evaluate(*results, scenario, cb);
            rows.push_back({name, window_len, probes, summary.mse_deg2, summary.mean_rate});
        }
    }

    const auto header = beamtrack::artifact_header(cfg.scenario.seed, beamtrack::config_hash(cfg));
    beamtrack::write_report_csv(out_path(cfg, "report.csv"), rows, header);
    std::cout << "wrote " << out_path(cfg, "report.csv") << " (" << rows.size() << " rows)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mmWave beam-tracking workbench"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string model_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "experiment config JSON")->required();
        sub->add_option("--seed", args.seed_override, "override the scenario master seed")
            ->each([&](const std::string&) { args.has_seed = true; });
        sub->add_option("--out", args.out_override, "override the output directory");
    };

    CLI::App* generate = app.add_subcommand("generate", "write the teacher-forced dataset CSV");
    add_common(generate);
    CLI::App* train = app.add_subcommand("train", "train the recurrent tracker");
    add_common(train);
    CLI::App* track = app.add_subcommand("track", "run the trackers and write per-frame results");
    add_common(track);
    track->add_option("--model", model_path, "trained model file (enables the RNN tracker)");
    CLI::App* report = app.add_subcommand("report", "sweep (L, p) cells and write the summary table");
    add_common(report);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed())
            return run_generate(args);
        if (train->parsed())
            return run_train(args);
        if (track->parsed())
            return run_track(args, model_path);
        if (report->parsed())
            return run_report(args);
    } catch (const beamtrack::ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigParse;
    } catch (const beamtrack::TrainingDivergence& e) {
        std::cerr << "training diverged: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}
