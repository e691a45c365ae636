// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace beamtrack {

namespace {

using nlohmann::json;

json to_json(const ArrayGeometry& g)
{
    json j;
    j["n_tx"] = g.n_tx;
    j["positions_wavelengths"] = std::vector<double>(g.spacing_wavelengths.begin(), g.spacing_wavelengths.end());
    return j;
}

ArrayGeometry geometry_from_json(const json& j)
{
    ArrayGeometry g;
    g.n_tx = j.at("n_tx").get<int>();
    if (j.contains("positions_wavelengths")) {
        const auto positions = j.at("positions_wavelengths").get<std::vector<double>>();
        g.spacing_wavelengths = Eigen::Map<const Eigen::VectorXd>(positions.data(), positions.size());
    } else {
        const double pitch = j.value("pitch_wavelengths", 0.5);
        g = ArrayGeometry::uniform(g.n_tx, pitch);
    }
    g.validate();
    return g;
}

json to_json(const std::vector<SpeedPoint>& profile)
{
    json j = json::array();
    for (const auto& p : profile)
        j.push_back({p.fraction, p.speed_mps});
    return j;
}

std::vector<SpeedPoint> profile_from_json(const json& j)
{
    std::vector<SpeedPoint> profile;
    for (const auto& entry : j)
        profile.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
    return profile;
}

json to_json(const TrajectorySpec& spec)
{
    json segments = json::array();
    for (const auto& seg : spec.segments) {
        json js;
        if (const auto* arc = std::get_if<CircularArc>(&seg)) {
            js["type"] = "arc";
            js["center_m"] = {arc->center_m.x(), arc->center_m.y()};
            js["radius_m"] = arc->radius_m;
            js["start_angle_deg"] = arc->start_angle_deg;
            js["end_angle_deg"] = arc->end_angle_deg;
            js["speed_profile"] = to_json(arc->speed_profile);
        } else {
            const auto& line = std::get<LineSegment>(seg);
            js["type"] = "line";
            js["start_m"] = {line.start_m.x(), line.start_m.y()};
            js["end_m"] = {line.end_m.x(), line.end_m.y()};
            js["speed_profile"] = to_json(line.speed_profile);
        }
        segments.push_back(std::move(js));
    }
    return json{{"frame_period_s", spec.frame_period_s}, {"segments", std::move(segments)}};
}

TrajectorySpec trajectory_from_json(const json& j)
{
    TrajectorySpec spec;
    spec.frame_period_s = j.at("frame_period_s").get<double>();
    for (const auto& js : j.at("segments")) {
        const std::string type = js.at("type").get<std::string>();
        if (type == "arc") {
            CircularArc arc;
            arc.center_m = {js.at("center_m").at(0).get<double>(), js.at("center_m").at(1).get<double>()};
            arc.radius_m = js.at("radius_m").get<double>();
            arc.start_angle_deg = js.at("start_angle_deg").get<double>();
            arc.end_angle_deg = js.at("end_angle_deg").get<double>();
            arc.speed_profile = profile_from_json(js.at("speed_profile"));
            spec.segments.emplace_back(std::move(arc));
        } else if (type == "line") {
            LineSegment line;
            line.start_m = {js.at("start_m").at(0).get<double>(), js.at("start_m").at(1).get<double>()};
            line.end_m = {js.at("end_m").at(0).get<double>(), js.at("end_m").at(1).get<double>()};
            line.speed_profile = profile_from_json(js.at("speed_profile"));
            spec.segments.emplace_back(std::move(line));
        } else {
            throw ConfigParseError("unknown trajectory segment type: " + type);
        }
    }
    return spec;
}

json to_json(const ScenarioConfig& s)
{
    json j;
    j["geometry"] = to_json(s.geometry);
    j["codebook"] = {{"start_deg", s.codebook.start_deg},
                     {"step_deg", s.codebook.step_deg},
                     {"count", s.codebook.count}};
    j["trajectory"] = to_json(s.trajectory);
    j["link_budget"] = {{"bs_position_m", {s.link_budget.bs_position_m.x(), s.link_budget.bs_position_m.y()}},
                        {"carrier_hz", s.link_budget.carrier_hz},
                        {"ref_gain", s.link_budget.ref_gain},
                        {"ref_distance_m", s.link_budget.ref_distance_m},
                        {"pathloss_exponent", s.link_budget.pathloss_exponent}};
    j["frame"] = {{"t_acq", s.frame.t_acq},
                  {"t_fb_i", s.frame.t_fb_i},
                  {"t_dl", s.frame.t_dl},
                  {"t_sp", s.frame.t_sp},
                  {"t_fb_sp", s.frame.t_fb_sp}};
    j["noise_std"] = s.noise_std;
    j["power"] = s.power;
    j["probes_per_frame"] = s.probes_per_frame;
    j["window_half_width"] = s.window_half_width;
    j["realizations"] = s.realizations;
    j["seed"] = s.seed;
    j["track_start_frame"] = s.track_start_frame;
    j["eval_start_frame"] = s.eval_start_frame;
    j["eval_frames"] = s.eval_frames;
    j["segment_bounds"] = s.segment_bounds;
    j["trajectory_jitter_deg"] = s.trajectory_jitter_deg;
    return j;
}

ScenarioConfig scenario_from_json(const json& j)
{
    ScenarioConfig s;
    s.geometry = geometry_from_json(j.at("geometry"));
    const json& cb = j.at("codebook");
    s.codebook.start_deg = cb.at("start_deg").get<double>();
    s.codebook.step_deg = cb.at("step_deg").get<double>();
    s.codebook.count = cb.at("count").get<int>();
    s.trajectory = trajectory_from_json(j.at("trajectory"));
    const json& lb = j.at("link_budget");
    s.link_budget.bs_position_m = {lb.at("bs_position_m").at(0).get<double>(),
                                   lb.at("bs_position_m").at(1).get<double>()};
    s.link_budget.carrier_hz = lb.at("carrier_hz").get<double>();
    s.link_budget.ref_gain = lb.at("ref_gain").get<double>();
    s.link_budget.ref_distance_m = lb.at("ref_distance_m").get<double>();
    s.link_budget.pathloss_exponent = lb.at("pathloss_exponent").get<double>();
    const json& fr = j.at("frame");
    s.frame.t_acq = fr.at("t_acq").get<double>();
    s.frame.t_fb_i = fr.at("t_fb_i").get<double>();
    s.frame.t_dl = fr.at("t_dl").get<double>();
    s.frame.t_sp = fr.at("t_sp").get<double>();
    s.frame.t_fb_sp = fr.at("t_fb_sp").get<double>();
    s.noise_std = j.at("noise_std").get<double>();
    s.power = j.at("power").get<double>();
    s.probes_per_frame = j.at("probes_per_frame").get<int>();
    s.window_half_width = j.at("window_half_width").get<int>();
    s.realizations = j.at("realizations").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.track_start_frame = j.value("track_start_frame", 0);
    s.eval_start_frame = j.value("eval_start_frame", 0);
    s.eval_frames = j.value("eval_frames", 0);
    s.segment_bounds = j.value("segment_bounds", std::vector<int>{});
    s.trajectory_jitter_deg = j.value("trajectory_jitter_deg", 0.0);
    return s;
}

} // namespace

void ExperimentConfig::validate() const
{
    scenario.validate();
    pf.validate();
    train.validate();
    if (output_dir.empty())
        throw std::invalid_argument("ExperimentConfig: output_dir must be nonempty");
    for (const auto& [half_width, probes] : sweep) {
        if (half_width < 1 || probes < 1 || probes > 2 * half_width + 1)
            throw std::invalid_argument("ExperimentConfig: malformed sweep cell");
    }
}

ExperimentConfig parse_experiment_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("config JSON parse failure: ") + e.what());
    }

    try {
        ExperimentConfig cfg;
        cfg.scenario = scenario_from_json(j.at("scenario"));
        const json& pf = j.at("pf");
        cfg.pf.n_particles = pf.at("n_particles").get<int>();
        cfg.pf.process_std_deg = pf.at("process_std_deg").get<double>();
        cfg.pf.resample_threshold = pf.at("resample_threshold").get<double>();
        const json& tr = j.at("train");
        cfg.train.context_len = tr.at("context_len").get<int>();
        cfg.train.hidden_dim = tr.at("hidden_dim").get<int>();
        cfg.train.learning_rate = tr.at("learning_rate").get<double>();
        cfg.train.epochs = tr.at("epochs").get<int>();
        cfg.train.batch_size = tr.at("batch_size").get<int>();
        cfg.train.grad_clip_norm = tr.at("grad_clip_norm").get<double>();
        cfg.train.seed = tr.at("seed").get<std::uint64_t>();
        cfg.output_dir = j.value("output_dir", std::string("out"));
        for (const auto& cell : j.value("sweep", json::array()))
            cfg.sweep.emplace_back(cell.at(0).get<int>(), cell.at(1).get<int>());
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("config field error: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigParseError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    return parse_experiment_config(buffer.str());
}

std::string serialize_experiment_config(const ExperimentConfig& cfg)
{
    json j;
    j["scenario"] = to_json(cfg.scenario);
    j["pf"] = {{"n_particles", cfg.pf.n_particles},
               {"process_std_deg", cfg.pf.process_std_deg},
               {"resample_threshold", cfg.pf.resample_threshold}};
    j["train"] = {{"context_len", cfg.train.context_len},
                  {"hidden_dim", cfg.train.hidden_dim},
                  {"learning_rate", cfg.train.learning_rate},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"grad_clip_norm", cfg.train.grad_clip_norm},
                  {"seed", cfg.train.seed}};
    j["output_dir"] = cfg.output_dir;
    json sweep = json::array();
    for (const auto& [half_width, probes] : cfg.sweep)
        sweep.push_back({half_width, probes});
    j["sweep"] = std::move(sweep);
    return j.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg)
{
    const std::string canonical = serialize_experiment_config(cfg);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

ScenarioConfig sweep_cell_scenario(const ScenarioConfig& base, int half_width, int probes)
{
    ScenarioConfig cell = base;
    cell.window_half_width = half_width;
    cell.probes_per_frame = probes;
    cell.frame.t_sp = probes;
    cell.frame.t_fb_sp = probes;
    cell.validate();
    return cell;
}

} // namespace beamtrack
