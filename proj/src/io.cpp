// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace beamtrack {

namespace {

std::ofstream open_output(const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open output file: " + path);
    return os;
}

void finish(std::ofstream& os, const std::string& path)
{
    os.flush();
    if (!os)
        throw std::runtime_error("write failed: " + path);
}

} // namespace

std::string format_double(double value)
{
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string artifact_header(std::uint64_t seed, std::uint64_t hash)
{
    std::ostringstream os;
    os << "# seed=" << seed << " config_hash=" << std::hex << hash;
    return os.str();
}

void write_dataset_csv(const std::string& path, const Dataset& data, const std::string& header)
{
    std::ofstream os = open_output(path);
    os << header << '\n';
    const int width = 2 * data.half_width + 1;
    os << "realization,frame";
    for (int i = 0; i < width; ++i)
        os << ",f" << i;
    for (int i = 0; i < width; ++i)
        os << ",y" << i;
    os << '\n';
    for (std::size_t r = 0; r < data.sequences.size(); ++r) {
        const auto& seq = data.sequences[r];
        for (std::size_t k = 0; k < seq.windows.size(); ++k) {
            os << r << ',' << k;
            for (int i = 0; i < width; ++i)
                os << ',' << format_double(seq.windows[k].values[i]);
            for (int i = 0; i < width; ++i)
                os << ',' << format_double(seq.labels[k].values[i]);
            os << '\n';
        }
    }
    finish(os, path);
}

void write_loss_csv(const std::string& path, const TrainTrace& trace, const std::string& header)
{
    std::ofstream os = open_output(path);
    os << header << '\n';
    os << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < trace.epoch_mean_loss.size(); ++e)
        os << e << ',' << format_double(trace.epoch_mean_loss[e]) << '\n';
    finish(os, path);
}

void write_track_csv(const std::string& path, const std::vector<NamedTracks>& tracks,
                     const std::string& header)
{
    std::ofstream os = open_output(path);
    os << header << '\n';
    os << "realization,frame,tracker,theta_true_deg,theta_hat_deg,rate_bps_hz,frame_kind,reacq_flag\n";
    for (const NamedTracks& named : tracks) {
        for (std::size_t r = 0; r < named.results.size(); ++r) {
            const TrackResult& res = named.results[r];
            for (int k = 0; k < res.frames(); ++k) {
                const int frame = res.start_frame + k;
                const bool reacq = std::find(res.reacquisitions.begin(), res.reacquisitions.end(), frame) !=
                                   res.reacquisitions.end();
                os << r << ',' << frame << ',' << named.tracker << ','
                   << format_double(res.theta_true_deg[k]) << ',' << format_double(res.theta_hat_deg[k])
                   << ',' << format_double(res.rates[k]) << ','
                   << (res.frame_kinds[k] == FrameKind::Initialization ? "init" : "secondary") << ','
                   << (reacq ? 1 : 0) << '\n';
            }
        }
    }
    finish(os, path);
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows,
                      const std::string& header)
{
    std::ofstream os = open_output(path);
    os << header << '\n';
    os << "tracker,window_len,probes,mse_deg2,mean_rate_bps_hz\n";
    for (const ReportRow& row : rows)
        os << row.tracker << ',' << row.window_len << ',' << row.probes << ','
           << format_double(row.mse_deg2) << ',' << format_double(row.mean_rate) << '\n';
    finish(os, path);
}

} // namespace beamtrack
