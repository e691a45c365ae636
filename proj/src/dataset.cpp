// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace beamtrack {

FeatureWindow extract_window(const PseudoSpectrum& spectrum, int m, int half_width)
{
    const int grid = static_cast<int>(spectrum.values.size());
    if (half_width < 0 || half_width >= grid)
        throw std::invalid_argument("extract_window: half width must satisfy 0 <= L < G");
    if (m < 0 || m >= grid)
        throw std::invalid_argument("extract_window: center index outside the grid");

    FeatureWindow window;
    window.center_grid_index = m;
    window.half_width = half_width;
    window.values = Eigen::VectorXd::Zero(2 * half_width + 1);
    for (int offset = -half_width; offset <= half_width; ++offset) {
        const int bin = m + offset;
        if (bin >= 0 && bin < grid)
            window.values[offset + half_width] = std::abs(spectrum.values[bin]);
    }
    const double peak = window.values.maxCoeff();
    if (peak > 0.0)
        window.values /= peak;
    return window;
}

LabelVector make_label(int m_now, int m_next, int half_width)
{
    if (half_width < 0)
        throw std::invalid_argument("make_label: negative half width");
    const int d = m_next - m_now;
    int position;
    if (std::abs(d) <= half_width)
        position = half_width + d;
    else
        position = half_width + (d > 0 ? half_width : -half_width);

    LabelVector label;
    label.values = Eigen::VectorXd::Zero(2 * half_width + 1);
    label.values[position] = 1.0;
    return label;
}

std::vector<int> probe_bins(int main_index, int grid_size, int probe_count)
{
    if (probe_count < 1 || probe_count > grid_size)
        throw std::invalid_argument("probe_bins: probe count outside [1, G]");
    // Centered interval with the extra bin (even p) toward the smaller index.
    int lo = main_index - probe_count / 2;
    lo = std::max(0, std::min(lo, grid_size - probe_count));
    std::vector<int> bins(probe_count);
    for (int i = 0; i < probe_count; ++i)
        bins[i] = lo + i;
    return bins;
}

Dataset generate_dataset(const std::vector<RunRecord>& runs, int half_width, int probes_per_frame)
{
    if (half_width < 1)
        throw std::invalid_argument("generate_dataset: half width must be >= 1");
    if (probes_per_frame > 2 * half_width + 1)
        throw std::invalid_argument("generate_dataset: more probes than window bins");
    if (probes_per_frame < 1)
        throw std::invalid_argument("generate_dataset: probes_per_frame must be >= 1");

    Dataset ds;
    ds.half_width = half_width;
    ds.probes_per_frame = probes_per_frame;
    ds.sequences.reserve(runs.size());

    for (const RunRecord& run : runs) {
        const int frames = static_cast<int>(run.main_index.size());
        if (frames < 2)
            throw std::invalid_argument("generate_dataset: each run needs at least 2 frames");
        if (static_cast<int>(run.probes.size()) != frames)
            throw std::invalid_argument("generate_dataset: probes/main_index length mismatch");

        PseudoSpectrum w;
        w.values = run.initial_spectrum; // W = S
        w.main_index = run.main_index.front();

        Dataset::Sequence seq;
        seq.windows.reserve(frames - 1);
        seq.labels.reserve(frames - 1);
        for (int k = 0; k + 1 < frames; ++k) {
            for (const auto& [bin, z] : run.probes[k]) {
                if (bin < 0 || bin >= w.values.size())
                    throw std::invalid_argument("generate_dataset: probe bin outside the grid");
                w.values[bin] = z;
            }
            seq.windows.push_back(extract_window(w, run.main_index[k], half_width));
            seq.labels.push_back(make_label(run.main_index[k], run.main_index[k + 1], half_width));
        }
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

} // namespace beamtrack
