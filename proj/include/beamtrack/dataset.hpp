// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "beamtrack/channel.hpp"

namespace beamtrack {

/// Max-normalized |z| over the 2L+1 grid bins centered at a main-beam index.
struct FeatureWindow {
    Eigen::VectorXd values; // length 2L+1, each in [0, 1]
    int center_grid_index = 0;
    int half_width = 0;
};

/// Hot-one target over the window: a single 1 at the next main-beam position,
/// clamped to the window edge when the move exceeds L bins.
struct LabelVector {
    Eigen::VectorXd values; // length 2L+1, exactly one entry equals 1
};

/// Raw material of one realization: the initial alignment sweep plus, per
/// frame, the refreshed (bin, measurement) pairs and the ground-truth main
/// beam index.
struct RunRecord {
    Eigen::VectorXcd initial_spectrum;
    std::vector<std::vector<std::pair<int, std::complex<double>>>> probes; // per frame
    std::vector<int> main_index;                                           // per frame
};

struct Dataset {
    struct Sequence {
        std::vector<FeatureWindow> windows;
        std::vector<LabelVector> labels;
    };
    std::vector<Sequence> sequences; // one per realization
    int half_width = 0;
    int probes_per_frame = 0;
};

/// Window of |values| over bins [m-L, m+L], zero-padded outside the grid and
/// divided by the window maximum (left unscaled when the window is all zero).
FeatureWindow extract_window(const PseudoSpectrum& spectrum, int m, int half_width);

/// Label position L + d for d = m_next - m_now when |d| <= L, else the window
/// edge L + sgn(d) * L.
LabelVector make_label(int m_now, int m_next, int half_width);

/// The p grid bins nearest to main_index (ties toward the smaller index),
/// shifted to stay inside [0, grid_size).
std::vector<int> probe_bins(int main_index, int grid_size, int probe_count);

/// Runs Algorithm-1 style feature/label generation over each realization:
/// the running spectrum starts from the initial sweep, probed bins overwrite
/// their entries each frame, and every frame with a successor emits one
/// (window, label) pair keyed to the ground-truth main beam.
Dataset generate_dataset(const std::vector<RunRecord>& runs, int half_width, int probes_per_frame);

} // namespace beamtrack
