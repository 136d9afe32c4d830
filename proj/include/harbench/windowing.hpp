#pragma once

#include <cstddef>
#include <vector>

#include "harbench/data_model.hpp"

namespace harbench {

/// A fixed-length slice of one trial, with enough provenance to detect
/// train/test leakage later: trial, subject, label and the sample range.
struct Window {
    std::string trial_id;
    std::string subject_id;
    std::string activity_label;
    std::vector<std::string> channel_names;
    std::size_t start_idx = 0;  // half-open [start, end)
    std::size_t end_idx = 0;
    Matrix data;  // (end - start) x channels
};

struct WindowConfig {
    double window_sec = 5.0;
    double overlap_frac = 0.5;  // 0.5 = semi-non-overlapping, 0.0 = full-non-overlapping

    /// Window length in samples: round-half-up of window_sec * rate.
    std::size_t window_len(double sample_rate_hz) const;
    /// Step in samples: round-half-up of window_len * (1 - overlap), floor 1.
    std::size_t step(double sample_rate_hz) const;
    void validate(double sample_rate_hz) const;
};

/// Closed form for the number of windows a trial of trial_len yields:
/// floor((trial_len - window_len) / step) + 1 when it fits, else 0.
std::size_t window_count(std::size_t trial_len, std::size_t window_len, std::size_t step);

/// Start indices 0, step, 2*step, ... of every window that fits entirely
/// within the trial; residual segments shorter than window_len are dropped.
std::vector<std::size_t> window_starts(std::size_t trial_len, std::size_t window_len,
                                       std::size_t step);

/// Materializes the windows of one trial, ordered by start index.
/// A trial shorter than the window yields an empty list.
std::vector<Window> slide_windows(const Trial& trial, const WindowConfig& cfg);

/// All windows of a dataset, trials taken in stored (lexicographic) order.
std::vector<Window> dataset_windows(const Dataset& ds, const WindowConfig& cfg);

/// Unbalanced check over the per-class window counts a config produces.
bool is_unbalanced(const Dataset& ds, const WindowConfig& cfg);

}  // namespace harbench
