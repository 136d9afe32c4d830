#include "harbench/windowing.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace harbench {

std::size_t WindowConfig::window_len(double sample_rate_hz) const {
    return static_cast<std::size_t>(std::floor(window_sec * sample_rate_hz + 0.5));
}

std::size_t WindowConfig::step(double sample_rate_hz) const {
    const double raw = static_cast<double>(window_len(sample_rate_hz)) * (1.0 - overlap_frac);
    const auto s = static_cast<std::size_t>(std::floor(raw + 0.5));
    return s < 1 ? 1 : s;
}

void WindowConfig::validate(double sample_rate_hz) const {
    if (window_sec <= 0.0) throw std::invalid_argument("window_sec must be > 0");
    if (overlap_frac < 0.0 || overlap_frac >= 1.0)
        throw std::invalid_argument("overlap_frac must be in [0,1)");
    if (window_len(sample_rate_hz) < 1)
        throw std::invalid_argument("window length in samples must be >= 1");
}

std::size_t window_count(std::size_t trial_len, std::size_t window_len, std::size_t step) {
    if (window_len < 1 || step < 1) throw std::invalid_argument("window_len and step must be >= 1");
    if (trial_len < window_len) return 0;
    return (trial_len - window_len) / step + 1;
}

std::vector<std::size_t> window_starts(std::size_t trial_len, std::size_t window_len,
                                       std::size_t step) {
    if (window_len < 1 || step < 1) throw std::invalid_argument("window_len and step must be >= 1");
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; trial_len >= window_len && s <= trial_len - window_len; s += step)
        starts.push_back(s);
    return starts;
}

std::vector<Window> slide_windows(const Trial& trial, const WindowConfig& cfg) {
    trial.validate();
    cfg.validate(trial.sample_rate_hz);
    const std::size_t len = cfg.window_len(trial.sample_rate_hz);
    const std::size_t step = cfg.step(trial.sample_rate_hz);

    std::vector<Window> out;
    for (std::size_t start : window_starts(trial.data.rows, len, step)) {
        Window w;
        w.trial_id = trial.trial_id;
        w.subject_id = trial.subject_id;
        w.activity_label = trial.activity_label;
        for (const auto& ch : trial.channels) w.channel_names.push_back(ch.name);
        w.start_idx = start;
        w.end_idx = start + len;
        w.data = Matrix(len, trial.data.cols);
        for (std::size_t r = 0; r < len; ++r)
            for (std::size_t c = 0; c < trial.data.cols; ++c)
                w.data.at(r, c) = trial.data.at(start + r, c);
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<Window> dataset_windows(const Dataset& ds, const WindowConfig& cfg) {
    std::vector<Window> out;
    for (const auto& t : ds.trials) {
        auto ws = slide_windows(t, cfg);
        for (auto& w : ws) out.push_back(std::move(w));
    }
    return out;
}

bool is_unbalanced(const Dataset& ds, const WindowConfig& cfg) {
    if (ds.trials.empty()) throw std::invalid_argument("is_unbalanced: empty dataset");
    std::map<std::string, std::size_t> counts;
    for (const auto& t : ds.trials) {
        const std::size_t n = window_count(t.data.rows, cfg.window_len(t.sample_rate_hz),
                                           cfg.step(t.sample_rate_hz));
        counts[t.activity_label] += n;
    }
    return is_unbalanced(counts);
}

}  // namespace harbench
