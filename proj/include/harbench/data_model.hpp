#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "harbench/matrix.hpp"
#include "harbench/rng.hpp"

namespace harbench {

enum class SensorKind { accelerometer, gyroscope, magnetometer, temperature, other };

const char* to_string(SensorKind k);
SensorKind sensor_kind_from_string(const std::string& s);

struct ChannelMeta {
    std::string name;
    SensorKind sensor_kind = SensorKind::other;
    std::string body_position;

    bool operator==(const ChannelMeta&) const = default;
};

/// One continuous single-activity recording by one subject. The atomic unit
/// of leave-one-trial-out splitting.
struct Trial {
    std::string trial_id;
    std::string subject_id;
    std::string activity_label;
    double sample_rate_hz = 0.0;
    std::vector<ChannelMeta> channels;
    Matrix data;  // rows = time steps, cols = channels

    void validate() const;  // throws std::invalid_argument
};

struct Dataset {
    std::string name;
    std::vector<Trial> trials;               // sorted lexicographically by trial_id
    std::vector<std::string> activity_set;   // sorted
    std::vector<std::string> subject_set;    // sorted

    void validate() const;
    /// Sorts trials by id and rebuilds activity/subject sets from the trials.
    void finalize();
};

/// Parameters of the synthetic wearable-signal generator.
struct SyntheticSpec {
    std::size_t n_subjects = 6;
    std::size_t n_activities = 4;
    std::size_t trials_per_pair = 4;
    std::size_t trial_len_steps = 3000;
    double sample_rate_hz = 50.0;
    std::size_t n_channels = 3;
    double trial_noise_corr = 0.9;  // AR(1) coefficient of the per-trial drift
    double noise_sd = 0.5;
    double drift_sd = 0.8;

    void validate() const;
};

/// A continuous multi-activity recording with one label per time step;
/// the raw form that standardize() splits into single-activity trials.
struct LabeledRecording {
    std::string recording_id;
    std::string subject_id;
    double sample_rate_hz = 0.0;
    std::vector<ChannelMeta> channels;
    Matrix data;
    std::vector<std::string> step_labels;  // size == data.rows
};

/// Splits a recording at every label change into maximal constant-label
/// segments; each segment becomes one Trial. Segment order is preserved and
/// concatenating the trial data reproduces the recording exactly.
std::vector<Trial> standardize(const LabeledRecording& rec);
Dataset standardize(const std::string& dataset_name, const std::vector<LabeledRecording>& recs);

/// True iff the largest class count is at least 4x the smallest (boundary
/// inclusive). A single class counts as balanced.
bool is_unbalanced(const std::map<std::string, std::size_t>& class_counts);

/// Zero-mean AR(1) series x_t = corr * x_{t-1} + e_t with innovations scaled
/// so the stationary standard deviation equals stationary_sd. x_0 is drawn
/// from the stationary distribution.
std::vector<double> ar1_series(std::size_t n, double corr, double stationary_sd, Rng& rng);

/// One trial per (subject, activity, repetition). Each channel is an
/// activity-keyed sinusoid, scaled by a subject gain, plus a per-trial AR(1)
/// drift around a per-trial level, plus white noise. Bit-reproducible for a
/// given (spec, seed) independent of call order.
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// The default synthetic configuration used by tests and docs:
/// 6 subjects x 4 activities x 4 trials, 60 s @ 50 Hz, 3 channels, corr 0.9.
SyntheticSpec standard_fixture_spec();

}  // namespace harbench
