#include "harbench/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace harbench {

const char* to_string(SensorKind k) {
    switch (k) {
        case SensorKind::accelerometer: return "accelerometer";
        case SensorKind::gyroscope: return "gyroscope";
        case SensorKind::magnetometer: return "magnetometer";
        case SensorKind::temperature: return "temperature";
        case SensorKind::other: return "other";
    }
    return "other";
}

SensorKind sensor_kind_from_string(const std::string& s) {
    if (s == "accelerometer") return SensorKind::accelerometer;
    if (s == "gyroscope") return SensorKind::gyroscope;
    if (s == "magnetometer") return SensorKind::magnetometer;
    if (s == "temperature") return SensorKind::temperature;
    if (s == "other") return SensorKind::other;
    throw std::invalid_argument("unknown sensor kind: " + s);
}

void Trial::validate() const {
    if (trial_id.empty()) throw std::invalid_argument("trial has empty id");
    if (sample_rate_hz <= 0.0) throw std::invalid_argument("trial " + trial_id + ": sample_rate_hz must be > 0");
    if (data.rows < 1) throw std::invalid_argument("trial " + trial_id + ": needs at least one time step");
    if (data.cols != channels.size())
        throw std::invalid_argument("trial " + trial_id + ": data has " + std::to_string(data.cols) +
                                    " columns but " + std::to_string(channels.size()) + " channels declared");
    std::set<std::string> names;
    for (const auto& ch : channels)
        if (!names.insert(ch.name).second)
            throw std::invalid_argument("trial " + trial_id + ": duplicate channel name " + ch.name);
    for (double v : data.data)
        if (!std::isfinite(v)) throw std::invalid_argument("trial " + trial_id + ": non-finite sample");
}

void Dataset::validate() const {
    std::set<std::string> acts(activity_set.begin(), activity_set.end());
    std::set<std::string> subs(subject_set.begin(), subject_set.end());
    std::set<std::string> ids;
    for (const auto& t : trials) {
        t.validate();
        if (!ids.insert(t.trial_id).second)
            throw std::invalid_argument("duplicate trial id " + t.trial_id);
        if (!acts.count(t.activity_label))
            throw std::invalid_argument("trial " + t.trial_id + ": label " + t.activity_label + " not in activity set");
        if (!subs.count(t.subject_id))
            throw std::invalid_argument("trial " + t.trial_id + ": subject " + t.subject_id + " not in subject set");
        if (!trials.empty()) {
            const Trial& first = trials.front();
            if (t.sample_rate_hz != first.sample_rate_hz)
                throw std::invalid_argument("inconsistent sample rate across trials (" + t.trial_id + ")");
            if (t.channels != first.channels)
                throw std::invalid_argument("inconsistent channel schema across trials (" + t.trial_id + ")");
        }
    }
    if (!std::is_sorted(trials.begin(), trials.end(),
                        [](const Trial& a, const Trial& b) { return a.trial_id < b.trial_id; }))
        throw std::invalid_argument("trials not sorted by trial_id");
}

void Dataset::finalize() {
    std::sort(trials.begin(), trials.end(),
              [](const Trial& a, const Trial& b) { return a.trial_id < b.trial_id; });
    std::set<std::string> acts, subs;
    for (const auto& t : trials) {
        acts.insert(t.activity_label);
        subs.insert(t.subject_id);
    }
    activity_set.assign(acts.begin(), acts.end());
    subject_set.assign(subs.begin(), subs.end());
}

void SyntheticSpec::validate() const {
    if (n_subjects < 1 || n_activities < 1 || trials_per_pair < 1 || trial_len_steps < 1 || n_channels < 1)
        throw std::invalid_argument("synthetic spec: all counts must be >= 1");
    if (sample_rate_hz <= 0.0) throw std::invalid_argument("synthetic spec: sample_rate_hz must be > 0");
    if (trial_noise_corr < 0.0 || trial_noise_corr >= 1.0)
        throw std::invalid_argument("synthetic spec: trial_noise_corr must be in [0,1)");
    if (noise_sd < 0.0 || drift_sd < 0.0)
        throw std::invalid_argument("synthetic spec: noise_sd and drift_sd must be >= 0");
}

std::vector<Trial> standardize(const LabeledRecording& rec) {
    if (rec.data.rows == 0) throw std::invalid_argument("recording " + rec.recording_id + " is empty");
    if (rec.step_labels.size() != rec.data.rows)
        throw std::invalid_argument("recording " + rec.recording_id + ": one label per time step required");
    for (const auto& l : rec.step_labels)
        if (l.empty()) throw std::invalid_argument("recording " + rec.recording_id + ": unlabeled step");

    std::vector<Trial> out;
    std::size_t seg_start = 0;
    for (std::size_t i = 1; i <= rec.data.rows; ++i) {
        if (i == rec.data.rows || rec.step_labels[i] != rec.step_labels[seg_start]) {
            Trial t;
            char suffix[16];
            std::snprintf(suffix, sizeof suffix, "_seg%03zu", out.size());
            t.trial_id = rec.recording_id + suffix;
            t.subject_id = rec.subject_id;
            t.activity_label = rec.step_labels[seg_start];
            t.sample_rate_hz = rec.sample_rate_hz;
            t.channels = rec.channels;
            t.data = Matrix(i - seg_start, rec.data.cols);
            for (std::size_t r = seg_start; r < i; ++r)
                for (std::size_t c = 0; c < rec.data.cols; ++c)
                    t.data.at(r - seg_start, c) = rec.data.at(r, c);
            out.push_back(std::move(t));
            seg_start = i;
        }
    }
    return out;
}

Dataset standardize(const std::string& dataset_name, const std::vector<LabeledRecording>& recs) {
    Dataset ds;
    ds.name = dataset_name;
    for (const auto& rec : recs) {
        auto trials = standardize(rec);
        for (auto& t : trials) ds.trials.push_back(std::move(t));
    }
    ds.finalize();
    ds.validate();
    return ds;
}

bool is_unbalanced(const std::map<std::string, std::size_t>& class_counts) {
    if (class_counts.size() < 2) return false;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& [label, n] : class_counts) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    return hi >= 4 * lo;
}

std::vector<double> ar1_series(std::size_t n, double corr, double stationary_sd, Rng& rng) {
    std::vector<double> x(n, 0.0);
    if (n == 0) return x;
    const double innov_sd = stationary_sd * std::sqrt(std::max(0.0, 1.0 - corr * corr));
    x[0] = stationary_sd * rng.gaussian();
    for (std::size_t t = 1; t < n; ++t) x[t] = corr * x[t - 1] + innov_sd * rng.gaussian();
    return x;
}

namespace {

// Signal-shape constants for the synthetic generator. Offsets separate the
// activity classes in window-mean space at a scale comparable to the trial
// drift level, so trial membership carries real information.
constexpr double kOffsetScale = 1.0;
constexpr double kAmpLo = 0.8, kAmpHi = 1.6;
constexpr double kFreqLo = 0.8, kFreqHi = 3.2;
constexpr double kSubjectGainSd = 0.25;

std::string zero_padded(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03zu", prefix, i);
    return buf;
}

std::vector<ChannelMeta> synthetic_channels(std::size_t n_channels) {
    static const SensorKind kinds[3] = {SensorKind::accelerometer, SensorKind::gyroscope,
                                        SensorKind::magnetometer};
    static const char* kind_short[3] = {"acc", "gyro", "mag"};
    static const char axis[3] = {'x', 'y', 'z'};
    std::vector<ChannelMeta> chans;
    for (std::size_t c = 0; c < n_channels; ++c) {
        std::size_t block = c / 3;
        ChannelMeta m;
        m.sensor_kind = kinds[block % 3];
        m.name = std::string(kind_short[block % 3]) + "_" + axis[c % 3];
        if (block >= 3) m.name += "_" + std::to_string(block / 3);
        m.body_position = "chest";
        chans.push_back(std::move(m));
    }
    return chans;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    Dataset ds;
    ds.name = "synthetic";
    const auto channels = synthetic_channels(spec.n_channels);

    // Subject gains and activity shapes are keyed by index so that every
    // trial can be generated independently of the others.
    std::vector<double> subject_gain(spec.n_subjects);
    for (std::size_t s = 0; s < spec.n_subjects; ++s) {
        Rng r(mix_seed(seed, "subject", s));
        subject_gain[s] = std::max(0.3, 1.0 + kSubjectGainSd * r.gaussian());
    }
    struct ChannelShape { double offset, amp, freq; };
    std::vector<std::vector<ChannelShape>> shape(spec.n_activities,
                                                 std::vector<ChannelShape>(spec.n_channels));
    for (std::size_t a = 0; a < spec.n_activities; ++a)
        for (std::size_t c = 0; c < spec.n_channels; ++c) {
            Rng r(mix_seed(seed, "activity", a, c));
            shape[a][c].offset = kOffsetScale * r.uniform(-1.0, 1.0);
            shape[a][c].amp = r.uniform(kAmpLo, kAmpHi);
            shape[a][c].freq = r.uniform(kFreqLo, kFreqHi);
        }

    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t s = 0; s < spec.n_subjects; ++s)
        for (std::size_t a = 0; a < spec.n_activities; ++a)
            for (std::size_t rep = 0; rep < spec.trials_per_pair; ++rep) {
                Trial t;
                t.subject_id = zero_padded("s", s);
                t.activity_label = zero_padded("a", a);
                t.trial_id = t.subject_id + "_" + t.activity_label + "_" + zero_padded("r", rep);
                t.sample_rate_hz = spec.sample_rate_hz;
                t.channels = channels;
                t.data = Matrix(spec.trial_len_steps, spec.n_channels);

                Rng rng(mix_seed(seed, "trial", s, a, rep));
                for (std::size_t c = 0; c < spec.n_channels; ++c) {
                    const ChannelShape& sh = shape[a][c];
                    const double phase = rng.uniform(0.0, two_pi);
                    // AR(1) drift around a per-trial level: the level is what
                    // windows of the same trial share.
                    const double level = spec.drift_sd * rng.gaussian();
                    auto drift = ar1_series(spec.trial_len_steps, spec.trial_noise_corr,
                                            spec.drift_sd, rng);
                    const double w = two_pi * sh.freq / spec.sample_rate_hz;
                    for (std::size_t i = 0; i < spec.trial_len_steps; ++i) {
                        double v = subject_gain[s] * sh.amp * std::sin(w * static_cast<double>(i) + phase) +
                                   sh.offset + level + drift[i] + spec.noise_sd * rng.gaussian();
                        t.data.at(i, c) = v;
                    }
                }
                ds.trials.push_back(std::move(t));
            }

    ds.finalize();
    ds.validate();
    return ds;
}

SyntheticSpec standard_fixture_spec() { return SyntheticSpec{}; }

}  // namespace harbench
