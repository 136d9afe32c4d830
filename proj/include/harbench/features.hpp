#pragma once

#include <functional>
#include <string>
#include <vector>

#include "harbench/windowing.hpp"

namespace harbench {

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::string> schema;
};

/// Per channel: mean and population (divide-by-N) standard deviation,
/// concatenated in channel order. Schema names <channel>_mean, <channel>_std.
FeatureVector features_mean_std(const Window& w);

/// Per-channel means plus the Pearson correlation of every unordered channel
/// pair in upper-triangle order. A pair with a zero-variance channel yields
/// correlation 0. Requires >= 2 channels.
FeatureVector features_mean_corr(const Window& w);

using FeatureExtractor = std::function<FeatureVector(const Window&)>;

struct FeatureTable {
    Matrix X;                          // one row per window
    std::vector<std::string> schema;   // column names
    std::vector<std::string> labels;   // activity label per row
};

FeatureTable feature_table(const std::vector<Window>& windows,
                           const std::vector<std::size_t>& indices,
                           const FeatureExtractor& extract);

}  // namespace harbench
