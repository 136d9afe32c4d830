#include "harbench/features.hpp"

#include <cmath>
#include <stdexcept>

namespace harbench {

namespace {

void channel_mean_std(const Matrix& m, std::size_t c, double& mean, double& sd) {
    double sum = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) sum += m.at(r, c);
    mean = sum / static_cast<double>(m.rows);
    double ss = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double d = m.at(r, c) - mean;
        ss += d * d;
    }
    sd = std::sqrt(ss / static_cast<double>(m.rows));
}

std::string channel_name(const Window& w, std::size_t c) {
    if (c < w.channel_names.size() && !w.channel_names[c].empty()) return w.channel_names[c];
    return "ch" + std::to_string(c);
}

}  // namespace

FeatureVector features_mean_std(const Window& w) {
    if (w.data.rows == 0) throw std::invalid_argument("features_mean_std: empty window");
    FeatureVector fv;
    for (std::size_t c = 0; c < w.data.cols; ++c) {
        double mean, sd;
        channel_mean_std(w.data, c, mean, sd);
        fv.values.push_back(mean);
        fv.schema.push_back(channel_name(w, c) + "_mean");
        fv.values.push_back(sd);
        fv.schema.push_back(channel_name(w, c) + "_std");
    }
    return fv;
}

FeatureVector features_mean_corr(const Window& w) {
    if (w.data.rows == 0) throw std::invalid_argument("features_mean_corr: empty window");
    if (w.data.cols < 2) throw std::invalid_argument("features_mean_corr: needs >= 2 channels");
    const std::size_t C = w.data.cols;
    std::vector<double> mean(C), sd(C);
    FeatureVector fv;
    for (std::size_t c = 0; c < C; ++c) {
        channel_mean_std(w.data, c, mean[c], sd[c]);
        fv.values.push_back(mean[c]);
        fv.schema.push_back(channel_name(w, c) + "_mean");
    }
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = i + 1; j < C; ++j) {
            double corr = 0.0;
            if (sd[i] > 0.0 && sd[j] > 0.0) {
                double cov = 0.0;
                for (std::size_t r = 0; r < w.data.rows; ++r)
                    cov += (w.data.at(r, i) - mean[i]) * (w.data.at(r, j) - mean[j]);
                cov /= static_cast<double>(w.data.rows);
                corr = cov / (sd[i] * sd[j]);
            }
            fv.values.push_back(corr);
            fv.schema.push_back("corr_" + channel_name(w, i) + "_" + channel_name(w, j));
        }
    return fv;
}

FeatureTable feature_table(const std::vector<Window>& windows,
                           const std::vector<std::size_t>& indices,
                           const FeatureExtractor& extract) {
    FeatureTable t;
    if (indices.empty()) return t;
    FeatureVector first = extract(windows[indices[0]]);
    t.schema = first.schema;
    t.X = Matrix(indices.size(), first.values.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const Window& w = windows[indices[r]];
        FeatureVector fv = r == 0 ? std::move(first) : extract(w);
        if (fv.values.size() != t.X.cols)
            throw std::invalid_argument("feature_table: inconsistent feature dimension");
        for (std::size_t c = 0; c < t.X.cols; ++c) t.X.at(r, c) = fv.values[c];
        t.labels.push_back(w.activity_label);
    }
    return t;
}

}  // namespace harbench
