#include "harbench/dataset_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace harbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& where) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::runtime_error(where + ": non-numeric sample '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(file.string() + ": empty file");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

json load_metadata(const fs::path& dir) {
    const fs::path meta = dir / "dataset.json";
    std::ifstream in(meta);
    if (!in) throw std::runtime_error("missing metadata file " + meta.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(meta.string() + ": " + e.what());
    }
    return j;
}

std::vector<ChannelMeta> parse_channels(const json& j) {
    std::vector<ChannelMeta> chans;
    for (const auto& c : j.at("channels")) {
        ChannelMeta m;
        m.name = c.at("name").get<std::string>();
        m.sensor_kind = sensor_kind_from_string(c.at("sensor_kind").get<std::string>());
        m.body_position = c.value("body_position", "");
        chans.push_back(std::move(m));
    }
    return chans;
}

Matrix parse_data_columns(const CsvTable& csv, std::size_t n_channels, const std::string& where) {
    if (csv.header.size() < n_channels)
        throw std::runtime_error(where + ": " + std::to_string(csv.header.size()) +
                                 " data columns but " + std::to_string(n_channels) +
                                 " declared channels");
    Matrix m(csv.rows.size(), n_channels);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        if (csv.rows[r].size() != csv.header.size())
            throw std::runtime_error(where + " row " + std::to_string(r + 2) +
                                     ": column count mismatch");
        for (std::size_t c = 0; c < n_channels; ++c)
            m.at(r, c) = parse_double(csv.rows[r][c], where);
    }
    return m;
}

Dataset ingest_canonical(const fs::path& dir, const json& meta) {
    Dataset ds;
    ds.name = meta.at("name").get<std::string>();
    const double rate = meta.at("sample_rate_hz").get<double>();
    const auto channels = parse_channels(meta);
    ds.activity_set = meta.at("activities").get<std::vector<std::string>>();
    ds.subject_set = meta.at("subjects").get<std::vector<std::string>>();

    for (const auto& entry : meta.at("trials")) {
        Trial t;
        t.trial_id = entry.at("trial_id").get<std::string>();
        t.subject_id = entry.at("subject_id").get<std::string>();
        t.activity_label = entry.at("activity_label").get<std::string>();
        t.sample_rate_hz = rate;
        t.channels = channels;
        const fs::path file = dir / "trials" / (t.trial_id + ".csv");
        CsvTable csv = read_csv(file);
        if (csv.header.size() != channels.size())
            throw std::runtime_error(file.string() + ": " + std::to_string(csv.header.size()) +
                                     " data columns but " + std::to_string(channels.size()) +
                                     " declared channels");
        for (std::size_t c = 0; c < channels.size(); ++c)
            if (csv.header[c] != channels[c].name)
                throw std::runtime_error(file.string() + ": header column '" + csv.header[c] +
                                         "' does not match channel '" + channels[c].name + "'");
        t.data = parse_data_columns(csv, channels.size(), file.string());
        ds.trials.push_back(std::move(t));
    }
    std::sort(ds.trials.begin(), ds.trials.end(),
              [](const Trial& a, const Trial& b) { return a.trial_id < b.trial_id; });
    ds.validate();
    return ds;
}

Dataset ingest_continuous(const fs::path& dir, const json& meta) {
    const double rate = meta.at("sample_rate_hz").get<double>();
    const auto channels = parse_channels(meta);
    std::vector<LabeledRecording> recs;
    for (const auto& entry : meta.at("recordings")) {
        LabeledRecording rec;
        rec.recording_id = entry.at("recording_id").get<std::string>();
        rec.subject_id = entry.at("subject_id").get<std::string>();
        rec.sample_rate_hz = rate;
        rec.channels = channels;
        const fs::path file = dir / "recordings" / (rec.recording_id + ".csv");
        CsvTable csv = read_csv(file);
        if (csv.header.size() != channels.size() + 1 || csv.header.back() != "label")
            throw std::runtime_error(file.string() +
                                     ": continuous recordings need channel columns plus a trailing 'label'");
        rec.data = parse_data_columns(csv, channels.size(), file.string());
        for (const auto& row : csv.rows) rec.step_labels.push_back(row.back());
        recs.push_back(std::move(rec));
    }
    return standardize(meta.at("name").get<std::string>(), recs);
}

}  // namespace

Dataset ingest_dataset(const fs::path& dir, DatasetFormat format) {
    if (!fs::exists(dir)) throw std::runtime_error("dataset path does not exist: " + dir.string());
    json meta = load_metadata(dir);
    if (format == DatasetFormat::auto_detect)
        format = meta.contains("recordings") ? DatasetFormat::continuous : DatasetFormat::canonical;
    if (format == DatasetFormat::continuous) return ingest_continuous(dir, meta);
    return ingest_canonical(dir, meta);
}

void emit_dataset(const Dataset& ds, const fs::path& dir) {
    ds.validate();
    fs::create_directories(dir / "trials");

    json meta;
    meta["name"] = ds.name;
    meta["sample_rate_hz"] = ds.trials.empty() ? 0.0 : ds.trials.front().sample_rate_hz;
    json chans = json::array();
    if (!ds.trials.empty())
        for (const auto& c : ds.trials.front().channels)
            chans.push_back({{"name", c.name},
                             {"sensor_kind", to_string(c.sensor_kind)},
                             {"body_position", c.body_position}});
    meta["channels"] = chans;
    meta["activities"] = ds.activity_set;
    meta["subjects"] = ds.subject_set;
    json trials = json::array();
    for (const auto& t : ds.trials)
        trials.push_back({{"trial_id", t.trial_id},
                          {"subject_id", t.subject_id},
                          {"activity_label", t.activity_label}});
    meta["trials"] = trials;

    std::ofstream out(dir / "dataset.json");
    out << meta.dump(2) << "\n";

    for (const auto& t : ds.trials) {
        std::ofstream f(dir / "trials" / (t.trial_id + ".csv"));
        for (std::size_t c = 0; c < t.channels.size(); ++c)
            f << (c ? "," : "") << t.channels[c].name;
        f << "\n";
        for (std::size_t r = 0; r < t.data.rows; ++r) {
            for (std::size_t c = 0; c < t.data.cols; ++c)
                f << (c ? "," : "") << format_double(t.data.at(r, c));
            f << "\n";
        }
    }
}

}  // namespace harbench
