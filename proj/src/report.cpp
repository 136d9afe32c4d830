#include "harbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace harbench {

using nlohmann::ordered_json;

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    throw std::invalid_argument("unknown report format: " + s);
}

namespace {

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
    return buf;
}

ordered_json row_to_json(const ResultRow& r) {
    ordered_json j;
    j["method"] = r.method;
    j["dataset"] = r.dataset;
    j["combination"] = r.combination;
    j["feasible"] = r.feasible;
    j["note"] = r.note;
    j["mean_accuracy"] = r.mean_accuracy;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["mean_macro_f"] = r.mean_macro_f;
    j["folds"] = r.folds;
    ordered_json per_fold = ordered_json::array();
    for (const auto& f : r.per_fold)
        per_fold.push_back({{"fold", f.fold_id}, {"accuracy", f.accuracy}, {"macro_f", f.macro_f}});
    j["per_fold"] = per_fold;
    j["leakage"] = {{"overlap_pairs", r.leakage.overlap_pairs},
                    {"same_trial_pairs", r.leakage.same_trial_pairs},
                    {"same_subject_pairs", r.leakage.same_subject_pairs}};
    j["wall_time_s"] = r.wall_time_s;
    j["config_hash"] = r.config_hash;
    return j;
}

ResultRow row_from_json(const ordered_json& j) {
    ResultRow r;
    r.method = j.at("method").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.combination = j.at("combination").get<std::string>();
    r.feasible = j.at("feasible").get<bool>();
    r.note = j.at("note").get<std::string>();
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.ci_low = j.at("ci_low").get<double>();
    r.ci_high = j.at("ci_high").get<double>();
    r.mean_macro_f = j.at("mean_macro_f").get<double>();
    r.folds = j.at("folds").get<std::size_t>();
    for (const auto& f : j.at("per_fold"))
        r.per_fold.push_back({f.at("fold").get<std::size_t>(), f.at("accuracy").get<double>(),
                              f.at("macro_f").get<double>()});
    r.leakage.overlap_pairs = j.at("leakage").at("overlap_pairs").get<std::size_t>();
    r.leakage.same_trial_pairs = j.at("leakage").at("same_trial_pairs").get<std::size_t>();
    r.leakage.same_subject_pairs = j.at("leakage").at("same_subject_pairs").get<std::size_t>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.config_hash = j.at("config_hash").get<std::string>();
    return r;
}

const char* kCsvHeader =
    "method,dataset,combination,feasible,mean_accuracy,ci_low,ci_high,mean_macro_f,folds,"
    "overlap_pairs,same_trial_pairs,same_subject_pairs,wall_time_s,config_hash,note";

std::string to_csv(const ResultTable& table) {
    std::ostringstream os;
    os << kCsvHeader << "\n";
    for (const auto& r : table.rows) {
        os << r.method << "," << r.dataset << "," << r.combination << ","
           << (r.feasible ? "true" : "false") << ",";
        if (r.feasible)
            os << fmt_full(r.mean_accuracy) << "," << fmt_full(r.ci_low) << ","
               << fmt_full(r.ci_high) << "," << fmt_full(r.mean_macro_f);
        else
            os << "-,-,-,-";
        os << "," << r.folds << "," << r.leakage.overlap_pairs << ","
           << r.leakage.same_trial_pairs << "," << r.leakage.same_subject_pairs << ","
           << fmt_full(r.wall_time_s) << "," << r.config_hash << "," << r.note << "\n";
    }
    return os.str();
}

std::string to_markdown(const ResultTable& table) {
    // per-combination tables: method rows, dataset columns, mean column
    std::vector<std::string> combos;
    std::set<std::string> datasets_set, methods_set;
    for (const auto& r : table.rows) {
        if (std::find(combos.begin(), combos.end(), r.combination) == combos.end())
            combos.push_back(r.combination);
        datasets_set.insert(r.dataset);
        methods_set.insert(r.method);
    }
    std::vector<std::string> datasets(datasets_set.begin(), datasets_set.end());

    // keep the conventional method order where possible
    std::vector<std::string> methods;
    for (Method m : paper_methods())
        if (methods_set.count(to_string(m))) methods.push_back(to_string(m));
    for (const auto& m : methods_set)
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);

    std::map<std::string, const ResultRow*> cell;
    for (const auto& r : table.rows) cell[r.combination + "|" + r.method + "|" + r.dataset] = &r;

    std::ostringstream os;
    for (const auto& combo : combos) {
        os << "## " << combo << "\n\n";
        os << "| Method |";
        for (const auto& d : datasets) os << " " << d << " |";
        os << " Mean Accuracy |\n";
        os << "|---|";
        for (std::size_t i = 0; i < datasets.size(); ++i) os << "---|";
        os << "---|\n";
        for (const auto& m : methods) {
            os << "| " << m << " |";
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& d : datasets) {
                auto it = cell.find(combo + "|" + m + "|" + d);
                if (it == cell.end() || !it->second->feasible) {
                    os << " - |";
                } else {
                    const ResultRow& r = *it->second;
                    os << " " << fmt_pct(r.mean_accuracy) << " [" << fmt_pct(r.ci_low) << ", "
                       << fmt_pct(r.ci_high) << "] |";
                    sum += r.mean_accuracy;
                    ++n;
                }
            }
            os << " " << (n ? fmt_pct(sum / static_cast<double>(n)) : "-") << " |\n";
        }
        os << "\n";
    }
    return os.str();
}

std::vector<std::string> split_line(const std::string& line) {
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

}  // namespace

std::string emit_report(const ResultTable& table, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: {
            ordered_json j;
            j["rows"] = ordered_json::array();
            for (const auto& r : table.rows) j["rows"].push_back(row_to_json(r));
            return j.dump(2) + "\n";
        }
        case ReportFormat::csv: return to_csv(table);
        case ReportFormat::markdown: return to_markdown(table);
    }
    throw std::invalid_argument("unknown report format");
}

ResultTable table_from_json(const std::string& text) {
    ResultTable t;
    ordered_json j = ordered_json::parse(text);
    for (const auto& rj : j.at("rows")) t.rows.push_back(row_from_json(rj));
    return t;
}

ResultTable table_from_csv(const std::string& text) {
    ResultTable t;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty csv");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() < 15) throw std::invalid_argument("malformed csv row: " + line);
        ResultRow r;
        r.method = f[0];
        r.dataset = f[1];
        r.combination = f[2];
        r.feasible = f[3] == "true";
        if (r.feasible) {
            r.mean_accuracy = std::stod(f[4]);
            r.ci_low = std::stod(f[5]);
            r.ci_high = std::stod(f[6]);
            r.mean_macro_f = std::stod(f[7]);
        }
        r.folds = std::stoul(f[8]);
        r.leakage.overlap_pairs = std::stoul(f[9]);
        r.leakage.same_trial_pairs = std::stoul(f[10]);
        r.leakage.same_subject_pairs = std::stoul(f[11]);
        r.wall_time_s = std::stod(f[12]);
        r.config_hash = f[13];
        r.note = f[14];
        t.rows.push_back(std::move(r));
    }
    return t;
}

std::string per_fold_csv(const ResultTable& table) {
    std::ostringstream os;
    os << "method,dataset,combination,fold,accuracy,macro_f\n";
    for (const auto& r : table.rows)
        for (const auto& f : r.per_fold)
            os << r.method << "," << r.dataset << "," << r.combination << "," << f.fold_id << ","
               << fmt_full(f.accuracy) << "," << fmt_full(f.macro_f) << "\n";
    return os.str();
}

std::string lda_points_csv(const Matrix& projected, const std::vector<std::string>& labels) {
    if (projected.rows != labels.size())
        throw std::invalid_argument("lda_points_csv: size mismatch");
    std::ostringstream os;
    for (std::size_t c = 0; c < projected.cols; ++c) os << "comp" << c + 1 << ",";
    os << "label\n";
    for (std::size_t r = 0; r < projected.rows; ++r) {
        for (std::size_t c = 0; c < projected.cols; ++c) os << fmt_full(projected.at(r, c)) << ",";
        os << labels[r] << "\n";
    }
    return os.str();
}

}  // namespace harbench
