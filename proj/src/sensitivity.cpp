#include "biokg/sensitivity.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "biokg/common.hpp"

namespace biokg {

std::string_view to_string(VarianceMode mode) {
    return mode == VarianceMode::Population ? "population" : "sample";
}

VarianceMode parse_variance_mode(std::string_view text) {
    if (text == "population") return VarianceMode::Population;
    if (text == "sample") return VarianceMode::Sample;
    throw ConfigError("variance mode must be 'population' or 'sample', got '" + std::string(text) + "'");
}

double variance(std::span<const double> xs, VarianceMode mode) {
    const std::size_t minimum = mode == VarianceMode::Sample ? 2 : 1;
    if (xs.size() < minimum)
        throw ConfigError("variance: need at least " + std::to_string(minimum) + " points for " +
                          std::string(to_string(mode)) + " mode");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double denom =
        mode == VarianceMode::Population ? static_cast<double>(xs.size()) : static_cast<double>(xs.size() - 1);
    return ss / denom;
}

SensitivityReport scheme_sensitivity(const SensitivityInput& input, VarianceMode mode) {
    if (input.scheme_names.size() != input.scores.size())
        throw ConfigError("sensitivity: scheme count does not match score rows");
    if (input.checkpoints.size() < 2) throw ConfigError("sensitivity: need at least 2 checkpoints");
    for (std::size_t i = 0; i < input.scores.size(); ++i) {
        if (input.scores[i].size() != input.checkpoints.size())
            throw ConfigError("sensitivity: row '" + input.scheme_names[i] + "' has " +
                              std::to_string(input.scores[i].size()) + " scores, expected " +
                              std::to_string(input.checkpoints.size()));
    }

    SensitivityReport report;
    report.variance_mode = mode;
    std::size_t best = 0;
    for (std::size_t i = 0; i < input.scores.size(); ++i) {
        const double v = variance(input.scores[i], mode);
        report.per_scheme_variance.push_back({input.scheme_names[i], v});
        if (v > report.per_scheme_variance[best].variance) best = i;
    }
    report.selected_scheme = report.per_scheme_variance.empty() ? "" : report.per_scheme_variance[best].scheme_name;
    return report;
}

SensitivityInput recompute_from_field_scores(
    const std::vector<std::pair<std::string, EvaluationReport>>& checkpoint_reports,
    const std::vector<WeightScheme>& schemes) {
    if (checkpoint_reports.empty()) throw ConfigError("sensitivity: no checkpoint reports");

    auto id_set = [](const EvaluationReport& report) {
        std::set<std::string> ids;
        for (const auto& record : report.per_record) ids.insert(record.record_id);
        return ids;
    };
    const auto first_ids = id_set(checkpoint_reports.front().second);
    for (const auto& [label, report] : checkpoint_reports) {
        if (id_set(report) != first_ids)
            throw ConfigError("sensitivity: checkpoint '" + label + "' covers a different test set");
    }

    SensitivityInput input;
    for (const auto& [label, report] : checkpoint_reports) {
        (void)report;
        input.checkpoints.push_back(label);
    }
    for (const auto& scheme : schemes) {
        input.scheme_names.push_back(scheme.name);
        std::vector<double> row;
        for (const auto& [label, report] : checkpoint_reports) {
            (void)label;
            const auto means = field_means(report);
            double score = 0.0;
            for (std::size_t i = 0; i < kFieldCount; ++i) score += scheme.weights[i] * means[i];
            row.push_back(score);
        }
        input.scores.push_back(std::move(row));
    }
    return input;
}

SensitivityInput load_score_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("score matrix: cannot open " + path);

    auto split_tabs = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, '\t')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            cells.push_back(cell);
        }
        return cells;
    };

    SensitivityInput input;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_tabs(line);
        if (!have_header) {
            if (cells.size() < 3) throw ConfigError("score matrix: header needs a scheme column and >=2 checkpoints");
            input.checkpoints.assign(cells.begin() + 1, cells.end());
            have_header = true;
            continue;
        }
        if (cells.size() != input.checkpoints.size() + 1)
            throw ConfigError("score matrix line " + std::to_string(line_no) + ": expected " +
                              std::to_string(input.checkpoints.size() + 1) + " cells, got " +
                              std::to_string(cells.size()));
        input.scheme_names.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            try {
                row.push_back(std::stod(cells[i]));
            } catch (const std::exception&) {
                throw ConfigError("score matrix line " + std::to_string(line_no) + ": not a number: " + cells[i]);
            }
        }
        input.scores.push_back(std::move(row));
    }
    if (!have_header || input.scheme_names.empty()) throw ConfigError("score matrix: no data rows");
    return input;
}

nlohmann::ordered_json sensitivity_to_json(const SensitivityReport& report) {
    nlohmann::ordered_json doc;
    doc["variance_mode"] = std::string(to_string(report.variance_mode));
    doc["selected_scheme"] = report.selected_scheme;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.per_scheme_variance)
        rows.push_back({{"scheme", row.scheme_name}, {"variance", row.variance}});
    doc["per_scheme_variance"] = std::move(rows);
    return doc;
}

std::string render_sensitivity_table(const SensitivityInput& input, const SensitivityReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    std::size_t name_width = std::string("Scheme").size();
    for (const auto& name : input.scheme_names) name_width = std::max(name_width, name.size());

    out << std::left << std::setw(static_cast<int>(name_width) + 2) << "Scheme";
    for (const auto& label : input.checkpoints) out << std::right << std::setw(12) << label;
    out << std::right << std::setw(12) << "Variance" << "\n";
    for (std::size_t i = 0; i < input.scheme_names.size(); ++i) {
        out << std::left << std::setw(static_cast<int>(name_width) + 2) << input.scheme_names[i];
        for (double score : input.scores[i]) out << std::right << std::setw(12) << score;
        out << std::right << std::setw(12) << report.per_scheme_variance[i].variance;
        if (input.scheme_names[i] == report.selected_scheme) out << "  <- selected";
        out << "\n";
    }
    out << "\nVariance mode: " << to_string(report.variance_mode) << "\n";
    out << "Selected scheme: " << report.selected_scheme << "\n";
    return out.str();
}

}  // namespace biokg
