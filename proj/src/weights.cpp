#include "biokg/weights.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "biokg/common.hpp"

namespace biokg {

void validate_scheme(const WeightScheme& scheme) {
    double sum = 0.0;
    for (double w : scheme.weights) {
        if (!(w >= 0.0 && w <= 1.0))
            throw ConfigError("weight scheme '" + scheme.name + "': weights must lie in [0,1]");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-3)
        throw ConfigError("weight scheme '" + scheme.name + "': weights sum to " + std::to_string(sum) +
                          ", expected 1 within 1e-3");
}

const std::vector<WeightScheme>& builtin_weight_schemes() {
    static const std::vector<WeightScheme> schemes = [] {
        std::vector<WeightScheme> out = {
            {"Average Distribution",
             {0.07143, 0.07143, 0.07143, 0.07143, 0.07143, 0.07143, 0.07143, 0.07143, 0.07143, 0.07143, 0.07143,
              0.07143, 0.07143, 0.07143}},
            {"Property Importance",
             {0.10, 0.05, 0.05, 0.05, 0.06, 0.05, 0.07, 0.07, 0.13, 0.09, 0.07, 0.05, 0.08, 0.08}},
            {"Random 1",
             {0.0346, 0.1038, 0.0774, 0.0809, 0.1084, 0.0907, 0.0371, 0.0255, 0.1152, 0.0761, 0.0661, 0.0682,
              0.1056, 0.0104}},
            {"Random 2",
             {0.1035, 0.0085, 0.1038, 0.0592, 0.0428, 0.0563, 0.0894, 0.0645, 0.0796, 0.1097, 0.0684, 0.0939,
              0.0966, 0.0238}},
            {"Random 3",
             {0.0997, 0.0155, 0.0435, 0.0330, 0.0990, 0.1118, 0.0200, 0.0035, 0.0096, 0.1010, 0.1405, 0.0396,
              0.1439, 0.1394}},
            {"Random 4",
             {0.1122, 0.0521, 0.0870, 0.1035, 0.0929, 0.0583, 0.0506, 0.0024, 0.0095, 0.0437, 0.1212, 0.0695,
              0.0554, 0.1417}},
            {"Random 5",
             {0.1188, 0.1260, 0.0890, 0.0899, 0.0429, 0.0235, 0.0862, 0.0863, 0.1093, 0.0632, 0.0738, 0.0347,
              0.0393, 0.0171}},
            {"Random 6",
             {0.0439, 0.1039, 0.0946, 0.1077, 0.0474, 0.0705, 0.0042, 0.0552, 0.1096, 0.0660, 0.0679, 0.0759,
              0.0567, 0.0965}},
            {"Random 7",
             {0.0373, 0.1246, 0.0360, 0.0728, 0.0398, 0.0369, 0.1323, 0.0011, 0.1476, 0.0616, 0.0153, 0.0799,
              0.1356, 0.0792}},
            {"Random 8",
             {0.0132, 0.1447, 0.1108, 0.1199, 0.1318, 0.0691, 0.0646, 0.0025, 0.0429, 0.0182, 0.1354, 0.0615,
              0.0426, 0.0428}},
        };
        for (const auto& scheme : out) validate_scheme(scheme);
        return out;
    }();
    return schemes;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, '\t')) cells.push_back(cell);
    return cells;
}

std::string strip(const std::string& text) {
    std::size_t begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<WeightScheme> load_weight_schemes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("weight schemes: cannot open " + path);
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (strip(line).empty() || strip(line)[0] == '#') continue;
        auto cells = split_tabs(line);
        if (header.empty()) {
            header = cells;
        } else {
            rows.push_back(cells);
        }
    }
    if (header.size() < 3) throw ConfigError("weight schemes: header must list No., Component and scheme names");
    if (rows.size() != kFieldCount)
        throw ConfigError("weight schemes: expected " + std::to_string(kFieldCount) + " component rows, got " +
                          std::to_string(rows.size()));

    std::vector<WeightScheme> schemes;
    for (std::size_t col = 2; col < header.size(); ++col) schemes.push_back({strip(header[col]), {}});
    for (std::size_t row = 0; row < rows.size(); ++row) {
        if (rows[row].size() != header.size())
            throw ConfigError("weight schemes: row " + std::to_string(row + 1) + " has " +
                              std::to_string(rows[row].size()) + " cells, expected " + std::to_string(header.size()));
        for (std::size_t col = 2; col < header.size(); ++col) {
            try {
                schemes[col - 2].weights[row] = std::stod(strip(rows[row][col]));
            } catch (const std::exception&) {
                throw ConfigError("weight schemes: row " + std::to_string(row + 1) + ", column '" +
                                  strip(header[col]) + "': not a number: " + rows[row][col]);
            }
        }
    }
    for (const auto& scheme : schemes) validate_scheme(scheme);
    return schemes;
}

std::string normalize_scheme_name(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (c == ' ' || c == '-' || c == '_' || c == '\t') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

const WeightScheme* find_scheme(const std::vector<WeightScheme>& schemes, std::string_view name) {
    const std::string wanted = normalize_scheme_name(name);
    for (const auto& scheme : schemes)
        if (normalize_scheme_name(scheme.name) == wanted) return &scheme;
    return nullptr;
}

}  // namespace biokg
