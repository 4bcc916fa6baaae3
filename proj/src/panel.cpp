#include "timino/panel.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace timino {

int TimeSeriesPanel::index_of(const std::string& name) const {
    for (int i = 0; i < series_count(); ++i) {
        if (names[static_cast<size_t>(i)] == name) return i;
    }
    throw std::invalid_argument("unknown series name: " + name);
}

TimeSeriesPanel make_panel(Eigen::MatrixXd values, std::vector<std::string> names) {
    if (values.rows() < 1 || values.cols() < 1) {
        throw std::invalid_argument("panel must have at least one row and one column");
    }
    if (static_cast<Eigen::Index>(names.size()) != values.cols()) {
        throw std::invalid_argument("panel needs exactly one name per column");
    }
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw std::invalid_argument("series names must be non-empty");
        if (!seen.insert(n).second) throw std::invalid_argument("duplicate series name: " + n);
    }
    if (!values.allFinite()) {
        throw std::invalid_argument("panel entries must be finite (missing values are rejected)");
    }
    return TimeSeriesPanel{std::move(values), std::move(names)};
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trimmed(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

TimeSeriesPanel read_csv(std::istream& in) {
    std::string line;
    int row_no = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++row_no;
        const std::string stripped = trimmed(line);
        if (stripped.empty()) {
            if (row_no == 1) throw std::invalid_argument("csv row 1: empty header");
            continue;  // tolerate a trailing blank line
        }
        auto cells = split_csv_row(stripped);
        if (row_no == 1) {
            for (auto& c : cells) names.push_back(trimmed(c));
            continue;
        }
        if (cells.size() != names.size()) {
            throw std::invalid_argument("csv row " + std::to_string(row_no) + ": expected " +
                                        std::to_string(names.size()) + " cells, got " +
                                        std::to_string(cells.size()));
        }
        std::vector<double> vals;
        vals.reserve(cells.size());
        for (const auto& c : cells) {
            const std::string t = trimmed(c);
            try {
                size_t pos = 0;
                const double v = std::stod(t, &pos);
                if (pos != t.size()) throw std::invalid_argument(t);
                vals.push_back(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("csv row " + std::to_string(row_no) +
                                            ": cannot parse value '" + t + "'");
            }
            if (!std::isfinite(vals.back())) {
                throw std::invalid_argument("csv row " + std::to_string(row_no) +
                                            ": non-finite value");
            }
        }
        rows.push_back(std::move(vals));
    }
    if (names.empty()) throw std::invalid_argument("csv row 1: missing header");
    if (rows.empty()) throw std::invalid_argument("csv row 2: no observations");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(names.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c < names.size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return make_panel(std::move(m), std::move(names));
}

TimeSeriesPanel read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open csv file: " + path);
    return read_csv(in);
}

void write_csv(const TimeSeriesPanel& panel, std::ostream& out) {
    for (size_t i = 0; i < panel.names.size(); ++i) {
        if (i) out << ',';
        out << panel.names[i];
    }
    out << '\n';
    char buf[64];
    for (int t = 0; t < panel.length(); ++t) {
        for (int i = 0; i < panel.series_count(); ++i) {
            if (i) out << ',';
            std::snprintf(buf, sizeof(buf), "%.6g", panel.values(t, i));
            out << buf;
        }
        out << '\n';
    }
}

void write_csv_file(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open csv file for writing: " + path);
    write_csv(panel, out);
}

}  // namespace timino
