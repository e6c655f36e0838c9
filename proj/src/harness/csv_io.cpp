#include "flmgof/harness/csv_io.hpp"

#include "flmgof/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace flmgof::harness {

namespace {

[[noreturn]] void parse_fail(const std::string& file, int line, const std::string& what) {
    fail(ErrorKind::kParseError, file + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& file, int line) {
    const std::string f = trim(field);
    if (f.empty()) parse_fail(file, line, "empty field");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (end != f.c_str() + f.size() || errno == ERANGE) parse_fail(file, line, "non-numeric field '" + f + "'");
    return v;
}

std::vector<double> parse_row(const std::string& text, const std::string& file, int line) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(parse_number(field, file, line));
    if (!text.empty() && text.back() == ',') parse_fail(file, line, "trailing comma");
    return out;
}

std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Dataset parse_csv(std::istream& curves, std::istream& responses, const std::string& curves_name,
                  const std::string& responses_name) {
    std::string line;
    int lineno = 0;
    std::vector<double> nodes;
    while (nodes.empty() && std::getline(curves, line)) {
        ++lineno;
        if (!trim(line).empty()) nodes = parse_row(trim(line), curves_name, lineno);
    }
    if (nodes.empty()) parse_fail(curves_name, lineno, "missing header row of grid nodes");
    const int header_line = lineno;
    if (nodes.front() != 0.0) parse_fail(curves_name, header_line, "header must start at 0");
    if (nodes.back() != 1.0) parse_fail(curves_name, header_line, "header must end at 1");
    for (std::size_t j = 1; j < nodes.size(); ++j)
        if (!(nodes[j] > nodes[j - 1])) parse_fail(curves_name, header_line, "header nodes must be strictly increasing");
    GridPtr grid;
    try {
        grid = make_grid(nodes);
    } catch (const Error& e) {
        parse_fail(curves_name, header_line, e.what());
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(curves, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        auto row = parse_row(t, curves_name, lineno);
        if (row.size() != nodes.size())
            parse_fail(curves_name, lineno,
                       "row has " + std::to_string(row.size()) + " values, header has " + std::to_string(nodes.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) parse_fail(curves_name, lineno, "no curve rows");

    std::vector<double> y;
    int rline = 0;
    while (std::getline(responses, line)) {
        ++rline;
        const std::string t = trim(line);
        if (t.empty()) continue;
        y.push_back(parse_number(t, responses_name, rline));
    }
    if (y.empty()) parse_fail(responses_name, rline, "no responses");
    if (y.size() != rows.size())
        parse_fail(responses_name, rline,
                   std::to_string(y.size()) + " responses for " + std::to_string(rows.size()) + " curves");

    Dataset data;
    data.grid = grid;
    data.curves.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < nodes.size(); ++j) data.curves(i, j) = rows[i][j];
    data.responses = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return data;
}

Dataset ingest_csv(const std::string& curves_path, const std::string& response_path) {
    std::ifstream c(curves_path);
    if (!c) fail(ErrorKind::kIoError, "cannot open " + curves_path);
    std::ifstream r(response_path);
    if (!r) fail(ErrorKind::kIoError, "cannot open " + response_path);
    return parse_csv(c, r, curves_path, response_path);
}

void write_curves_csv(const Dataset& data, std::ostream& out) {
    const auto& t = data.grid->nodes();
    for (Eigen::Index j = 0; j < t.size(); ++j) out << (j ? "," : "") << format(t[j]);
    out << "\n";
    for (Eigen::Index i = 0; i < data.curves.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.curves.cols(); ++j) out << (j ? "," : "") << format(data.curves(i, j));
        out << "\n";
    }
}

void write_responses_csv(const Dataset& data, std::ostream& out) {
    for (Eigen::Index i = 0; i < data.responses.size(); ++i) out << format(data.responses[i]) << "\n";
}

void write_dataset_csv(const Dataset& data, const std::string& curves_path, const std::string& response_path) {
    std::ofstream c(curves_path);
    if (!c) fail(ErrorKind::kIoError, "cannot write " + curves_path);
    write_curves_csv(data, c);
    std::ofstream r(response_path);
    if (!r) fail(ErrorKind::kIoError, "cannot write " + response_path);
    write_responses_csv(data, r);
    if (!c || !r) fail(ErrorKind::kIoError, "write failed for " + curves_path);
}

} // namespace flmgof::harness
