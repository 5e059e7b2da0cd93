#include "eitlab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace eitlab {

std::string format_csv_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open for reading: " + path.string());
    return in;
}

std::vector<double> parse_row(const std::string& line, std::size_t expected,
                              const std::filesystem::path& path, int lineno) {
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw io_error(path.string() + ":" + std::to_string(lineno) +
                           ": not a number: '" + cell + "'");
        }
    }
    if (values.size() != expected)
        throw io_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(expected) + " columns");
    return values;
}

} // namespace

void write_spectrum_csv(const SpectrumTable& table, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "delta_hz,reflectivity,transmittivity,photon_number\n";
    for (const auto& row : table.rows)
        out << format_csv_value(row.delta / two_pi) << ','
            << format_csv_value(row.reflectivity) << ','
            << format_csv_value(row.transmittivity) << ','
            << format_csv_value(row.photon_number) << '\n';
}

SpectrumTable read_spectrum_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw io_error(path.string() + ": empty file");
    SpectrumTable table;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto v = parse_row(line, 4, path, lineno);
        table.rows.push_back({v[0] * two_pi, v[1], v[2], v[3]});
    }
    return table;
}

void write_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "t_us,reflectivity,photon_number\n";
    for (const auto& row : trace.rows)
        out << format_csv_value(s_to_us(row.t)) << ','
            << format_csv_value(row.reflectivity) << ','
            << format_csv_value(row.photon_number) << '\n';
}

DynamicsTrace read_trace_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw io_error(path.string() + ": empty file");
    DynamicsTrace trace;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto v = parse_row(line, 3, path, lineno);
        trace.rows.push_back({us_to_s(v[0]), v[1], v[2]});
    }
    return trace;
}

void write_table_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows,
                     const std::filesystem::path& path) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? ',' : '\n');
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_csv_value(row[i]) << (i + 1 < row.size() ? ',' : '\n');
    }
}

} // namespace eitlab
