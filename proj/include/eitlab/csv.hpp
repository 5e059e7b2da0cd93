#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eitlab/dynamics.hpp"
#include "eitlab/spectrum.hpp"

namespace eitlab {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All CSV output uses '.' decimals and scientific notation with 12
// significant digits, one header line, comma separator.
std::string format_csv_value(double v);

// Header: delta_hz,reflectivity,transmittivity,photon_number
void write_spectrum_csv(const SpectrumTable& table, const std::filesystem::path& path);
SpectrumTable read_spectrum_csv(const std::filesystem::path& path);

// Header: t_us,reflectivity,photon_number
void write_trace_csv(const DynamicsTrace& trace, const std::filesystem::path& path);
DynamicsTrace read_trace_csv(const std::filesystem::path& path);

// Generic table writer for scan summaries.
void write_table_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows,
                     const std::filesystem::path& path);

} // namespace eitlab
