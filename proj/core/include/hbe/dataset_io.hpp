#pragma once

#include "hbe/kernels.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hbe {

enum class DataFormat { Csv, Bin };

DataFormat parse_data_format(const std::string& name);

// csv: one point per row, comma separated, optional non-numeric header row.
// bin: "KDS1", n and d as u32 little-endian, then n*d little-endian f64 row-major.
PointSet read_csv(std::istream& in, std::optional<double> R = std::nullopt);
PointSet read_bin(std::istream& in, std::optional<double> R = std::nullopt);
void write_csv(std::ostream& out, const PointSet& P);
void write_bin(std::ostream& out, const PointSet& P);

PointSet load_dataset(const std::string& path, DataFormat format, std::optional<double> R = std::nullopt);
void save_dataset(const std::string& path, const PointSet& P, DataFormat format);

// Vectors: csv is one value per line; bin is "KDV1", n as u32, then n f64.
std::vector<double> read_vector_csv(std::istream& in);
std::vector<double> read_vector_bin(std::istream& in);
void write_vector_csv(std::ostream& out, std::span<const double> v);
void write_vector_bin(std::ostream& out, std::span<const double> v);
std::vector<double> load_vector(const std::string& path, DataFormat format);
void save_vector(const std::string& path, std::span<const double> v, DataFormat format);

// %.17g, round-trips every double.
std::string format_double(double v);

} // namespace hbe
