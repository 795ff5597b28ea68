#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hidalgo/types.hpp"

namespace hidalgo {

/// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);
std::string format_int(long long v);

/// FNV-1a 64-bit over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull);
std::uint64_t checksum_file(const std::string& path);
std::uint64_t checksum_matrix(const Matrix& m, std::uint64_t h = 0xcbf29ce484222325ull);
std::string checksum_hex(std::uint64_t h);

/// CSV with a header row and one observation per line. Lines starting with
/// '#' are skipped. If the first header field is "id" the column supplies
/// row labels, otherwise labels are "1".."N".
Dataset read_dataset_csv(const std::string& path);

/// JSON array of arrays (or {"points": [[...]]}).
Dataset read_dataset_json(const std::string& path);

/// Dispatch on extension (.json vs anything else).
Dataset read_dataset(const std::string& path);

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& column_names = {});

/// Generic numeric matrix CSV. `preamble` lines (already '#'-prefixed) go
/// before the header.
void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& header,
                      const std::vector<std::string>* row_ids = nullptr,
                      const std::string& id_column = "id",
                      const std::string& preamble = "");

Matrix read_matrix_csv(const std::string& path,
                       std::vector<std::string>* header = nullptr,
                       std::vector<std::string>* row_ids = nullptr);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace hidalgo
