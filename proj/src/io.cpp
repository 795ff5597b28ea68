#include "hidalgo/io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hidalgo {

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_int(long long v) { return std::to_string(v); }

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t checksum_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  std::array<char, 65536> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h = fnv1a(buf.data(), static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

std::uint64_t checksum_matrix(const Matrix& m, std::uint64_t h) {
  const std::int64_t rows = m.rows(), cols = m.cols();
  h = fnv1a(&rows, sizeof rows, h);
  h = fnv1a(&cols, sizeof cols, h);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double v = m(i, j);
      h = fnv1a(&v, sizeof v, h);
    }
  return h;
}

std::string checksum_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

namespace {

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad numeric field '" + s + "' in " + where);
  }
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw std::runtime_error(path + ": missing header row");
  const bool has_ids = header[0] == "id" || header[0] == "ID" || header[0] == "Id";
  const std::size_t d = header.size() - (has_ids ? 1 : 0);
  if (d == 0) throw std::runtime_error(path + ": no value columns");

  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    std::size_t first = 0;
    if (has_ids) {
      ids.push_back(fields[0]);
      first = 1;
    }
    for (std::size_t j = first; j < fields.size(); ++j)
      values.push_back(parse_double(fields[j], path + ":" + std::to_string(lineno)));
  }
  const Index n = static_cast<Index>(values.size() / d);
  Dataset data;
  data.points.resize(n, static_cast<Index>(d));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < static_cast<Index>(d); ++j)
      data.points(i, j) = values[static_cast<std::size_t>(i) * d + j];
  if (has_ids) {
    data.ids = std::move(ids);
  } else {
    for (Index i = 0; i < n; ++i) data.ids.push_back(std::to_string(i + 1));
  }
  validate(data);
  return data;
}

Dataset read_dataset_json(const std::string& path) {
  const auto text = read_text_file(path);
  auto j = nlohmann::json::parse(text);
  if (j.is_object() && j.contains("points")) j = j["points"];
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error(path + ": expected a JSON array of arrays");
  const Index n = static_cast<Index>(j.size());
  const Index d = static_cast<Index>(j[0].size());
  Matrix points(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != d)
      throw std::runtime_error(path + ": ragged rows in JSON matrix");
    for (Index k = 0; k < d; ++k) points(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  auto data = make_dataset(std::move(points));
  validate(data);
  return data;
}

Dataset read_dataset(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return read_dataset_json(path);
  return read_dataset_csv(path);
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& column_names) {
  std::vector<std::string> header = column_names;
  if (header.empty())
    for (Index j = 0; j < data.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
  write_matrix_csv(path, data.points, header, &data.ids);
}

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& header,
                      const std::vector<std::string>* row_ids,
                      const std::string& id_column, const std::string& preamble) {
  if (static_cast<Index>(header.size()) != m.cols())
    throw std::invalid_argument("header size does not match matrix columns");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!preamble.empty()) out << preamble;
  if (row_ids) out << id_column << ',';
  for (std::size_t j = 0; j < header.size(); ++j)
    out << header[j] << (j + 1 < header.size() ? "," : "\n");
  for (Index i = 0; i < m.rows(); ++i) {
    if (row_ids) out << (*row_ids)[static_cast<std::size_t>(i)] << ',';
    for (Index j = 0; j < m.cols(); ++j)
      out << format_double(m(i, j)) << (j + 1 < m.cols() ? "," : "\n");
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header,
                       std::vector<std::string>* row_ids) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::string> head;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    head = split_csv_line(line);
    break;
  }
  if (head.empty()) throw std::runtime_error(path + ": missing header row");
  const bool has_ids = !head.empty() && (head[0] == "id" || head[0] == "ID");
  const std::size_t d = head.size() - (has_ids ? 1 : 0);
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != head.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row");
    std::size_t first = 0;
    if (has_ids) {
      if (row_ids) row_ids->push_back(fields[0]);
      first = 1;
    }
    for (std::size_t j = first; j < fields.size(); ++j)
      values.push_back(parse_double(fields[j], path + ":" + std::to_string(lineno)));
  }
  if (header) {
    header->assign(head.begin() + (has_ids ? 1 : 0), head.end());
  }
  const Index n = static_cast<Index>(values.size() / d);
  Matrix m(n, static_cast<Index>(d));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < static_cast<Index>(d); ++j)
      m(i, j) = values[static_cast<std::size_t>(i) * d + j];
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace hidalgo
