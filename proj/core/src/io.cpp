#include "mgap/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mgap/errors.hpp"

namespace mgap {

namespace {

constexpr char kBinMagic[4] = {'M', 'G', 'A', 'P'};
constexpr std::uint32_t kBinVersion = 1;

std::string lower_ext(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  require(is.good(), Errc::parse_error, path + ": truncated binary header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

float read_f32(std::istream& is, const std::string& path) {
  std::uint32_t bits = read_u32(is, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    require(pos == s.size(), Errc::parse_error, where + ": trailing characters in '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Errc::parse_error, where + ": not a number: '" + s + "'");
  }
}

EmbeddingSet read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::not_found, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::parse_error, path + ": empty file");

  std::vector<std::string> header = split_csv_line(line);
  require(header.size() >= 3 && header[0] == "id" && header[1] == "modality", Errc::parse_error,
          path + ": expected header id,modality,v0,...");
  std::size_t dim = header.size() - 2;

  std::vector<double> values;
  std::string modality;
  bool mixed = false;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++rows;
    std::vector<std::string> f = split_csv_line(line);
    require(f.size() == dim + 2, Errc::parse_error,
            path + ": row " + std::to_string(rows) + " has " + std::to_string(f.size() - 2) +
                " values under a d=" + std::to_string(dim) + " header");
    if (rows == 1)
      modality = f[1];
    else if (f[1] != modality)
      mixed = true;
    for (std::size_t j = 0; j < dim; ++j)
      values.push_back(parse_double(f[j + 2], path + ": row " + std::to_string(rows)));
  }
  require(rows >= 1, Errc::parse_error, path + ": no data rows");

  Mat m(rows, dim);
  m.a = std::move(values);
  return EmbeddingSet::from_mat(std::move(m), mixed ? "mixed" : modality, false);
}

EmbeddingSet read_jsonl(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::not_found, "cannot open " + path);

  std::vector<double> values;
  std::string modality;
  bool mixed = false;
  std::size_t dim = 0, rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse_error, path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    require(rec.contains("v") && rec["v"].is_array(), Errc::parse_error,
            path + ": line " + std::to_string(lineno) + ": missing vector field 'v'");
    ++rows;
    std::string mod = rec.value("modality", std::string("unlabeled"));
    if (rows == 1)
      modality = mod;
    else if (mod != modality)
      mixed = true;
    const auto& v = rec["v"];
    if (rows == 1) dim = v.size();
    require(v.size() == dim, Errc::dimension_mismatch,
            path + ": line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                " values, got " + std::to_string(v.size()));
    for (const auto& x : v) {
      require(x.is_number(), Errc::parse_error,
              path + ": line " + std::to_string(lineno) + ": non-numeric entry");
      values.push_back(x.get<double>());
    }
  }
  require(rows >= 1, Errc::parse_error, path + ": no records");

  Mat m(rows, dim);
  m.a = std::move(values);
  return EmbeddingSet::from_mat(std::move(m), mixed ? "mixed" : modality, false);
}

EmbeddingSet read_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::not_found, "cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, kBinMagic, 4) == 0, Errc::parse_error,
          path + ": bad magic bytes");
  std::uint32_t version = read_u32(in, path);
  require(version == kBinVersion, Errc::parse_error,
          path + ": unsupported version " + std::to_string(version));
  std::uint32_t count = read_u32(in, path);
  std::uint32_t dim = read_u32(in, path);
  std::uint32_t mod_len = read_u32(in, path);
  require(count >= 1 && dim >= 1, Errc::parse_error, path + ": empty embedding file");

  std::string modality(mod_len, '\0');
  if (mod_len > 0) {
    in.read(modality.data(), mod_len);
    require(in.good(), Errc::parse_error, path + ": truncated modality field");
  }

  Mat m(count, dim);
  for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] = static_cast<double>(read_f32(in, path));
  return EmbeddingSet::from_mat(std::move(m), modality, false);
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  require(out.good(), Errc::io_error, "cannot write " + path);
  return out;
}

void write_csv(const EmbeddingSet& set, const std::string& path) {
  std::ofstream out = open_out(path, false);
  out << "id,modality";
  for (std::size_t j = 0; j < set.dim(); ++j) out << ",v" << j;
  out << "\n";
  for (std::size_t i = 0; i < set.n(); ++i) {
    out << i << ',' << set.modality;
    for (std::size_t j = 0; j < set.dim(); ++j) out << ',' << format_full(set.row(i)[j]);
    out << "\n";
  }
  require(out.good(), Errc::io_error, "write failed: " + path);
}

void write_jsonl(const EmbeddingSet& set, const std::string& path) {
  std::ofstream out = open_out(path, false);
  for (std::size_t i = 0; i < set.n(); ++i) {
    out << "{\"id\":" << i << ",\"modality\":" << nlohmann::json(set.modality).dump() << ",\"v\":[";
    for (std::size_t j = 0; j < set.dim(); ++j) {
      if (j) out << ',';
      out << format_full(set.row(i)[j]);
    }
    out << "]}\n";
  }
  require(out.good(), Errc::io_error, "write failed: " + path);
}

void write_bin(const EmbeddingSet& set, const std::string& path) {
  std::ofstream out = open_out(path, true);
  out.write(kBinMagic, 4);
  write_u32(out, kBinVersion);
  write_u32(out, static_cast<std::uint32_t>(set.n()));
  write_u32(out, static_cast<std::uint32_t>(set.dim()));
  write_u32(out, static_cast<std::uint32_t>(set.modality.size()));
  out.write(set.modality.data(), static_cast<std::streamsize>(set.modality.size()));
  for (std::size_t i = 0; i < set.n(); ++i)
    for (std::size_t j = 0; j < set.dim(); ++j)
      write_f32(out, static_cast<float>(set.row(i)[j]));
  require(out.good(), Errc::io_error, "write failed: " + path);
}

}  // namespace

FileFormat detect_format(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == ".csv") return FileFormat::csv;
  if (ext == ".jsonl") return FileFormat::jsonl;
  if (ext == ".bin") return FileFormat::bin;

  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::not_found, "cannot open " + path);
  char head[4] = {0, 0, 0, 0};
  in.read(head, 4);
  if (in.gcount() == 4 && std::memcmp(head, kBinMagic, 4) == 0) return FileFormat::bin;
  for (std::streamsize i = 0; i < in.gcount(); ++i) {
    if (head[i] == ' ' || head[i] == '\t') continue;
    return head[i] == '{' ? FileFormat::jsonl : FileFormat::csv;
  }
  return FileFormat::csv;
}

EmbeddingSet read_embeddings(const std::string& path) {
  switch (detect_format(path)) {
    case FileFormat::csv: return read_csv(path);
    case FileFormat::jsonl: return read_jsonl(path);
    case FileFormat::bin: return read_bin(path);
  }
  fail(Errc::parse_error, "unreachable format");
}

void write_embeddings(const EmbeddingSet& set, const std::string& path, FileFormat format) {
  require(set.n() >= 1 && set.dim() >= 1, Errc::invalid_config, "nothing to write");
  switch (format) {
    case FileFormat::csv: write_csv(set, path); return;
    case FileFormat::jsonl: write_jsonl(set, path); return;
    case FileFormat::bin: write_bin(set, path); return;
  }
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
  std::string ext = lower_ext(path);
  FileFormat fmt = FileFormat::csv;
  if (ext == ".jsonl") fmt = FileFormat::jsonl;
  else if (ext == ".bin") fmt = FileFormat::bin;
  write_embeddings(set, path, fmt);
}

void write_landscape_csv(const LandscapeCurve& curve, const std::string& path,
                         const std::string& control_column) {
  std::ofstream out = open_out(path, false);
  out << control_column << ",remaining_gap,loss,is_global_min,is_local_min\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const LandscapePoint& p = curve.points[i];
    bool local = std::find(curve.local_min_indices.begin(), curve.local_min_indices.end(), i) !=
                 curve.local_min_indices.end();
    out << format_full(p.control) << ',' << format_full(p.remaining_gap) << ','
        << format_full(p.loss) << ',' << (i == curve.global_min_index ? 1 : 0) << ','
        << (local ? 1 : 0) << "\n";
  }
  require(out.good(), Errc::io_error, "write failed: " + path);
}

void write_layer_curve_csv(const LayerCurve& curve, const std::string& path) {
  std::ofstream out = open_out(path, false);
  out << "layer,mean_cos,min_cos,max_cos,pair_count,sampled_pairs,subsampled\n";
  for (std::size_t l = 0; l < curve.per_layer.size(); ++l) {
    const ConeStats& s = curve.per_layer[l];
    out << l << ',' << format_full(s.mean_cos) << ',' << format_full(s.min_cos) << ','
        << format_full(s.max_cos) << ',' << s.pair_count << ',' << s.sampled_pairs << ','
        << (s.subsampled ? 1 : 0) << "\n";
  }
  require(out.good(), Errc::io_error, "write failed: " + path);
}

void write_train_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path, false);
  out << "step,loss,gap_distance\n";
  for (const TrainStep& s : trace.steps)
    out << s.step << ',' << format_full(s.loss) << ',' << format_full(s.gap_distance) << "\n";
  require(out.good(), Errc::io_error, "write failed: " + path);
}

void write_matrix_csv(const Mat& m, const std::string& path) {
  std::ofstream out = open_out(path, false);
  for (std::size_t j = 0; j < m.cols; ++j) out << (j ? "," : "") << 'c' << j;
  out << "\n";
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out << (j ? "," : "") << format_full(m.at(i, j));
    out << "\n";
  }
  require(out.good(), Errc::io_error, "write failed: " + path);
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace mgap
