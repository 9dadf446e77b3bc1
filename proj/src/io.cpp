#include "qshadow/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace qshadow::io {

namespace {

using json = nlohmann::json;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

struct ByteReader {
  const unsigned char* p;
  const unsigned char* end;

  void need(std::size_t n, const char* what) {
    if (static_cast<std::size_t>(end - p) < n) {
      throw IoError(std::string("truncated file while reading ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                      (static_cast<std::uint32_t>(p[2]) << 16) |
                      (static_cast<std::uint32_t>(p[3]) << 24);
    p += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    return std::bit_cast<double>(bits);
  }
  float f32(const char* what) {
    need(4, what);
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    return std::bit_cast<float>(bits);
  }
};

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in && !in.eof()) throw IoError("read failed: " + path.string());
  return ss.str();
}

std::string format_value(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::vector<std::vector<double>> read_csv_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "nan" || cell == "NaN") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        row.push_back(std::stod(cell));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged CSV matrix: " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw IoError("empty CSV matrix: " + path.string());
  return rows;
}

}  // namespace

void write_field(const field::ComplexField& f, const fs::path& path) {
  std::string bytes;
  bytes.reserve(14 + f.amp.size() * 16);
  bytes += "QSFLD1";
  put_u32(bytes, static_cast<std::uint32_t>(f.grid.width));
  put_u32(bytes, static_cast<std::uint32_t>(f.grid.height));
  for (const auto& a : f.amp) {
    put_f64(bytes, a.real());
    put_f64(bytes, a.imag());
  }
  write_bytes(path, bytes);
}

field::ComplexField read_field(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  if (bytes.size() < 6 || bytes.compare(0, 6, "QSFLD1") != 0) {
    throw IoError("not a QSFLD1 file: " + path.string());
  }
  ByteReader r{reinterpret_cast<const unsigned char*>(bytes.data()) + 6,
               reinterpret_cast<const unsigned char*>(bytes.data()) + bytes.size()};
  const std::uint32_t w = r.u32("width");
  const std::uint32_t h = r.u32("height");
  field::ComplexField f(Grid(static_cast<int>(w), static_cast<int>(h)));
  for (auto& a : f.amp) {
    const double re = r.f64("amplitude");
    const double im = r.f64("amplitude");
    a = {re, im};
  }
  return f;
}

void write_field_csv(const field::ComplexField& f, const fs::path& real_path,
                     const fs::path& imag_path) {
  auto write_part = [&](const fs::path& path, bool real) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (int y = 0; y < f.grid.height; ++y) {
      for (int x = 0; x < f.grid.width; ++x) {
        if (x) out << ',';
        const auto a = f.at(x, y);
        out << format_value(real ? a.real() : a.imag());
      }
      out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
  };
  write_part(real_path, true);
  write_part(imag_path, false);
}

field::ComplexField read_field_csv(const fs::path& real_path, const fs::path& imag_path) {
  const auto re = read_csv_matrix(real_path);
  const auto im = read_csv_matrix(imag_path);
  if (re.size() != im.size() || re.front().size() != im.front().size()) {
    throw IoError("real/imag CSV shapes differ");
  }
  field::ComplexField f(Grid(static_cast<int>(re.front().size()), static_cast<int>(re.size())));
  for (int y = 0; y < f.grid.height; ++y) {
    for (int x = 0; x < f.grid.width; ++x) f.at(x, y) = {re[y][x], im[y][x]};
  }
  return f;
}

void write_map_csv(const ScalarMap& m, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (int y = 0; y < m.grid.height; ++y) {
    for (int x = 0; x < m.grid.width; ++x) {
      if (x) out << ',';
      const std::size_t i = m.grid.index(x, y);
      out << (m.valid[i] ? format_value(m.values[i]) : "nan");
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ScalarMap read_map_csv(const fs::path& path, MapRole role) {
  const auto rows = read_csv_matrix(path);
  ScalarMap m(Grid(static_cast<int>(rows.front().size()), static_cast<int>(rows.size())), role);
  for (int y = 0; y < m.grid.height; ++y) {
    for (int x = 0; x < m.grid.width; ++x) {
      const double v = rows[y][x];
      const std::size_t i = m.grid.index(x, y);
      if (std::isnan(v)) {
        m.valid[i] = 0;
        m.values[i] = 0.0;
      } else {
        m.values[i] = v;
      }
    }
  }
  return m;
}

void write_map_pgm16(const ScalarMap& m, const fs::path& path, const std::string& config_hash) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    if (m.valid[i] == 0) continue;
    lo = std::min(lo, m.values[i]);
    hi = std::max(hi, m.values[i]);
  }
  const bool any_valid = hi >= lo;
  const double scale = (any_valid && hi > lo) ? 65535.0 / (hi - lo) : 0.0;

  std::string bytes = "P5\n" + std::to_string(m.grid.width) + " " +
                      std::to_string(m.grid.height) + "\n65535\n";
  bytes.reserve(bytes.size() + m.values.size() * 2);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    std::uint16_t v = 0;
    if (m.valid[i] != 0 && any_valid) {
      v = static_cast<std::uint16_t>(std::lround((m.values[i] - lo) * scale));
    }
    // PGM 16-bit samples are most-significant byte first.
    bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
    bytes.push_back(static_cast<char>(v & 0xFF));
  }
  write_bytes(path, bytes);

  json sidecar{
      {"role", to_string(m.role)},
      {"min", any_valid ? lo : 0.0},
      {"max", any_valid ? hi : 0.0},
      {"maxval", 65535},
      {"valid_count", m.valid_count()},
      {"invalid_value", 0},
  };
  if (m.role == MapRole::Decibels) sidecar["scale"] = "dB10log10";
  if (!config_hash.empty()) sidecar["config_hash"] = config_hash;
  write_bytes(fs::path(path.string() + ".json"), sidecar.dump(2) + "\n");
}

void write_cluster(const mc::KineticCluster& cluster, const fs::path& path,
                   const std::string& scene_hash) {
  const Grid& g = cluster.port1.grid;
  std::string bytes;
  bytes.reserve(18 + cluster.port1.data.size() * 8);
  bytes += "QSCLU1";
  put_u32(bytes, static_cast<std::uint32_t>(g.width));
  put_u32(bytes, static_cast<std::uint32_t>(g.height));
  put_u32(bytes, static_cast<std::uint32_t>(cluster.port1.frames));
  for (double v : cluster.port1.data) put_f32(bytes, static_cast<float>(v));
  for (double v : cluster.port2.data) put_f32(bytes, static_cast<float>(v));
  write_bytes(path, bytes);

  json sidecar{
      {"master_seed", cluster.lineage.master_seed},
      {"cluster_index", cluster.lineage.cluster_index},
      {"width", g.width},
      {"height", g.height},
      {"frames", cluster.port1.frames},
  };
  if (!scene_hash.empty()) sidecar["scene_hash"] = scene_hash;
  write_bytes(fs::path(path.string() + ".json"), sidecar.dump(2) + "\n");
}

mc::KineticCluster read_cluster(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  if (bytes.size() < 6 || bytes.compare(0, 6, "QSCLU1") != 0) {
    throw IoError("not a QSCLU1 file: " + path.string());
  }
  ByteReader r{reinterpret_cast<const unsigned char*>(bytes.data()) + 6,
               reinterpret_cast<const unsigned char*>(bytes.data()) + bytes.size()};
  const std::uint32_t w = r.u32("width");
  const std::uint32_t h = r.u32("height");
  const std::uint32_t frames = r.u32("frames");
  if (frames == 0) throw IoError("cluster with zero frames: " + path.string());
  Grid g(static_cast<int>(w), static_cast<int>(h));
  mc::KineticCluster c;
  c.port1 = mc::FrameStack(g, static_cast<int>(frames));
  c.port2 = mc::FrameStack(g, static_cast<int>(frames));
  for (auto& v : c.port1.data) v = r.f32("port1");
  for (auto& v : c.port2.data) v = r.f32("port2");
  return c;
}

void write_cross_section_csv(const CrossSection& cs, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "x,value\n";
  for (std::size_t i = 0; i < cs.size(); ++i) {
    out << (cs.x_start + static_cast<int>(i)) << ',';
    out << (cs.valid[i] ? format_value(cs.values[i]) : "nan") << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace qshadow::io
