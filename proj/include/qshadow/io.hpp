#pragma once

#include <filesystem>
#include <string>

#include "qshadow/field.hpp"
#include "qshadow/montecarlo.hpp"
#include "qshadow/types.hpp"

namespace qshadow::io {

namespace fs = std::filesystem;

// Complex field container: "QSFLD1", u32 width, u32 height, then row-major
// interleaved float64 (re, im), everything little-endian.
void write_field(const field::ComplexField& f, const fs::path& path);
field::ComplexField read_field(const fs::path& path);

/// Field as a pair of CSV matrices (real and imaginary parts).
void write_field_csv(const field::ComplexField& f, const fs::path& real_path,
                     const fs::path& imag_path);
field::ComplexField read_field_csv(const fs::path& real_path, const fs::path& imag_path);

/// CSV matrix of a scalar map; invalid pixels serialize as "nan".
void write_map_csv(const ScalarMap& m, const fs::path& path);
ScalarMap read_map_csv(const fs::path& path, MapRole role);

/// 16-bit PGM with linear scaling over the valid range, plus a JSON sidecar
/// ("<path>.json") recording role, min/max, validity count, and the
/// "dB10log10" scale tag for decibel maps. Invalid pixels render as 0.
void write_map_pgm16(const ScalarMap& m, const fs::path& path,
                     const std::string& config_hash = {});

// Cluster container: "QSCLU1", u32 width, height, frames, then port1 frames
// followed by port2 frames as row-major float32 (little-endian), plus a JSON
// sidecar with seed lineage and params.
void write_cluster(const mc::KineticCluster& cluster, const fs::path& path,
                   const std::string& scene_hash = {});
mc::KineticCluster read_cluster(const fs::path& path);

/// Cross-section as two-column CSV (x, value); gaps as "nan".
void write_cross_section_csv(const CrossSection& cs, const fs::path& path);

/// FNV-1a 64-bit hash rendered as 16 hex digits; used for config hashes.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace qshadow::io
