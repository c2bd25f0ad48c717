#pragma once

// Binary field files: a fixed little-endian header followed by the values
// as IEEE-754 doubles in storage order, plus a JSON sidecar "<path>.json".
//
//   offset  size  content
//        0     4  magic "KHTF"
//        4     4  u32 format version (1)
//        8     4  u32 n
//       12     4  u32 N
//       16     4  u32 kind (1 potential, 2 density)
//       20     4  u32 frozen-axis bit mask
//       24     8  u64 value count
//       32        values

#include <cstdint>
#include <filesystem>
#include <string>

#include "khess/torus.hpp"

namespace khess {

enum class FieldKind : std::uint32_t { Potential = 1, Density = 2 };

inline constexpr std::uint32_t kFieldFormatVersion = 1;

/// Writes the binary file and its sidecar. `metadata` must be a JSON object
/// (or empty); it is copied into the sidecar under "metadata".
void write_field(const std::filesystem::path& path, const GridFunction& field,
                 const std::string& metadata_json = "");
void write_field(const std::filesystem::path& path, const DensityField& field,
                 const std::string& metadata_json = "");

/// Throws IoError on a missing file, bad magic, version or kind, or a
/// truncated payload.
GridFunction read_potential(const std::filesystem::path& path);
DensityField read_density(const std::filesystem::path& path);

}  // namespace khess
