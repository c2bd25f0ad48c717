#include "khess/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "khess/error.hpp"

namespace khess {

namespace {

constexpr std::array<char, 4> kMagic{'K', 'H', 'T', 'F'};

template <class T>
T to_little(T v) noexcept {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

template <class T>
void put(std::ofstream& out, T v) {
  const T le = to_little(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(Errc::IoError, "truncated field file " + path.string());
  return to_little(v);
}

void write_any(const std::filesystem::path& path, const TorusGrid& grid,
               std::span<const double> values, FieldKind kind, const std::string& metadata) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kFieldFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.n()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.points_per_axis()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
    put<std::uint32_t>(out, grid.frozen_mask());
    put<std::uint64_t>(out, values.size());
    for (double v : values) put<double>(out, v);
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
  }
  nlohmann::ordered_json side;
  side["format"] = "KHTF";
  side["version"] = kFieldFormatVersion;
  side["kind"] = kind == FieldKind::Potential ? "potential" : "density";
  side["n"] = grid.n();
  side["N"] = grid.points_per_axis();
  side["frozen_mask"] = grid.frozen_mask();
  std::vector<std::string> axes;
  for (int a = 0; a < grid.axis_count(); ++a) axes.push_back(TorusGrid::axis_name(a));
  side["axis_order"] = axes;
  side["active_axes"] = grid.active_axes();
  side["count"] = values.size();
  side["byte_order"] = "little";
  side["value_type"] = "float64";
  if (!metadata.empty()) {
    auto meta = nlohmann::ordered_json::parse(metadata, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) {
      throw Error(Errc::InvalidArgument, "field metadata must be a JSON object");
    }
    side["metadata"] = meta;
  }
  std::ofstream js(path.string() + ".json", std::ios::trunc);
  if (!js) throw Error(Errc::IoError, "cannot write sidecar for " + path.string());
  js << side.dump(2) << '\n';
}

std::pair<TorusGrid, std::vector<double>> read_any(const std::filesystem::path& path,
                                                   FieldKind expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(Errc::IoError, path.string() + " is not a field file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFieldFormatVersion) {
    throw Error(Errc::IoError, "unsupported field format version " + std::to_string(version));
  }
  const auto n = static_cast<int>(get<std::uint32_t>(in, path));
  const auto points = static_cast<int>(get<std::uint32_t>(in, path));
  const auto kind = get<std::uint32_t>(in, path);
  const auto frozen = get<std::uint32_t>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  if (kind != static_cast<std::uint32_t>(expected)) {
    throw Error(Errc::IoError, "field kind " + std::to_string(kind) + " in " + path.string());
  }
  std::vector<int> active;
  for (int a = 0; a < 2 * n && a < 32; ++a) {
    if ((frozen & (1u << a)) == 0) active.push_back(a);
  }
  TorusGrid grid(n, points, active);
  if (count != grid.size()) throw Error(Errc::IoError, "value count does not match the grid");
  std::vector<double> values(count);
  for (auto& v : values) v = get<double>(in, path);
  return {grid, std::move(values)};
}

}  // namespace

void write_field(const std::filesystem::path& path, const GridFunction& field,
                 const std::string& metadata_json) {
  write_any(path, field.grid(), field.values(), FieldKind::Potential, metadata_json);
}

void write_field(const std::filesystem::path& path, const DensityField& field,
                 const std::string& metadata_json) {
  write_any(path, field.grid(), field.values(), FieldKind::Density, metadata_json);
}

GridFunction read_potential(const std::filesystem::path& path) {
  auto [grid, values] = read_any(path, FieldKind::Potential);
  return GridFunction(grid, std::move(values));
}

DensityField read_density(const std::filesystem::path& path) {
  auto [grid, values] = read_any(path, FieldKind::Density);
  return DensityField(grid, std::move(values));
}

}  // namespace khess
