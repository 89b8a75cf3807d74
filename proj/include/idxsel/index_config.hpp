#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace idxsel {

enum class StructureKind : std::uint8_t { BTree = 0, Hash = 1, LsmTree = 2 };

inline constexpr std::size_t kStructureCount = 3;
inline constexpr std::array<StructureKind, kStructureCount> kAllStructures = {
    StructureKind::BTree, StructureKind::Hash, StructureKind::LsmTree};

std::string_view to_string(StructureKind kind);
StructureKind parse_structure(std::string_view name);

struct ParamAxis {
  std::string name;
  std::vector<std::int64_t> values;  // strictly increasing
};

// Discrete tuning space per structure. The default axes are an artifact
// choice; nothing upstream enumerates them.
class ParamGrid {
 public:
  ParamGrid();  // default grid
  explicit ParamGrid(std::array<std::vector<ParamAxis>, kStructureCount> axes,
                     std::array<bool, kStructureCount> enabled = {true, true, true});

  bool enabled(StructureKind kind) const { return enabled_[static_cast<std::size_t>(kind)]; }

  const std::vector<ParamAxis>& axes(StructureKind kind) const {
    return axes_[static_cast<std::size_t>(kind)];
  }
  std::size_t axis_count(StructureKind kind) const { return axes(kind).size(); }
  std::size_t max_axis_count() const;
  // Sum of axis counts over all structures; the width of the param slot block.
  std::size_t total_axis_count() const;
  // Offset of kind's first axis inside the param slot block.
  std::size_t slot_offset(StructureKind kind) const;
  // Number of distinct configs of one kind (product of axis lengths, 0 when
  // the kind is disabled).
  std::size_t config_count(StructureKind kind) const;
  std::size_t config_count() const;

  std::int64_t value(StructureKind kind, std::size_t axis, std::size_t index) const;
  std::size_t axis_index(StructureKind kind, std::string_view axis_name) const;

  friend bool operator==(const ParamGrid&, const ParamGrid&) = default;

 private:
  void validate() const;
  std::array<std::vector<ParamAxis>, kStructureCount> axes_;
  std::array<bool, kStructureCount> enabled_{true, true, true};
};

struct IndexConfig {
  StructureKind kind = StructureKind::BTree;
  std::vector<std::size_t> params;  // one index per axis of kind

  friend bool operator==(const IndexConfig&, const IndexConfig&) = default;
  friend auto operator<=>(const IndexConfig&, const IndexConfig&) = default;
};

// Throws ConfigError when params do not fit the grid.
void validate_config(const IndexConfig& config, const ParamGrid& grid);

// Midpoint of every axis, (len - 1) / 2.
IndexConfig default_config(StructureKind kind, const ParamGrid& grid);

// Every legal config, ordered by kind then lexicographically by params.
std::vector<IndexConfig> enumerate_configs(const ParamGrid& grid);

// Position of config inside enumerate_configs(grid).
std::size_t config_ordinal(const IndexConfig& config, const ParamGrid& grid);

// `<kind>:<axis>=<value>[,<axis>=<value>]`, omitted axes take the midpoint.
// Values are actual parameter values (fanout=64), not axis indices.
IndexConfig parse_config(std::string_view text, const ParamGrid& grid);
std::string format_config(const IndexConfig& config, const ParamGrid& grid);

}  // namespace idxsel
