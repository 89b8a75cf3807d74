#include "idxsel/index_config.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "idxsel/errors.hpp"

namespace idxsel {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::BTree: return "btree";
    case StructureKind::Hash: return "hash";
    case StructureKind::LsmTree: return "lsm";
  }
  return "?";
}

StructureKind parse_structure(std::string_view name) {
  const auto n = lower(trim(name));
  if (n == "btree" || n == "b-tree") return StructureKind::BTree;
  if (n == "hash") return StructureKind::Hash;
  if (n == "lsm" || n == "lsmtree" || n == "lsm-tree") return StructureKind::LsmTree;
  throw ConfigError("unknown index structure '" + std::string(name) + "'");
}

ParamGrid::ParamGrid()
    : ParamGrid({{
          {ParamAxis{"fanout", {16, 64, 256}}},
          {ParamAxis{"bucket_count", {1024, 4096, 16384}}},
          {ParamAxis{"memtable_bytes", {65536, 262144, 1048576}}, ParamAxis{"size_ratio", {4, 10}}},
      }}) {}

ParamGrid::ParamGrid(std::array<std::vector<ParamAxis>, kStructureCount> axes,
                     std::array<bool, kStructureCount> enabled)
    : axes_(std::move(axes)), enabled_(enabled) {
  if (std::none_of(enabled_.begin(), enabled_.end(), [](bool e) { return e; })) {
    throw ConfigError("parameter grid enables no structure");
  }
  validate();
}

void ParamGrid::validate() const {
  for (auto kind : kAllStructures) {
    for (const auto& axis : axes(kind)) {
      if (axis.values.empty()) {
        throw ConfigError("parameter axis '" + axis.name + "' is empty");
      }
      for (std::size_t i = 1; i < axis.values.size(); ++i) {
        if (axis.values[i] <= axis.values[i - 1]) {
          throw ConfigError("parameter axis '" + axis.name + "' is not strictly increasing");
        }
      }
    }
  }
}

std::size_t ParamGrid::max_axis_count() const {
  std::size_t m = 0;
  for (auto kind : kAllStructures) m = std::max(m, axis_count(kind));
  return m;
}

std::size_t ParamGrid::total_axis_count() const {
  std::size_t total = 0;
  for (auto kind : kAllStructures) total += axis_count(kind);
  return total;
}

std::size_t ParamGrid::slot_offset(StructureKind kind) const {
  std::size_t offset = 0;
  for (auto k : kAllStructures) {
    if (k == kind) break;
    offset += axis_count(k);
  }
  return offset;
}

std::size_t ParamGrid::config_count(StructureKind kind) const {
  if (!enabled(kind)) return 0;
  std::size_t n = 1;
  for (const auto& axis : axes(kind)) n *= axis.values.size();
  return n;
}

std::size_t ParamGrid::config_count() const {
  std::size_t n = 0;
  for (auto kind : kAllStructures) n += config_count(kind);
  return n;
}

std::int64_t ParamGrid::value(StructureKind kind, std::size_t axis, std::size_t index) const {
  const auto& ax = axes(kind);
  if (axis >= ax.size() || index >= ax[axis].values.size()) {
    throw ConfigError("parameter index out of range for " + std::string(to_string(kind)));
  }
  return ax[axis].values[index];
}

std::size_t ParamGrid::axis_index(StructureKind kind, std::string_view axis_name) const {
  const auto& ax = axes(kind);
  for (std::size_t i = 0; i < ax.size(); ++i) {
    if (ax[i].name == axis_name) return i;
  }
  throw ConfigError("structure " + std::string(to_string(kind)) + " has no parameter '" +
                    std::string(axis_name) + "'");
}

void validate_config(const IndexConfig& config, const ParamGrid& grid) {
  if (!grid.enabled(config.kind)) {
    throw ConfigError("structure " + std::string(to_string(config.kind)) + " is not in the grid");
  }
  const auto& axes = grid.axes(config.kind);
  if (config.params.size() != axes.size()) {
    throw ConfigError("config for " + std::string(to_string(config.kind)) + " has " +
                      std::to_string(config.params.size()) + " params, expected " +
                      std::to_string(axes.size()));
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (config.params[i] >= axes[i].values.size()) {
      throw ConfigError("parameter index " + std::to_string(config.params[i]) +
                        " out of range for axis '" + axes[i].name + "'");
    }
  }
}

IndexConfig default_config(StructureKind kind, const ParamGrid& grid) {
  IndexConfig c{kind, {}};
  for (const auto& axis : grid.axes(kind)) c.params.push_back((axis.values.size() - 1) / 2);
  return c;
}

std::vector<IndexConfig> enumerate_configs(const ParamGrid& grid) {
  std::vector<IndexConfig> out;
  out.reserve(grid.config_count());
  for (auto kind : kAllStructures) {
    const auto& axes = grid.axes(kind);
    for (std::size_t ord = 0; ord < grid.config_count(kind); ++ord) {
      IndexConfig c{kind, std::vector<std::size_t>(axes.size(), 0)};
      std::size_t rest = ord;
      for (std::size_t i = axes.size(); i-- > 0;) {
        c.params[i] = rest % axes[i].values.size();
        rest /= axes[i].values.size();
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::size_t config_ordinal(const IndexConfig& config, const ParamGrid& grid) {
  validate_config(config, grid);
  std::size_t base = 0;
  for (auto k : kAllStructures) {
    if (k == config.kind) break;
    base += grid.config_count(k);
  }
  std::size_t offset = 0;
  const auto& axes = grid.axes(config.kind);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    offset = offset * axes[i].values.size() + config.params[i];
  }
  return base + offset;
}

IndexConfig parse_config(std::string_view text, const ParamGrid& grid) {
  text = trim(text);
  const auto colon = text.find(':');
  const auto kind = parse_structure(text.substr(0, colon));
  IndexConfig config = default_config(kind, grid);
  if (colon == std::string_view::npos) return config;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected <axis>=<value> in '" + std::string(item) + "'");
    }
    const auto axis = grid.axis_index(kind, trim(item.substr(0, eq)));
    const auto value_text = trim(item.substr(eq + 1));
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
    if (ec != std::errc{} || ptr != value_text.data() + value_text.size()) {
      throw ConfigError("bad parameter value '" + std::string(value_text) + "'");
    }
    const auto& values = grid.axes(kind)[axis].values;
    const auto it = std::find(values.begin(), values.end(), value);
    if (it == values.end()) {
      throw ConfigError("value " + std::to_string(value) + " is not on the grid for '" +
                        grid.axes(kind)[axis].name + "'");
    }
    config.params[axis] = static_cast<std::size_t>(it - values.begin());
  }
  return config;
}

std::string format_config(const IndexConfig& config, const ParamGrid& grid) {
  validate_config(config, grid);
  std::string out(to_string(config.kind));
  const auto& axes = grid.axes(config.kind);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    out += i == 0 ? ':' : ',';
    out += axes[i].name + "=" + std::to_string(axes[i].values[config.params[i]]);
  }
  return out;
}

}  // namespace idxsel
