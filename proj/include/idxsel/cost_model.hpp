#pragma once

#include <filesystem>
#include <string>

#include "idxsel/index_config.hpp"
#include "idxsel/workload.hpp"

namespace idxsel {

// Abstract per-operation costs in microseconds as a function of a structure's
// parameters and the current record count n. The constants are calibration
// values chosen so the default-parameter winners per single-operation
// workload follow the published B-Tree/Hash/LSM ordering; they are not
// measurements of this machine. All shapes are strictly positive and
// non-decreasing in n.
struct CostModel {
  int version = 1;

  // B-tree: height log_f(n) (at least 1), in-node binary search, page writes
  // whose cost grows with node width.
  double btree_node = 1.0;
  double btree_compare = 0.05;
  double btree_write_base = 10.0;
  double btree_write_per_entry = 0.05;
  double btree_split = 5.0;
  double btree_leaf_item = 0.02;

  // Hash: chain walk of expected length 1 + n / (2 * buckets) for hits.
  double hash_base = 1.5;
  double hash_probe = 0.5;
  double hash_write = 12.0;
  // Collect-and-sort scan: a pass over the bucket array plus an n log2 n
  // sort term scaled down to in-cache cost.
  double hash_scan_bucket = 1e-4;
  double hash_scan_sort = 3e-5;
  double hash_scan_item = 0.02;

  // LSM: levels = log_T(1 + data_bytes / memtable_bytes); a lookup probes
  // the memtable and 1 + levels runs; writes pay memtable insertion plus
  // leveled write amplification 1 + levels * (T + 1) / 2.
  double lsm_memtable = 0.5;
  double lsm_run_probe = 80.0;
  double lsm_put = 1.0;
  double lsm_compact = 0.2;
  double lsm_scan_item = 0.1;

  double op_cost(const IndexConfig& config, const ParamGrid& grid, OpKind op, double n,
                 std::uint32_t scan_len, std::uint32_t value_size) const;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

std::string to_json(const CostModel& model);
CostModel cost_model_from_json(const std::string& text);
CostModel load_cost_model(const std::filesystem::path& path);

}  // namespace idxsel
