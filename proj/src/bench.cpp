#include "idxsel/bench.hpp"

#include <chrono>

#include "idxsel/errors.hpp"

namespace idxsel {

std::string_view to_string(BenchMode mode) {
  return mode == BenchMode::Simulated ? "sim" : "real";
}

BenchMode parse_bench_mode(std::string_view text) {
  if (text == "sim" || text == "simulated") return BenchMode::Simulated;
  if (text == "real" || text == "measured") return BenchMode::Measured;
  throw ConfigError("unknown bench mode '" + std::string(text) + "' (want sim|real)");
}

std::vector<Record> preload_records(std::uint64_t record_count, std::uint32_t value_size) {
  std::vector<Record> records;
  records.reserve(record_count);
  for (std::uint64_t i = 0; i < record_count; ++i) {
    records.emplace_back(Key::from_id(i), make_value(i, value_size));
  }
  return records;
}

BenchResult Bench::run(const IndexConfig& config, const OpStream& stream, BenchMode mode) const {
  validate_config(config, grid_);
  if (stream.ops.empty()) throw UsageError("bench: empty op stream");
  return mode == BenchMode::Simulated ? simulate(config, stream) : measure(config, stream);
}

BenchResult Bench::simulate(const IndexConfig& config, const OpStream& stream) const {
  BenchResult result;
  result.mode = BenchMode::Simulated;
  result.per_kind_counts = stream.counts();

  // Per-op cost depends on the kind and n only; n moves on inserts.
  std::array<double, kOpKindCount> cost{};
  const auto refresh = [&](double n) {
    for (auto kind : kAllOpKinds) {
      cost[static_cast<std::size_t>(kind)] =
          model_.op_cost(config, grid_, kind, n, stream.scan_len, stream.value_size);
    }
  };
  double n = static_cast<double>(stream.record_count);
  refresh(n);
  double micros = 0.0;
  for (const auto& op : stream.ops) {
    micros += cost[static_cast<std::size_t>(op.kind)];
    if (op.kind == OpKind::Insert) refresh(n += 1.0);
  }
  result.elapsed_seconds = micros * 1e-6;
  result.throughput = static_cast<double>(stream.ops.size()) / result.elapsed_seconds;
  return result;
}

BenchResult Bench::measure(const IndexConfig& config, const OpStream& stream) const {
  BenchResult result;
  result.mode = BenchMode::Measured;
  result.per_kind_counts = stream.counts();

  const auto records = preload_records(stream.record_count, stream.value_size);
  auto index = index_build(config, records, grid_, options_);

  std::vector<Value> payloads;
  payloads.reserve(stream.ops.size());
  for (const auto& op : stream.ops) {
    payloads.push_back(op.value_seed != 0 ? make_value(op.value_seed, stream.value_size) : Value{});
  }

  std::size_t sink = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < stream.ops.size(); ++i) {
    const auto& op = stream.ops[i];
    const Key key = Key::from_id(op.key);
    switch (op.kind) {
      case OpKind::Read:
        sink += index->read(key).has_value();
        break;
      case OpKind::Update:
        sink += index->update(key, std::move(payloads[i]));
        break;
      case OpKind::Scan:
        sink += index->scan(key, op.scan_len).size();
        break;
      case OpKind::Insert:
        index->insert(key, std::move(payloads[i]));
        break;
      case OpKind::Rmw:
        sink += index->rmw(key, std::move(payloads[i])).has_value();
        break;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  volatile std::size_t keep = sink;
  (void)keep;

  // Clock granularity floor keeps throughput finite.
  result.elapsed_seconds =
      std::max(std::chrono::duration<double>(stop - start).count(), 1e-9);
  result.throughput = static_cast<double>(stream.ops.size()) / result.elapsed_seconds;
  return result;
}

std::vector<BenchResult> Bench::compare(const std::vector<IndexConfig>& configs,
                                        const WorkloadSpec& spec, BenchMode mode) const {
  if (configs.empty()) throw UsageError("bench compare: no configs");
  const auto stream = workload_generate(spec);
  std::vector<BenchResult> out;
  out.reserve(configs.size());
  for (const auto& c : configs) out.push_back(run(c, stream, mode));
  return out;
}

}  // namespace idxsel
