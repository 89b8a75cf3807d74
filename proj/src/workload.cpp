#include "idxsel/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "idxsel/errors.hpp"
#include "idxsel/key_value.hpp"
#include "idxsel/rng.hpp"

namespace idxsel {

namespace {

constexpr std::array<std::string_view, kOpKindCount> kOpNames = {"read", "update", "scan",
                                                                   "insert", "rmw"};

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double parse_double(std::string_view key, std::string_view text) {
  // from_chars for double is not reliable across toolchains; strtod on a copy.
  const std::string copy(text);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v)) {
    throw ValidationError("field '" + std::string(key) + "': not a number: '" + copy + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("field '" + std::string(key) + "': not a non-negative integer: '" +
                          std::string(text) + "'");
  }
  return v;
}

struct Section {
  std::string name;
  std::map<std::string, std::string, std::less<>> fields;
  int line = 0;
};

WorkloadSpec to_spec(const Section& sec) {
  WorkloadSpec spec;
  spec.name = sec.name;
  std::optional<double> theta;
  for (const auto& [key, value] : sec.fields) {
    const auto op = std::find(kOpNames.begin(), kOpNames.end(), key);
    if (op != kOpNames.end()) {
      spec.proportions[static_cast<std::size_t>(op - kOpNames.begin())] = parse_double(key, value);
    } else if (key == "op_count") {
      spec.op_count = parse_uint(key, value);
    } else if (key == "record_count") {
      spec.record_count = parse_uint(key, value);
    } else if (key == "scan_len") {
      spec.scan_len = static_cast<std::uint32_t>(parse_uint(key, value));
    } else if (key == "seed") {
      spec.seed = parse_uint(key, value);
    } else if (key == "value_size") {
      spec.value_size = static_cast<std::uint32_t>(parse_uint(key, value));
    } else if (key == "distribution") {
      if (value == "uniform") {
        spec.key_dist.kind = KeyDistribution::Kind::Uniform;
      } else if (value == "zipfian") {
        spec.key_dist.kind = KeyDistribution::Kind::Zipfian;
      } else {
        throw ValidationError("section [" + sec.name + "]: unknown distribution '" + value + "'");
      }
    } else if (key == "theta") {
      theta = parse_double(key, value);
    } else {
      throw ValidationError("section [" + sec.name + "]: unknown field '" + key + "'");
    }
  }
  for (auto name : kOpNames) {
    if (!sec.fields.contains(name)) {
      throw ValidationError("section [" + sec.name + "]: missing field '" + std::string(name) + "'");
    }
  }
  if (theta) spec.key_dist.theta = *theta;
  validate(spec);
  return spec;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(OpKind kind) { return kOpNames[static_cast<std::size_t>(kind)]; }

void validate(const WorkloadSpec& spec) {
  const auto where = "workload '" + spec.name + "': ";
  double sum = 0.0;
  for (std::size_t i = 0; i < kOpKindCount; ++i) {
    if (!(spec.proportions[i] >= 0.0)) {
      throw ValidationError(where + "proportion '" + std::string(kOpNames[i]) + "' is negative");
    }
    sum += spec.proportions[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError(where + "proportions sum to " + format_double(sum) + ", not 1");
  }
  if (spec.op_count < 1) throw ValidationError(where + "op_count must be >= 1");
  if (spec.record_count < 1) throw ValidationError(where + "record_count must be >= 1");
  if (spec.scan_len < 1) throw ValidationError(where + "scan_len must be >= 1");
  if (spec.value_size < 1) throw ValidationError(where + "value_size must be >= 1");
  if (spec.key_dist.kind == KeyDistribution::Kind::Zipfian &&
      !(spec.key_dist.theta > 0.0 && spec.key_dist.theta < 1.0)) {
    throw ValidationError(where + "zipfian theta must lie in (0, 1)");
  }
}

std::array<std::size_t, kOpKindCount> OpStream::counts() const {
  std::array<std::size_t, kOpKindCount> c{};
  for (const auto& op : ops) ++c[static_cast<std::size_t>(op.kind)];
  return c;
}

ZipfianGenerator::ZipfianGenerator(std::uint64_t n, double theta) : n_(n), theta_(theta) {
  if (n_ == 0) throw ValidationError("zipfian over an empty key range");
  zetan_ = 0.0;
  for (std::uint64_t i = 1; i <= n_; ++i) zetan_ += 1.0 / std::pow(static_cast<double>(i), theta_);
  const double zeta2 = 1.0 + 1.0 / std::pow(2.0, theta_);
  alpha_ = 1.0 / (1.0 - theta_);
  eta_ = n_ <= 2 ? 0.0
                 : (1.0 - std::pow(2.0 / static_cast<double>(n_), 1.0 - theta_)) /
                       (1.0 - zeta2 / zetan_);
}

std::uint64_t ZipfianGenerator::rank(double u) const {
  const double uz = u * zetan_;
  if (uz < 1.0 || n_ == 1) return 0;
  if (uz < 1.0 + std::pow(0.5, theta_) || n_ == 2) return 1;
  const auto r = static_cast<std::uint64_t>(static_cast<double>(n_) *
                                            std::pow(eta_ * u - eta_ + 1.0, alpha_));
  return std::min(r, n_ - 1);
}

std::uint64_t ZipfianGenerator::scramble(std::uint64_t rank) const {
  std::string_view bytes(reinterpret_cast<const char*>(&rank), sizeof rank);
  return fnv1a(bytes) % n_;
}

std::vector<WorkloadSpec> parse_workloads(std::string_view text) {
  std::vector<Section> sections;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ValidationError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), {}, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected key = value");
    }
    if (sections.empty()) sections.push_back({"workload", {}, line_no});
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(unquote(trim(line.substr(eq + 1))));
    if (!sections.back().fields.emplace(key, value).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate field '" + key + "'");
    }
  }
  std::vector<WorkloadSpec> specs;
  specs.reserve(sections.size());
  for (const auto& sec : sections) specs.push_back(to_spec(sec));
  return specs;
}

WorkloadSpec workload_parse(std::string_view text) {
  auto specs = parse_workloads(text);
  if (specs.size() != 1) {
    throw ValidationError("expected exactly one workload section, found " +
                          std::to_string(specs.size()));
  }
  return specs.front();
}

std::vector<WorkloadSpec> load_workloads(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open workload file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_workloads(buf.str());
}

std::string format_workload(const WorkloadSpec& spec) {
  std::ostringstream os;
  os << '[' << spec.name << "]\n";
  for (std::size_t i = 0; i < kOpKindCount; ++i) {
    os << kOpNames[i] << " = " << format_double(spec.proportions[i]) << '\n';
  }
  os << "op_count = " << spec.op_count << '\n'
     << "record_count = " << spec.record_count << '\n'
     << "distribution = "
     << (spec.key_dist.kind == KeyDistribution::Kind::Zipfian ? "zipfian" : "uniform") << '\n';
  if (spec.key_dist.kind == KeyDistribution::Kind::Zipfian) {
    os << "theta = " << format_double(spec.key_dist.theta) << '\n';
  }
  os << "scan_len = " << spec.scan_len << '\n'
     << "value_size = " << spec.value_size << '\n'
     << "seed = " << spec.seed << '\n';
  return os.str();
}

OpStream workload_generate(const WorkloadSpec& spec) {
  validate(spec);
  OpStream stream;
  stream.record_count = spec.record_count;
  stream.value_size = spec.value_size;
  stream.scan_len = spec.scan_len;
  stream.ops.reserve(spec.op_count);

  std::array<double, kOpKindCount> cumulative{};
  std::partial_sum(spec.proportions.begin(), spec.proportions.end(), cumulative.begin());

  Rng rng(spec.seed);
  std::optional<ZipfianGenerator> zipf;
  if (spec.key_dist.kind == KeyDistribution::Kind::Zipfian) {
    zipf.emplace(spec.record_count, spec.key_dist.theta);
  }
  std::uint64_t next_insert = spec.record_count;
  // Fallback for u beyond the round-off-short cumulative total.
  std::size_t last_kind = 0;
  for (std::size_t j = 0; j < kOpKindCount; ++j) {
    if (spec.proportions[j] > 0.0) last_kind = j;
  }

  for (std::uint64_t i = 0; i < spec.op_count; ++i) {
    const double u = rng.uniform();
    std::size_t k = last_kind;
    for (std::size_t j = 0; j < kOpKindCount; ++j) {
      if (u < cumulative[j]) {
        k = j;
        break;
      }
    }

    Operation op;
    op.kind = static_cast<OpKind>(k);
    if (op.kind == OpKind::Insert) {
      op.key = next_insert++;
    } else {
      op.key = zipf ? (*zipf)(rng) : rng.below(spec.record_count);
    }
    if (op.kind == OpKind::Scan) op.scan_len = spec.scan_len;
    if (op.kind == OpKind::Update || op.kind == OpKind::Insert || op.kind == OpKind::Rmw) {
      op.value_seed = rng.next();
    }
    stream.ops.push_back(op);
  }
  return stream;
}

WorkloadVector workload_vector(const WorkloadSpec& spec) {
  WorkloadVector v;
  for (std::size_t i = 0; i < kOpKindCount; ++i) v[static_cast<Eigen::Index>(i)] = spec.proportions[i];
  return v;
}

WorkloadSpec workload_from_vector(const WorkloadVector& v, WorkloadSpec base) {
  for (std::size_t i = 0; i < kOpKindCount; ++i) base.proportions[i] = v[static_cast<Eigen::Index>(i)];
  validate(base);
  return base;
}

WorkloadSpec workload_sample_random(std::uint64_t seed) {
  Rng rng(seed);
  WorkloadSpec spec;
  spec.name = "random-" + std::to_string(seed);
  spec.seed = seed;
  double total = 0.0;
  for (auto& p : spec.proportions) {
    p = rng.exponential();
    total += p;
  }
  for (auto& p : spec.proportions) p /= total;
  // Push round-off into the largest component so the sum is 1 to the ulp.
  const auto largest = std::max_element(spec.proportions.begin(), spec.proportions.end());
  double rest = 0.0;
  for (auto it = spec.proportions.begin(); it != spec.proportions.end(); ++it) {
    if (it != largest) rest += *it;
  }
  *largest = 1.0 - rest;
  return spec;
}

std::vector<WorkloadSpec> pure_workloads() {
  std::vector<WorkloadSpec> out;
  for (auto kind : kAllOpKinds) {
    WorkloadSpec spec;
    spec.name = "pure-" + std::string(to_string(kind));
    spec.proportion(kind) = 1.0;
    out.push_back(spec);
  }
  return out;
}

std::vector<WorkloadSpec> ycsb_presets() {
  const auto make = [](std::string name, std::array<double, kOpKindCount> p) {
    WorkloadSpec spec;
    spec.name = std::move(name);
    spec.proportions = p;
    return spec;
  };
  return {
      make("ycsb-a", {0.5, 0.5, 0.0, 0.0, 0.0}),
      make("ycsb-b", {0.95, 0.05, 0.0, 0.0, 0.0}),
      make("ycsb-c", {1.0, 0.0, 0.0, 0.0, 0.0}),
      make("ycsb-d", {0.95, 0.0, 0.0, 0.05, 0.0}),
      make("ycsb-e", {0.0, 0.0, 0.95, 0.05, 0.0}),
      make("ycsb-f", {0.5, 0.0, 0.0, 0.0, 0.5}),
  };
}

}  // namespace idxsel
