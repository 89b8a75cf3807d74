#include "idxsel/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "idxsel/bench.hpp"
#include "idxsel/checkpoint.hpp"
#include "idxsel/cost_model.hpp"
#include "idxsel/csv.hpp"
#include "idxsel/env.hpp"
#include "idxsel/errors.hpp"
#include "idxsel/selector.hpp"
#include "idxsel/trainer.hpp"
#include "idxsel/version.hpp"
#include "idxsel/workload.hpp"

#ifndef IDXSEL_WORKLOAD_DIR
#define IDXSEL_WORKLOAD_DIR ""
#endif

namespace idxsel {

using nlohmann::json;
namespace fs = std::filesystem;

json RunManifest::to_json() const {
  return json{{"command", command},         {"argv", argv},
              {"config", config},           {"seeds", seeds},
              {"tool_version", tool_version}, {"started_at", started_at},
              {"finished_at", finished_at}, {"outputs", outputs}};
}

void RunManifest::save(const fs::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write manifest " + path.string());
  out << to_json().dump(2) << '\n';
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("IDXSEL_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string_view(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("IDXSEL_SEED must be an unsigned integer");
  }
  return 1;
}

// Every knob shared by the subcommands. Defaults, then --settings, then
// explicit flags.
struct Settings {
  std::uint64_t seed = 1;
  BenchMode mode = BenchMode::Simulated;
  EnvConfig env;
  std::string cost_model_path;
  CostModel cost_model;
  TrainScale scale = TrainScale::Desk;
  TrainConfig train = TrainConfig::for_scale(TrainScale::Desk);
  SelectionOptions selection;
  bool gamma_overridden = false;

  json to_json() const {
    const auto& hp = train.hyperparams;
    return json{
        {"seed", seed},
        {"mode", to_string(mode)},
        {"k", env.k},
        {"c_switch", env.c_switch},
        {"reward_baseline", to_string(env.baseline)},
        {"cost_model", cost_model_path.empty() ? json("builtin") : json(cost_model_path)},
        {"cost_model_values", json::parse(idxsel::to_json(cost_model))},
        {"hyperparams",
         {{"learning_rate", hp.learning_rate},
          {"gamma", hp.gamma},
          {"epsilon", hp.epsilon},
          {"epsilon_is_exploit", hp.epsilon_is_exploit},
          {"batch_size", hp.batch_size},
          {"target_sync_every", hp.target_sync_every},
          {"update_every_steps", hp.update_every_steps},
          {"updates_per_step", hp.updates_per_step},
          {"replay_capacity", hp.replay_capacity},
          {"hidden", hp.hidden},
          {"optimizer", to_string(hp.optimizer)},
          {"loss", hp.loss == LossKind::Mse ? "mse" : "huber"},
          {"huber_delta", hp.huber_delta},
          {"lr_decay", hp.lr_decay}}},
        {"train",
         {{"scale", to_string(scale)},
          {"phase1_episodes", train.phase1_episodes},
          {"phase2_random_workloads", train.phase2_random_workloads},
          {"phase2_episodes", train.phase2_episodes}}},
        {"selection", {{"episodes", selection.episodes}, {"discounted", selection.discounted}}},
    };
  }
};

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("settings: bad value for '") + key + "'");
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("settings: " + where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw ConfigError("settings: unknown field '" + key + "' in " + where);
    }
  }
}

void apply_settings_file(Settings& s, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open settings file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("settings: " + std::string(e.what()));
  }
  check_keys(j, {"seed", "mode", "k", "c_switch", "reward_baseline", "cost_model", "hyperparams", "train",
                 "selection"},
             "top level");
  if (j.contains("seed")) s.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("mode")) s.mode = parse_bench_mode(get_field<std::string>(j, "mode"));
  if (j.contains("k")) s.env.k = get_field<double>(j, "k");
  if (j.contains("c_switch")) s.env.c_switch = get_field<double>(j, "c_switch");
  if (j.contains("reward_baseline")) {
    s.env.baseline = parse_reward_baseline(get_field<std::string>(j, "reward_baseline"));
  }
  if (j.contains("cost_model")) s.cost_model_path = get_field<std::string>(j, "cost_model");
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, {"scale", "phase1_episodes", "phase2_random_workloads", "phase2_episodes"}, "train");
    if (t.contains("scale")) {
      s.scale = parse_train_scale(get_field<std::string>(t, "scale"));
      s.train = TrainConfig::for_scale(s.scale);
    }
    if (t.contains("phase1_episodes")) s.train.phase1_episodes = get_field<std::size_t>(t, "phase1_episodes");
    if (t.contains("phase2_random_workloads")) {
      s.train.phase2_random_workloads = get_field<std::size_t>(t, "phase2_random_workloads");
    }
    if (t.contains("phase2_episodes")) s.train.phase2_episodes = get_field<std::size_t>(t, "phase2_episodes");
  }
  if (j.contains("hyperparams")) {
    const auto& h = j["hyperparams"];
    auto& hp = s.train.hyperparams;
    check_keys(h, {"learning_rate", "gamma", "epsilon", "epsilon_is_exploit", "batch_size", "target_sync_every",
                   "update_every_steps", "updates_per_step", "replay_capacity", "hidden", "optimizer", "loss",
                   "huber_delta", "lr_decay"},
               "hyperparams");
    if (h.contains("learning_rate")) hp.learning_rate = get_field<double>(h, "learning_rate");
    if (h.contains("gamma")) {
      hp.gamma = get_field<double>(h, "gamma");
      s.gamma_overridden = true;
    }
    if (h.contains("epsilon")) hp.epsilon = get_field<double>(h, "epsilon");
    if (h.contains("epsilon_is_exploit")) hp.epsilon_is_exploit = get_field<bool>(h, "epsilon_is_exploit");
    if (h.contains("batch_size")) hp.batch_size = get_field<std::size_t>(h, "batch_size");
    if (h.contains("target_sync_every")) hp.target_sync_every = get_field<std::size_t>(h, "target_sync_every");
    if (h.contains("update_every_steps")) hp.update_every_steps = get_field<std::size_t>(h, "update_every_steps");
    if (h.contains("updates_per_step")) hp.updates_per_step = get_field<std::size_t>(h, "updates_per_step");
    if (h.contains("replay_capacity")) hp.replay_capacity = get_field<std::size_t>(h, "replay_capacity");
    if (h.contains("hidden")) hp.hidden = get_field<std::vector<Eigen::Index>>(h, "hidden");
    if (h.contains("optimizer")) hp.optimizer = parse_optimizer(get_field<std::string>(h, "optimizer"));
    if (h.contains("loss")) {
      const auto loss = get_field<std::string>(h, "loss");
      if (loss != "mse" && loss != "huber") throw ConfigError("settings: loss must be mse or huber");
      hp.loss = loss == "mse" ? LossKind::Mse : LossKind::Huber;
    }
    if (h.contains("huber_delta")) hp.huber_delta = get_field<double>(h, "huber_delta");
    if (h.contains("lr_decay")) hp.lr_decay = get_field<double>(h, "lr_decay");
  }
  if (j.contains("selection")) {
    const auto& sel = j["selection"];
    check_keys(sel, {"episodes", "discounted"}, "selection");
    if (sel.contains("episodes")) s.selection.episodes = get_field<std::size_t>(sel, "episodes");
    if (sel.contains("discounted")) s.selection.discounted = get_field<bool>(sel, "discounted");
  }
}

// Flags present on every subcommand; unset optionals keep the settings value.
struct CommonFlags {
  std::string settings;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> cost_model;
  std::optional<double> k;
  std::optional<double> c_switch;
  std::optional<std::string> baseline;
  std::string manifest;

  void attach(CLI::App* cmd) {
    cmd->add_option("--settings", settings, "JSON settings file applied before flags");
    cmd->add_option("--seed", seed, "Master seed (default 1, or $IDXSEL_SEED)");
    cmd->add_option("--mode", mode, "Benchmark mode: sim or real");
    cmd->add_option("--cost-model", cost_model, "Cost model JSON for sim mode");
    cmd->add_option("--k", k, "Reward throughput scale k");
    cmd->add_option("--c-switch", c_switch, "Reward switching cost");
    cmd->add_option("--reward-baseline", baseline, "Reward baseline: best or previous");
    cmd->add_option("--manifest", manifest, "Manifest path (default: next to the output)");
  }

  Settings resolve() const {
    Settings s;
    s.seed = default_seed();
    if (!settings.empty()) apply_settings_file(s, settings);
    if (seed) s.seed = *seed;
    if (mode) s.mode = parse_bench_mode(*mode);
    if (cost_model) s.cost_model_path = *cost_model;
    if (k) s.env.k = *k;
    if (c_switch) s.env.c_switch = *c_switch;
    if (baseline) s.env.baseline = parse_reward_baseline(*baseline);
    if (!s.cost_model_path.empty()) s.cost_model = load_cost_model(s.cost_model_path);
    s.env.mode = s.mode;
    if (!(s.env.k > 0.0) || !(s.env.c_switch >= 0.0)) {
      throw ConfigError("k must be positive and c_switch non-negative");
    }
    return s;
  }
};

fs::path resolve_workload_path(const std::string& name) {
  fs::path p(name);
  if (fs::exists(p)) return p;
  const fs::path root(IDXSEL_WORKLOAD_DIR);
  if (p.is_relative() && !root.empty() && fs::is_directory(root)) {
    if (fs::exists(root / p)) return root / p;
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / p)) return entry.path() / p;
    }
  }
  throw ValidationError("workload file not found: " + name);
}

std::vector<WorkloadSpec> read_workloads(const std::string& name) {
  return load_workloads(resolve_workload_path(name));
}

std::vector<WorkloadSpec> read_workload_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".toml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .toml workloads in " + dir);
  std::vector<WorkloadSpec> out;
  for (const auto& f : files) {
    for (auto& spec : load_workloads(f)) out.push_back(std::move(spec));
  }
  return out;
}

Environment make_env(const Settings& s) {
  return Environment(Bench(ParamGrid(), s.cost_model), s.env);
}

// Writes the table to path, or to out when path is empty or "-".
void emit(const CsvTable& table, const std::string& path, std::ostream& out,
          std::vector<std::string>& outputs) {
  if (path.empty() || path == "-") {
    table.write(out);
  } else {
    table.save(path);
    outputs.push_back(path);
  }
}

std::string proportion_text(double v) { return format_number(v); }

std::uint64_t workload_stream_seed(std::uint64_t seed, std::size_t index) {
  return Rng::mix(seed ^ Rng::mix(0x73656cULL + index));
}

class Run {
 public:
  Run(std::string command, int argc, const char* const* argv) {
    manifest_.command = std::move(command);
    for (int i = 0; i < argc; ++i) manifest_.argv.emplace_back(argv[i]);
    manifest_.tool_version = kVersion;
    manifest_.started_at = utc_now();
  }
  RunManifest& manifest() { return manifest_; }
  std::vector<std::string>& outputs() { return manifest_.outputs; }

  void finish(const Settings& s, const std::string& explicit_path) {
    manifest_.finished_at = utc_now();
    manifest_.config = s.to_json();
    if (manifest_.seeds.is_null()) manifest_.seeds = json{{"seed", s.seed}};
    fs::path path = explicit_path;
    if (path.empty()) {
      path = manifest_.outputs.empty() ? fs::path("idxsel-" + manifest_.command + ".manifest.json")
                                       : fs::path(manifest_.outputs.front() + ".manifest.json");
    }
    manifest_.save(path);
  }

 private:
  RunManifest manifest_;
};

// ---- bench ---------------------------------------------------------------

struct BenchFlags {
  CommonFlags common;
  std::string workload;
  std::vector<std::string> configs;
  std::string out;
};

void cmd_bench(const BenchFlags& f, Run& run, std::ostream& out) {
  const Settings s = f.common.resolve();
  Environment env = make_env(s);
  std::vector<IndexConfig> configs;
  for (const auto& text : f.configs) configs.push_back(parse_config(text, env.grid()));
  if (configs.empty()) configs = default_baselines(env.grid());

  CsvTable table({"workload", "config", "mode", "seed", "op_count", "record_count", "throughput",
                  "elapsed_seconds"});
  for (auto spec : read_workloads(f.workload)) {
    if (f.common.seed) spec.seed = s.seed;
    const auto results = env.bench().compare(configs, spec, s.mode);
    for (std::size_t i = 0; i < configs.size(); ++i) {
      table.add_row({spec.name, format_config(configs[i], env.grid()), std::string(to_string(s.mode)),
                     std::to_string(spec.seed), std::to_string(spec.op_count),
                     std::to_string(spec.record_count), format_number(results[i].throughput),
                     format_number(results[i].elapsed_seconds)});
    }
  }
  emit(table, f.out, out, run.outputs());
  run.finish(s, f.common.manifest);
}

// ---- train ---------------------------------------------------------------

struct TrainFlags {
  CommonFlags common;
  std::string workload;
  bool curriculum = false;
  std::optional<std::size_t> episodes;
  std::optional<std::string> scale;
  std::optional<std::size_t> phase1, phase2_workloads, phase2_episodes;
  std::string out;
  std::string report;
  std::optional<double> lr, gamma, epsilon, lr_decay;
  std::optional<std::size_t> batch, sync_every, update_every, updates_per_step;
  std::optional<std::string> optimizer, loss;
  bool epsilon_explores = false;
};

Settings resolve_train(const TrainFlags& f) {
  Settings s = f.common.resolve();
  if (f.scale) {
    s.scale = parse_train_scale(*f.scale);
    const auto preset = TrainConfig::for_scale(s.scale);
    s.train.phase1_episodes = preset.phase1_episodes;
    s.train.phase2_random_workloads = preset.phase2_random_workloads;
    s.train.phase2_episodes = preset.phase2_episodes;
    s.train.hyperparams = preset.hyperparams;
  }
  if (f.phase1) s.train.phase1_episodes = *f.phase1;
  if (f.phase2_workloads) s.train.phase2_random_workloads = *f.phase2_workloads;
  if (f.phase2_episodes) s.train.phase2_episodes = *f.phase2_episodes;
  auto& hp = s.train.hyperparams;
  if (f.lr) hp.learning_rate = *f.lr;
  if (f.gamma) hp.gamma = *f.gamma;
  if (f.epsilon) hp.epsilon = *f.epsilon;
  if (f.lr_decay) hp.lr_decay = *f.lr_decay;
  if (f.batch) hp.batch_size = *f.batch;
  if (f.sync_every) hp.target_sync_every = *f.sync_every;
  if (f.update_every) hp.update_every_steps = *f.update_every;
  if (f.updates_per_step) hp.updates_per_step = *f.updates_per_step;
  if (f.optimizer) hp.optimizer = parse_optimizer(*f.optimizer);
  if (f.loss) {
    if (*f.loss != "mse" && *f.loss != "huber") throw ConfigError("--loss must be mse or huber");
    hp.loss = *f.loss == "mse" ? LossKind::Mse : LossKind::Huber;
  }
  if (f.epsilon_explores) hp.epsilon_is_exploit = false;
  s.train.seed = s.seed;
  s.train.validate();
  return s;
}

void cmd_train(const TrainFlags& f, Run& run) {
  const Settings s = resolve_train(f);
  Trainer trainer(make_env(s), s.train);
  TrainReport report;
  if (f.curriculum) {
    report = trainer.train_curriculum();
  } else {
    const std::size_t episodes = f.episodes.value_or(300);
    for (const auto& spec : read_workloads(f.workload)) report.append(trainer.train(spec, episodes));
  }
  save_checkpoint(f.out, Checkpoint{trainer.agent().online(), s.train.hyperparams});
  run.outputs().push_back(f.out);

  if (!f.report.empty()) {
    CsvTable table({"episode", "workload", "length", "total_reward", "initial_config", "final_config",
                    "updates", "mean_loss"});
    const auto& grid = trainer.env().grid();
    for (std::size_t i = 0; i < report.episodes.size(); ++i) {
      const auto& e = report.episodes[i];
      double mean_loss = 0.0;
      for (double l : e.losses) mean_loss += l;
      if (!e.losses.empty()) mean_loss /= static_cast<double>(e.losses.size());
      table.add_row({std::to_string(i), e.workload, std::to_string(e.length), format_number(e.total_reward),
                     format_config(e.initial_config, grid), format_config(e.final_config, grid),
                     std::to_string(e.losses.size()), e.losses.empty() ? "" : format_number(mean_loss)});
    }
    table.save(f.report);
    run.outputs().push_back(f.report);
  }
  run.manifest().seeds = json{{"seed", s.seed},
                              {"total_steps", report.total_steps},
                              {"updates", report.updates},
                              {"wall_seconds", report.wall_seconds}};
  run.finish(s, f.common.manifest);
}

// ---- select / compare ----------------------------------------------------

struct SelectFlags {
  CommonFlags common;
  std::string model;
  std::string workload;
  std::string workload_dir;
  std::optional<std::size_t> episodes;
  bool undiscounted = false;
  std::string out;
  std::string episodes_out;
  std::string trace;
  std::size_t jobs = 1;
};

struct SelectionRow {
  WorkloadSpec spec;
  SelectionResult result;
  SelectionReport report;
  std::vector<TraceRow> trace;
};

Settings resolve_select(const SelectFlags& f, const Checkpoint& cp) {
  Settings s = f.common.resolve();
  if (!s.gamma_overridden) s.train.hyperparams.gamma = cp.hyperparams.gamma;
  s.selection.gamma = s.train.hyperparams.gamma;
  if (f.episodes) s.selection.episodes = *f.episodes;
  if (f.undiscounted) s.selection.discounted = false;
  return s;
}

std::vector<SelectionRow> run_selection(const std::vector<WorkloadSpec>& specs, const Checkpoint& cp,
                                        const Settings& s, std::size_t jobs, bool tracing) {
  std::vector<SelectionRow> rows(specs.size());
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto work = [&](std::size_t i) {
    try {
      Environment env = make_env(s);
      env.set_tracing(tracing);
      Rng rng(workload_stream_seed(s.seed, i));
      rows[i].spec = specs[i];
      rows[i].result = select_optimal(cp.net, env, specs[i], s.selection, rng);
      if (tracing) rows[i].trace = env.trace();
      rows[i].report = select_report(rows[i].result, env, specs[i], default_baselines(env.grid()));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, specs.size()));
  if (jobs == 1 || tracing) {
    for (std::size_t i = 0; i < specs.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

CsvTable selection_table(const std::vector<SelectionRow>& rows) {
  std::vector<std::string> header = {"workload", "read", "update", "scan", "insert", "rmw",
                                     "selected_config", "max_return", "episodes", "selected"};
  const ParamGrid grid;
  for (auto kind : kAllStructures) header.push_back(std::string(to_string(kind)));
  header.push_back("random_mean");
  for (auto kind : kAllStructures) header.push_back("improvement_vs_" + std::string(to_string(kind)) + "_pct");
  CsvTable table(header);
  for (const auto& row : rows) {
    std::vector<std::string> fields = {row.spec.name};
    for (double p : row.spec.proportions) fields.push_back(proportion_text(p));
    fields.push_back(format_config(row.result.optimal_config, grid));
    fields.push_back(format_number(row.result.max_return));
    fields.push_back(std::to_string(row.result.episodes_run));
    fields.push_back(format_number(row.report.selected_throughput));
    for (const auto& b : row.report.baselines) fields.push_back(format_number(b.throughput));
    fields.push_back(format_number(row.report.random_mean_throughput));
    for (const auto& b : row.report.baselines) fields.push_back(format_number(b.improvement_pct));
    table.add_row(std::move(fields));
  }
  return table;
}

void emit_selection_extras(const SelectFlags& f, const std::vector<SelectionRow>& rows, Run& run) {
  const ParamGrid grid;
  if (!f.episodes_out.empty()) {
    CsvTable table({"workload", "episode", "initial_config", "length", "episode_return",
                    "episode_best_config", "episode_best_throughput"});
    for (const auto& row : rows) {
      for (std::size_t e = 0; e < row.result.episodes.size(); ++e) {
        const auto& ep = row.result.episodes[e];
        table.add_row({row.spec.name, std::to_string(e), format_config(ep.initial_config, grid),
                       std::to_string(ep.length), format_number(ep.episode_return),
                       format_config(ep.best_config, grid), format_number(ep.best_throughput)});
      }
    }
    table.save(f.episodes_out);
    run.outputs().push_back(f.episodes_out);
  }
  if (!f.trace.empty()) {
    CsvTable table({"workload", "step", "state", "action", "reward", "terminal"});
    for (const auto& row : rows) {
      for (const auto& t : row.trace) {
        std::string state;
        for (Eigen::Index i = 0; i < t.state.size(); ++i) {
          if (i > 0) state += ' ';
          state += format_number(t.state[i]);
        }
        table.add_row({row.spec.name, std::to_string(t.step), state, std::to_string(t.action),
                       format_number(t.reward), t.terminal ? "1" : "0"});
      }
    }
    table.save(f.trace);
    run.outputs().push_back(f.trace);
  }
}

void cmd_select(const SelectFlags& f, Run& run, std::ostream& out) {
  const Checkpoint cp = load_checkpoint(f.model);
  const Settings s = resolve_select(f, cp);
  const auto specs = !f.workload_dir.empty() ? read_workload_dir(f.workload_dir) : read_workloads(f.workload);
  const auto rows = run_selection(specs, cp, s, f.jobs, !f.trace.empty());
  emit(selection_table(rows), f.out, out, run.outputs());
  emit_selection_extras(f, rows, run);
  run.finish(s, f.common.manifest);
}

struct CompareFlags {
  SelectFlags select;
  std::vector<std::string> configs;
};

void cmd_compare(const CompareFlags& f, Run& run, std::ostream& out) {
  const auto& sf = f.select;
  const auto specs = !sf.workload_dir.empty() ? read_workload_dir(sf.workload_dir) : read_workloads(sf.workload);
  if (!sf.model.empty()) {
    const Checkpoint cp = load_checkpoint(sf.model);
    const Settings s = resolve_select(sf, cp);
    emit(selection_table(run_selection(specs, cp, s, sf.jobs, false)), sf.out, out, run.outputs());
    run.finish(s, sf.common.manifest);
    return;
  }
  // Without a model: every structure's default config, one column each.
  const Settings s = sf.common.resolve();
  Environment env = make_env(s);
  std::vector<IndexConfig> configs;
  for (const auto& text : f.configs) configs.push_back(parse_config(text, env.grid()));
  if (configs.empty()) configs = default_baselines(env.grid());
  std::vector<std::string> header = {"workload", "read", "update", "scan", "insert", "rmw"};
  for (const auto& c : configs) header.push_back(format_config(c, env.grid()));
  header.push_back("best");
  CsvTable table(header);
  for (const auto& spec : specs) {
    const auto results = env.bench().compare(configs, spec, s.mode);
    std::vector<std::string> fields = {spec.name};
    for (double p : spec.proportions) fields.push_back(proportion_text(p));
    std::size_t best = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      fields.push_back(format_number(results[i].throughput));
      if (results[i].throughput > results[best].throughput) best = i;
    }
    fields.push_back(format_config(configs[best], env.grid()));
    table.add_row(std::move(fields));
  }
  emit(table, sf.out, out, run.outputs());
  run.finish(s, sf.common.manifest);
}

// ---- sweep ---------------------------------------------------------------

struct SweepFlags {
  CommonFlags common;
  std::vector<std::uint64_t> op_counts = {1000, 2000, 5000, 10000, 20000};
  std::string workload;
  std::vector<std::string> configs;
  std::string out;
};

void cmd_sweep(const SweepFlags& f, Run& run, std::ostream& out, std::ostream& err) {
  const Settings s = f.common.resolve();
  Environment env = make_env(s);
  WorkloadSpec base;
  if (f.workload.empty()) {
    // Inserts grow n; a large preload keeps the sweep's n nearly fixed.
    base = pure_workloads()[static_cast<std::size_t>(OpKind::Insert)];
    base.record_count = 1000000;
  } else {
    auto specs = read_workloads(f.workload);
    if (specs.size() != 1) throw ValidationError("sweep expects a workload file with one section");
    base = specs.front();
  }
  std::vector<IndexConfig> configs;
  for (const auto& text : f.configs) configs.push_back(parse_config(text, env.grid()));
  if (configs.empty()) configs = default_baselines(env.grid());

  CsvTable table({"workload", "op_count", "config", "mode", "throughput", "elapsed_seconds"});
  json cv = json::object();
  for (const auto& config : configs) {
    std::vector<double> tp;
    for (auto n : f.op_counts) {
      WorkloadSpec spec = base;
      spec.op_count = n;
      const auto stream = workload_generate(spec);
      const auto r = env.bench().run(config, stream, s.mode);
      tp.push_back(r.throughput);
      table.add_row({spec.name, std::to_string(n), format_config(config, env.grid()),
                     std::string(to_string(s.mode)), format_number(r.throughput),
                     format_number(r.elapsed_seconds)});
    }
    double mean = 0.0, var = 0.0;
    for (double t : tp) mean += t;
    mean /= static_cast<double>(tp.size());
    for (double t : tp) var += (t - mean) * (t - mean);
    var /= static_cast<double>(tp.size());
    const double c = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    cv[format_config(config, env.grid())] = c;
    err << "coefficient of variation " << format_config(config, env.grid()) << ": " << format_number(c) << '\n';
  }
  emit(table, f.out, out, run.outputs());
  run.manifest().seeds = json{{"seed", s.seed}, {"coefficient_of_variation", cv}};
  run.finish(s, f.common.manifest);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Index structure selection with a dueling deep Q-network", "idxsel"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark configs on a workload");
  bench.common.attach(bench_cmd);
  bench_cmd->add_option("--workload", bench.workload, "Workload file")->required();
  bench_cmd->add_option("--config", bench.configs, "Config spec kind:axis=value,... (repeatable)");
  bench_cmd->add_option("--out", bench.out, "CSV output (default stdout)");

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train the Q-network");
  train.common.attach(train_cmd);
  auto* train_workload = train_cmd->add_option("--workload", train.workload, "Workload file");
  auto* train_curr = train_cmd->add_flag("--curriculum", train.curriculum, "Pure workloads, then random ones");
  train_workload->excludes(train_curr);
  train_cmd->add_option("--episodes", train.episodes, "Episodes per workload section (default 300)")
      ->excludes(train_curr);
  train_cmd->add_option("--scale", train.scale, "Curriculum and hyperparameter preset: desk or paper");
  train_cmd->add_option("--phase1-episodes", train.phase1, "Episodes per pure workload");
  train_cmd->add_option("--phase2-workloads", train.phase2_workloads, "Random workloads in phase 2");
  train_cmd->add_option("--phase2-episodes", train.phase2_episodes, "Episodes per random workload");
  train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
  train_cmd->add_option("--report", train.report, "Per-episode CSV report");
  train_cmd->add_option("--lr", train.lr, "Learning rate");
  train_cmd->add_option("--gamma", train.gamma, "Discount factor");
  train_cmd->add_option("--epsilon", train.epsilon, "Probability of the greedy action");
  train_cmd->add_flag("--epsilon-explores", train.epsilon_explores, "Treat epsilon as the exploration rate");
  train_cmd->add_option("--lr-decay", train.lr_decay, "Learning-rate multiplier per update");
  train_cmd->add_option("--batch-size", train.batch, "Replay batch size");
  train_cmd->add_option("--sync-every", train.sync_every, "Updates between target syncs");
  train_cmd->add_option("--update-every", train.update_every, "Env steps between update events");
  train_cmd->add_option("--updates-per-step", train.updates_per_step, "Gradient updates per update event");
  train_cmd->add_option("--optimizer", train.optimizer, "sgd or adam");
  train_cmd->add_option("--loss", train.loss, "mse or huber");

  SelectFlags select;
  auto* select_cmd = app.add_subcommand("select", "Select a config for each workload with a trained model");
  select.common.attach(select_cmd);
  select_cmd->add_option("--model", select.model, "Checkpoint")->required();
  auto* sel_w = select_cmd->add_option("--workload", select.workload, "Workload file");
  select_cmd->add_option("--workload-dir", select.workload_dir, "Directory of .toml workloads")->excludes(sel_w);
  select_cmd->add_option("--episodes", select.episodes, "Rollouts per workload (default 100)");
  select_cmd->add_flag("--undiscounted", select.undiscounted, "Accumulate R += r instead of gamma^t r");
  select_cmd->add_option("--out", select.out, "CSV output (default stdout)");
  select_cmd->add_option("--episodes-out", select.episodes_out, "Per-rollout CSV");
  select_cmd->add_option("--trace", select.trace, "Step-level trace CSV");

  CompareFlags compare;
  auto* compare_cmd = app.add_subcommand("compare", "Table of structures (and the selection) per workload");
  compare.select.common.attach(compare_cmd);
  compare_cmd->add_option("--model", compare.select.model, "Checkpoint; adds the selected column");
  auto* cmp_w = compare_cmd->add_option("--workload", compare.select.workload, "Workload file");
  compare_cmd->add_option("--workload-dir", compare.select.workload_dir, "Directory of .toml workloads")
      ->excludes(cmp_w);
  compare_cmd->add_option("--config", compare.configs, "Configs to compare without a model (repeatable)");
  compare_cmd->add_option("--episodes", compare.select.episodes, "Rollouts per workload (default 100)");
  compare_cmd->add_flag("--undiscounted", compare.select.undiscounted, "Accumulate R += r");
  compare_cmd->add_option("--jobs", compare.select.jobs, "Parallel workloads")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--out", compare.select.out, "CSV output (default stdout)");

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Throughput against operation count");
  sweep.common.attach(sweep_cmd);
  sweep_cmd->add_option("--op-counts", sweep.op_counts, "Operation counts")->delimiter(',');
  sweep_cmd->add_option("--workload", sweep.workload,
                        "Single-section workload (default insert only over 1e6 records)");
  sweep_cmd->add_option("--config", sweep.configs, "Configs (repeatable)");
  sweep_cmd->add_option("--out", sweep.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "idxsel: usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*bench_cmd) {
      Run run("bench", argc, argv);
      cmd_bench(bench, run, out);
    } else if (*train_cmd) {
      if (!train.curriculum && train.workload.empty()) {
        throw UsageError("train needs --workload or --curriculum");
      }
      Run run("train", argc, argv);
      cmd_train(train, run);
    } else if (*select_cmd) {
      if (select.workload.empty() && select.workload_dir.empty()) {
        throw UsageError("select needs --workload or --workload-dir");
      }
      Run run("select", argc, argv);
      cmd_select(select, run, out);
    } else if (*compare_cmd) {
      if (compare.select.workload.empty() && compare.select.workload_dir.empty()) {
        throw UsageError("compare needs --workload or --workload-dir");
      }
      Run run("compare", argc, argv);
      cmd_compare(compare, run, out);
    } else if (*sweep_cmd) {
      Run run("sweep", argc, argv);
      cmd_sweep(sweep, run, out, err);
    }
  } catch (const UsageError& e) {
    err << "idxsel: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "idxsel: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace idxsel
