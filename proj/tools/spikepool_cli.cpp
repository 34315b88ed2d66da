// spikepool: command-line front end for the spiking max-pooling toolkit.
//
// Subcommands: poc-mjop, poc-avam, sweep, run-net, plan-cores.
// Every command is deterministic under a fixed seed and exits 0 only after
// its output file(s) are fully written.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikepool/avam.hpp"
#include "spikepool/bundle.hpp"
#include "spikepool/heuristics.hpp"
#include "spikepool/mjop.hpp"
#include "spikepool/network.hpp"
#include "spikepool/pooling.hpp"
#include "spikepool/sim.hpp"

namespace {

using nlohmann::json;
using namespace spikepool;

constexpr std::size_t kPocPeriods[4] = {10, 8, 4, 6};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// RFC-4180 quoting: fields with commas, quotes, or newlines get quoted,
// with embedded quotes doubled.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) row += ',';
    row += csv_field(fields[i]);
  }
  row += '\n';
  return row;
}

void write_file_or_die(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f) {
    f.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);  // do not leave partial output behind
    throw std::runtime_error("failed while writing: " + path.string());
  }
}

std::filesystem::path summary_path(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  const std::string ext = p.extension().string();
  p.replace_extension();
  p += "_summary";
  p += ext;
  return p;
}

struct RunConfig {
  double dt = 1e-3;
  std::size_t steps = 300;
  double tau_in = 5e-3;
  double tau_out = 5e-3;
  double tau_e = 1e-3;
  double scale = 1.1;  // the poc-mjop display scale
  std::vector<double> radii = {0.20, 0.25, 0.30};
  double radius = 0.25;
  double phi = 500.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::string dist = "light-tailed";
  std::string bundle;
  std::string method;
  std::vector<std::string> methods = {"true_max"};
  std::vector<double> grid;
  std::size_t n_groups = 256;
  std::size_t group_size = 4;
  std::size_t n_inputs = 5;
  std::string shape;
  std::string window = "2x2";

  TimeBase tb() const { return TimeBase{dt, steps}; }
};

json config_echo(const RunConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  j["dt"] = cfg.dt;
  j["steps"] = cfg.steps;
  j["tau_in"] = cfg.tau_in;
  j["tau_out"] = cfg.tau_out;
  j["tau_e"] = cfg.tau_e;
  j["seed"] = cfg.seed;
  return j;
}

struct PocTraces {
  std::vector<SpikeTrain> trains;
  std::vector<CurrentTrace> currents;
  CurrentTrace truemax;
  CurrentTrace avg;
};

PocTraces make_poc_traces(const RunConfig& cfg) {
  PocTraces poc;
  const TimeBase tb = cfg.tb();
  for (std::size_t p : kPocPeriods) {
    poc.trains.push_back(make_periodic_train(p, 1.0, 0, tb));
    poc.currents.push_back(
        filter_spikes(poc.trains.back(), SynapseFilter{cfg.tau_in}, tb));
  }
  poc.truemax = true_max_oracle(poc.currents);
  poc.avg.values.assign(tb.n_steps, 0.0);
  for (std::size_t t = 0; t < tb.n_steps; ++t) {
    double sum = 0.0;
    for (const CurrentTrace& u : poc.currents) sum += u[t];
    poc.avg.values[t] = sum / static_cast<double>(poc.currents.size());
  }
  return poc;
}

std::string table_to_csv(const std::vector<std::string>& columns,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out = csv_row(columns);
  for (const auto& row : rows) out += csv_row(row);
  return out;
}

std::string table_to_json(const json& config,
                          const std::vector<std::string>& columns,
                          const std::vector<std::vector<std::string>>& rows) {
  json j;
  j["config"] = config;
  j["columns"] = columns;
  json out_rows = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (const auto& field : row) r.push_back(field);
    out_rows.push_back(std::move(r));
  }
  j["rows"] = std::move(out_rows);
  return j.dump(2) + "\n";
}

void emit_table(const RunConfig& cfg, const std::string& command,
                const std::vector<std::string>& columns,
                const std::vector<std::vector<std::string>>& rows,
                const std::filesystem::path& path) {
  if (cfg.format == "json") {
    write_file_or_die(path, table_to_json(config_echo(cfg, command), columns, rows));
  } else {
    write_file_or_die(path, table_to_csv(columns, rows));
  }
}

int cmd_poc_mjop(const RunConfig& cfg) {
  const TimeBase tb = cfg.tb();
  PocTraces poc = make_poc_traces(cfg);

  MjopNetConfig net_cfg;
  net_cfg.scale = 1.0;  // the display scale is applied column-wise below
  net_cfg.input_filter = SynapseFilter{cfg.tau_in};
  net_cfg.output_filter = SynapseFilter{cfg.tau_out};
  MjopNet net(4, net_cfg, tb.dt);
  const CurrentTrace u_out = run_mjop_net(net, poc.trains, tb);

  std::vector<std::string> columns = {"t",   "U1",  "U2",    "U3",
                                      "U4",  "true_max", "avg", "u_out",
                                      "scaled_u_out"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(tb.n_steps);
  for (std::size_t t = 0; t < tb.n_steps; ++t) {
    std::vector<std::string> row;
    row.push_back(std::to_string(t));
    for (const CurrentTrace& u : poc.currents) row.push_back(fmt(u[t]));
    row.push_back(fmt(poc.truemax[t]));
    row.push_back(fmt(poc.avg[t]));
    row.push_back(fmt(u_out[t]));
    row.push_back(fmt(cfg.scale * u_out[t]));
    rows.push_back(std::move(row));
  }
  emit_table(cfg, "poc-mjop", columns, rows, cfg.out);
  return 0;
}

int cmd_poc_avam(const RunConfig& cfg) {
  const TimeBase tb = cfg.tb();
  PocTraces poc = make_poc_traces(cfg);

  std::vector<CurrentTrace> estimates;
  for (double r : cfg.radii) {
    AvamNetConfig net_cfg;
    net_cfg.phi = cfg.phi;
    net_cfg.radius_per_level = {r};
    net_cfg.input_filter = SynapseFilter{cfg.tau_in};
    net_cfg.ensemble_filter = SynapseFilter{cfg.tau_e};
    net_cfg.dt = tb.dt;
    AvamNet net(4, net_cfg);
    estimates.push_back(run_avam_net(net, poc.trains, tb));
  }

  std::vector<std::string> columns = {"t",  "U1", "U2",       "U3",
                                      "U4", "true_max", "avg"};
  for (double r : cfg.radii) columns.push_back("u_out_r" + fmt_param(r));
  std::vector<std::vector<std::string>> rows;
  rows.reserve(tb.n_steps);
  for (std::size_t t = 0; t < tb.n_steps; ++t) {
    std::vector<std::string> row;
    row.push_back(std::to_string(t));
    for (const CurrentTrace& u : poc.currents) row.push_back(fmt(u[t]));
    row.push_back(fmt(poc.truemax[t]));
    row.push_back(fmt(poc.avg[t]));
    for (const CurrentTrace& e : estimates) row.push_back(fmt(e[t]));
    rows.push_back(std::move(row));
  }
  emit_table(cfg, "poc-avam", columns, rows, cfg.out);
  return 0;
}

IsiDistribution load_distribution(const std::string& spec) {
  if (spec == "light-tailed") return IsiDistribution::light_tailed();
  if (spec == "fat-tailed") return IsiDistribution::fat_tailed();

  std::ifstream f(spec);
  if (!f) throw std::runtime_error("cannot open ISI distribution file: " + spec);
  IsiDistribution dist;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string isi_str, mass_str;
    if (!std::getline(ss, isi_str, ',') || !std::getline(ss, mass_str)) {
      throw std::runtime_error("bad ISI distribution line: " + line);
    }
    if (isi_str == "isi") continue;  // optional header
    dist.mass[std::stoul(isi_str)] += std::stod(mass_str);
  }
  if (dist.mass.empty()) {
    throw std::runtime_error("ISI distribution file is empty: " + spec);
  }
  double total = 0.0;
  for (const auto& [isi, p] : dist.mass) total += p;
  for (auto& [isi, p] : dist.mass) p /= total;
  return dist;
}

int cmd_sweep(const RunConfig& cfg) {
  const PoolMethod method = pool_method_from_string(cfg.method);
  IsiDistribution dist = load_distribution(cfg.dist);

  SweepConfig sweep;
  sweep.n_groups = cfg.n_groups;
  sweep.group_size = cfg.group_size;
  sweep.grid = cfg.grid;
  if (sweep.grid.empty()) {
    sweep.grid = (method == PoolMethod::Mjop)
                     ? std::vector<double>{1.0, 2.0, 5.0}
                     : std::vector<double>{0.20, 0.25, 0.30, 1.0};
  }
  sweep.seed = cfg.seed;
  sweep.tb = cfg.tb();
  sweep.input_filter = SynapseFilter{cfg.tau_in};
  sweep.mjop_output_filter = SynapseFilter{cfg.tau_out};
  sweep.avam_ensemble_filter = SynapseFilter{cfg.tau_e};
  sweep.phi = cfg.phi;

  const SweepResult result = evaluate_sweep(dist, sweep, method);

  std::vector<std::string> scatter_cols = {"group", "true_max", "avg"};
  for (double v : sweep.grid) scatter_cols.push_back("est_" + fmt_param(v));
  std::vector<std::vector<std::string>> scatter_rows;
  for (std::size_t g = 0; g < result.true_max_mean.size(); ++g) {
    std::vector<std::string> row{std::to_string(g),
                                 fmt(result.true_max_mean[g]),
                                 fmt(result.average_mean[g])};
    for (std::size_t gi = 0; gi < sweep.grid.size(); ++gi) {
      row.push_back(fmt(result.estimate_mean[gi][g]));
    }
    scatter_rows.push_back(std::move(row));
  }

  std::vector<std::string> summary_cols = {"value", "correlation", "slope",
                                           "correlation_defined"};
  std::vector<std::vector<std::string>> summary_rows;
  for (const GridPointSummary& s : result.summary) {
    summary_rows.push_back({fmt_param(s.value),
                            s.correlation_defined ? fmt(s.correlation) : "nan",
                            std::isnan(s.slope) ? "nan" : fmt(s.slope),
                            s.correlation_defined ? "1" : "0"});
  }

  emit_table(cfg, "sweep", scatter_cols, scatter_rows, cfg.out);
  emit_table(cfg, "sweep-summary", summary_cols, summary_rows,
             summary_path(cfg.out));
  return 0;
}

int cmd_run_net(const RunConfig& cfg) {
  const LayerGraph graph = load_bundle(cfg.bundle);  // throws before any output
  const TimeBase tb = cfg.tb();

  PoolParams params;
  params.input_filter = SynapseFilter{cfg.tau_in};
  params.mjop_scale = cfg.scale;
  params.mjop_output_filter = SynapseFilter{cfg.tau_out};
  params.avam_phi = cfg.phi;
  params.avam_radius = cfg.radius;
  params.avam_ensemble_filter = SynapseFilter{cfg.tau_e};

  // Probe inputs: smooth positive fields inside the [-1, 1] normalization
  // band, the regime the rate/spiking comparison is meaningful in.
  std::mt19937_64 rng(cfg.seed);
  const auto unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  std::vector<std::vector<double>> inputs(cfg.n_inputs);
  for (auto& x : inputs) {
    x.resize(graph.input_shape.flat_size());
    const double base = 0.35 + 0.4 * unit();
    for (double& v : x) {
      v = std::clamp(base + 0.4 * (unit() - 0.5), 0.0, 1.0);
    }
  }

  const std::size_t n_classes = graph.output_size();
  std::vector<std::string> columns = {"input",      "method", "rate_argmax",
                                      "spk_argmax", "agree",  "rel_err"};
  for (std::size_t i = 0; i < n_classes; ++i) {
    columns.push_back("rate_score_" + std::to_string(i));
  }
  for (std::size_t i = 0; i < n_classes; ++i) {
    columns.push_back("spk_score_" + std::to_string(i));
  }

  std::vector<std::vector<std::string>> rows;
  for (const std::string& method_name : cfg.methods) {
    const PoolMethod method = pool_method_from_string(method_name);
    LayerGraph rate_graph = graph;
    for (Layer& layer : rate_graph.layers) {
      if (auto* pool = std::get_if<PoolLayerSpec>(&layer)) {
        pool->spec.method = method;
      }
    }
    double agree_total = 0.0;
    double err_total = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const std::vector<double> rate_scores = rate_forward(rate_graph, inputs[i]);
      const SpikingResult spk = spiking_forward(graph, inputs[i], tb, method, params);
      const std::size_t rate_cls = argmax_class(rate_scores);
      const std::size_t spk_cls = argmax_class(spk.scores);
      double num = 0.0, den = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        num += (spk.scores[c] - rate_scores[c]) * (spk.scores[c] - rate_scores[c]);
        den += rate_scores[c] * rate_scores[c];
      }
      const double rel_err = (den > 0.0) ? std::sqrt(num / den) : 0.0;
      agree_total += (rate_cls == spk_cls) ? 1.0 : 0.0;
      err_total += rel_err;

      std::vector<std::string> row{std::to_string(i),
                                   method_name,
                                   std::to_string(rate_cls),
                                   std::to_string(spk_cls),
                                   (rate_cls == spk_cls) ? "1" : "0",
                                   fmt(rel_err)};
      for (double s : rate_scores) row.push_back(fmt(s));
      for (double s : spk.scores) row.push_back(fmt(s));
      rows.push_back(std::move(row));
    }
    // Aggregate row per method.
    std::vector<std::string> agg{"all",
                                 method_name,
                                 "",
                                 "",
                                 fmt(agree_total / static_cast<double>(inputs.size())),
                                 fmt(err_total / static_cast<double>(inputs.size()))};
    agg.resize(columns.size());
    rows.push_back(std::move(agg));
  }
  emit_table(cfg, "run-net", columns, rows, cfg.out);
  return 0;
}

std::vector<std::size_t> parse_dims(const std::string& text, std::size_t count,
                                    const std::string& what) {
  std::vector<std::size_t> dims;
  std::istringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) dims.push_back(std::stoul(part));
  if (dims.size() != count) {
    throw std::runtime_error("expected " + what + " as " +
                             std::to_string(count) + " x-separated integers, got '" +
                             text + "'");
  }
  return dims;
}

int cmd_plan_cores(const RunConfig& cfg) {
  const auto dims = parse_dims(cfg.shape, 3, "--shape CxHxW");
  const auto win = parse_dims(cfg.window, 2, "--window RxC");
  TensorShape shape{dims[0], dims[1], dims[2], Layout::ChannelsFirst};
  PoolSpec spec{win[0], win[1], PoolMethod::Mjop};

  json j;
  j["config"] = config_echo(cfg, "plan-cores");
  j["shape"] = {{"channels", shape.channels},
                {"height", shape.height},
                {"width", shape.width}};
  j["window"] = {spec.window_rows, spec.window_cols};
  try {
    const CoreMap map = plan_core_map(shape, spec);
    j["feasible"] = true;
    j["compartments_per_core"] = map.compartments_per_core;
    j["core_count"] = map.core_count();
    json cores = json::array();
    for (const CoreAssignment& a : map.assignments) {
      cores.push_back({{"core", a.core_id},
                       {"channel", a.channel},
                       {"row_begin", a.row_begin},
                       {"row_end", a.row_end},
                       {"col_begin", a.col_begin},
                       {"col_end", a.col_end},
                       {"compartments", a.compartments}});
    }
    j["cores"] = std::move(cores);
  } catch (const InfeasibleCoreMap& e) {
    j["feasible"] = false;
    j["reason"] = e.what();
  }
  write_file_or_die(cfg.out, j.dump(2) + "\n");
  return 0;
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, bool with_seed = true) {
  cmd->add_option("--dt", cfg.dt, "seconds per simulation step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--steps", cfg.steps, "number of simulation steps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tau-in", cfg.tau_in, "input synapse time constant (s)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tau-out", cfg.tau_out, "output synapse time constant (s)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tau-e", cfg.tau_e, "ensemble synapse time constant (s)")
      ->check(CLI::PositiveNumber);
  if (with_seed) cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--out", cfg.out, "output file path")->required();
  cmd->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spiking max-pooling toolkit (MJOP and AVAM nets)"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file");

  RunConfig cfg;

  CLI::App* poc_mjop =
      app.add_subcommand("poc-mjop", "MJOP net on the four periodic inputs");
  add_common_options(poc_mjop, cfg);
  poc_mjop->add_option("--scale", cfg.scale, "output scale on U_out");

  CLI::App* poc_avam =
      app.add_subcommand("poc-avam", "AVAM net on the four periodic inputs");
  add_common_options(poc_avam, cfg);
  poc_avam->add_option("--radius", cfg.radii, "ensemble radius grid");
  poc_avam->add_option("--phi", cfg.phi, "ensemble max firing rate (Hz)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "scale/radius sweep over sampled ISI groups");
  add_common_options(sweep, cfg);
  sweep->add_option("--method", cfg.method, "net under sweep")
      ->required()
      ->check(CLI::IsMember({"mjop", "avam"}));
  sweep->add_option("--dist", cfg.dist,
                    "ISI distribution: light-tailed, fat-tailed, or a CSV file");
  sweep->add_option("--grid", cfg.grid, "parameter grid (scale or radius values)");
  sweep->add_option("--n-groups", cfg.n_groups, "number of sampled ISI groups");
  sweep->add_option("--group-size", cfg.group_size, "ISIs per group");
  sweep->add_option("--phi", cfg.phi, "ensemble max firing rate (Hz)");

  CLI::App* run_net = app.add_subcommand(
      "run-net", "rate vs spiking inference over a weight bundle");
  add_common_options(run_net, cfg);
  run_net->add_option("--bundle", cfg.bundle, "weight bundle manifest path")
      ->required();
  run_net->add_option("--method", cfg.methods,
                      "pooling methods (true_max, average, mjop, avam)");
  run_net->add_option("--n-inputs", cfg.n_inputs, "number of probe inputs");
  run_net->add_option("--scale", cfg.scale, "MJOP output scale");
  run_net->add_option("--radius", cfg.radius, "AVAM ensemble radius");
  run_net->add_option("--phi", cfg.phi, "AVAM max firing rate (Hz)");

  CLI::App* plan_cores = app.add_subcommand(
      "plan-cores", "Neuro-Core mapping for a channel tensor");
  plan_cores->add_option("--shape", cfg.shape, "tensor shape CxHxW")->required();
  plan_cores->add_option("--window", cfg.window, "pooling window RxC");
  plan_cores->add_option("--out", cfg.out, "output file path")->required();

  CLI11_PARSE(app, argc, argv);

  // SPIKEPOOL_SEED is the fallback when neither the command line nor the
  // config file set a seed.
  for (CLI::App* sub : {poc_mjop, poc_avam, sweep, run_net}) {
    if (sub->parsed()) {
      CLI::Option* opt = sub->get_option("--seed");
      if (opt->count() == 0) {
        if (const char* env = std::getenv("SPIKEPOOL_SEED")) {
          try {
            cfg.seed = std::stoull(env);
          } catch (const std::exception&) {
            std::cerr << "spikepool: SPIKEPOOL_SEED is not an integer: " << env
                      << "\n";
            return 1;
          }
        }
      }
    }
  }

  try {
    if (poc_mjop->parsed()) return cmd_poc_mjop(cfg);
    if (poc_avam->parsed()) return cmd_poc_avam(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (run_net->parsed()) return cmd_run_net(cfg);
    if (plan_cores->parsed()) return cmd_plan_cores(cfg);
  } catch (const std::exception& e) {
    std::cerr << "spikepool: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
