// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Build the project and run this binary directly, or let
// ctest invoke it (the CLI path comes from SPIKEPOOL_CLI).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spikepool/avam.hpp"
#include "spikepool/bundle.hpp"
#include "spikepool/heuristics.hpp"
#include "spikepool/mjop.hpp"
#include "spikepool/network.hpp"
#include "spikepool/pooling.hpp"
#include "spikepool/sim.hpp"

// The tiny-graph generator and error norms shared with the unit tests.
#include "graph_gen.hpp"

namespace fs = std::filesystem;
using namespace spikepool;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& detail) {
  if (!cond) throw Failure(detail);
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

double steady(const CurrentTrace& t) {
  double sum = 0.0;
  const std::size_t begin = t.size() / 2;
  for (std::size_t i = begin; i < t.size(); ++i) sum += t[i];
  return sum / static_cast<double>(t.size() - begin);
}

// --- criterion 1: pairwise max identity, rate model -------------------------

std::string criterion_eq7_exactness() {
  std::mt19937_64 rng(1);
  const double radius = 0.25;
  PairMaxConfig cfg;
  cfg.radius = radius;
  cfg.rate_model = true;
  PairMaxNet net(cfg);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = test_helpers::uniform(rng, 0.0, 1.0);
    const double span = test_helpers::uniform(rng, 0.0, 2.0 * radius);
    const double b = std::max(0.0, a - span);
    const double got = net.step(a, b);
    worst = std::max(worst, std::fabs(got - std::max(a, b)));
  }
  require(worst <= 1e-9, "max deviation " + fmt(worst));
  return "10^4 pairs, max |err| = " + fmt(worst);
}

// --- criterion 2: associative reduction, rate model -------------------------

std::string criterion_eq8_tree_equivalence() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (std::size_t k : {2, 3, 4, 8, 9}) {
    for (TreeShape shape : {TreeShape::Balanced, TreeShape::Chain}) {
      AvamNetConfig cfg;
      cfg.radius_per_level = {0.6};
      cfg.rate_model = true;
      cfg.shape = shape;
      AvamNet net(k, cfg);
      for (int i = 0; i < 400; ++i) {
        std::vector<double> values(k);
        for (double& v : values) v = test_helpers::uniform(rng, 0.0, 1.0);
        const double expected = *std::max_element(values.begin(), values.end());
        worst = std::max(worst, std::fabs(net.step_currents(values) - expected));
      }
    }
  }
  require(worst <= 1e-9, "max deviation " + fmt(worst));
  return "k in {2,3,4,8,9}, two shapes, max |err| = " + fmt(worst);
}

// --- criterion 3: MJOP join correctness --------------------------------------

std::string criterion_mjop_join() {
  std::mt19937_64 rng(3);
  TimeBase tb{1e-3, 1};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + test_helpers::uniform_index(rng, 32);
    std::vector<Compartment> comps(n);
    std::vector<int> slots(n, 2);
    comps[0].parent = -1;
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t p;
      do {
        p = test_helpers::uniform_index(rng, i);
      } while (slots[p] == 0);
      comps[i].parent = static_cast<int>(p);
      --slots[p];
    }
    McTree tree(comps, JoinOp::Max, IfNeuron{1000.0, 0.0, 1.0, 0.0});
    std::vector<double> currents(n);
    for (double& v : currents) v = test_helpers::uniform(rng, 0.0, 1.0);
    const double expected = *std::max_element(currents.begin(), currents.end());
    const double got = tree.step(currents, tb).soma_dv;
    require(got == expected, "tree size " + std::to_string(n) + ": soma dV " +
                                 fmt(got) + " != brute max " + fmt(expected));
  }
  return "10^3 random trees, soma dV exactly the brute-force max";
}

// --- shared PoC inputs --------------------------------------------------------

struct Poc {
  std::vector<SpikeTrain> trains;
  std::vector<CurrentTrace> currents;
  CurrentTrace truemax;
  CurrentTrace avg;
};

Poc make_poc(const TimeBase& tb) {
  Poc poc;
  SynapseFilter f{5e-3};
  for (std::size_t p : {10, 8, 4, 6}) {
    poc.trains.push_back(make_periodic_train(p, 1.0, 0, tb));
    poc.currents.push_back(filter_spikes(poc.trains.back(), f, tb));
  }
  poc.truemax = true_max_oracle(poc.currents);
  poc.avg.values.assign(tb.n_steps, 0.0);
  for (std::size_t t = 0; t < tb.n_steps; ++t) {
    double sum = 0.0;
    for (const CurrentTrace& u : poc.currents) sum += u[t];
    poc.avg.values[t] = sum / 4.0;
  }
  return poc;
}

// --- criterion 4: MJOP PoC -----------------------------------------------------

std::string criterion_mjop_poc() {
  TimeBase tb{1e-3, 300};
  Poc poc = make_poc(tb);
  MjopNetConfig cfg;
  cfg.scale = 1.1;
  MjopNet net(4, cfg, tb.dt);
  const CurrentTrace scaled = run_mjop_net(net, poc.trains, tb);

  const double mean_scaled = steady(scaled);
  const double mean_true = steady(poc.truemax);
  const double mean_avg = steady(poc.avg);
  const double rel = std::fabs(mean_scaled - mean_true) / mean_true;
  require(rel <= 0.10, "scaled U_out off true max by " + fmt(100 * rel) + "%");
  require(mean_scaled > mean_avg,
          "scaled U_out " + fmt(mean_scaled) + " not above avg " + fmt(mean_avg));
  return "scaled U_out/true max = " + fmt(mean_scaled / mean_true) +
         ", avg baseline " + fmt(mean_avg / mean_true);
}

// --- criterion 5: AVAM PoC -------------------------------------------------------

std::string criterion_avam_poc() {
  TimeBase tb{1e-3, 300};
  Poc poc = make_poc(tb);
  const double mean_true = steady(poc.truemax);

  const auto run_radius = [&](double r) {
    AvamNet net = build_avam_tree(4, 500.0, r);
    return steady(run_avam_net(net, poc.trains, tb));
  };

  std::string detail;
  double err_025 = 0.0;
  for (double r : {0.20, 0.25}) {
    const double mean_est = run_radius(r);
    const double rel = std::fabs(mean_est - mean_true) / mean_true;
    if (r == 0.25) err_025 = std::fabs(mean_est - mean_true);
    require(rel <= 0.10, "r=" + fmt(r) + " off true max by " + fmt(100 * rel) + "%");
    detail += "r=" + fmt(r) + " err " + fmt(100 * rel) + "%; ";
  }
  const double err_1 = std::fabs(run_radius(1.0) - mean_true);
  require(err_1 > err_025, "r=1.0 error " + fmt(err_1) +
                               " not above r=0.25 error " + fmt(err_025));
  return detail + "r=1.0 err " + fmt(err_1) + " > r=0.25 err " + fmt(err_025);
}

// --- criterion 6: sweep correlations ---------------------------------------------

std::string criterion_sweep_correlations() {
  SweepConfig cfg;
  cfg.n_groups = 256;
  cfg.group_size = 4;
  cfg.seed = 6;

  cfg.grid = {1.0, 2.0, 5.0};
  const SweepResult mjop =
      evaluate_sweep(IsiDistribution::light_tailed(), cfg, PoolMethod::Mjop);
  double best_mjop = -1.0;
  for (const auto& s : mjop.summary) {
    require(s.correlation_defined, "undefined MJOP correlation");
    best_mjop = std::max(best_mjop, s.correlation);
  }
  require(best_mjop >= 0.95, "best MJOP correlation " + fmt(best_mjop));
  require(mjop.avg_above_true_max_steps == 0,
          "avg exceeded true max on " +
              std::to_string(mjop.avg_above_true_max_steps) + " steps");

  cfg.grid = {0.20, 0.25, 0.30, 1.0};
  const SweepResult avam =
      evaluate_sweep(IsiDistribution::light_tailed(), cfg, PoolMethod::Avam);
  double best_avam = -1.0;
  for (const auto& s : avam.summary) {
    require(s.correlation_defined, "undefined AVAM correlation");
    best_avam = std::max(best_avam, s.correlation);
  }
  require(best_avam >= 0.95, "best AVAM correlation " + fmt(best_avam));
  require(avam.avg_above_true_max_steps == 0,
          "avg exceeded true max on " +
              std::to_string(avam.avg_above_true_max_steps) + " steps");
  return "256 groups; best r: MJOP " + fmt(best_mjop) + ", AVAM " + fmt(best_avam);
}

// --- criterion 7: neuron-count scaling --------------------------------------------

std::string criterion_neuron_counts() {
  for (std::size_t k : {1, 4, 9, 16, 25}) {
    AvamNet net = build_avam_tree(k, 500.0, 0.25);
    require(net.neuron_count() == 2 * k - 2,
            "AVAM neuron count for k=" + std::to_string(k) + " is " +
                std::to_string(net.neuron_count()));
  }
  for (std::size_t d : {1, 2, 3, 4, 5}) {
    require(mjop_tree_size(d, d) == d * d,
            "MJOP size for " + std::to_string(d) + "x" + std::to_string(d));
  }
  return "2k-2 and r*c hold for k in {1,4,9,16,25}";
}

// --- criterion 8: core-map feasibility ----------------------------------------------

std::string criterion_core_map() {
  std::mt19937_64 rng(8);
  PoolSpec spec{2, 2, PoolMethod::Mjop};
  std::size_t planned = 0;
  for (int trial = 0; trial < 60; ++trial) {
    TensorShape shape{1 + test_helpers::uniform_index(rng, 8),
                      2 * (1 + test_helpers::uniform_index(rng, 32)),
                      2 * (1 + test_helpers::uniform_index(rng, 32)),
                      Layout::ChannelsFirst};
    if (trial == 0) shape = TensorShape{8, 64, 64, Layout::ChannelsFirst};
    const CoreMap map = plan_core_map(shape, spec);

    std::vector<int> cell_core(shape.flat_size(), -1);
    std::vector<std::size_t> load(map.core_count(), 0);
    for (const auto& a : map.assignments) {
      require(a.compartments <= map.compartments_per_core, "core overloaded");
      load[static_cast<std::size_t>(a.core_id)] += a.compartments;
      for (std::size_t y = a.row_begin; y < a.row_end; ++y) {
        for (std::size_t x = a.col_begin; x < a.col_end; ++x) {
          const std::size_t idx = (a.channel * shape.height + y) * shape.width + x;
          require(cell_core[idx] == -1, "cell covered twice");
          cell_core[idx] = a.core_id;
        }
      }
    }
    for (int c : cell_core) require(c >= 0, "cell left unmapped");
    for (std::size_t l : load)
      require(l <= map.compartments_per_core, "core load above 1024");
    for (const auto& g : extract_windows(shape, spec)) {
      int core = -1;
      for (std::size_t idx : g.input_indices) {
        // extract_windows and the map both use channels-first storage here.
        const int assigned = cell_core[idx];
        if (core < 0) core = assigned;
        require(core == assigned, "window straddles cores");
      }
    }
    ++planned;
  }
  return std::to_string(planned) + " shapes up to 8x64x64, zero straddles";
}

// --- criterion 9: conversion fidelity -------------------------------------------------

std::string criterion_conversion_fidelity() {
  std::mt19937_64 rng(9);
  TimeBase tb{1e-3, 400};
  PoolParams avam_params;
  avam_params.avam_radius = 0.25;

  int agree = 0;
  double worst_true = 0.0, worst_avam = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    LayerGraph g = test_helpers::make_tiny_graph(
        rng, trial % 2 ? Layout::ChannelsFirst : Layout::ChannelsLast);
    const std::vector<double> x = test_helpers::make_graph_input(rng, g);
    const std::vector<double> want = rate_forward(g, x);

    const SpikingResult tm = spiking_forward(g, x, tb, PoolMethod::TrueMax);
    const double err_tm = test_helpers::relative_error(tm.scores, want);
    worst_true = std::max(worst_true, err_tm);
    require(err_tm <= 0.05,
            "TRUE_MAX rel err " + fmt(100 * err_tm) + "% on graph " +
                std::to_string(trial));
    agree += (argmax_class(tm.scores) == argmax_class(want)) ? 1 : 0;

    const SpikingResult av =
        spiking_forward(g, x, tb, PoolMethod::Avam, avam_params);
    const double err_av = test_helpers::relative_error(av.scores, want);
    worst_avam = std::max(worst_avam, err_av);
    require(err_av <= 0.10,
            "AVAM rel err " + fmt(100 * err_av) + "% on graph " +
                std::to_string(trial));
  }
  require(agree >= 18, "argmax agreement " + std::to_string(agree) + "/20");
  return "20 graphs; worst TRUE_MAX " + fmt(100 * worst_true) + "%, worst AVAM " +
         fmt(100 * worst_avam) + "%, argmax " + std::to_string(agree) + "/20";
}

// --- criterion 10: CLI determinism -----------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Failure("missing CLI output: " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string criterion_cli_determinism() {
  const char* cli = std::getenv("SPIKEPOOL_CLI");
  require(cli != nullptr, "SPIKEPOOL_CLI not set (point it at the CLI binary)");

  const fs::path dir = fs::temp_directory_path() / "spikepool_acceptance";
  fs::create_directories(dir);

  std::mt19937_64 rng(10);
  const LayerGraph graph = test_helpers::make_tiny_graph(rng, Layout::ChannelsLast);
  const fs::path manifest = dir / "accept_net.json";
  save_bundle(graph, manifest);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"poc-mjop", "poc-mjop --seed 17 --out "},
      {"poc-avam", "poc-avam --seed 17 --out "},
      {"sweep", "sweep --method avam --n-groups 32 --seed 17 --out "},
      {"run-net", "run-net --bundle " + manifest.string() +
                      " --steps 150 --n-inputs 2 --seed 17 --out "},
      {"plan-cores", "plan-cores --shape 2x40x40 --out "},
  };
  for (const auto& [name, args] : commands) {
    const fs::path a = dir / (name + "_a.out");
    const fs::path b = dir / (name + "_b.out");
    for (const fs::path& target : {a, b}) {
      const std::string cmd = std::string(cli) + " " + args + target.string() +
                              " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      require(WEXITSTATUS(status) == 0, name + " exited nonzero");
    }
    require(slurp(a) == slurp(b), name + " output differs between runs");
    if (name == "sweep") {
      require(slurp(dir / "sweep_a_summary.out") ==
                  slurp(dir / "sweep_b_summary.out"),
              "sweep summary differs between runs");
    }
  }
  return "all five commands byte-identical across repeat runs";
}

struct Criterion {
  int number;
  std::string title;
  double time_limit_s;  // <= 0 means unenforced
  std::function<std::string()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "pairwise max identity exact in the rate model", 1.0,
       criterion_eq7_exactness},
      {2, "associative tree equals the k-way max in the rate model", 1.0,
       criterion_eq8_tree_equivalence},
      {3, "MJOP soma dV equals the brute-force join", 1.0, criterion_mjop_join},
      {4, "MJOP PoC tracks the true max at scale 1.1", 1.0, criterion_mjop_poc},
      {5, "AVAM PoC tracks the true max for r in {0.20, 0.25}", 2.0,
       criterion_avam_poc},
      {6, "sweep correlations reach 0.95 on the light-tailed preset", 30.0,
       criterion_sweep_correlations},
      {7, "neuron counts scale as r*c and 2k-2", 1.0, criterion_neuron_counts},
      {8, "core maps stay within 1024 compartments with no straddling windows",
       5.0, criterion_core_map},
      {9, "spiking inference matches the rate oracle", 120.0,
       criterion_conversion_fidelity},
      {10, "CLI commands are byte-deterministic under a fixed seed", 0.0,
       criterion_cli_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (ok && c.time_limit_s > 0.0 && elapsed > c.time_limit_s) {
      ok = false;
      detail = "exceeded the " + fmt(c.time_limit_s) + " s budget (" +
               fmt(elapsed) + " s)";
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << c.number
              << ": " << c.title << " | " << detail << " [" << fmt(elapsed)
              << " s]\n";
    if (!ok) ++failures;
  }
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 10 criteria passed\n";
  return 0;
}
