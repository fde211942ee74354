#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crosscheck/harness.hpp"
#include "crosscheck/sndlib.hpp"

namespace {

using namespace crosscheck;

void write_bundle(const NetworkBundle& bundle, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  save_topology_file(bundle.topology, outdir / "topology.json");
  save_demand_file(bundle.demand, outdir / "demand.json");
  save_forwarding_file(bundle.forwarding, outdir / "forwarding.json");
  std::cout << "wrote bundle to " << outdir.string() << " ("
            << bundle.topology.nodes().size() << " nodes, "
            << bundle.topology.links().size() << " directed links, "
            << bundle.demand.size() << " demands)\n";
}

std::vector<long> parse_n_list(const std::string& csv) {
  std::vector<long> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stol(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crosscheck: SDN input validation pipeline"};
  app.require_subcommand(1);

  // convert: SNDlib-style listing -> JSON bundle with shortest-path forwarding
  auto* convert = app.add_subcommand("convert", "convert an SNDlib listing to a network bundle");
  std::string convert_input, convert_outdir = "bundle";
  double unit_to_bps = 1e6;
  double gravity_total = 0.0;
  bool no_border = false;
  convert->add_option("--input", convert_input, "SNDlib native file")->required();
  convert->add_option("--outdir", convert_outdir, "output directory");
  convert->add_option("--unit-to-bps", unit_to_bps, "file unit to bits/sec multiplier");
  convert->add_option("--gravity-total-bps", gravity_total,
                      "replace file demands with a gravity matrix of this total");
  convert->add_flag("--no-border", no_border, "skip border ingress/egress links");

  // synth: expander-style synthetic bundle
  auto* synth = app.add_subcommand("synth", "generate a synthetic expander bundle");
  SyntheticOptions synth_opts;
  std::string synth_outdir = "bundle";
  synth->add_option("--nodes", synth_opts.internal_nodes, "internal node count");
  synth->add_option("--degree", synth_opts.degree, "target internal degree (even)");
  synth->add_option("--seed", synth_opts.seed, "generator seed");
  synth->add_option("--total-demand-bps", synth_opts.total_demand_bps, "gravity demand total");
  synth->add_option("--outdir", synth_outdir, "output directory");

  // generate / calibrate / sweep run off a config file
  std::string config_path;
  auto* generate = app.add_subcommand("generate", "write noise-matched telemetry snapshots");
  generate->add_option("--config", config_path, "experiment config JSON")->required();
  auto* calibrate_cmd = app.add_subcommand("calibrate", "calibrate tau/gamma on a known-good window");
  std::string calib_out = "calibration.json";
  calibrate_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  calibrate_cmd->add_option("--out", calib_out, "calibration output file");
  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep preset");
  std::string sweep_preset_override;
  sweep->add_option("--config", config_path, "experiment config JSON")->required();
  sweep->add_option("--preset", sweep_preset_override, "override the config's preset");

  // validate: one-shot decision on the latest snapshot
  auto* validate = app.add_subcommand("validate", "validate demand/topology inputs");
  ValidateInputs vin;
  std::string vdemand, vtopo, vtelemetry, vcalib;
  validate->add_option("--demand", vdemand, "demand input file")->required();
  validate->add_option("--topology", vtopo, "topology input file")->required();
  validate->add_option("--telemetry", vtelemetry, "telemetry snapshot directory")->required();
  validate->add_option("--calibration", vcalib, "calibration file")->required();
  validate->add_option("--rounds", vin.repair.rounds, "voting rounds");
  validate->add_option("--cluster-threshold-pct", vin.repair.cluster_threshold_pct,
                       "noise threshold for clustering");
  validate->add_option("--zero-floor-bps", vin.repair.zero_floor_bps,
                       "percent_diff denominator floor");
  validate->add_flag("--abstain", vin.abstain_enabled,
                     "abstain when most links are unestimable");

  // scaling: analytic FPR/TPR model CSV
  auto* scaling = app.add_subcommand("scaling", "emit the analytic FPR/TPR scaling CSV");
  std::string n_list_csv = "54,116,1000,10000";
  ScalingRequest sreq;
  double target_fpr = 0.0;
  std::string scaling_out;
  scaling->add_option("--n-list", n_list_csv, "comma-separated link counts");
  scaling->add_option("--p", sreq.p, "healthy per-link satisfaction probability")->required();
  scaling->add_option("--p-prime", sreq.p_prime, "buggy per-link satisfaction probability")->required();
  scaling->add_option("--gamma", sreq.gamma, "validation cutoff");
  scaling->add_option("--target-fpr", target_fpr, "tune the cutoff per n for this FPR");
  scaling->add_option("--out", scaling_out, "CSV output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (convert->parsed()) {
      SndlibNetwork net = load_sndlib_file(convert_input);
      ConvertOptions opts;
      opts.unit_to_bps = unit_to_bps;
      opts.add_border_links = !no_border;
      NetworkBundle bundle = convert_sndlib(net, opts);
      if (gravity_total > 0.0) {
        bundle.demand = make_gravity_demand(bundle.topology, gravity_total);
        bundle.forwarding = build_shortest_path_forwarding(bundle.topology, bundle.demand);
      }
      write_bundle(bundle, convert_outdir);
    } else if (synth->parsed()) {
      write_bundle(make_synthetic_bundle(synth_opts), synth_outdir);
    } else if (generate->parsed()) {
      const auto dir = run_generate(ExperimentConfig::load(config_path));
      std::cout << "wrote snapshots to " << dir.string() << "\n";
    } else if (calibrate_cmd->parsed()) {
      const auto config = ExperimentConfig::load(config_path);
      const auto calib = run_calibrate(config, calib_out);
      std::cout << "tau_pct=" << calib.tau_pct << " gamma=" << calib.gamma
                << " -> " << calib_out << "\n";
    } else if (sweep->parsed()) {
      auto config = ExperimentConfig::load(config_path);
      if (!sweep_preset_override.empty()) config.sweep_preset = sweep_preset_override;
      run_sweep(config);
      std::cout << "sweep '" << config.sweep_preset << "' written to "
                << config.output_dir.string() << "\n";
    } else if (validate->parsed()) {
      vin.demand_file = vdemand;
      vin.topology_file = vtopo;
      vin.telemetry_dir = vtelemetry;
      vin.calibration_file = vcalib;
      const auto report = run_validate(vin);
      std::cout << report.text;
      return report.exit_code;
    } else if (scaling->parsed()) {
      sreq.n_list = parse_n_list(n_list_csv);
      if (target_fpr > 0.0) sreq.target_fpr = target_fpr;
      const std::string csv = run_scaling_csv(sreq);
      if (scaling_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(scaling_out);
        if (!out) throw Error("cannot write " + scaling_out);
        out << csv;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
