#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtri/cli.hpp"

namespace {

void add_mgf_flags(CLI::App* app, mtri::cli::MgfOverrides& o) {
  app->add_option("--reoptimize-every", o.reoptimize_every, "Re-solve the dual every this many slots");
  app->add_option("--dual-iters", o.dual_iters, "Subgradient iterations per re-solve");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task remote inference scheduler and simulator"};
  app.require_subcommand(1);

  mtri::cli::SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run one policy on an instance");
  simulate->add_option("--config", sim.config_path, "Instance file")->required();
  simulate->add_option("--policy", sim.policy, "mgf, maf or random")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();
  simulate->add_flag("--trace", sim.trace, "Also write trace.csv");
  add_mgf_flags(simulate, sim.mgf);

  mtri::cli::SweepOptions sw;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("--spec", sw.spec_path, "Sweep spec file")->required();
  sweep->add_option("--out", sweep_out, "Output directory (overrides the spec)");
  add_mgf_flags(sweep, sw.mgf);

  mtri::cli::CertifyOptions cert;
  auto* certify = app.add_subcommand("certify", "Gap certificates on r-multiplied instances");
  certify->add_option("--config", cert.config_path, "Base instance file")->required();
  certify->add_option("--r", cert.r_values, "Scale factors")->delimiter(',')->capture_default_str();
  certify->add_flag("--oracle", cert.oracle, "Add the brute-force optimum and check the sandwich");
  certify->add_option("--out", cert.out_dir, "Output directory")->capture_default_str();
  add_mgf_flags(certify, cert.mgf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mtri::cli::kInvalid;
  }

  if (*simulate) return mtri::cli::cmd_simulate(sim);
  if (*sweep) {
    if (!sweep_out.empty()) sw.out_dir = sweep_out;
    return mtri::cli::cmd_sweep(sw);
  }
  return mtri::cli::cmd_certify(cert);
}
