#pragma once

// Subcommand bodies for the mtri executable. Each returns the process exit
// code: 0 success, 1 invalid input, 2 file I/O failure, 3 a certificate that
// should hold does not.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mtri/bounds.hpp"
#include "mtri/experiment.hpp"
#include "mtri/io.hpp"
#include "mtri/sim.hpp"

namespace mtri::cli {

enum ExitCode : int { kOk = 0, kInvalid = 1, kIo = 2, kCertificateFailed = 3 };

struct MgfOverrides {
  std::optional<std::int64_t> reoptimize_every;
  std::optional<std::int64_t> dual_iters;
};

struct SimulateOptions {
  std::filesystem::path config_path;
  std::string policy = "mgf";
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  bool trace = false;
  MgfOverrides mgf;
};

struct SweepOptions {
  std::filesystem::path spec_path;
  std::optional<std::filesystem::path> out_dir;
  MgfOverrides mgf;
};

struct CertifyOptions {
  std::filesystem::path config_path;
  std::vector<std::int64_t> r_values{1, 2, 4, 8};
  bool oracle = false;
  std::filesystem::path out_dir = ".";
  MgfOverrides mgf;
};

namespace detail {

inline MgfPolicy apply(MgfPolicy p, const MgfOverrides& o) {
  if (o.reoptimize_every) {
    if (*o.reoptimize_every < 1) throw ConfigError("--reoptimize-every must be at least 1");
    p.reoptimize_every = *o.reoptimize_every;
  }
  if (o.dual_iters) {
    if (*o.dual_iters < 1) throw ConfigError("--dual-iters must be at least 1");
    p.dual.iterations = *o.dual_iters;
  }
  return p;
}

// Maps exceptions onto exit codes, printing the reason to `err`.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) err << "  " << v << '\n';
    return kInvalid;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
}

}  // namespace detail

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto inst = load_instance(opt.config_path);
    PolicyKind policy;
    if (opt.policy == "mgf") policy = detail::apply(inst.mgf, opt.mgf);
    else if (opt.policy == "maf") policy = MafPolicy{};
    else if (opt.policy == "random") policy = RandomPolicy{opt.seed};
    else throw ConfigError("unknown policy `" + opt.policy + "` (expected mgf, maf or random)");

    const auto res = run(inst.config, policy, opt.seed);
    std::string divergence;
    if (res.divergence_trace) divergence = format_double(divergence_report(inst.config, res).mean_divergence);

    CsvWriter summary({"policy", "seed", "discounted_cost", "raw_cost", "tail_bound", "mean_divergence"});
    summary.add_row({opt.policy, std::to_string(opt.seed), format_double(res.discounted_cost),
                     format_double(res.raw_cost), format_double(res.tail_bound), divergence});
    summary.save(opt.out_dir / "summary.csv");

    if (opt.trace) {
      CsvWriter trace({"slot", "task_m", "task_j", "aoi", "action", "slot_cost"});
      const auto ids = inst.config.task_ids();
      for (std::size_t t = 0; t < res.aoi_trace.size(); ++t) {
        const auto cost = format_double(res.per_slot_cost[t]);
        for (std::size_t i = 0; i < ids.size(); ++i)
          trace.add_row({std::to_string(t), std::to_string(ids[i].source), std::to_string(ids[i].task),
                         std::to_string(res.aoi_trace[t].aoi[i]),
                         std::to_string(static_cast<int>(res.action_trace[t].actions[i])), cost});
      }
      trace.save(opt.out_dir / "trace.csv");
    }
    out << opt.policy << " discounted_cost=" << format_double(res.discounted_cost) << '\n';
    return int{kOk};
  });
}

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto spec = load_experiment_spec(opt.spec_path);
    const auto inst = load_instance(spec.base_config_path);
    const auto mgf = detail::apply(inst.mgf, opt.mgf);
    const auto rows = run_sweep(inst.config, mgf, spec);
    const auto dir = opt.out_dir ? *opt.out_dir : (spec.output_dir.empty() ? "." : spec.output_dir);
    sweep_csv(spec.variable, rows).save(dir / "sweep.csv");
    out << rows.size() << " rows written to " << (dir / "sweep.csv").string() << '\n';
    return int{kOk};
  });
}

inline int cmd_certify(const CertifyOptions& opt, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto inst = load_instance(opt.config_path);
    const auto mgf = detail::apply(inst.mgf, opt.mgf);
    if (opt.r_values.empty()) throw ConfigError("--r needs at least one value");
    for (auto r : opt.r_values)
      if (r < 1) throw ConfigError("--r values must be at least 1");

    std::vector<GapCertificate> certs(opt.r_values.size());
    std::vector<std::function<void()>> jobs;
    for (std::size_t i = 0; i < certs.size(); ++i)
      jobs.emplace_back([&, i] { certs[i] = certify(inst.config, opt.r_values[i], mgf); });
    run_parallel(jobs, worker_count());

    std::vector<std::string> header{"r", "mgf_cost", "dual_bound", "gap", "theorem1_rhs", "horizon_ok"};
    if (opt.oracle) header.push_back("brute_force_optimum");
    CsvWriter csv(header);
    bool failed = false;
    for (std::size_t i = 0; i < certs.size(); ++i) {
      const auto& c = certs[i];
      std::vector<std::string> row{std::to_string(c.scale_r), format_double(c.mgf_cost),
                                   format_double(c.dual_lower_bound), format_double(c.gap),
                                   format_double(c.theorem1_rhs), c.horizon_ok ? "true" : "false"};
      if (!c.horizon_ok) {
        err << "warning: r=" << c.scale_r << " horizon is below log_{1/g} sum sqrt(r k_m); row not asserted\n";
      } else if (!c.holds()) {
        err << "certificate failed: r=" << c.scale_r << " gap=" << format_double(c.gap)
            << " > rhs=" << format_double(c.theorem1_rhs) << '\n';
        failed = true;
      }
      if (opt.oracle) {
        const auto scaled = scale_instance(inst.config, c.scale_r);
        try {
          const double best = brute_force_optimal(scaled).optimal_cost;
          row.push_back(format_double(best));
          constexpr double kTol = 1e-9;
          if (c.dual_lower_bound > best + kTol || best > c.mgf_cost + kTol) {
            err << "sandwich failed: r=" << c.scale_r << " dual=" << format_double(c.dual_lower_bound)
                << " optimum=" << format_double(best) << " mgf=" << format_double(c.mgf_cost) << '\n';
            failed = true;
          }
        } catch (const std::invalid_argument&) {
          err << "warning: r=" << c.scale_r << " too large for the brute-force oracle\n";
          row.emplace_back();
        }
      }
      csv.add_row(row);
    }
    csv.save(opt.out_dir / "certificates.csv");
    out << certs.size() << " certificates written to " << (opt.out_dir / "certificates.csv").string() << '\n';
    return failed ? int{kCertificateFailed} : int{kOk};
  });
}

}  // namespace mtri::cli
