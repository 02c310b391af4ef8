#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sarah/config.hpp"
#include "sarah/errors.hpp"
#include "sarah/harness.hpp"
#include "sarah/verify.hpp"

namespace {

void report(const sarah::ExperimentResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& r : result.runs) {
    std::cout << r.label << ": passes=" << sarah::format_number(r.final_passes)
              << " residual=" << sarah::format_number(r.final_residual)
              << (r.error.empty() ? "" : r.diverged ? " [diverged]" : " [error]")
              << '\n';
  }
  std::cout << "output: " << result.output_dir << '\n';
}

sarah::ExperimentConfig load(const std::string& path, const std::string& out_dir) {
  auto cfg = sarah::load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  return cfg;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> grid;
  if (points == 1) return {lo};
  for (std::size_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(points - 1);
    grid.push_back(std::round(lo * std::pow(hi / lo, f)));
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic recursive gradient experiments"};
  app.set_version_flag("--version", SARAH_VERSION);
  app.require_subcommand(1);

  std::string config_path, out_dir;

  auto* run = app.add_subcommand("run", "Run every solver of a config file");
  run->add_option("config", config_path, "Experiment config")->required();
  run->add_option("-o,--output-dir", out_dir, "Override output_dir");

  std::vector<std::string> m_values;
  auto* sweep_m = app.add_subcommand("sweep-m", "SARAH and SVRG over inner loop sizes");
  sweep_m->add_option("config", config_path, "Experiment config")->required();
  sweep_m->add_option("--m", m_values, "Loop sizes, e.g. 0.1n 1n 500")
      ->required()->delimiter(',');
  sweep_m->add_option("-o,--output-dir", out_dir, "Override output_dir");

  std::vector<double> gammas{1.0, 0.5, 0.25, 0.125, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  auto* sweep_gamma = app.add_subcommand("sweep-gamma", "SARAH+ over stopping ratios");
  sweep_gamma->add_option("config", config_path, "Experiment config")->required();
  sweep_gamma->add_option("--gamma", gammas, "Stopping ratios")->delimiter(',');
  sweep_gamma->add_option("-o,--output-dir", out_dir, "Override output_dir");

  double mu = 1e-6, L = 1.0, m_min = 1e3, m_max = 1e7;
  std::size_t points = 41;
  std::string rates_out;
  auto* rates = app.add_subcommand("rates", "Best SARAH and SVRG rates versus m");
  rates->add_option("--mu", mu, "Strong convexity modulus")->capture_default_str();
  rates->add_option("--L", L, "Smoothness constant")->capture_default_str();
  rates->add_option("--m-min", m_min, "Smallest m")->capture_default_str();
  rates->add_option("--m-max", m_max, "Largest m")->capture_default_str();
  rates->add_option("--points", points, "Log-spaced grid points")
      ->capture_default_str()->check(CLI::PositiveNumber);
  rates->add_option("--out", rates_out, "CSV path (stdout when omitted)");

  sarah::VerifyOptions vopts;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Exact-enumeration oracle suite");
  verify->add_option("--instances", vopts.instances, "Instances per kind")
      ->capture_default_str();
  verify->add_option("--seed", vopts.seed, "Instance seed")->capture_default_str();
  verify->add_option("--out", verify_out, "CSV path (stdout when omitted)");

  double tol = 0.0;
  std::string w_out;
  auto* reference = app.add_subcommand("reference", "Compute and cache w*");
  reference->add_option("config", config_path, "Experiment config")->required();
  reference->add_option("--tol", tol, "Gradient-norm tolerance (config value when 0)");
  reference->add_option("--w-out", w_out, "Write w* one value per line");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto result = sarah::run_experiment(load(config_path, out_dir));
      report(result);
      return result.all_ok() ? 0 : 1;
    }
    if (*sweep_m) {
      std::vector<sarah::LoopSpec> specs;
      for (const auto& m : m_values) specs.push_back(sarah::parse_loop(m));
      const auto result = sarah::sweep_m(load(config_path, out_dir), specs);
      report(result);
      return result.all_ok() ? 0 : 1;
    }
    if (*sweep_gamma) {
      const auto result = sarah::sweep_gamma(load(config_path, out_dir), gammas);
      report(result);
      return result.all_ok() ? 0 : 1;
    }
    if (*rates) {
      const auto grid = log_grid(m_min, m_max, points);
      if (rates_out.empty()) {
        sarah::emit_rate_sweep(mu, L, grid, std::cout);
      } else {
        std::ofstream out(rates_out);
        sarah::emit_rate_sweep(mu, L, grid, out);
        if (!out) throw sarah::Error("cannot write '" + rates_out + "'");
      }
      return 0;
    }
    if (*verify) {
      const auto rep = sarah::run_verification(vopts);
      if (verify_out.empty()) {
        sarah::write_verify_csv(rep, std::cout);
      } else {
        std::ofstream out(verify_out);
        sarah::write_verify_csv(rep, out);
      }
      std::cerr << rep.checks.size() - rep.failures() << '/' << rep.checks.size()
                << " checks passed\n";
      return rep.passed() ? 0 : 1;
    }
    if (*reference) {
      const auto cfg = sarah::load_config(config_path);
      const auto prep = sarah::prepare_problem(cfg);
      sarah::ReferenceOptions ro{tol > 0.0 ? tol : cfg.reference_tol,
                                 cfg.reference_max_iter, cfg.reference_cache};
      const auto ref = sarah::compute_reference(prep.problem, ro);
      std::cout << "p_star = " << sarah::format_number(ref.p_star) << '\n'
                << "grad_norm_sq = " << sarah::format_number(ref.grad_norm_sq_at_star)
                << '\n'
                << "solver = " << ref.solver << " iterations=" << ref.iterations
                << '\n';
      if (!w_out.empty()) {
        std::ofstream out(w_out);
        for (double x : ref.w_star) out << sarah::format_number(x) << '\n';
      }
      return 0;
    }
  } catch (const sarah::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
