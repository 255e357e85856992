// mpoc: compile Trotter propagators into fixed-depth circuits.

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mpoc/bench.hpp"
#include "mpoc/errors.hpp"

namespace {

std::vector<std::size_t> parse_depths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const long v = std::stol(item, &used);
    if (used != item.size() || v <= 0) throw mpoc::UsageError("bad depth '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile time-evolution propagators into fixed-depth circuits"};
  app.require_subcommand(1);

  mpoc::RunManifest m;
  std::string depths = "3,5,9,17";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", m.config_path, "Model config file")->required();
    sub->add_option("--depths", depths, "Comma-separated circuit depths");
    sub->add_option("--chi", m.chi, "Training bond dimension");
    sub->add_option("--k", m.k, "Trotter steps for the target");
    sub->add_option("--budget", m.budget, "Target precompression error budget");
    sub->add_option("--seed", m.seed, "Seed for --perturb");
    sub->add_option("--perturb", m.perturb, "Random perturbation of the initial gates");
    sub->add_option("--sweeps", m.max_sweeps, "Maximum optimizer sweeps");
    sub->add_option("--cost-tol", m.cost_tol, "Relative improvement that ends optimization");
    sub->add_option("--depth-cap", m.depth_cap, "Deepest Trotterization in the baseline");
    sub->add_option("--out", m.out_dir, "Output directory");
  };
  auto* compile = app.add_subcommand("compile", "Build the target and optimize circuits");
  auto* baseline = app.add_subcommand("baseline", "Compare against Trotterizations");
  auto* diagnose = app.add_subcommand("diagnose", "Operator-Schmidt decay of the compiled circuit");
  auto* verify = app.add_subcommand("verify", "Dense cross-check of all artifacts (n <= 10)");
  for (auto* s : {compile, baseline, diagnose, verify}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    m.depths = parse_depths(depths);
    if (compile->parsed()) {
      mpoc::cmd_compile(m, std::cout);
    } else if (baseline->parsed()) {
      mpoc::cmd_baseline(m, std::cout);
    } else if (diagnose->parsed()) {
      mpoc::cmd_diagnose(m, std::cout);
    } else if (verify->parsed()) {
      if (!mpoc::cmd_verify(m, std::cout)) {
        std::cerr << "verification failed\n";
        return 1;
      }
      std::cout << "verification passed\n";
    }
  } catch (const mpoc::CapacityError& e) {
    std::cerr << "capacity exceeded: " << e.what() << " (last cost " << e.last_cost() << ")\n";
    return 3;
  } catch (const mpoc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mpoc::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const mpoc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
