#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mra/error.hpp"
#include "mra/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitTrialFailures = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-reference alignment experiments"};

  std::string config_path, experiment, snr_grid, n_grid, eta_grid, algos, out;
  int b = 0, q = 0, trials = 0, threads = 0;
  long long n = 0;
  double snr = 0.0, eta = 0.0;
  unsigned long long seed = 0;
  bool fixed_truth = false, paper_scale = false;

  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--experiment", experiment, "snr | n | bound");
  app.add_option("--b", b, "bandwidth B");
  app.add_option("--q", q, "radial functions per angular frequency");
  app.add_option("--n", n, "observations per trial (SNR sweep)");
  app.add_option("--snr", snr, "SNR (n sweep)");
  app.add_option("--trials", trials, "trials per grid point");
  app.add_option("--eta", eta, "distribution perturbation");
  app.add_option("--algos", algos, "comma list of fm, fm_robust, spectral");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "CSV path (stdout if omitted)");
  app.add_flag("--fixed-ground-truth", fixed_truth, "reuse one ground truth for every trial");
  app.add_option("--snr-grid", snr_grid, "a,b,c or lo:hi:count");
  app.add_option("--n-grid", n_grid, "a,b,c or lo:hi:count");
  app.add_option("--eta-grid", eta_grid, "a,b,c or lo:hi:count");
  app.add_option("--threads", threads, "worker threads");
  app.add_flag("--paper-scale", paper_scale, "n = 1e6 with full trial counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  mra::ExperimentConfig cfg;
  mra::ExperimentResult result;
  try {
    if (!config_path.empty()) mra::load_config_file(cfg, config_path);
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--experiment")) cfg.experiment = mra::parse_experiment(experiment);
    if (paper_scale) mra::apply_paper_scale(cfg);
    if (given("--b")) cfg.b = b;
    if (given("--q")) cfg.q = q;
    if (given("--n")) cfg.n = n;
    if (given("--snr")) cfg.snr = snr;
    if (given("--trials")) cfg.trials = trials;
    if (given("--eta")) cfg.eta = eta;
    if (given("--algos")) mra::apply_setting(cfg, "algos", algos);
    if (given("--seed")) cfg.master_seed = seed;
    if (given("--out")) cfg.out_path = out;
    if (fixed_truth) cfg.fixed_ground_truth = true;
    if (given("--snr-grid")) cfg.snr_grid = mra::parse_grid(snr_grid);
    if (given("--n-grid")) cfg.n_grid = mra::parse_grid(n_grid);
    if (given("--eta-grid")) cfg.eta_grid = mra::parse_grid(eta_grid);
    if (given("--threads")) cfg.threads = threads;
    cfg = mra::resolve(cfg);
  } catch (const mra::MraError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    result = mra::run_experiment(cfg);
    if (cfg.out_path.empty()) std::cout << mra::to_csv(result.rows);
    else mra::write_csv(result.rows, cfg.out_path);
  } catch (const mra::MraError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == mra::ErrorKind::Config ? kExitConfig : 1;
  }

  if (result.failed_trials > 0) {
    std::cerr << result.failed_trials << " trial(s) failed\n";
    return kExitTrialFailures;
  }
  return 0;
}
