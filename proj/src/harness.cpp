#include "mra/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <locale>
#include <mutex>
#include <sstream>
#include <thread>

#include "mra/error.hpp"
#include "mra/freq_march.hpp"
#include "mra/moments.hpp"
#include "mra/spectral.hpp"

namespace mra {

namespace {

constexpr int kGroundTruthAttempts = 16;

[[noreturn]] void config_error(const std::string& msg) { throw MraError(ErrorKind::Config, msg); }

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    config_error("bad number for " + std::string(key) + ": '" + std::string(text) + "'");
  return v;
}

long long parse_integer(std::string_view text, std::string_view key) {
  const double v = parse_double(text, key);
  if (v != std::floor(v) || std::abs(v) > 9e15)
    config_error("expected an integer for " + std::string(key));
  return static_cast<long long>(v);
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  config_error("bad boolean for " + std::string(key));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

struct GroundTruth {
  FBImage image;
  RotationDistribution rho;  // perturbed
  RotationDistribution base;
};

// Redraws on degenerate distributions and, when observations are sampled,
// on perturbed distributions that are not sampleable.
std::optional<GroundTruth> draw_ground_truth(const ExperimentConfig& cfg, double eta, Rng& rng,
                                             bool need_sampleable) {
  const double tol_pos = cfg.positivity_floor / kTwoPi;
  for (int attempt = 0; attempt < kGroundTruthAttempts; ++attempt) {
    FBImage image = make_experiment_signal_2d(cfg.b, cfg.q, rng);
    try {
      RotationDistribution base = make_experiment_distribution(cfg.b, rng, tol_pos);
      RotationDistribution rho = perturb_distribution(base, eta);
      if (need_sampleable && !rho.sampleable()) continue;
      return GroundTruth{std::move(image), std::move(rho), std::move(base)};
    } catch (const MraError& e) {
      if (e.kind() != ErrorKind::DegenerateDraw) throw;
    }
  }
  return std::nullopt;
}

std::optional<double> run_algorithm(Algorithm algo, const MomentPair& m, const FBImage& truth,
                                    double rank_tol) {
  try {
    const CoeffLayout& shape = truth.layout();
    switch (algo) {
      case Algorithm::FmPlain:
      case Algorithm::FmRobust: {
        FMOptions opts;
        opts.variant = algo == Algorithm::FmPlain ? FMVariant::Plain : FMVariant::Robust;
        const RecoveryResult r = fm_recover_2d(m, shape, opts);
        return recovery_error(shape, r.coeffs(), truth.coeffs()).relative_error;
      }
      case Algorithm::Spectral: {
        SpectralOptions opts;
        opts.rank_tol = rank_tol;
        const SpectralRun r = spectral_recover_2d(m, shape, opts);
        return recovery_error(shape, r.result.coeffs(), truth.coeffs()).relative_error;
      }
    }
  } catch (const MraError&) {
  }
  return std::nullopt;
}

// errors[algo][trial], empty when that trial failed.
using TrialErrors = std::vector<std::vector<std::optional<double>>>;

ExperimentResult summarize(const ExperimentConfig& cfg, const std::string& param_name,
                           const std::vector<double>& grid,
                           const std::vector<TrialErrors>& per_point) {
  ExperimentResult out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
      CsvRow row;
      row.experiment = to_string(cfg.experiment);
      row.algorithm = to_string(cfg.algorithms[a]);
      row.grid_param_name = param_name;
      row.grid_param_value = grid[g];
      row.trials = cfg.trials;
      std::vector<double> ok;
      for (const auto& e : per_point[g][a]) {
        if (e) ok.push_back(*e);
        else ++row.failures;
      }
      if (!ok.empty()) {
        const Aggregate agg = aggregate(ok, cfg.margin, cfg.margin_mode);
        row.median_error = agg.median;
        row.lower = agg.lower;
        row.upper = agg.upper;
      }
      out.failed_trials += row.failures;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

ExperimentResult run_sampled_sweep(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolve(raw);
  const bool snr_sweep = cfg.experiment == ExperimentKind::SnrSweep;
  const std::vector<double>& grid = snr_sweep ? *cfg.snr_grid : *cfg.n_grid;
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t algos = cfg.algorithms.size();

  std::vector<TrialErrors> per_point(
      grid.size(), TrialErrors(algos, std::vector<std::optional<double>>(trials)));

  parallel_for(grid.size() * trials, cfg.threads, [&](std::size_t task) {
    const std::size_t g = task / trials;
    const std::size_t t = task % trials;
    const std::uint64_t truth_g = cfg.fixed_ground_truth ? 0 : g;
    const std::uint64_t truth_t = cfg.fixed_ground_truth ? 0 : t;
    Rng truth_rng(trial_seed(cfg.master_seed, cfg.experiment, truth_g, truth_t, 0));
    const auto truth = draw_ground_truth(cfg, cfg.eta, truth_rng, true);
    if (!truth) return;

    const double snr_value = snr_sweep ? grid[g] : cfg.snr;
    const auto n = static_cast<std::size_t>(snr_sweep ? cfg.n : std::llround(grid[g]));
    const double sigma = sigma_for_snr(truth->image, snr_value);
    Rng obs_rng(trial_seed(cfg.master_seed, cfg.experiment, g, t, 1));
    MomentPair m = streamed_moments(truth->image.layout(), truth->image.coeffs(), truth->rho, n,
                                    sigma, obs_rng);
    m.sigma = sigma * cfg.sigma_factor;
    for (std::size_t a = 0; a < algos; ++a)
      per_point[g][a][t] = run_algorithm(cfg.algorithms[a], m, truth->image, 1e-3);
  });

  return summarize(cfg, snr_sweep ? "snr" : "n", grid, per_point);
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::SnrSweep: return "snr_sweep";
    case ExperimentKind::NSweep: return "n_sweep";
    case ExperimentKind::BoundSweep: return "bound_sweep";
  }
  return "unknown";
}

const char* to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::FmPlain: return "fm";
    case Algorithm::FmRobust: return "fm_robust";
    case Algorithm::Spectral: return "spectral";
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view text) {
  text = trim(text);
  if (text == "snr" || text == "snr_sweep") return ExperimentKind::SnrSweep;
  if (text == "n" || text == "n_sweep") return ExperimentKind::NSweep;
  if (text == "bound" || text == "bound_sweep") return ExperimentKind::BoundSweep;
  config_error("unknown experiment '" + std::string(text) + "'");
}

Algorithm parse_algorithm(std::string_view text) {
  text = trim(text);
  if (text == "fm") return Algorithm::FmPlain;
  if (text == "fm_robust") return Algorithm::FmRobust;
  if (text == "spectral") return Algorithm::Spectral;
  config_error("unknown algorithm '" + std::string(text) + "'");
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) config_error("bad log grid");
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> parse_grid(std::string_view text) {
  text = trim(text);
  if (text.empty()) return {};
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) config_error("range grid must be lo:hi:count");
    return log_grid(parse_double(parts[0], "grid"), parse_double(parts[1], "grid"),
                    static_cast<int>(parse_integer(parts[2], "grid")));
  }
  std::vector<double> out;
  for (auto p : split(text, ',')) out.push_back(parse_double(p, "grid"));
  return out;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "experiment") cfg.experiment = parse_experiment(value);
  else if (key == "b") cfg.b = static_cast<int>(parse_integer(value, key));
  else if (key == "q") cfg.q = static_cast<int>(parse_integer(value, key));
  else if (key == "n") cfg.n = parse_integer(value, key);
  else if (key == "snr") cfg.snr = parse_double(value, key);
  else if (key == "trials") cfg.trials = static_cast<int>(parse_integer(value, key));
  else if (key == "eta") cfg.eta = parse_double(value, key);
  else if (key == "margin") cfg.margin = parse_double(value, key);
  else if (key == "margin_mode") {
    if (value == "percentile") cfg.margin_mode = MarginMode::PercentileBand;
    else if (value == "relative") cfg.margin_mode = MarginMode::RelativeToMedian;
    else config_error("margin_mode must be percentile or relative");
  } else if (key == "seed") cfg.master_seed = static_cast<std::uint64_t>(parse_integer(value, key));
  else if (key == "out") cfg.out_path = std::string(value);
  else if (key == "fixed_ground_truth") cfg.fixed_ground_truth = parse_bool(value, key);
  else if (key == "threads") cfg.threads = static_cast<int>(parse_integer(value, key));
  else if (key == "positivity_floor") cfg.positivity_floor = parse_double(value, key);
  else if (key == "rotation_grid") cfg.rotation_grid = static_cast<int>(parse_integer(value, key));
  else if (key == "rotation_refine") cfg.rotation_refine = static_cast<int>(parse_integer(value, key));
  else if (key == "sigma_factor") cfg.sigma_factor = parse_double(value, key);
  else if (key == "snr_grid") cfg.snr_grid = parse_grid(value);
  else if (key == "n_grid") cfg.n_grid = parse_grid(value);
  else if (key == "eta_grid") cfg.eta_grid = parse_grid(value);
  else if (key == "algos" || key == "algorithms") {
    cfg.algorithms.clear();
    for (auto a : split(value, ','))
      if (!a.empty()) cfg.algorithms.push_back(parse_algorithm(a));
  } else config_error("unknown key '" + std::string(key) + "'");
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      config_error("line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

void apply_paper_scale(ExperimentConfig& cfg) {
  cfg.n = 1000000;
  if (cfg.experiment == ExperimentKind::SnrSweep) cfg.trials = 400;
  if (cfg.experiment == ExperimentKind::NSweep) cfg.trials = 800;
}

ExperimentConfig resolve(const ExperimentConfig& in) {
  ExperimentConfig cfg = in;
  if (cfg.b < 1) config_error("b must be >= 1");
  if (cfg.q < 1) config_error("q must be >= 1");
  if (cfg.trials < 1) config_error("trials must be >= 1");
  if (cfg.threads < 1) config_error("threads must be >= 1");
  if (cfg.algorithms.empty()) config_error("no algorithms selected");
  if (!(cfg.margin >= 0.0 && cfg.margin <= 0.5)) config_error("margin must be in [0, 0.5]");
  if (!(cfg.positivity_floor >= 0.0 && cfg.positivity_floor < 1.0))
    config_error("positivity_floor must be in [0, 1)");
  if (!(cfg.sigma_factor >= 0.0)) config_error("sigma_factor must be >= 0");
  if (cfg.rotation_grid < 1) config_error("rotation_grid must be >= 1");
  if (cfg.rotation_refine < 0) config_error("rotation_refine must be >= 0");

  auto check_grid = [](const std::optional<std::vector<double>>& grid, const char* name,
                       bool matching) {
    if (!grid) return;
    if (!matching) config_error(std::string(name) + " does not apply to this experiment");
    if (grid->empty()) config_error(std::string(name) + " is empty");
  };
  check_grid(cfg.snr_grid, "snr_grid", cfg.experiment == ExperimentKind::SnrSweep);
  check_grid(cfg.n_grid, "n_grid", cfg.experiment == ExperimentKind::NSweep);
  check_grid(cfg.eta_grid, "eta_grid", cfg.experiment == ExperimentKind::BoundSweep);

  switch (cfg.experiment) {
    case ExperimentKind::SnrSweep:
      if (!cfg.snr_grid) cfg.snr_grid = log_grid(1.0, 1e4, 9);
      for (double s : *cfg.snr_grid)
        if (!(s > 0.0)) config_error("snr values must be positive");
      if (cfg.n < 1) config_error("n must be >= 1");
      break;
    case ExperimentKind::NSweep:
      if (!cfg.n_grid) cfg.n_grid = log_grid(1e3, 1e6, 7);
      for (double n : *cfg.n_grid)
        if (!(n >= 1.0)) config_error("n values must be >= 1");
      if (!(cfg.snr > 0.0)) config_error("snr must be positive");
      break;
    case ExperimentKind::BoundSweep:
      if (!cfg.eta_grid) cfg.eta_grid = log_grid(1e-3, 1e-1, 20);
      for (double e : *cfg.eta_grid)
        if (!(e >= 0.0)) config_error("eta values must be >= 0");
      break;
  }
  return cfg;
}

std::uint64_t trial_seed(std::uint64_t master, ExperimentKind kind, std::uint64_t grid_index,
                         std::uint64_t trial_index, std::uint64_t stream) {
  std::uint64_t h = splitmix(master);
  h = splitmix(h ^ static_cast<std::uint64_t>(kind));
  h = splitmix(h ^ grid_index);
  h = splitmix(h ^ trial_index);
  return splitmix(h ^ stream);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ExperimentResult run_snr_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.experiment = ExperimentKind::SnrSweep;
  return run_sampled_sweep(c);
}

ExperimentResult run_n_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.experiment = ExperimentKind::NSweep;
  return run_sampled_sweep(c);
}

std::vector<BoundPoint> bound_sweep_points(const ExperimentConfig& raw, int trial) {
  ExperimentConfig cfg = raw;
  cfg.experiment = ExperimentKind::BoundSweep;
  cfg = resolve(cfg);
  const std::vector<double>& grid = *cfg.eta_grid;
  std::vector<BoundPoint> out(grid.size());

  const std::uint64_t truth_t = cfg.fixed_ground_truth ? 0 : static_cast<std::uint64_t>(trial);
  Rng truth_rng(trial_seed(cfg.master_seed, cfg.experiment, 0, truth_t, 0));
  const auto truth = draw_ground_truth(cfg, 0.0, truth_rng, false);
  for (std::size_t g = 0; g < grid.size(); ++g) out[g].eta = grid[g];
  if (!truth) return out;

  const FBImage& image = truth->image;
  const double norm_sq = image.coeffs().squaredNorm();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    BoundPoint& p = out[g];
    p.norm_sq = norm_sq;
    const RotationDistribution rho = perturb_distribution(truth->base, grid[g]);
    p.s_b = circulant_distance(rho);
    const MomentPair m = population_moments_2d(image, rho, 0.0);
    std::optional<SpectralRun> run;
    try {
      run = spectral_recover_2d(m, image.layout());
      p.error = recovery_error(image.layout(), run->result.coeffs(), image.coeffs()).relative_error;
    } catch (const MraError&) {
      run.reset();
    }
    try {
      const RotationBound rb =
          min_bound_over_rotations(image, rho, cfg.rotation_grid, {}, run ? &*run : nullptr,
                                   cfg.rotation_refine);
      p.bound = rb.report.bound;
      p.conditions_met = rb.report.conditions_met;
    } catch (const MraError&) {
    }
  }
  return out;
}

ExperimentResult run_bound_sweep(const ExperimentConfig& raw) {
  ExperimentConfig cfg = raw;
  cfg.experiment = ExperimentKind::BoundSweep;
  cfg = resolve(cfg);
  const std::vector<double>& grid = *cfg.eta_grid;
  std::vector<std::vector<BoundPoint>> per_trial(static_cast<std::size_t>(cfg.trials));
  parallel_for(per_trial.size(), cfg.threads,
               [&](std::size_t t) { per_trial[t] = bound_sweep_points(cfg, static_cast<int>(t)); });

  ExperimentResult out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CsvRow row;
    row.experiment = to_string(cfg.experiment);
    row.algorithm = to_string(Algorithm::Spectral);
    row.grid_param_name = "eta";
    row.grid_param_value = grid[g];
    row.trials = cfg.trials;
    std::vector<double> errors, s_b, bounds;
    for (const auto& points : per_trial) {
      const BoundPoint& p = points[g];
      if (!p.error) {
        ++row.failures;
        continue;
      }
      errors.push_back(*p.error);
      s_b.push_back(p.s_b);
      if (p.bound && p.conditions_met) bounds.push_back(*p.bound / p.norm_sq);
    }
    if (!errors.empty()) {
      const Aggregate agg = aggregate(errors, cfg.margin, cfg.margin_mode);
      row.median_error = agg.median;
      row.lower = agg.lower;
      row.upper = agg.upper;
      row.s_b = percentile(s_b, 0.5);
    }
    if (!bounds.empty()) row.bound = percentile(bounds, 0.5);
    out.failed_trials += row.failures;
    out.rows.push_back(std::move(row));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::SnrSweep: return run_snr_sweep(cfg);
    case ExperimentKind::NSweep: return run_n_sweep(cfg);
    case ExperimentKind::BoundSweep: return run_bound_sweep(cfg);
  }
  config_error("unknown experiment");
}

std::string to_csv(const std::vector<CsvRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  std::ostringstream os;
  os << "experiment,algorithm,grid_param_name,grid_param_value,trials,failures,median_error,"
        "lower,upper,s_b,bound\n";
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.algorithm << ',' << r.grid_param_name << ','
       << format_number(r.grid_param_value) << ',' << r.trials << ',' << r.failures << ','
       << opt(r.median_error) << ',' << opt(r.lower) << ',' << opt(r.upper) << ',' << opt(r.s_b)
       << ',' << opt(r.bound) << '\n';
  }
  return os.str();
}

void write_csv(const std::vector<CsvRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MraError(ErrorKind::Config, "cannot write " + path);
  out << to_csv(rows);
  if (!out) throw MraError(ErrorKind::Config, "failed writing " + path);
}

}  // namespace mra
