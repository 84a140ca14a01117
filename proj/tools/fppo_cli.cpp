// Command-line front end: run one scenario, sweep the full grid, run the
// theory checks, or benchmark the prox closed form against its oracle.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fppo/fppo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitIo = 3;

struct CommonOpts {
  std::string config_path;
  std::string image;
  std::string out_dir;
  std::optional<double> mu, lambda, gamma, kappa, epsilon, beta, tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--image", o.image, "ground-truth PGM (default: built-in phantom)");
  cmd->add_option("--out-dir", o.out_dir, "artifact output directory");
  auto opt = [&](const char* flag, auto& slot, const char* help) {
    using T = typename std::decay_t<decltype(slot)>::value_type;
    cmd->add_option_function<T>(flag, [&slot](const T& v) { slot = v; }, help);
  };
  opt("--mu", o.mu, "TV regularization weight");
  opt("--lambda", o.lambda, "dual step size");
  opt("--gamma", o.gamma, "PDFP2O gradient step");
  opt("--kappa", o.kappa, "relaxation parameter in [0,1)");
  opt("--epsilon", o.epsilon, "preconditioner regularization");
  opt("--beta", o.beta, "Rayleigh preconditioner weight");
  opt("--tol", o.tol, "relative-change stopping tolerance (default 5e-4)");
  opt("--max-iter", o.max_iter, "iteration cap (default 5000)");
  opt("--seed", o.seed, "noise RNG seed");
}

// Flags override config-file values; config values fill unset options.
void apply_config_file(CommonOpts& o) {
  if (o.config_path.empty()) return;
  auto kv = fppo::parse_config_file(o.config_path);
  auto fill_d = [&](const char* key, std::optional<double>& slot) {
    if (!slot && kv.count(key)) slot = std::stod(kv.at(key));
  };
  fill_d("mu", o.mu);
  fill_d("lambda", o.lambda);
  fill_d("gamma", o.gamma);
  fill_d("kappa", o.kappa);
  fill_d("epsilon", o.epsilon);
  fill_d("beta", o.beta);
  fill_d("tol", o.tol);
  if (!o.max_iter && kv.count("max_iter")) o.max_iter = std::stoi(kv.at("max_iter"));
  if (!o.seed && kv.count("seed")) o.seed = std::stoull(kv.at("seed"));
  if (o.image.empty() && kv.count("image")) o.image = kv.at("image");
  if (o.out_dir.empty() && kv.count("out_dir")) o.out_dir = kv.at("out_dir");
}

fppo::ParamOverrides to_overrides(const CommonOpts& o) {
  fppo::ParamOverrides p;
  p.mu = o.mu;
  p.lambda = o.lambda;
  p.gamma = o.gamma;
  p.kappa = o.kappa;
  p.epsilon = o.epsilon;
  p.beta = o.beta;
  p.tol = o.tol;
  p.max_iter = o.max_iter;
  p.seed = o.seed;
  return p;
}

int do_run(int scenario_id, const std::string& noise,
           const std::vector<std::string>& algo_names, const CommonOpts& opts) {
  // Rayleigh ids mirror the Gaussian grid: kernel (box8 / gauss6) crossed
  // with sigma (0.5 / 1.0).
  fppo::Scenario s =
      (noise == "rayleigh")
          ? fppo::rayleigh_scenario(scenario_id <= 2 ? 1 : 2,
                                    (scenario_id % 2 == 1) ? 0.5 : 1.0)
          : fppo::gaussian_scenario(scenario_id);
  s.source = opts.image;

  std::vector<fppo::Algorithm> algos;
  for (const auto& n : algo_names) algos.push_back(fppo::algorithm_from_name(n));
  if (algos.empty()) algos = {fppo::Algorithm::fp2o_qn, fppo::Algorithm::pdfp2o};

  auto results = fppo::run_experiment(s, algos, to_overrides(opts));
  bool diverged = false;
  std::cout << "scenario " << s.name << " (degraded PSNR "
            << (results.empty() ? 0.0 : results.front().psnr_degraded_db)
            << " dB)\n";
  for (const auto& r : results) {
    std::cout << "  " << fppo::algorithm_name(r.algorithm) << ": PSNR "
              << r.psnr_db << " dB, " << r.iterations << " iterations, "
              << r.wall_seconds << " s"
              << (r.status == fppo::RunStatus::diverged
                      ? " [DIVERGED]"
                      : (r.status == fppo::RunStatus::max_iter ? " [max-iter]" : ""))
              << '\n';
    if (!opts.out_dir.empty()) fppo::write_experiment_artifacts(opts.out_dir, s, r);
    diverged = diverged || r.status == fppo::RunStatus::diverged;
  }
  return diverged ? kExitDivergence : kExitOk;
}

int do_sweep(const CommonOpts& opts) {
  auto rows = fppo::sweep({fppo::Algorithm::fp2o_qn, fppo::Algorithm::pdfp2o},
                          to_overrides(opts), opts.image, opts.out_dir);
  fppo::write_summary_csv(std::cout, rows);
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream os(opts.out_dir + "/summary.csv");
    if (!os) throw fppo::IoError("cannot write summary.csv");
    fppo::write_summary_csv(os, rows);
  }
  return kExitOk;
}

int do_check(const CommonOpts& opts) {
  using namespace fppo;
  // Desk-scale Gaussian instance chosen so the convergence hypotheses hold.
  const int n = 16;
  Rng rng(opts.seed.value_or(7));
  Image truth = make_phantom(n);
  SpectralOperator K = blur_operator(BlurKernel::box(3), n, n);
  Scenario sc;
  sc.kernel = BlurKernel::box(3);
  sc.sigma = 1.5;
  sc.phantom_size = n;
  Image b = degrade(truth, sc, opts.seed.value_or(7));
  double eps = opts.epsilon.value_or(1.0);
  SpectralOperator Q = build_Q(QMode::gaussian, K, eps);
  Fidelity fid = GaussianFidelity{K, b};
  double lambda = opts.lambda.value_or(
      std::min(0.5, 1.0 / lambda_max_BQinvBT_exact(Q)));
  double mu = opts.mu.value_or(0.5);

  ConditionsReport cond = conditions_check(Q, fid, lambda);
  write_conditions_text(std::cout, cond);

  WeightedNorms norms{lambda, Q};
  double beta = estimate_beta(fid);
  int pairs = 100, holds = 0, applicable = 0;
  for (int trial = 0; trial < pairs; ++trial) {
    auto rand_point = [&]() {
      JointPoint w{DualField(n, n), Image(n, n)};
      for (auto& p : w.u.pixels) p = 255.0 * rng.uniform();
      for (size_t i = 0; i < w.v.size(); ++i) {
        w.v.channel_x[i] = rng.uniform() - 0.5;
        w.v.channel_y[i] = rng.uniform() - 0.5;
      }
      return w;
    };
    auto rep = contraction_check(rand_point(), rand_point(), fid, norms, mu, beta);
    if (rep.applicable) {
      ++applicable;
      if (rep.pass) ++holds;
    }
  }
  std::cout << "contraction inequality: " << holds << "/" << applicable
            << " applicable sampled pairs hold\n";

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream os(opts.out_dir + "/conditions.csv");
    if (!os) throw IoError("cannot write conditions.csv");
    write_conditions_csv(os, cond);
  }
  bool ok = cond.all_pass() && applicable > 0 && holds == applicable;
  std::cout << (ok ? "check: PASS\n" : "check: FAIL\n");
  return ok ? kExitOk : kExitConfig;
}

int do_prox_bench(int samples, double grid_step) {
  fppo::Rng rng(99);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double x = 10.0 * (rng.uniform() - 0.5);
    double y = 10.0 * (rng.uniform() - 0.5);
    double t = 3.0 * rng.uniform();
    fppo::DualField v(1, 1);
    v.channel_x[0] = x;
    v.channel_y[0] = y;
    auto closed = fppo::prox_tv_isotropic(v, fppo::TVThreshold(t));
    auto brute = fppo::prox_oracle_1d({x, y}, t, grid_step);
    worst = std::max(worst, std::abs(closed.channel_x[0] - brute[0]));
    worst = std::max(worst, std::abs(closed.channel_y[0] - brute[1]));
  }
  std::cout << "prox-bench: " << samples << " samples, grid_step " << grid_step
            << ", max |closed - oracle| = " << worst << '\n';
  bool ok = worst < 2.0 * grid_step;
  std::cout << (ok ? "prox-bench: PASS\n" : "prox-bench: FAIL\n");
  return ok ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal fixed-point TV deblurring toolkit"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, check_opts;
  int scenario_id = 1;
  std::string noise = "gaussian";
  std::vector<std::string> algo_names;

  CLI::App* run_cmd = app.add_subcommand("run", "run one scenario");
  run_cmd->add_option("--scenario", scenario_id, "scenario id 1-4")
      ->check(CLI::Range(1, 4));
  run_cmd->add_option("--noise", noise, "gaussian or rayleigh")
      ->check(CLI::IsMember({"gaussian", "rayleigh"}));
  run_cmd->add_option("--algo", algo_names,
                      "algorithm name (repeatable); default fp2o_qn + pdfp2o");
  add_common_flags(run_cmd, run_opts);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "all four Gaussian scenarios x both algorithms");
  add_common_flags(sweep_cmd, sweep_opts);

  CLI::App* check_cmd = app.add_subcommand("check", "theory and invariant checks");
  add_common_flags(check_cmd, check_opts);

  int bench_samples = 1000;
  double bench_step = 1e-4;
  CLI::App* bench_cmd =
      app.add_subcommand("prox-bench", "closed-form prox vs brute-force oracle");
  bench_cmd->add_option("--samples", bench_samples, "sample count");
  bench_cmd->add_option("--grid-step", bench_step, "oracle ray resolution");

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed()) {
      apply_config_file(run_opts);
      return do_run(scenario_id, noise, algo_names, run_opts);
    }
    if (sweep_cmd->parsed()) {
      apply_config_file(sweep_opts);
      return do_sweep(sweep_opts);
    }
    if (check_cmd->parsed()) {
      apply_config_file(check_opts);
      return do_check(check_opts);
    }
    if (bench_cmd->parsed()) return do_prox_bench(bench_samples, bench_step);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const fppo::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fppo::SolverDivergence& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
