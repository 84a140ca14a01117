// End-to-end acceptance gate: one pass/fail line per criterion, nonzero
// exit if any fails. Runs the full 256x256 scenario grid, so expect a
// couple of minutes of wall time.

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "fppo/fppo.hpp"

using namespace fppo;

namespace {

bool g_all_pass = true;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %d (%s): %s%s%s\n", index, name, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : " -- ", detail.c_str());
  g_all_pass = g_all_pass && pass;
}

// 16x16 Gaussian deblurring instance small enough for exhaustive runs.
struct DeskInstance {
  DeblurProblem problem;
  SolverConfig cfg;
};

DeskInstance make_desk_instance() {
  const int n = 16;
  Image truth = make_phantom(n);
  Scenario sc;
  sc.kernel = BlurKernel::box(3);
  sc.sigma = 1.5;
  sc.phantom_size = n;
  SpectralOperator K = blur_operator(sc.kernel, n, n);
  Image b = degrade(truth, sc, 42);

  DeskInstance inst;
  inst.problem.fidelity = GaussianFidelity{K, b};
  inst.problem.Q = build_Q(QMode::gaussian, K, 1.0);
  inst.problem.ground_truth = truth;
  inst.cfg.lambda = 0.125;
  inst.cfg.gamma = 1.8;
  inst.cfg.mu = 0.5;
  inst.cfg.tol = 1e-10;
  inst.cfg.max_iter = 100000;
  return inst;
}

Image direct_convolve(const BlurKernel& k, const Image& u) {
  Image y(u.height, u.width, 0.0);
  int a = k.side / 2;
  for (int m = 0; m < u.height; ++m) {
    for (int n = 0; n < u.width; ++n) {
      double s = 0.0;
      for (int i = 0; i < k.side; ++i) {
        int r = ((m - (i - a)) % u.height + u.height) % u.height;
        for (int j = 0; j < k.side; ++j) {
          int c = ((n - (j - a)) % u.width + u.width) % u.width;
          s += k.taps[static_cast<size_t>(i) * k.side + j] * u.at(r, c);
        }
      }
      y.at(m, n) = s;
    }
  }
  return y;
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

int main() {
  // --- 1-3: iteration advantage and PSNR parity, both noise models ---
  std::vector<std::array<double, 2>> psnr_pairs;  // {qn, pdfp2o} per run
  {
    bool iter_ok = true, time_ok = true, conv_ok = true;
    double worst_ratio = 0.0;
    for (int id = 1; id <= 4; ++id) {
      auto res = run_experiment(gaussian_scenario(id),
                                {Algorithm::fp2o_qn, Algorithm::pdfp2o});
      const auto& qn = res[0];
      const auto& pd = res[1];
      conv_ok = conv_ok && qn.status == RunStatus::converged &&
                pd.status == RunStatus::converged;
      double ratio = static_cast<double>(qn.iterations) / pd.iterations;
      worst_ratio = std::max(worst_ratio, ratio);
      iter_ok = iter_ok && ratio <= 0.7;
      time_ok = time_ok && qn.wall_seconds + pd.wall_seconds < 30.0;
      psnr_pairs.push_back({qn.psnr_db, pd.psnr_db});
    }
    report(1, "quasi-Newton needs <= 0.7x the baseline iterations, Gaussian grid",
           conv_ok && iter_ok && time_ok,
           fmt("worst iteration ratio %.3f (cap 0.7)", worst_ratio, 0));

    auto res = run_experiment(rayleigh_scenario(1, 1.0),
                              {Algorithm::fp2o_qn, Algorithm::pdfp2o});
    const auto& qn = res[0];
    const auto& pd = res[1];
    psnr_pairs.push_back({qn.psnr_db, pd.psnr_db});

    bool parity_ok = true;
    double worst_delta = 1e300;
    for (const auto& p : psnr_pairs) {
      parity_ok = parity_ok && p[0] >= p[1] - 0.1;
      worst_delta = std::min(worst_delta, p[0] - p[1]);
    }
    report(2, "quasi-Newton PSNR within 0.1 dB of the baseline or better",
           parity_ok, fmt("worst psnr delta %+.2f dB", worst_delta, 0));

    bool conv = qn.status == RunStatus::converged &&
                pd.status == RunStatus::converged;
    double ratio = static_cast<double>(qn.iterations) / pd.iterations;
    bool ok = conv && ratio <= 0.6 && qn.psnr_db >= pd.psnr_db - 0.3;
    report(3, "quasi-Newton needs <= 0.6x the baseline iterations, speckle model",
           ok, fmt("iteration ratio %.3f, psnr delta %+.2f dB", ratio,
                   qn.psnr_db - pd.psnr_db));
  }

  // --- 4: all four schemes agree at desk scale ---
  {
    DeskInstance inst = make_desk_instance();
    SolverConfig ref_cfg = inst.cfg;
    ref_cfg.algorithm = Algorithm::fp2o_qn;
    ref_cfg.tol = 0.0;  // never met: runs the full iteration budget
    RunResult ref = run(inst.problem, ref_cfg);
    double ref_obj = ref.trace.rows.back().objective;

    bool ok = ref.trace.rows.size() == 100000;
    double worst_obj = 0.0, worst_u = 0.0;
    for (auto algo : {Algorithm::fp2o_qn, Algorithm::fp2o_kappa_qn,
                      Algorithm::pdfp2o, Algorithm::pdfp2o_kappa}) {
      SolverConfig cfg = inst.cfg;
      cfg.algorithm = algo;
      cfg.kappa = 0.3;
      RunResult rr = run(inst.problem, cfg);
      ok = ok && rr.status == RunStatus::converged;
      double dobj =
          std::abs(rr.trace.rows.back().objective - ref_obj) / std::abs(ref_obj);
      double du = norm2(subtract(rr.state.u, ref.state.u)) / norm2(ref.state.u);
      worst_obj = std::max(worst_obj, dobj);
      worst_u = std::max(worst_u, du);
    }
    ok = ok && worst_obj <= 1e-6 && worst_u <= 1e-4;
    report(4, "all four schemes reach the same limit on a 16x16 instance", ok,
           fmt("rel objective gap %.2e, rel u gap %.2e", worst_obj, worst_u));
  }

  // --- 5: contraction inequality, monotone distance, prox optimality ---
  {
    DeskInstance inst = make_desk_instance();
    const int n = 16;
    double lambda =
        std::min(0.5, 1.0 / lambda_max_BQinvBT_exact(inst.problem.Q));
    double beta = estimate_beta(inst.problem.fidelity);
    ConditionsReport cond =
        conditions_check(inst.problem.Q, inst.problem.fidelity, lambda);
    bool ok = cond.all_pass();

    WeightedNorms norms{lambda, inst.problem.Q};
    Rng rng(7);
    auto rand_point = [&]() {
      JointPoint w{DualField(n, n), Image(n, n)};
      for (auto& p : w.u.pixels) p = 255.0 * rng.uniform();
      for (size_t i = 0; i < w.v.size(); ++i) {
        w.v.channel_x[i] = rng.uniform() - 0.5;
        w.v.channel_y[i] = rng.uniform() - 0.5;
      }
      return w;
    };
    int holds = 0;
    for (int trial = 0; trial < 500; ++trial) {
      auto rep =
          contraction_check(rand_point(), rand_point(), inst.problem.fidelity,
                            norms, 0.5, beta);
      if (rep.applicable && rep.pass) ++holds;
    }
    ok = ok && holds == 500;

    // distance to the limit is non-increasing along the trajectory
    SolverConfig cfg = inst.cfg;
    cfg.algorithm = Algorithm::fp2o_qn;
    cfg.lambda = lambda;
    cfg.mu = 0.5;
    cfg.tol = 1e-14;
    cfg.max_iter = 300000;
    RunResult star = run(inst.problem, cfg);
    const Image& b = std::visit(
        [](const auto& f) -> const Image& { return f.b; }, inst.problem.fidelity);
    JointPoint w{DualField(n, n), b};
    int monotone_bad = 0;
    double dist = norm_lambda_Q(
        JointPoint{subtract(w.v, star.state.v), subtract(w.u, star.state.u)},
        norms);
    for (int k = 0; k < 2000; ++k) {
      w = operator_T(w, inst.problem.fidelity, inst.problem.Q, lambda, 0.5);
      double next = norm_lambda_Q(
          JointPoint{subtract(w.v, star.state.v), subtract(w.u, star.state.u)},
          norms);
      if (next > dist + 1e-9 * std::max(1.0, dist)) ++monotone_bad;
      dist = next;
    }
    ok = ok && monotone_bad == 0;

    // shrinkage output satisfies the stationarity condition of its objective
    int prox_bad = 0;
    Rng prng(41);
    for (int trial = 0; trial < 100; ++trial) {
      double t = 1.2;
      DualField v(1, 1);
      v.channel_x[0] = 12.0 * (prng.uniform() - 0.5);
      v.channel_y[0] = 12.0 * (prng.uniform() - 0.5);
      DualField p = prox_tv_isotropic(v, TVThreshold(t));
      double px = p.channel_x[0], py = p.channel_y[0];
      double rx = v.channel_x[0] - px, ry = v.channel_y[0] - py;
      double pn = std::hypot(px, py);
      if (pn > 0.0) {
        if (std::abs(rx - t * px / pn) > 1e-10 ||
            std::abs(ry - t * py / pn) > 1e-10)
          ++prox_bad;
      } else if (std::hypot(rx, ry) > t + 1e-10) {
        ++prox_bad;
      }
    }
    ok = ok && prox_bad == 0;
    report(5, "contraction inequality, monotone distance, prox optimality", ok,
           fmt("inequality held on %.0f/500 pairs, %g monotonicity violations",
               holds, monotone_bad));
  }

  // --- 6: numerical kernels against independent oracles ---
  {
    bool ok = true;
    Rng rng(13);
    const int n = 8;
    Image u(n, n), d(n, n);
    for (auto& p : u.pixels) p = 50.0 + 150.0 * rng.uniform();
    for (auto& p : d.pixels) p = rng.uniform() - 0.5;
    SpectralOperator K = blur_operator(BlurKernel::box(3), n, n);
    for (Fidelity fid : {Fidelity(GaussianFidelity{K, K.apply(u)}),
                         Fidelity(RayleighFidelity{K, K.apply(u)})}) {
      double h = 1e-4;
      Image up = u, um = u;
      axpy(h, d, up);
      axpy(-h, d, um);
      double fd = (fidelity_value(fid, up) - fidelity_value(fid, um)) / (2 * h);
      double an = dot(fidelity_gradient(fid, u), d);
      ok = ok && std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an));
    }

    Image small(12, 12);
    for (auto& p : small.pixels) p = 255.0 * rng.uniform();
    for (auto kernel : {BlurKernel::box(3), BlurKernel::gaussian(4, 1.2)}) {
      Image direct = direct_convolve(kernel, small);
      Image fft = blur_operator(kernel, 12, 12).apply(small);
      for (size_t i = 0; i < small.size(); ++i)
        ok = ok && std::abs(fft.pixels[i] - direct.pixels[i]) <=
                       1e-10 * std::max(1.0, std::abs(direct.pixels[i]));
    }

    DualField p(n, n);
    for (size_t i = 0; i < p.size(); ++i) {
      p.channel_x[i] = rng.uniform() - 0.5;
      p.channel_y[i] = rng.uniform() - 0.5;
    }
    double lhs = dot(grad(u), p);
    double rhs = dot(u, grad_adjoint(p));
    ok = ok && std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs));

    SpectralOperator Q = build_Q(QMode::gaussian, K, 0.1);
    Image rt = Q.apply(q_inverse_apply(Q, u));
    ok = ok && norm2(subtract(rt, u)) / norm2(u) < 1e-8;

    auto est = lambda_max_BBT(16, 16);
    ok = ok && est.converged && std::abs(est.value - 8.0) <= 8.0 * 1e-6;

    const double grid_step = 1e-4;
    for (int trial = 0; trial < 100; ++trial) {
      double x = 10.0 * (rng.uniform() - 0.5);
      double y = 10.0 * (rng.uniform() - 0.5);
      double t = 3.0 * rng.uniform();
      DualField v(1, 1);
      v.channel_x[0] = x;
      v.channel_y[0] = y;
      DualField closed = prox_tv_isotropic(v, TVThreshold(t));
      auto brute = prox_oracle_1d({x, y}, t, grid_step);
      ok = ok && std::abs(closed.channel_x[0] - brute[0]) < 2 * grid_step &&
           std::abs(closed.channel_y[0] - brute[1]) < 2 * grid_step;
    }
    report(6, "gradients, FFT convolution, adjoints, eigenvalue, prox oracle",
           ok, "");
  }

  // --- 7: repeated sweep is bit-reproducible ---
  {
    Scenario s1 = gaussian_scenario(1);
    Image truth = load_ground_truth(s1);
    Image b1 = degrade(truth, s1, 0);
    Image b2 = degrade(truth, s1, 0);
    bool ok = true;
    for (size_t i = 0; i < b1.size(); ++i)
      ok = ok && b1.pixels[i] == b2.pixels[i];

    auto strip_timing = [](const std::vector<SweepRow>& rows) {
      std::ostringstream os;
      write_summary_csv(os, rows);
      std::istringstream is(os.str());
      std::ostringstream out;
      std::string line;
      while (std::getline(is, line))
        out << line.substr(0, line.rfind(',')) << '\n';
      return out.str();
    };
    auto a = sweep({Algorithm::fp2o_qn, Algorithm::pdfp2o});
    auto b = sweep({Algorithm::fp2o_qn, Algorithm::pdfp2o});
    ok = ok && a.size() == b.size();
    for (size_t i = 0; ok && i < a.size(); ++i)
      ok = a[i].iterations == b[i].iterations;
    ok = ok && strip_timing(a) == strip_timing(b);
    report(7, "same seed reproduces inputs, counts, and summary exactly", ok, "");
  }

  return g_all_pass ? 0 : 1;
}
