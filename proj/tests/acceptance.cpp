// Acceptance run: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number.

#include "oracles.hpp"
#include "usc/boundary_trace.hpp"
#include "usc/brick.hpp"
#include "usc/cli.hpp"
#include "usc/layout.hpp"
#include "usc/metric_lab.hpp"
#include "usc/parallel.hpp"
#include "usc/poincare.hpp"
#include "usc/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace usc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Report {
 public:
  void note(bool ok, const std::string& what) {
    if (!ok) pass_ = false;
    if (!out_.str().empty()) out_ << "; ";
    out_ << (ok ? "" : "FAILED ") << what;
  }
  Outcome done() const { return {pass_, out_.str()}; }

 private:
  bool pass_ = true;
  std::ostringstream out_;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// shared between criteria 3, 9 and 10
double g_r_hat = 0.0;

double r_hat_sc3() {
  if (g_r_hat == 0.0) g_r_hat = renorm_factor(standard_carpet(), 5).r_hat;
  return g_r_hat;
}

std::vector<CarpetSpec> slide_specs() {
  std::vector<CarpetSpec> out;
  for (const Rational& z : {Rational(0), Rational(1, 56), Rational(1, 28), Rational(3, 56), Rational(1, 14)})
    out.push_back(sliding_family_spec(z));
  return out;
}

Outcome geometry_exactness() {
  const auto t0 = Clock::now();
  Report r;
  auto specs = slide_specs();
  specs.insert(specs.begin(), standard_carpet());
  int valid = 0, equal = 0;
  for (const auto& s : specs) {
    valid += validate(s).ok();
    for (int n = 1; n <= 2; ++n) {
      auto cells = level_cells(s, n);
      oracle::EdgeSet hashed;
      for (auto [a, b] : block_adjacency(cells)) hashed.emplace(cells.words[a], cells.words[b]);
      equal += hashed == oracle::brute_force_edges(s, n);
    }
  }
  const double t = seconds_since(t0);
  r.note(valid == 6, "validate ok " + std::to_string(valid) + "/6");
  r.note(equal == 12, "adjacency equal " + std::to_string(equal) + "/12");
  r.note(t < 10.0, "time " + num(t) + " s < 10 s");
  return r.done();
}

Outcome level_one_values() {
  Report r;
  auto sc = standard_carpet();
  auto g = build_graph(sc, 1);
  r.note(g->edges().size() == 12 && oracle::brute_force_edges(sc, 1).size() == 12,
         "edges " + std::to_string(g->edges().size()));
  std::int32_t corner = -1;
  for (std::int32_t v = 0; v < g->size(); ++v)
    if (g->cells().x[v] == 0 && g->cells().y[v] == 0) corner = v;
  std::vector<double> ind(g->size(), 0.0);
  ind[corner] = 1.0;
  const double d = energy(CellFunction(g, ind));
  r.note(d == 2.0, "D(corner) " + num(d));
  const double cross = cross_resistance(sc, 1).value();
  r.note(std::abs(cross - 0.5) <= 1e-9, "R1 " + num(cross));
  const double gap = spectral_gap(laplacian(*g)).gap, dense = oracle::dense_gap(oracle::dense_laplacian(*g));
  r.note(std::abs(gap - dense) <= 1e-8 * dense, "gap " + num(gap) + " vs dense " + num(dense));
  return r.done();
}

Outcome renormalization() {
  const auto t0 = Clock::now();
  Report r;
  auto est = renorm_factor(standard_carpet(), 5);
  g_r_hat = est.r_hat;
  const double t = seconds_since(t0);
  auto inside = [](double v) { return v >= 2.0 / 3 && v <= 8.0 / 9; };
  r.note(inside(est.r_lambda), "r_lambda " + num(est.r_lambda));
  r.note(inside(est.r_cross), "r_cross " + num(est.r_cross));
  r.note(est.disagreement <= 0.10, "disagreement " + num(est.disagreement));
  r.note(t < 300.0, "time " + num(t) + " s < 300 s");
  return r.done();
}

Outcome scaling() {
  Report r;
  const int ns[] = {1, 2}, ms[] = {1, 2};
  auto chk = scaling_inequalities(standard_carpet(), ns, ms);
  r.note(chk.rows.size() == 4, "rows " + std::to_string(chk.rows.size()));
  r.note(chk.C_left <= 1e3, "C " + num(chk.C_left));
  r.note(chk.C_right <= 1e3, "C' " + num(chk.C_right));
  return r.done();
}

Outcome sigma_certificates() {
  Report r;
  auto sc = standard_carpet();
  int pairs = 0;
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (int m = 1; m <= 4; ++m)
    for (const auto& c : sigma_estimate(sc, m).classes) {
      auto p = pair_problem(sc, c.w, c.w2, m);
      auto cert = sigma_certificate(p, 1000, seed++);
      worst = std::max(worst, cert.max_ratio - 1.0);
      ++pairs;
    }
  r.note(worst <= 1e-10, std::to_string(pairs) + " sigma values, worst relative excess " + num(worst));
  return r.done();
}

Outcome brick_exactness() {
  Report r;
  auto sc = standard_carpet();
  ExtensionBuilder b(sc);
  double e43 = 0.0, e44 = 0.0;
  for (int n : {2, 3}) {
    const auto& br = b.brick(n);
    e43 = std::max({e43, br.err_sides, br.err_top, br.err_annulus});
  }
  for (int n : {2, 3, 4}) e44 = std::max(e44, b.linear(n).boundary_error);
  r.note(e43 <= 1e-9, "brick identities " + num(e43));
  r.note(e44 <= 1e-9, "boundary equality " + num(e44));
  int plateaus = 0, total = 0;
  for (std::int64_t i = 0; i < 64; ++i) {
    auto s = b.separator(word_from_index(i, 2, 8), 2);
    plateaus += s.plateau_one && s.plateau_zero;
    ++total;
  }
  r.note(plateaus == total, "plateaus " + std::to_string(plateaus) + "/" + std::to_string(total));
  double worst = std::numeric_limits<double>::infinity();
  for (int n : {1, 2})
    for (int l : {2, 3}) worst = std::min(worst, cross_resistance(sc, n).value() / (chain_resistance(sc, n, l) / (4.0 * l)));
  r.note(worst >= 1.0, "cross / (chain / 4l) min " + num(worst));
  return r.done();
}

Outcome sigma_growth() {
  Report r;
  auto sc = standard_carpet();
  const double bound = 1.2 * 3 / 2;
  for (int n = 3; n <= 5; ++n) {
    const double s = sigma_estimate(sc, n).value;
    const double v = std::pow(s / std::pow(8.0, n), 1.0 / n);
    r.note(v <= bound, "n=" + std::to_string(n) + " " + num(v));
  }
  return r.done();
}

Outcome partition() {
  Report r;
  auto sc = standard_carpet();
  double dev = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool support = true;
  std::string values;
  for (int n : {1, 2})
    for (int m : {1, 2}) {
      auto pu = partition_of_unity(sc, n, m);
      dev = std::max(dev, pu.sum_deviation);
      support = support && pu.support_exact;
      const double v = pu.max_energy * sampled_R_m(sc, m).value;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      values += (values.empty() ? "" : " ") + num(v);
    }
  r.note(dev <= 1e-9, "sum deviation " + num(dev));
  r.note(support, "support exact");
  r.note(hi / lo <= 3.0, "max D(psi) R_m [" + values + "] spread " + num(hi / lo));
  return r.done();
}

Outcome besov_trace() {
  Report r;
  const double v = besov_seminorm_unit([](double t) { return t; }, 3, 20, 0.8);
  r.note(std::abs(v - 12.0 / 7) <= 1e-6, "unit seminorm " + num(v));
  auto sc = standard_carpet();
  const double rh = r_hat_sc3();
  for (int n : {0, 1}) {
    auto rep = trace_ratio_experiment(sc, n, n + 3, rh, 14, kDefaultSeed);
    r.note(rep.trials.size() == 20 && rep.spread() <= 100.0,
           "n=" + std::to_string(n) + " trials " + std::to_string(rep.trials.size()) + " spread " + num(rep.spread()));
  }
  int held = 0, total = 0;
  for (const auto& d : trace_data(3, 14, kDefaultSeed))
    for (int n : {0, 1}) {
      held += trace_bound_check(d.u, 3, n, n + 6).holds();
      ++total;
    }
  r.note(held == total, "trace bound " + std::to_string(held) + "/" + std::to_string(total));
  return r.done();
}

Outcome metric_comparability() {
  Report r;
  auto scan = theta_ratio_scan(standard_carpet(), 100, 5, r_hat_sc3(), kDefaultSeed);
  r.note(scan.spread() <= 50.0, std::to_string(scan.pairs.size()) + " pairs (" + std::to_string(scan.excluded) +
                                    " excluded) spread " + num(scan.spread()));
  int below = 0;
  for (const auto& p : scan.pairs) below += !(p.geodesic >= p.euclid);
  r.note(below == 0, "geodesic below euclid " + std::to_string(below));
  return r.done();
}

Outcome sliding() {
  const auto t0 = Clock::now();
  Report r;
  std::vector<Rational> grid;
  for (Rational z(1, 56); z <= Rational(3, 56); z += Rational(1, 448)) grid.push_back(z);
  SlideOptions opt;
  opt.m = 3;
  opt.delta = 0.01;
  opt.with_modulus = false;
  auto samples = sliding_scan(grid, opt);
  auto cont = interior_continuity(samples);
  r.note(grid.size() == 17 && std::isfinite(cont.lipschitz) && cont.holds(),
         std::to_string(grid.size()) + " z, L " + num(cont.lipschitz) + ", violations " +
             std::to_string(cont.violations) + "/" + std::to_string(cont.comparisons));
  const double at0 = family_modulus(Rational(0), Rational(1, 56), 4, opt);
  const double mid = family_modulus(Rational(1, 28), Rational(1, 56), 4, opt);
  r.note(at0 >= 10.0 * mid, "modulus z=0 " + num(at0) + " vs z=1/28 " + num(mid) + " ratio " + num(at0 / mid));
  const double t = seconds_since(t0);
  r.note(t < 1800.0, "time " + num(t) + " s < 1800 s");
  return r.done();
}

Outcome schur() {
  Report r;
  CounterRng rng(2024, 12);
  double res_err = 0.0, trans_err = 0.0;
  for (int g = 0; g < 50; ++g) {
    const int n = 8 + static_cast<int>(rng.below(23));
    auto e = oracle::random_connected_graph(n, 0.2, 500 + g);
    auto L = oracle::sparse_laplacian(n, e);
    auto D = oracle::dense_laplacian(n, e);
    std::vector<std::int32_t> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const int keep = 3 + static_cast<int>(rng.below(n / 2));
    std::vector<std::int32_t> kept(all.begin(), all.begin() + keep);
    auto T = trace_form(L, kept);
    for (int i = 0; i < keep; ++i)
      for (int j = i + 1; j < keep; ++j) {
        const std::int32_t a[] = {i}, b[] = {j};
        const double got = effective_resistance(T, a, b);
        const double ref = oracle::dense_resistance(D, {kept[i]}, {kept[j]});
        res_err = std::max(res_err, std::abs(got - ref) / ref);
      }
    // tracing twice equals tracing once
    const int inner = 2 + static_cast<int>(rng.below(keep - 1));
    std::vector<std::int32_t> first(inner), direct(kept.begin(), kept.begin() + inner);
    for (int i = 0; i < inner; ++i) first[i] = i;
    auto TT = oracle::to_dense(trace_form(T, first));
    auto T2 = oracle::to_dense(trace_form(L, direct));
    trans_err = std::max(trans_err, (TT - T2).cwiseAbs().maxCoeff() / std::max(1.0, T2.cwiseAbs().maxCoeff()));
  }
  r.note(res_err <= 1e-10, "resistance relative error " + num(res_err));
  r.note(trans_err <= 1e-10, "transitivity error " + num(trans_err));
  return r.done();
}

Outcome reproducibility() {
  Report r;
  std::vector<RunConfig> cfgs(4);
  cfgs[0].command = "constants";
  cfgs[0].n_max = 3;
  cfgs[1].command = "trace";
  cfgs[1].r_hat = r_hat_sc3();
  cfgs[2].command = "metrics";
  cfgs[2].m = 3;
  cfgs[2].pairs = 30;
  cfgs[2].r_hat = r_hat_sc3();
  cfgs[3].command = "slide";
  cfgs[3].m = 2;
  cfgs[3].grid = "1/112";
  int same = 0;
  for (const auto& cfg : cfgs) {
    set_worker_count(1);
    const auto a = run(cfg);
    set_worker_count(8);
    const auto b = run(cfg);
    const auto c = run(cfg);
    set_worker_count(0);
    const bool ok = a.size() == 1 && b.size() == 1 && c.size() == 1 && a[0].content == b[0].content &&
                    b[0].content == c[0].content;
    same += ok;
    r.note(ok, cfg.command + (ok ? " identical" : " differs"));
  }
  return r.done();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geometry exactness", geometry_exactness},
      {"level-1 oracle values", level_one_values},
      {"renormalization bracket", renormalization},
      {"small-scale inequalities", scaling},
      {"sigma sup-certificate", sigma_certificates},
      {"brick algorithm exactness", brick_exactness},
      {"sigma growth trend", sigma_growth},
      {"partition of unity", partition},
      {"Besov seminorm and trace", besov_trace},
      {"metric comparability", metric_comparability},
      {"sliding family", sliding},
      {"Schur trace", schur},
      {"reproducibility", reproducibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << (id < 10 ? " " : "") << id << ' ' << criteria[i].first << ": "
              << o.detail << " [" << num(seconds_since(t0)) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
