#include "usc/poincare.hpp"

#include "usc/errors.hpp"
#include "usc/parallel.hpp"
#include "usc/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace usc {
namespace {

std::vector<double> centre_x(const CellGraph& g) {
  const auto& c = g.cells();
  std::vector<double> x(g.size());
  for (std::int32_t v = 0; v < g.size(); ++v)
    x[v] = (static_cast<double>(c.x[v]) + 0.5 * static_cast<double>(c.side)) / static_cast<double>(c.scale);
  return x;
}

// w . W_m as ascending word indices at level |w| + m.
std::vector<std::int64_t> block_words(std::int64_t w, std::int64_t block) {
  std::vector<std::int64_t> out(block);
  std::iota(out.begin(), out.end(), w * block);
  return out;
}

std::pair<std::int64_t, std::int64_t> canonical_offset(std::int64_t dx, std::int64_t dy) {
  std::pair<std::int64_t, std::int64_t> best{dx, dy};
  for (auto g : kSymmetries) {
    const auto& a = matrix(g);
    std::pair<std::int64_t, std::int64_t> img{a.a11 * dx + a.a12 * dy, a.a21 * dx + a.a22 * dy};
    best = std::min(best, img);
  }
  return best;
}

}  // namespace

double lambda_n(const CarpetSpec& spec, int n, const SolverOptions& opt) {
  if (n < 1) throw std::invalid_argument("lambda_n needs n >= 1");
  auto g = build_graph(spec, n);
  auto L = laplacian(*g);
  auto start = centre_x(*g);
  return spectral_gap(L, opt, start).lambda;
}

CrossResistance cross_resistance(const CellGraph& g, const SparseForm& L, const SolverOptions& opt) {
  CrossResistance c;
  c.horizontal = effective_resistance(L, g.side_vertices(Side::right), g.side_vertices(Side::left), opt);
  c.vertical = effective_resistance(L, g.side_vertices(Side::bottom), g.side_vertices(Side::top), opt);
  if (std::abs(c.horizontal - c.vertical) > 1e-8 * std::max(c.horizontal, c.vertical))
    throw std::logic_error("cross resistances differ between the two directions");
  return c;
}

CrossResistance cross_resistance(const CarpetSpec& spec, int n, const SolverOptions& opt) {
  if (n < 1) throw std::invalid_argument("cross_resistance needs n >= 1");
  auto g = build_graph(spec, n);
  return cross_resistance(*g, laplacian(*g), opt);
}

PairProblem pair_problem(const CarpetSpec& spec, const Word& w, const Word& w2, int m) {
  if (w.level() != w2.level() || w.level() < 1) throw std::invalid_argument("pair words need a common level >= 1");
  if (m < 0) throw std::invalid_argument("negative depth");
  if (w == w2 || cells_intersect(spec, w, w2).kind == Intersection::Kind::empty)
    throw std::invalid_argument("pair words are not adjacent");
  const int N = spec.N();
  const std::int64_t block = checked_power(N, m);
  const std::int64_t a = word_index(w, N), b = word_index(w2, N);
  auto words = block_words(a, block);
  auto more = block_words(b, block);
  words.insert(words.end(), more.begin(), more.end());
  auto graph = build_graph(spec, w.level() + m, words);
  auto L = laplacian(*graph);
  if (L.component_count() != 1) throw DisconnectedError("pair subgraph is disconnected");
  std::vector<double> fn(graph->size());
  const double inv = 1.0 / static_cast<double>(block);
  for (std::int32_t v = 0; v < graph->size(); ++v) fn[v] = graph->word(v) / block == a ? inv : -inv;
  return PairProblem{graph, std::move(L), std::move(fn), static_cast<double>(block)};
}

double sigma_pair(const PairProblem& p, const SolverOptions& opt) {
  return p.weight * quadratic_sup(p.laplacian, p.functional, opt);
}

double sigma_pair(const CarpetSpec& spec, const Word& w, const Word& w2, int m, const SolverOptions& opt) {
  return sigma_pair(pair_problem(spec, w, w2, m), opt);
}

SigmaCertificate sigma_certificate(const PairProblem& p, int trials, std::uint64_t seed, const SolverOptions& opt) {
  SigmaCertificate c;
  c.sigma = sigma_pair(p, opt);
  c.trials = trials;
  auto best = apply_pseudoinverse(p.laplacian, p.functional, std::min(opt.cg_tol, 1e-12), opt.cg_max_mult);
  double scale = 0.0;
  for (double v : best) scale = std::max(scale, std::abs(v));
  const auto n = p.laplacian.dimension();
  std::vector<double> f(n);
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    if (t % 2 == 0) {
      for (auto& v : f) v = rng.normal();
    } else {
      // perturbation sizes from 1e-1 down to 1e-8 of the maximiser
      const double eps = scale * std::pow(10.0, -1.0 - (t / 2) % 8);
      for (std::int32_t i = 0; i < n; ++i) f[i] = best[i] + eps * rng.normal();
    }
    double a = 0.0;
    for (std::int32_t i = 0; i < n; ++i) a += p.functional[i] * f[i];
    const double e = p.laplacian.quadratic(f);
    if (e <= 0.0) continue;
    c.max_ratio = std::max(c.max_ratio, p.weight * a * a / e / c.sigma);
  }
  return c;
}

SigmaEstimate sigma_estimate(const CarpetSpec& spec, int m, int base_level_cap, const SolverOptions& opt) {
  if (base_level_cap < 1) throw std::invalid_argument("level cap must be >= 1");
  SigmaEstimate est;
  est.m = m;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> seen;
  std::int64_t side = 1;
  for (int n = 1; n <= base_level_cap; ++n) {
    auto g = build_graph(spec, n);
    const auto& c = g->cells();
    side = c.side;
    int fresh = 0;
    for (auto [a, b] : g->edges()) {
      auto key = canonical_offset(c.x[b] - c.x[a], c.y[b] - c.y[a]);
      if (seen.contains(key)) continue;
      seen.emplace(key, est.classes.size());
      ContactClass cls;
      cls.level = n;
      cls.w = word_from_index(g->word(a), n, spec.N());
      cls.w2 = word_from_index(g->word(b), n, spec.N());
      cls.dx = Rational(key.first, side);
      cls.dy = Rational(key.second, side);
      cls.point_contact = std::abs(key.first) == side && std::abs(key.second) == side;
      est.classes.push_back(std::move(cls));
      ++fresh;
    }
    est.new_classes_per_level.push_back(fresh);
  }
  auto values = parallel_map<double>(est.classes.size(), [&](std::size_t i) {
    return sigma_pair(spec, est.classes[i].w, est.classes[i].w2, m, opt);
  });
  for (std::size_t i = 0; i < values.size(); ++i) {
    est.classes[i].sigma = values[i];
    est.value = std::max(est.value, values[i]);
  }
  return est;
}

namespace {

struct FarSet {
  std::vector<std::int32_t> near;  // N_w at level |w|, as vertices of g
  std::vector<std::int32_t> far;
};

FarSet far_set(const CellGraph& g, std::int32_t v) {
  FarSet s;
  s.near = g.ball(v, 2);
  std::vector<char> in(g.size(), 0);
  for (auto u : s.near) in[u] = 1;
  for (std::int32_t u = 0; u < g.size(); ++u)
    if (!in[u]) s.far.push_back(u);
  return s;
}

double blown_up_resistance(const CellGraph& coarse, const CellGraph& fine, const SparseForm& L, std::int32_t v,
                           const SolverOptions& opt) {
  auto fs = far_set(coarse, v);
  if (fs.far.empty()) throw std::invalid_argument("far set W_n \\ N_w is empty");
  const std::int64_t block = checked_power(coarse.alphabet(), fine.level() - coarse.level());
  std::vector<char> far(coarse.size(), 0);
  for (auto u : fs.far) far[u] = 1;
  std::vector<std::int32_t> a, b;
  for (std::int32_t u = 0; u < fine.size(); ++u) {
    auto parent = static_cast<std::int32_t>(fine.word(u) / block);
    if (parent == v) a.push_back(u);
    else if (far[parent]) b.push_back(u);
  }
  return effective_resistance(L, a, b, opt);
}

}  // namespace

double R_hat(const CarpetSpec& spec, const Word& w, int m, const SolverOptions& opt) {
  if (w.level() < 1) throw std::invalid_argument("R_hat needs |w| >= 1");
  auto coarse = build_graph(spec, w.level());
  auto fine = build_graph(spec, w.level() + m);
  auto L = laplacian(*fine);
  return blown_up_resistance(*coarse, *fine, L, static_cast<std::int32_t>(word_index(w, spec.N())), opt);
}

RSample sampled_R_m(const CarpetSpec& spec, int m, std::span<const int> word_levels, const SolverOptions& opt) {
  static constexpr int kDefault[] = {2, 3};
  if (word_levels.empty()) word_levels = kDefault;
  RSample out;
  out.m = m;
  out.value = std::numeric_limits<double>::infinity();
  for (int lw : word_levels) {
    auto coarse = build_graph(spec, lw);
    auto fine = build_graph(spec, lw + m);
    auto L = laplacian(*fine);
    // one representative per symmetry orbit: the smallest index
    std::vector<std::int64_t> rep(coarse->size());
    std::iota(rep.begin(), rep.end(), 0);
    for (auto g : kSymmetries) {
      auto perm = symmetry_permutation(spec, g, lw);
      for (std::size_t i = 0; i < perm.size(); ++i) rep[i] = std::min(rep[i], perm[i]);
    }
    std::vector<std::int32_t> reps;
    for (std::int32_t v = 0; v < coarse->size(); ++v)
      if (rep[v] == v && !far_set(*coarse, v).far.empty()) reps.push_back(v);
    auto vals = parallel_map<double>(reps.size(), [&](std::size_t i) {
      return blown_up_resistance(*coarse, *fine, L, reps[i], opt);
    });
    for (std::size_t i = 0; i < reps.size(); ++i)
      if (vals[i] < out.value) {
        out.value = vals[i];
        out.argmin = word_from_index(reps[i], lw, spec.N());
      }
    out.evaluated += static_cast<int>(reps.size());
  }
  if (out.evaluated == 0) throw std::invalid_argument("no word with a non-empty far set");
  return out;
}

RenormEstimate renorm_factor(const CarpetSpec& spec, int n_max, const SolverOptions& opt) {
  if (n_max < 1) throw std::invalid_argument("renorm_factor needs n_max >= 1");
  RenormEstimate est;
  est.k = spec.k();
  est.N = spec.N();
  est.n_max = n_max;
  for (int n = 1; n <= n_max + 1; ++n) {
    auto g = build_graph(spec, n);
    auto L = laplacian(*g);
    LevelConstants lc;
    lc.n = n;
    lc.cross = cross_resistance(*g, L, opt).value();
    lc.lambda = spectral_gap(L, opt, centre_x(*g)).lambda;
    est.levels.push_back(lc);
  }
  for (int i = 0; i < n_max; ++i) {
    auto& a = est.levels[i];
    const auto& b = est.levels[i + 1];
    a.r_lambda = est.N * a.lambda / b.lambda;
    a.r_cross = a.cross / b.cross;
  }
  const auto& last = est.levels[n_max - 1];
  est.r_lambda = last.r_lambda;
  est.r_cross = last.r_cross;
  est.r_hat = std::sqrt(est.r_lambda * est.r_cross);
  est.disagreement = std::abs(est.r_lambda - est.r_cross) / std::min(est.r_lambda, est.r_cross);
  double lo = est.r_lambda, hi = est.r_lambda;
  for (int i = std::max(0, n_max - 2); i < n_max; ++i)
    for (double v : {est.levels[i].r_lambda, est.levels[i].r_cross}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  est.spread = hi / lo;
  const double logk = std::log(static_cast<double>(est.k));
  est.theta = -std::log(est.r_hat) / logk;
  est.sigma = 0.5 * est.theta + 0.5;
  est.d_H = std::log(static_cast<double>(est.N)) / logk;
  est.d_W = est.theta + est.d_H;
  const double k = est.k;
  est.valid = est.r_hat >= 2.0 / k && est.r_hat <= est.N / (k * k);
  est.warning = est.disagreement > 0.1;
  return est;
}

PartitionOfUnity partition_of_unity(const CarpetSpec& spec, int n, int m, const SolverOptions& opt) {
  if (n < 1 || m < 0) throw std::invalid_argument("partition_of_unity needs n >= 1, m >= 0");
  PartitionOfUnity pu;
  pu.n = n;
  pu.m = m;
  auto coarse = build_graph(spec, n);
  pu.graph = build_graph(spec, n + m);
  const auto& fine = *pu.graph;
  auto L = laplacian(fine);
  const std::int64_t block = checked_power(spec.N(), m);
  const auto nc = static_cast<std::size_t>(coarse->size());
  std::vector<std::int32_t> parent(fine.size());
  for (std::int32_t u = 0; u < fine.size(); ++u) parent[u] = static_cast<std::int32_t>(fine.word(u) / block);

  auto phis = parallel_map<std::vector<double>>(nc, [&](std::size_t wi) {
    auto w = static_cast<std::int32_t>(wi);
    auto fs = far_set(*coarse, w);
    std::vector<char> far(nc, 0);
    for (auto u : fs.far) far[u] = 1;
    std::vector<DirichletConstraint> cs(2);
    cs[0].value = 1.0;
    cs[1].value = 0.0;
    for (std::int32_t u = 0; u < fine.size(); ++u) {
      if (parent[u] == w) cs[0].vertices.push_back(u);
      else if (far[parent[u]]) cs[1].vertices.push_back(u);
    }
    if (cs[1].vertices.empty()) cs.pop_back();
    auto phi = solve_dirichlet(L, cs, opt).values;
    for (std::int32_t u = 0; u < fine.size(); ++u)
      if (far[parent[u]]) phi[u] = 0.0;  // exact zero outside N_w
    return phi;
  });

  std::vector<double> total(fine.size(), 0.0);
  for (const auto& phi : phis)
    for (std::int32_t u = 0; u < fine.size(); ++u) total[u] += phi[u];
  pu.min_phi_sum = *std::min_element(total.begin(), total.end());
  if (pu.min_phi_sum < 1.0 - 1e-9) throw std::logic_error("partition sum drops below one");

  std::vector<double> sum(fine.size(), 0.0);
  pu.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t wi = 0; wi < nc; ++wi) {
    auto vals = phis[wi];
    auto fs = far_set(*coarse, static_cast<std::int32_t>(wi));
    std::vector<char> far(nc, 0);
    for (auto u : fs.far) far[u] = 1;
    for (std::int32_t u = 0; u < fine.size(); ++u) {
      vals[u] /= total[u];
      if (far[parent[u]] && vals[u] != 0.0) pu.support_exact = false;
      sum[u] += vals[u];
      pu.min_value = std::min(pu.min_value, vals[u]);
    }
    CellFunction psi(pu.graph, std::move(vals));
    const double e = energy(psi);
    pu.energies.push_back(e);
    pu.max_energy = std::max(pu.max_energy, e);
    pu.psi.push_back(std::move(psi));
  }
  for (double s : sum) pu.sum_deviation = std::max(pu.sum_deviation, std::abs(s - 1.0));
  return pu;
}

double smoothing_ratio(const CellFunction& f, double lambda) {
  const auto& g = *f.graph();
  const double n = static_cast<double>(g.size());
  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= n;
  double worst = 0.0;
  for (double v : f.values()) worst = std::max(worst, (v - mean) * (v - mean));
  const double d = energy(f);
  if (d <= 0.0) throw std::invalid_argument("smoothing ratio of a constant function");
  return worst / (lambda * d / n);
}

SmoothingReport smoothing_bound_check(const CarpetSpec& spec, int n, int trials, std::uint64_t seed,
                                      const SolverOptions& opt) {
  SmoothingReport rep;
  rep.n = n;
  rep.trials = trials;
  auto g = build_graph(spec, n);
  auto L = laplacian(*g);
  rep.lambda = spectral_gap(L, opt, centre_x(*g)).lambda;
  for (int t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    std::vector<double> v(g->size());
    for (auto& x : v) x = rng.normal();
    rep.random_max = std::max(rep.random_max, smoothing_ratio(CellFunction(g, std::move(v)), rep.lambda));
  }
  // the maximiser for a fixed cell w is L^+ (e_w - 1/|W_n|); one per orbit
  std::vector<std::int64_t> rep_of(g->size());
  std::iota(rep_of.begin(), rep_of.end(), 0);
  for (auto s : kSymmetries) {
    auto perm = symmetry_permutation(spec, s, n);
    for (std::size_t i = 0; i < perm.size(); ++i) rep_of[i] = std::min(rep_of[i], perm[i]);
  }
  std::vector<std::int32_t> reps;
  for (std::int32_t v = 0; v < g->size(); ++v)
    if (rep_of[v] == v) reps.push_back(v);
  auto ratios = parallel_map<double>(reps.size(), [&](std::size_t i) {
    std::vector<double> b(g->size(), -1.0 / g->size());
    b[reps[i]] += 1.0;
    auto f = apply_pseudoinverse(L, b, std::min(opt.cg_tol, 1e-12), opt.cg_max_mult);
    return smoothing_ratio(CellFunction(g, std::move(f)), rep.lambda);
  });
  rep.extremal_max = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  rep.max_ratio = std::max(rep.random_max, rep.extremal_max);
  return rep;
}

ScalingCheck scaling_inequalities(const CarpetSpec& spec, std::span<const int> ns, std::span<const int> ms,
                                  const SolverOptions& opt) {
  std::map<int, double> lam, R, sig;
  auto lambda_at = [&](int l) {
    if (!lam.contains(l)) lam[l] = lambda_n(spec, l, opt);
    return lam[l];
  };
  ScalingCheck out;
  for (int m : ms) {
    R[m] = sampled_R_m(spec, m, {}, opt).value;
    sig[m] = sigma_estimate(spec, m, 2, opt).value;
  }
  for (int n : ns)
    for (int m : ms) {
      ScalingRow row;
      row.n = n;
      row.m = m;
      const double ln = lambda_at(n), lnm = lambda_at(n + m);
      row.left = ln * std::pow(static_cast<double>(spec.N()), m) * R[m] / lnm;
      row.right = lnm / (ln * sig[m]);
      out.C_left = std::max(out.C_left, row.left);
      out.C_right = std::max(out.C_right, row.right);
      out.rows.push_back(row);
    }
  return out;
}

}  // namespace usc
