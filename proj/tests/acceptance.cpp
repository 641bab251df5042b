// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
// below. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qfc/control.hpp"
#include "qfc/entropy.hpp"
#include "qfc/experiments.hpp"
#include "qfc/sme.hpp"
#include "qfc/steady.hpp"

using namespace qfc;

namespace {

// criterion 1
constexpr double kFig1aL1 = 0.05;
constexpr double kFig1aSeconds = 300.0;
// criterion 2
constexpr double kClosedLoopSigmas = 3.0;
constexpr double kClosedLoopStep = 2e-5;    // (k + beta) dt
constexpr double kClosedLoopHorizon = 10.0;  // (k + beta) t_final
constexpr int kClosedLoopTraj = 64;
// criterion 3
constexpr double kIncrDelta = 1e-2;
constexpr int kIncrSamples = 200000;
constexpr double kIncrDt = 1e-6;
constexpr double kIncrStdTol = 0.05;
constexpr double kIncrMeanSigmas = 3.0;
constexpr double kIncrRatio = 4.0;
constexpr double kIncrRatioTol = 0.4;
// criterion 4
constexpr double kRateFactor = 2.0;  // relative error <= factor * Delta
// criterion 5
constexpr double kCouplingTol = 1e-10;
// criterion 7
constexpr double kFpRatio = 4.0;
constexpr double kFpRatioTol = 0.2;
// criterion 8
constexpr double kOrderSigmas = 3.0;
// criterion 9
constexpr double kSweepSeconds = 600.0;
// criterion 10
constexpr double kRuleStability = 0.10;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::set<int> selected;  // empty: all

void report(int id, const char* name, const std::function<Verdict()>& check) {
  if (!selected.empty() && !selected.count(id)) return;
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s [%2d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

void info(const std::string& text) {
  std::printf("INFO      %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const Table& table(const ExperimentOutput& o, const std::string& name) {
  for (const Table& t : o.tables)
    if (t.name == name) return t;
  throw Error("missing table " + name);
}

size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw Error("missing column " + name);
  return static_cast<size_t>(it - t.header.begin());
}

double num(const std::vector<std::string>& row, size_t c) { return std::stod(row[c]); }

ComplexMatrix with_spectrum(const UnitaryMatrix& u, const std::vector<double>& ev) {
  return conjugate(u, ComplexMatrix::diagonal(ev));
}

// Small eigenvalues uniform on the simplex of total Delta.
std::vector<double> near_pure(Rng& rng, int n, double delta) {
  std::exponential_distribution<double> w(1.0);
  std::vector<double> small(static_cast<size_t>(n - 1));
  for (auto& x : small) x = w(rng);
  const double s = std::accumulate(small.begin(), small.end(), 0.0);
  std::vector<double> ev{1.0 - delta};
  for (double x : small) ev.push_back(delta * x / s);
  return ev;
}

std::vector<int> random_perm(Rng& rng, int n) {
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

Verdict fig1a() {
  std::ostringstream d;
  bool ok = true;
  for (double kb : {0.1, 0.5, 2.0}) {
    ExperimentConfig cfg = parse_config(Experiment::fig1a, "");
    cfg.k_over_beta = {kb};
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentOutput out = compute_experiment(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const Table& t = table(out, "fig1a");
    const size_t cz = column(t, "z"), ca = column(t, "p_analytic"), ce = column(t, "p_empirical");
    std::vector<double> z, emp;
    double l1 = 0.0;
    const double width = 2.0 / static_cast<double>(t.rows.size());
    for (const auto& r : t.rows) {
      z.push_back(num(r, cz));
      emp.push_back(num(r, ce));
      l1 += std::abs(num(r, ce) - num(r, ca)) * width;
    }
    bool shape = true;
    if (kb == 2.0) {
      // bimodal: both outer lobes well above the centre
      double centre = 0, left = 0, right = 0;
      for (size_t i = 0; i < z.size(); ++i) {
        if (std::abs(z[i]) < 0.1) centre = std::max(centre, emp[i]);
        if (z[i] < -0.5) left = std::max(left, emp[i]);
        if (z[i] > 0.5) right = std::max(right, emp[i]);
      }
      shape = left > 2 * centre && right > 2 * centre;
    } else if (kb == 0.1) {
      // unimodal at 0: one local maximum of the 3-bin smoothed histogram, near z = 0
      std::vector<double> s(emp.size());
      for (size_t i = 0; i < emp.size(); ++i) {
        const size_t lo = i == 0 ? 0 : i - 1, hi = std::min(emp.size() - 1, i + 1);
        for (size_t j = lo; j <= hi; ++j) s[i] += emp[j] / static_cast<double>(hi - lo + 1);
      }
      int peaks = 0;
      for (size_t i = 1; i + 1 < s.size(); ++i) peaks += s[i] > s[i - 1] && s[i] >= s[i + 1];
      const size_t arg = static_cast<size_t>(std::max_element(s.begin(), s.end()) - s.begin());
      shape = peaks == 1 && std::abs(z[arg]) < 0.1;
    }
    ok = ok && l1 <= kFig1aL1 && secs <= kFig1aSeconds && shape;
    d << "k/b=" << kb << " L1=" << fmt("%.4f", l1) << (kb == 2.0 ? " bimodal=" : kb == 0.1 ? " unimodal=" : "")
      << (kb == 0.5 ? "" : shape ? "yes" : "no") << " " << fmt("%.1fs", secs) << "; ";
  }
  return {ok, d.str() + "tol L1<=" + fmt("%g", kFig1aL1)};
}

Verdict unbiased_closed_form() {
  std::ostringstream d;
  bool ok = std::abs(unbiased_qubit_success(1.0, 1.0) - 0.853553) < 5e-7;
  FeedbackConfig fc;
  ClosedLoopOptions opt;
  for (double kb : {1.0, 2.0, 5.0, 10.0, 50.0}) {
    SmeParams p;
    p.k = kb;
    p.beta = 1.0;
    p.dt = kClosedLoopStep / (kb + 1.0);
    p.seed = derive_seed(2024, static_cast<std::uint64_t>(kb));
    const ClosedLoopResult r = run_closed_loop(fc, p, kClosedLoopHorizon / (kb + 1.0), kClosedLoopTraj, opt);
    const double target = unbiased_qubit_success(kb, 1.0);
    const double zscore = (r.mean_success - target) / r.stderr_success;
    ok = ok && std::abs(zscore) <= kClosedLoopSigmas && r.psd_violations == 0;
    d << "k/b=" << kb << " z=" << fmt("%+.2f", zscore) << "; ";
  }
  return {ok, d.str() + "tol |z|<=3, P(k=b)=0.853553"};
}

Verdict commuting_increment() {
  std::ostringstream d;
  bool ok = true;
  Rng rng(303);
  const double k = 1.0;
  for (int dim : {2, 3, 4}) {
    const UnitaryMatrix u = dim == 2 ? UnitaryMatrix::identity(2) : haar_unitary(dim, rng);
    const std::vector<double> ev = dim == 2 ? std::vector<double>{1 - kIncrDelta, kIncrDelta} : near_pure(rng, dim, kIncrDelta);
    const DensityMatrix rho = DensityMatrix::from_matrix(with_spectrum(u, ev));
    // J_z in rho's eigenbasis, largest eigenvalue on the target
    const Observable x = jz_observable(dim).rebased(rho.eigen().vectors);
    const double coef = predicted_ds_commuting(rho, x, k, 1.0) * std::sqrt(kIncrDt);
    const double l0 = entropies(rho).linear;
    GaussianSource g(derive_seed(404, static_cast<std::uint64_t>(dim)));
    double m = 0, m2 = 0;
    for (int i = 0; i < kIncrSamples; ++i) {
      const double dW = std::sqrt(kIncrDt) * g();
      const double ds = entropies(sme_update(rho, x.matrix(), ComplexMatrix(dim), k, 0.0, kIncrDt, dW)).linear - l0;
      m += ds;
      m2 += ds * ds;
    }
    m /= kIncrSamples;
    const double sd = std::sqrt(m2 / kIncrSamples - m * m);
    const double se = sd / std::sqrt(static_cast<double>(kIncrSamples));
    const double std_err = std::abs(sd / std::abs(coef) - 1.0);

    // deterministic part under Delta halving
    std::vector<double> half = ev;
    half[0] = 1 - kIncrDelta / 2;
    for (size_t j = 1; j < half.size(); ++j) half[j] = ev[j] / 2;
    const DensityMatrix rho2 = DensityMatrix::from_matrix(with_spectrum(rho.eigen().vectors, half));
    const Observable x2 = jz_observable(dim).rebased(rho2.eigen().vectors);
    const double ratio = exact_mean_entropy_rate(rho, x, k) / exact_mean_entropy_rate(rho2, x2, k);

    ok = ok && std::abs(m) <= kIncrMeanSigmas * se && std_err <= kIncrStdTol &&
         std::abs(ratio - kIncrRatio) <= kIncrRatioTol;
    d << "N=" << dim << " mean/se=" << fmt("%+.2f", m / se) << " sd/coef-1=" << fmt("%+.4f", sd / std::abs(coef) - 1)
      << " ratio=" << fmt("%.3f", ratio) << "; ";
  }
  return {ok, d.str() + "tol 3se, 5%, 4+-0.4"};
}

// max over samples of |exact - first order| / (Delta |first order|)
double unbiased_rate_worst(int dim, double delta, Rng& rng, int samples) {
  const MubFamily fam = mub_family(dim);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const DensityMatrix rho = DensityMatrix::from_matrix(with_spectrum(haar_unitary(dim, rng), near_pure(rng, dim, delta)));
    for (int b = 1; b < fam.count(); ++b) {
      const std::vector<int> perm = random_perm(rng, dim);
      const Observable xu = unbiased_observable(rho, jz_observable(dim), fam.bases[static_cast<size_t>(b)], perm);
      const double exact = exact_mean_entropy_rate(rho, xu, 1.0);
      const double first = predicted_ds_unbiased(rho, xu, 1.0, 1.0);
      worst = std::max(worst, std::abs(exact - first) / (rho.delta() * std::abs(first)));
    }
  }
  return worst;
}

Verdict unbiased_rate() {
  std::ostringstream d;
  bool ok = true;
  Rng rng(505);
  for (double delta : {1e-2, 1e-3}) {
    d << "D=" << delta << " worst err/D:";
    for (int dim : {2, 3, 4}) {
      const double w = unbiased_rate_worst(dim, delta, rng, 1000);
      ok = ok && w <= kRateFactor;
      d << " N" << dim << "=" << fmt("%.3g", w);
    }
    d << "; ";
  }
  if (!ok) info("unbiased rate: err/D stays O(1) as D shrinks, so the law holds to first order; the pinned factor 2 is what fails");
  return {ok, d.str() + "tol err<=2D"};
}

Verdict couplings() {
  const ExperimentOutput out = compute_experiment(parse_config(Experiment::mub_audit, ""));
  const Table& t = table(out, "mub_audit");
  const size_t cd = column(t, "dim"), cc = column(t, "coupling");
  double worst2 = 0, worst3 = 0;
  long n2 = 0, n3 = 0;
  for (const auto& r : t.rows) {
    const int dim = std::stoi(r[cd]);
    if (dim == 2) worst2 = std::max(worst2, std::abs(num(r, cc) - 0.25)), ++n2;
    if (dim == 3) worst3 = std::max(worst3, std::abs(num(r, cc) - 1.0 / 3.0)), ++n3;
  }
  const bool unequal = out.diagnostics.at("unequal_couplings_dim4") == 1.0;
  const double rows4 = out.diagnostics.at("max_distinct_rows_dim4");
  const double sets4 = out.diagnostics.at("max_distinct_multisets_dim4");
  const bool ok = n2 > 0 && n3 > 0 && worst2 <= kCouplingTol && worst3 <= kCouplingTol && unequal && rows4 > 1;
  std::ostringstream d;
  d << "N=2 max dev " << fmt("%.1e", worst2) << " over " << n2 << ", N=3 max dev " << fmt("%.1e", worst3) << " over "
    << n3 << "; N=4 unequal couplings=" << (unequal ? "yes" : "no") << ", distinct ordered rows per MUB="
    << rows4 << " (sorted multisets=" << sets4 << ")";
  return {ok, d.str()};
}

Verdict threshold_optimum() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.025 * i);
  bool ok = true;
  std::ostringstream d;
  for (double kb : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const EpsilonOptimum o = optimize_epsilon(kb, 1.0, grid);
    bool mono = true;
    for (size_t i = 1; i < o.success.size(); ++i) mono = mono && o.success[i] <= o.success[i - 1];
    ok = ok && o.eps_star == 0.0 && mono;
    d << "k/b=" << kb << " eps*=" << o.eps_star << (mono ? "" : " NOT monotone") << "; ";
  }
  return {ok, d.str() + "21-point grid on [0, 0.5]"};
}

Verdict fp_convergence() {
  bool ok = true;
  double lo = 1e9, hi = 0;
  for (double kb : {0.1, 0.5, 2.0, 5.0})
    for (double eps : {-1.0, 0.0, 0.2}) {
      double prev = 0;
      for (int nodes : {2049, 4097, 8193}) {
        const SteadyDensity p = eps < 0 ? p_ss_nofb(kb, 1.0, GridSpec{nodes}) : p_ss_fb(kb, 1.0, eps, GridSpec{nodes});
        const double r = fp_residual(p, kb, 1.0);
        if (prev > 0) {
          const double ratio = prev / r;
          lo = std::min(lo, ratio);
          hi = std::max(hi, ratio);
          ok = ok && std::abs(ratio / kFpRatio - 1.0) <= kFpRatioTol;
        }
        prev = r;
      }
    }
  return {ok, "halving ratios in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) +
                  "] for the no-feedback density and eps in {0, 0.2}, k/b in {0.1,0.5,2,5}, nodes 2049/4097/8193; tol 4+-20%"};
}

Verdict ordering() {
  const ExperimentOutput out = compute_experiment(parse_config(Experiment::fig1b, ""));
  const Table& t = table(out, "fig1b");
  const size_t ck = column(t, "k_over_beta"), ci = column(t, "P_commuting_ideal"),
               sci = column(t, "stderr_commuting_ideal"), cm = column(t, "P_commuting_mu"),
               scm = column(t, "stderr_commuting_mu"), ui = column(t, "P_unbiased_ideal"),
               sui = column(t, "stderr_unbiased_ideal"), um = column(t, "P_unbiased_mu"),
               sum = column(t, "stderr_unbiased_mu"), gap = column(t, "unbiased_gap"),
               sgap = column(t, "stderr_unbiased_gap");
  bool ok = !t.rows.empty();
  std::ostringstream d;
  for (const auto& r : t.rows) {
    if (num(r, ck) < 1.0) continue;
    const double g = num(r, gap) / num(r, sgap);
    double worst = 1e300;
    for (auto [u, su] : {std::pair{ui, sui}, std::pair{um, sum}})
      for (auto [c, sc] : {std::pair{ci, sci}, std::pair{cm, scm}})
        worst = std::min(worst, (num(r, u) - num(r, c)) / std::hypot(num(r, su), num(r, sc)));
    ok = ok && num(r, gap) > 0 && g >= kOrderSigmas && worst >= kOrderSigmas;
    d << "k/b=" << r[ck] << " ideal-mu gap=" << fmt("%.1f", g) << "se, min unbiased-commuting=" << fmt("%.1f", worst)
      << "se; ";
  }
  return {ok, d.str() + "tol >=3se"};
}

Verdict eps_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentOutput out = compute_experiment(parse_config(Experiment::eps_sweep, ""));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Table& rows = table(out, "eps_sweep");
  const size_t cd = column(rows, "dim"), cb = column(rows, "best_eps");
  long qubit_rows = 0, qubit_at_one = 0;
  for (const auto& r : rows.rows) {
    if (std::stoi(r[cd]) != 2) continue;
    ++qubit_rows;
    qubit_at_one += num(r, cb) == 1.0;
  }
  const double f3 = out.diagnostics.at("fraction_interior_dim3");
  const double f4 = out.diagnostics.at("fraction_interior_dim4");
  const double f2 = out.diagnostics.at("fraction_interior_dim2");
  const bool ok = qubit_rows >= 1000 && qubit_at_one == qubit_rows && f2 == 0.0 && f3 > 0 && f4 > 0 && secs <= kSweepSeconds;
  std::ostringstream d;
  d << "interior fraction N=3 " << f3 << ", N=4 " << f4 << "; qubit eps*=1 in " << qubit_at_one << "/" << qubit_rows
    << " (state, MUB) pairs; " << fmt("%.1f", secs) << " s <= 600 s";
  return {ok, d.str()};
}

Verdict rule_of_thumb() {
  // d(r) = |(1 - r/4) - (1 + 1/sqrt(1 + r))/2|, r = beta/k; series oracle 3/16
  std::vector<double> r, dv;
  for (int i = 0; i <= 40; ++i) {
    const double kb = std::pow(10.0, 1.0 + 2.0 * i / 40.0);
    const AnalyticPerformance a = analytic_performance(kb, 1.0, 1.0, 2);
    r.push_back(1.0 / kb);
    dv.push_back(std::abs(a.rule_of_thumb - a.unbiased_qubit));
  }
  auto fit = [&](size_t from, size_t to) {
    double num = 0, den = 0;
    for (size_t i = from; i < to; ++i) {
      num += dv[i] * r[i] * r[i];
      den += std::pow(r[i], 4);
    }
    return num / den;
  };
  const double c = fit(0, r.size());
  const double c_lo = fit(0, 21), c_hi = fit(20, r.size());
  double spread = 0;
  for (size_t i = 0; i < r.size(); ++i) spread = std::max(spread, std::abs(dv[i] / (r[i] * r[i]) / c - 1));
  const bool ok = std::abs(c_lo / c_hi - 1) <= kRuleStability && spread <= kRuleStability &&
                  std::abs(c_hi / (3.0 / 16.0) - 1) <= 0.01;
  std::ostringstream d;
  d << "C=" << fmt("%.4f", c) << " (k/b 10-100: " << fmt("%.4f", c_lo) << ", 100-1000: " << fmt("%.4f", c_hi)
    << ", series 0.1875), pointwise spread " << fmt("%.3f", spread) << "; tol 10%";
  return {ok, d.str()};
}

}  // namespace

// Optional arguments restrict the run to the listed criterion numbers.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  std::printf("qfc acceptance suite, library %s\n", library_version().c_str());
  report(1, "steady no-feedback density vs Monte Carlo", fig1a);
  report(2, "unbiased ideal closed loop vs closed form", unbiased_closed_form);
  report(3, "commuting increment law", commuting_increment);
  report(4, "unbiased rate law", unbiased_rate);
  report(5, "coupling constants", couplings);
  report(6, "optimal threshold eps = 0", threshold_optimum);
  report(7, "Fokker-Planck stationarity", fp_convergence);
  report(8, "algorithm ordering", ordering);
  report(9, "eps sweep", eps_sweep);
  report(10, "rule of thumb vs closed form", rule_of_thumb);
  std::printf("%d of %zu criteria failed\n", failures, selected.empty() ? size_t{10} : selected.size());
  return failures;
}
