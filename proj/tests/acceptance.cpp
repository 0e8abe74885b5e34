// Acceptance run: one pass/fail line per criterion.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "lpso/analysis.hpp"
#include "lpso/cli.hpp"
#include "lpso/io.hpp"
#include "lpso/ledger.hpp"

using namespace lpso;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<PeriodicSampler> criterion_samplers() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> pd(1, 8);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<PeriodicSampler> out;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v(static_cast<std::size_t>(pd(rng)));
    for (auto& x : v) x = u(rng);
    out.emplace_back(v);
  }
  return out;
}

const std::vector<PeriodicSampler>& samplers() {
  static const auto s = criterion_samplers();
  return s;
}

Outcome c1() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (const auto& f : samplers())
    worst = std::max(worst, hausdorff_distance(band_spectrum(f, 1e-10), floquet_oracle(f, 721)));
  double t = seconds_since(t0);
  return {worst <= 1e-6 && t <= 60, "max distance " + fmt(worst) + " (<= 1e-6), " + fmt(t) + " s (<= 60)"};
}

Outcome c2() {
  auto s = band_spectrum(PeriodicSampler{}, 1e-10);
  bool bands = s.bands.size() == 1 && std::abs(s.bands[0].left + 2) <= 1e-10 && std::abs(s.bands[0].right - 2) <= 1e-10;
  // eigenvalue of [[3,-1],[1,0]]: root of x^2 - 3x + 1
  double want = std::log((3 + std::sqrt(5.0)) / 2);
  double got = lyapunov_periodic(3, PeriodicSampler{});
  bool lyap = std::abs(got - want) <= 1e-12;
  return {bands && lyap, "bands [" + fmt(s.bands[0].left) + ", " + fmt(s.bands[0].right) + "], L(3) error " +
                             fmt(std::abs(got - want))};
}

Outcome c3() {
  double worst = -INFINITY;
  for (const auto& f : samplers()) {
    auto s = band_spectrum(f, 1e-10);
    worst = std::max(worst, s.max_band_length() - 2 * std::numbers::pi / static_cast<double>(f.period()));
  }
  return {worst <= 2e-10, "max (length - 2pi/p) " + fmt(worst) + " (<= 2e-10)"};
}

Outcome c4() {
  double worst = -INFINITY;
  for (const auto& f : samplers()) {
    auto grid = EnergyGrid::covering(f.sup_norm() + 4, 1000, 1001, 20001);
    for (std::uint64_t k : {std::uint64_t{1}, static_cast<std::uint64_t>(f.period())}) {
      auto c = measure_certificate(f, 1, grid, k);
      worst = std::max(worst, *c.band_measure - c.bound);
    }
  }
  return {worst <= 1e-6, "max (measure - 4 pi p / C) " + fmt(worst) + " (<= 1e-6)"};
}

Outcome c5() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pd(1, 8);
  std::uniform_real_distribution<double> u(-3, 3), ue(-7, 7);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> v(static_cast<std::size_t>(pd(rng)));
    for (auto& x : v) x = u(rng);
    auto w = v;
    std::rotate(w.begin(), w.begin() + 1, w.end());
    double e = ue(rng);
    worst = std::max(worst, std::abs(discriminant(e, PeriodicSampler(v)) - discriminant(e, PeriodicSampler(w))));
  }
  return {worst <= 1e-9, "max |D(f) - D(shift f)| " + fmt(worst) + " (<= 1e-9)"};
}

Outcome c6() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> pd(1, 8);
  std::uniform_real_distribution<double> u(-3, 3);
  const double n = 1000;
  double worst = 0;
  int done = 0;
  while (done < 50) {
    std::vector<double> v(static_cast<std::size_t>(pd(rng)));
    for (auto& x : v) x = u(rng);
    PeriodicSampler f(v);
    double r = f.sup_norm() + 3;
    double e = std::uniform_real_distribution<double>(-r, r)(rng);
    auto s = band_spectrum(f);
    bool inside = false;
    for (const auto& b : s.bands) inside = inside || (e >= b.left && e <= b.right);
    if (inside) continue;
    auto p = static_cast<double>(f.period());
    double growth = scaled_transfer_product(e, f, static_cast<std::int64_t>(n * p)).log_norm() / (n * p);
    worst = std::max(worst, std::abs(growth - lyapunov_periodic(e, f)));
    ++done;
  }
  return {worst <= 10 / n, "max deviation " + fmt(worst) + " (<= 10/N = " + fmt(10 / n) + ")"};
}

Outcome c7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3), ang(0, 2 * std::numbers::pi);
  std::uniform_int_distribution<int> pd(1, 4);
  std::size_t bad = 0;
  for (int k = 0; k < 100000; ++k) {
    std::vector<double> v(static_cast<std::size_t>(pd(rng)));
    for (auto& x : v) x = u(rng);
    auto m = transfer_product(u(rng), PeriodicSampler(v), static_cast<std::int64_t>(v.size()));
    auto b = angle_distortion_bounds(m);
    double t1 = ang(rng), t2 = ang(rng);
    std::array<double, 2> x{std::cos(t1), std::sin(t1)}, y{std::cos(t2), std::sin(t2)};
    double before = vector_angle(x, y), after = vector_angle(m.apply(x), m.apply(y));
    if (!(b.m_lower * before <= after && after <= b.m_upper * before)) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " violations in 100000 samples"};
}

Outcome c8() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pd(1, 8);
  std::uniform_real_distribution<double> u(-3, 3), w(-1e-3, 1e-3);
  double worst = -INFINITY;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v(static_cast<std::size_t>(pd(rng))), g;
    for (auto& x : v) x = u(rng);
    for (double x : v) g.push_back(x + w(rng));
    auto d = spectrum_distance(PeriodicSampler(v), PeriodicSampler(g), 1e-10);
    worst = std::max(worst, d.distance - 1e-3);
  }
  return {worst <= 2e-10, "max (distance - 1e-3) " + fmt(worst) + " (<= 2e-10)"};
}

// ---- construction criteria share one ledger ----

struct Desk {
  fs::path dir;
  std::optional<ConstructionLedger> ledger;
  double seconds = 0;
  int exit_code = -1;
  std::string error;
};

Desk& desk(const fs::path& work) {
  static Desk d;
  static bool ran = false;
  if (ran) return d;
  ran = true;
  d.dir = work;
  fs::create_directories(work);
  std::ofstream(work / "desk.json") << R"({
  "schedule": {"first": 2, "ratio": 2, "depth": 62},
  "base": [0],
  "eps0": 1,
  "stage_count": 2,
  "search": {"max_evaluations": 10000}
})";
  std::string cfg = (work / "desk.json").string(), out = (work / "run_a").string();
  const char* argv[] = {"lpso", "construct", "--config", cfg.c_str(), "--out", out.c_str()};
  std::ostringstream log, err;
  auto t0 = std::chrono::steady_clock::now();
  d.exit_code = run_cli(6, argv, log, err);
  d.seconds = seconds_since(t0);
  std::ofstream(work / "run_a.log") << log.str() << err.str();
  std::cout << log.str();
  try {
    d.ledger = ledger_from_json(read_json_file(work / "run_a" / "ledger.json"));
  } catch (const std::exception& e) {
    d.error = e.what();
  }
  return d;
}

Outcome c9(const fs::path& work) {
  auto& d = desk(work);
  if (!d.ledger) return {false, "no ledger: " + d.error};
  const auto& l = *d.ledger;
  if (l.stages.size() < 2) return {false, "ledger has " + std::to_string(l.stages.size()) + " stage(s), status " + l.status};
  const auto& s1 = l.stages[0];
  const auto& s2 = l.stages[1];
  auto cert = [&](const char* name) { return s2.find(name); };
  std::size_t evals = 0;
  for (const auto& s : l.stages) evals += s.evaluations;
  auto grid_points = energy_grid_for(s2.lambdas.back(), 1, l.config.grid).count;
  bool grid_ok = grid_points >= 1000 && s2.lambdas.size() == 5;

  const auto* floor = cert("stage_floor");
  const auto* close = cert("stage_closeness");
  bool a = floor && floor->passed && s2.delta > 0;
  bool b = close && close->passed;
  bool c = s2.diameter <= 1.0 / static_cast<double>(s2.period);
  bool dd = s2.band_measure < s1.band_measure;
  bool time_ok = d.seconds <= 600;
  bool budget_ok = evals <= 10000;

  std::string detail = "(a) floor " + (floor ? fmt(floor->value) : "missing") + (a ? " ok" : " FAIL") +
                       "; (b) |L2 - L1| " + (close ? fmt(close->value) : "missing") + " < eps2 " + fmt(s2.eps) +
                       (b ? " ok" : " FAIL") + "; (c) diameter " + fmt(s2.diameter) + " <= 1/p2 " +
                       fmt(1.0 / static_cast<double>(s2.period)) + (c ? " ok" : " FAIL") + "; (d) measure " +
                       fmt(s2.band_measure) + (s2.measure_is_bound ? " (certified bound)" : "") + " < " +
                       fmt(s1.band_measure) + (dd ? " ok" : " FAIL") + "; grid " + std::to_string(grid_points) +
                       " x " + std::to_string(s2.lambdas.size()) + (grid_ok ? "" : " FAIL") + "; evaluations " +
                       std::to_string(evals) + (budget_ok ? "" : " FAIL") + "; " + fmt(d.seconds) + " s" +
                       (time_ok ? "" : " FAIL");
  return {a && b && c && dd && grid_ok && time_ok && budget_ok, detail};
}

Outcome c10(const fs::path& work) {
  auto& d = desk(work);
  if (!d.ledger || d.ledger->stages.size() < 2) return {false, "criterion-9 ledger unavailable"};
  std::int64_t q = 0;
  for (const auto& s : d.ledger->stages) q = std::max<std::int64_t>(q, static_cast<std::int64_t>(s.enlarge.tilde_p));
  auto rep = gordon_check(*d.ledger, 3 * q);
  const auto& row = rep.rows.front();
  bool within = row.budget && row.deviation <= *row.budget;
  bool small = row.budget && *row.budget <= 1.0;
  return {within && small, "q1 = " + std::to_string(row.q) + ", deviation " + fmt(row.deviation) + " <= budget " +
                               (row.budget ? fmt(*row.budget) : "missing") + (within ? " ok" : " FAIL") +
                               "; budget <= 1" + (small ? " ok" : " FAIL")};
}

Outcome c11(const fs::path& work) {
  auto& d = desk(work);
  if (!d.ledger || d.ledger->stages.size() < 2) return {false, "criterion-9 ledger unavailable"};
  const auto& l = *d.ledger;
  std::string detail;
  bool ok = true;
  std::vector<double> half;
  for (std::size_t i = 1; i <= 2; ++i) {
    try {
      auto one = hausdorff_sum(l, i, 1.0, l.config.report_lambda);
      double want = one.total_measure + 2 * one.inflation * static_cast<double>(one.intervals.size());
      bool eq = std::abs(one.cover_sum - want) <= 1e-9;
      ok = ok && eq;
      auto h = hausdorff_sum(l, i, 0.5, l.config.report_lambda);
      half.push_back(h.cover_sum);
      detail += "stage " + std::to_string(i) + ": alpha=1 sum " + fmt(one.cover_sum) + (eq ? " ok" : " FAIL") +
                ", alpha=0.5 sum " + fmt(h.cover_sum) + "; ";
    } catch (const std::exception& e) {
      ok = false;
      detail += "stage " + std::to_string(i) + " FAIL: " + e.what() + "; ";
    }
  }
  bool dec = half.size() == 2 && half[1] < half[0];
  detail += dec ? "alpha=0.5 decreases" : "alpha=0.5 decrease not established";
  return {ok && dec, detail};
}

Outcome c12(const fs::path& work) {
  auto& d = desk(work);
  std::string cfg = (work / "desk.json").string(), out = (work / "run_b").string();
  const char* argv[] = {"lpso", "construct", "--config", cfg.c_str(), "--out", out.c_str()};
  std::ostringstream log, err;
  int code = run_cli(6, argv, log, err);
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto a = read(d.dir / "run_a" / "ledger.json"), b = read(work / "run_b" / "ledger.json");
  bool same = !a.empty() && a == b && code == d.exit_code;
  return {same, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "DIFFERENT") + ", exit codes " +
                    std::to_string(d.exit_code) + "/" + std::to_string(code)};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "lpso_acceptance";
  fs::create_directories(work);
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"band solver vs Floquet oracle", c1},
      {"free Laplacian", c2},
      {"band-length law", c3},
      {"measure bound", c4},
      {"trace shift-invariance", c5},
      {"Lyapunov consistency", c6},
      {"angle-distortion certificate", c7},
      {"spectrum distance", c8},
      {"two-stage desk construction", [&] { return c9(work); }},
      {"Gordon finite check", [&] { return c10(work); }},
      {"Hausdorff sums", [&] { return c11(work); }},
      {"determinism", [&] { return c12(work); }},
  };
  int failed = 0;
  std::vector<std::string> lines;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::string line = "criterion " + std::to_string(k + 1) + " " + (o.pass ? "PASS" : "FAIL") + "  " +
                       criteria[k].first + ": " + o.detail + " [" + fmt(seconds_since(t0)) + " s]";
    std::cout << line << std::endl;
    lines.push_back(line);
    failed += !o.pass;
  }
  std::cout << "\nsummary\n";
  for (const auto& l : lines) std::cout << l.substr(0, l.find(':')) << "\n";
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
