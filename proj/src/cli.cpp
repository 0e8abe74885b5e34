#include "lpso/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "lpso/analysis.hpp"
#include "lpso/error.hpp"
#include "lpso/io.hpp"
#include "lpso/ledger.hpp"

namespace fs = std::filesystem;

namespace lpso {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("cannot open " + p.string());
  return read_json_file(p);
}

void save(const fs::path& p, const std::string& text) {
  try {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text_file(p, text);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

PeriodicSampler load_sampler(const fs::path& p) {
  auto j = load(p);
  if (j.is_array()) return sampler_from_json(j);
  return level_sampler_from_json(j).sampler;
}

int cmd_spectrum(const std::string& file, double lambda, double tol, const std::string& csv, std::ostream& out) {
  if (!(tol > 0)) throw UsageError("--tol must be positive");
  if (!std::isfinite(lambda)) throw UsageError("--lambda must be finite");
  auto f = load_sampler(file);
  auto s = band_spectrum(f.scaled(lambda), tol);
  const double law = 2 * std::numbers::pi / static_cast<double>(f.period());
  out << std::setprecision(10);
  for (const auto& b : s.bands) out << "[" << b.left << ", " << b.right << "]\n";
  out << "bands " << s.bands.size() << (s.touching ? " (touching bands merged)" : "") << "\n";
  out << "total_measure " << s.total_measure() << "\n";
  bool ok = s.max_band_length() <= law + 2 * tol;
  out << "max_band_length " << s.max_band_length() << " <= 2pi/p " << law << (ok ? " ok" : " VIOLATED") << "\n";
  if (!csv.empty()) save(csv, to_csv(s));
  return ok ? kExitPass : kExitCertificate;
}

int cmd_construct(const std::string& config, const std::string& dir, std::optional<std::uint64_t> seed,
                  std::ostream& out) {
  auto cfg = run_config_from_json(load(config));
  if (seed) cfg.seed = *seed;
  auto ledger = iterate(cfg, cfg.stage_count);
  save(fs::path(dir) / "ledger.json", dump(to_json(ledger)));
  out << std::setprecision(6);
  for (const auto& s : ledger.stages) {
    out << "stage " << s.index << ": eps " << s.eps << ", delta " << s.delta << ", p~ " << s.enlarge.tilde_p
        << ", N1 " << s.enlarge.n1 << ", N2 " << s.enlarge.n2 << ", period " << s.period;
    if (s.concat) out << ", r " << s.concat->r << ", m " << s.concat->m;
    out << ", measure " << s.band_measure << (s.measure_is_bound ? " (bound)" : "") << "\n";
    for (const auto& c : s.certificates)
      out << "  " << (c.passed ? "pass" : (c.required ? "FAIL" : "info")) << "  " << c.name << ": " << c.value
          << " " << c.relation << " " << c.bound << "\n";
  }
  out << "status " << ledger.status << (ledger.passed() ? "" : " (certificate failures)") << "\n";
  return ledger.passed() ? kExitPass : kExitCertificate;
}

std::vector<std::string> split_checks(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw UsageError("--checks must name at least one check");
  for (const auto& c : out)
    if (c != "gordon" && c != "hausdorff" && c != "lyapunov" && c != "distance")
      throw UsageError("unknown check '" + c + "'");
  return out;
}

int cmd_verify(const std::string& file, const std::string& checks, const std::string& dir, double alpha,
               double lambda, double tol, std::ostream& out) {
  auto names = split_checks(checks);
  if (!(alpha > 0 && alpha <= 1)) throw UsageError("--alpha must lie in (0, 1]");
  if (!(tol > 0)) throw UsageError("--tol must be positive");
  auto ledger = ledger_from_json(load(file));
  const fs::path root(dir);
  const auto limit = ledger.config.search.max_materialized_period;
  bool all = true;
  out << std::setprecision(9);
  for (const auto& name : names) {
    if (name == "gordon") {
      std::int64_t q = 0;
      for (const auto& s : ledger.stages) q = std::max<std::int64_t>(q, static_cast<std::int64_t>(s.enlarge.tilde_p));
      auto rep = gordon_check(ledger, 3 * q, lambda);
      save(root / "gordon.json", dump(to_json(rep)));
      for (const auto& r : rep.rows) {
        out << "gordon i=" << r.i << " q=" << r.q << " deviation " << r.deviation << " log threshold "
            << r.log_threshold;
        if (r.budget) out << " budget " << *r.budget;
        out << (r.passed && r.within_budget ? " pass" : " FAIL") << "\n";
      }
      all = all && rep.passed();
    } else if (name == "hausdorff") {
      json j = json::array();
      for (std::size_t i = 1; i <= ledger.stages.size(); ++i) {
        try {
          auto c = hausdorff_sum(ledger, i, alpha, lambda);
          save(root / ("hausdorff_stage" + std::to_string(i) + ".csv"), to_csv(c));
          out << "hausdorff stage " << i << " alpha " << alpha << " total_measure " << c.total_measure
              << " cover_sum " << c.cover_sum << "\n";
          j.push_back(to_json(c));
        } catch (const DomainError& e) {
          out << "hausdorff stage " << i << " unavailable: " << e.what() << "\n";
          j.push_back({{"stage", i}, {"error", e.what()}});
          all = false;
        }
      }
      save(root / "hausdorff.json", dump(j));
    } else if (name == "lyapunov") {
      auto views = replay(ledger);
      double norm = views.empty() ? 0 : views.back().enlarged.sup_norm();
      auto grid = energy_grid_for(lambda, norm, ledger.config.grid);
      auto rows = lyapunov_convergence(ledger, grid, lambda);
      save(root / "lyapunov.json", dump(to_json(rows)));
      for (const auto& r : rows) {
        out << "lyapunov stage " << r.stage << " sup difference " << r.sup_difference << " < eps " << r.eps
            << (r.passed ? " pass" : " FAIL") << "\n";
        all = all && r.passed;
      }
    } else {
      auto views = replay(ledger);
      json j = json::array();
      PeriodicSampler prev(ledger.config.base);
      for (std::size_t k = 0; k < views.size(); ++k) {
        if (views[k].output.period() > limit) {
          out << "distance stage " << k + 1 << " unavailable: period exceeds materialization limit\n";
          j.push_back({{"stage", k + 1}, {"error", "period exceeds materialization limit"}});
          all = false;
          break;
        }
        auto cur = views[k].output.distinguished(limit);
        auto d = spectrum_distance(prev.scaled(lambda), cur.scaled(lambda), tol);
        json row = to_json(d);
        row["stage"] = k + 1;
        j.push_back(row);
        out << "distance stage " << k + 1 << " " << d.distance << " <= " << d.sup_norm << " + 2 tol"
            << (d.passed ? " pass" : " FAIL") << "\n";
        all = all && d.passed;
        prev = cur;
      }
      save(root / "distance.json", dump(j));
    }
  }
  return all ? kExitPass : kExitCertificate;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Limit-periodic potential construction and verification"};
  app.require_subcommand(1);

  std::string file, csv, config, dir, checks, ledger;
  double lambda = 1.0, tol = 1e-10, alpha = 1.0;
  std::uint64_t seed = 0;

  auto* spec = app.add_subcommand("spectrum", "Band spectrum of a periodic sampler");
  spec->add_option("file", file, "sampler JSON file")->required();
  spec->add_option("--lambda", lambda, "coupling");
  spec->add_option("--tol", tol, "band edge tolerance");
  spec->add_option("--out", csv, "CSV output path");

  auto* cons = app.add_subcommand("construct", "Run the staged construction");
  cons->add_option("--config", config, "config JSON file")->required();
  cons->add_option("--out", dir, "output directory")->required();
  auto* seed_opt = cons->add_option("--seed", seed, "seed for bump-vector sampling");

  auto* ver = app.add_subcommand("verify", "Analysis checks on a ledger");
  ver->add_option("ledger", ledger, "ledger JSON file")->required();
  ver->add_option("--checks", checks, "comma list of gordon,hausdorff,lyapunov,distance")->required();
  ver->add_option("--out", dir, "report directory")->required();
  ver->add_option("--alpha", alpha, "Hausdorff exponent");
  ver->add_option("--lambda", lambda, "coupling");
  ver->add_option("--tol", tol, "band edge tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*spec) return cmd_spectrum(file, lambda, tol, csv, out);
    if (*cons) {
      std::optional<std::uint64_t> s;
      if (seed_opt->count()) s = seed;
      return cmd_construct(config, dir, s, out);
    }
    return cmd_verify(ledger, checks, dir, alpha, lambda, tol, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace lpso
