#include "lpso/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lpso/error.hpp"

namespace lpso {

const Certificate* StageRecord::find(const std::string& name) const {
  for (const auto& c : certificates)
    if (c.name == name) return &c;
  return nullptr;
}

bool ConstructionLedger::passed() const {
  if (status != "complete") return false;
  return std::all_of(stages.begin(), stages.end(), [](const StageRecord& s) { return s.passed(); });
}

// ---- serialization ----

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

// JSON has no infinities; store them as strings.
json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double num_from(const json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    throw ParseError("bad number '" + s + "'");
  }
  return j.get<double>();
}

json to_json(const Certificate& c) {
  return {{"name", c.name},
          {"value", num(c.value)},
          {"relation", c.relation},
          {"bound", num(c.bound)},
          {"passed", c.passed},
          {"required", c.required},
          {"witness_energy", opt(c.witness_energy)},
          {"witness_lambda", opt(c.witness_lambda)}};
}

Certificate certificate_from_json(const json& j) {
  Certificate c;
  c.name = j.at("name").get<std::string>();
  c.value = num_from(j.at("value"));
  c.relation = j.at("relation").get<std::string>();
  c.bound = num_from(j.at("bound"));
  c.passed = j.at("passed").get<bool>();
  c.required = j.at("required").get<bool>();
  c.witness_energy = opt_from(j.at("witness_energy"));
  c.witness_lambda = opt_from(j.at("witness_lambda"));
  return c;
}

json to_json(const StageRecord& s) {
  json j;
  j["index"] = s.index;
  j["eps"] = s.eps;
  j["delta"] = num(s.delta);
  j["tilde_delta"] = num(s.tilde_delta);
  j["member_floor"] = num(s.member_floor);
  j["probe_opened"] = s.probe_opened;
  j["probe_min_gap"] = num(s.probe_min_gap);
  j["lambdas"] = s.lambdas;
  j["enlarge"] = {{"eps", s.enlarge.eps},
                  {"tilde_p", s.enlarge.tilde_p},
                  {"n1", s.enlarge.n1},
                  {"n2", s.enlarge.n2},
                  {"j0", s.enlarge.j0}};
  if (s.concat) {
    const auto& c = *s.concat;
    j["concat"] = {{"period", c.period}, {"exponent", c.exponent}, {"r", c.r}, {"d", c.d}, {"m", c.m}, {"t", c.t}};
  } else {
    j["concat"] = nullptr;
  }
  j["period"] = s.period;
  j["family_size"] = s.family_size;
  j["diameter"] = num(s.diameter);
  j["band_measure"] = num(s.band_measure);
  j["measure_is_bound"] = s.measure_is_bound;
  j["certificates"] = json::array();
  for (const auto& c : s.certificates) j["certificates"].push_back(to_json(c));
  j["evaluations"] = s.evaluations;
  j["failure"] = s.failure;
  return j;
}

StageRecord stage_from_json(const json& j) {
  StageRecord s;
  s.index = j.at("index").get<std::size_t>();
  s.eps = j.at("eps").get<double>();
  s.delta = num_from(j.at("delta"));
  s.tilde_delta = num_from(j.at("tilde_delta"));
  s.member_floor = num_from(j.at("member_floor"));
  s.probe_opened = j.at("probe_opened").get<bool>();
  s.probe_min_gap = num_from(j.at("probe_min_gap"));
  s.lambdas = j.at("lambdas").get<std::vector<double>>();
  const auto& e = j.at("enlarge");
  s.enlarge.eps = e.at("eps").get<double>();
  s.enlarge.tilde_p = e.at("tilde_p").get<std::size_t>();
  s.enlarge.n1 = e.at("n1").get<std::int64_t>();
  s.enlarge.n2 = e.at("n2").get<std::int64_t>();
  s.enlarge.j0 = e.at("j0").get<std::vector<std::int64_t>>();
  if (!j.at("concat").is_null()) {
    const auto& c = j.at("concat");
    ConcatRecord r;
    r.period = c.at("period").get<std::int64_t>();
    r.exponent = c.at("exponent").get<int>();
    r.r = c.at("r").get<std::int64_t>();
    r.d = c.at("d").get<std::int64_t>();
    r.m = c.at("m").get<std::size_t>();
    r.t = c.at("t").get<std::vector<std::vector<std::int64_t>>>();
    s.concat = std::move(r);
  }
  s.period = j.at("period").get<std::int64_t>();
  s.family_size = j.at("family_size").get<std::size_t>();
  s.diameter = num_from(j.at("diameter"));
  s.band_measure = num_from(j.at("band_measure"));
  s.measure_is_bound = j.at("measure_is_bound").get<bool>();
  for (const auto& c : j.at("certificates")) s.certificates.push_back(certificate_from_json(c));
  s.evaluations = j.at("evaluations").get<std::size_t>();
  s.failure = j.at("failure").get<std::string>();
  return s;
}

}  // namespace

json to_json(const ConstructionLedger& l) {
  json j;
  j["config"] = to_json(l.config);
  j["status"] = l.status;
  j["stages"] = json::array();
  for (const auto& s : l.stages) j["stages"].push_back(to_json(s));
  return j;
}

ConstructionLedger ledger_from_json(const json& j) {
  ConstructionLedger l;
  try {
    l.config = run_config_from_json(j.at("config"));
    l.status = j.at("status").get<std::string>();
    for (const auto& s : j.at("stages")) l.stages.push_back(stage_from_json(s));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed ledger: ") + e.what());
  }
  return l;
}

// ---- stage families ----

StageFamily::StageFamily(SamplerFamily explicit_family) : f_(std::move(explicit_family)) {
  std::get<SamplerFamily>(f_).check();
}

StageFamily::StageFamily(ConcatenatedFamily concat) : f_(std::move(concat)) {
  if (std::get<ConcatenatedFamily>(f_).t.empty()) throw DomainError("concatenated family needs a bump vector");
}

std::int64_t StageFamily::period() const {
  if (auto e = explicit_family()) return static_cast<std::int64_t>(e->period());
  return concatenation()->base.period();
}

std::size_t StageFamily::size() const {
  if (auto e = explicit_family()) return e->size();
  return concatenation()->t.size();
}

double StageFamily::exponent(double energy, double lambda) const {
  if (auto e = explicit_family()) return family_lyapunov(energy, lambda, e->members);
  return concatenation()->family_lyapunov(energy, lambda);
}

double StageFamily::distinguished_value(std::int64_t site) const {
  if (auto e = explicit_family()) return e->members.front()(site);
  const auto* c = concatenation();
  return c->base.value(site, c->t.front());
}

PeriodicSampler StageFamily::distinguished(std::int64_t limit) const {
  if (auto e = explicit_family()) return e->members.front();
  if (period() > limit) throw DomainError("period " + std::to_string(period()) + " exceeds materialization limit");
  const auto* c = concatenation();
  return c->base.materialize(c->t.front());
}

SamplerFamily StageFamily::materialize(std::int64_t limit) const {
  if (auto e = explicit_family()) return *e;
  if (period() > limit) throw DomainError("period " + std::to_string(period()) + " exceeds materialization limit");
  const auto* c = concatenation();
  SamplerFamily out;
  for (std::size_t k = 0; k < c->t.size(); ++k) {
    out.members.push_back(c->base.materialize(c->t[k]));
    out.labels.push_back("t" + std::to_string(k));
  }
  return out;
}

double StageFamily::diameter() const {
  if (auto e = explicit_family()) return e->diameter();
  return concatenation()->diameter();
}

std::vector<StageView> replay(const ConstructionLedger& l) {
  std::vector<StageView> out;
  const auto limit = l.config.search.max_materialized_period;
  StageFamily prev(SamplerFamily{{PeriodicSampler(l.config.base)}, {"f"}});
  for (const auto& s : l.stages) {
    if (s.enlarge.j0.empty()) break;
    if (prev.period() > limit) break;
    auto input = prev.materialize(limit);
    auto tilde = realize(s.enlarge, input);
    if (s.concat) {
      BlockConcatenation base(tilde.members, s.concat->period, s.concat->exponent);
      StageFamily fam(ConcatenatedFamily{std::move(base), s.concat->t});
      out.push_back({std::move(tilde), fam});
      prev = std::move(fam);
    } else {
      StageFamily fam(tilde);
      out.push_back({std::move(tilde), fam});
      prev = std::move(fam);
    }
  }
  return out;
}

// ---- iteration ----

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

struct Shape {
  std::vector<double> centered;
  std::size_t tilde_p;
  std::int64_t n1;
  std::int64_t j0;
  std::size_t band_count;
  double min_gap;
  bool opened;
};

std::vector<double> centered(const PeriodicSampler& f) {
  auto v = f.values();
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x -= mean;
  return out;
}

bool same_shape(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > 1e-12) return false;
  return true;
}

struct ProbeOutcome {
  std::vector<std::int64_t> j0;
  bool opened = true;
  std::size_t min_band_count = 0;
  double min_gap = INFINITY;
};

// Probes every input member, reusing results for members that differ by a constant.
class ProbeCache {
 public:
  ProbeCache(std::vector<double> lambdas, double tol, std::size_t cap, std::size_t& evaluations)
      : lambdas_(std::move(lambdas)), tol_(tol), cap_(cap), evaluations_(evaluations) {
    // Large couplings close gaps first; try them first so failures are cheap.
    std::sort(lambdas_.begin(), lambdas_.end(), std::greater<>());
  }

  ProbeOutcome run(const SamplerFamily& input, std::size_t tilde_p, std::int64_t n1) {
    ProbeOutcome out;
    out.min_band_count = tilde_p;
    for (const auto& f : input.members) {
      const Shape& s = lookup(f, tilde_p, n1);
      out.j0.push_back(s.j0);
      out.opened = out.opened && s.opened;
      out.min_band_count = std::min(out.min_band_count, s.band_count);
      out.min_gap = std::min(out.min_gap, s.min_gap);
    }
    return out;
  }

 private:
  const Shape& lookup(const PeriodicSampler& f, std::size_t tilde_p, std::int64_t n1) {
    auto c = centered(f);
    for (const auto& s : shapes_)
      if (s.tilde_p == tilde_p && s.n1 == n1 && same_shape(s.centered, c)) return s;
    Shape s{std::move(c), tilde_p, n1, 0, 0, 0, false};
    try {
      auto r = gap_opening_probe(f, tilde_p, n1, lambdas_, tol_, cap_);
      evaluations_ += r.reports.size();
      s.j0 = r.j0;
      s.band_count = tilde_p;
      s.min_gap = r.min_gap;
      s.opened = true;
    } catch (const ProbeFailure& e) {
      evaluations_ += e.reports.size();
      // Keep the candidate that came closest: most bands, then widest gap.
      const ProbeReport* best = &e.reports.front();
      for (const auto& r : e.reports)
        if (r.min_band_count > best->min_band_count ||
            (r.min_band_count == best->min_band_count && r.min_gap > best->min_gap))
          best = &r;
      s.j0 = best->j;
      s.band_count = best->min_band_count;
      s.min_gap = best->min_band_count == tilde_p ? best->min_gap : 0.0;
      s.opened = false;
    }
    shapes_.push_back(std::move(s));
    return shapes_.back();
  }

  std::vector<double> lambdas_;
  double tol_;
  std::size_t cap_;
  std::size_t& evaluations_;
  std::vector<Shape> shapes_;
};

double ball_radius(const SamplerFamily& fam, const PeriodicSampler& base) {
  double r = 0;
  for (const auto& f : fam.members) r = std::max(r, sup_distance(f, base));
  return r;
}

// Mean and max exponents of an explicit family, memoized on the last point asked.
struct ExplicitExponents {
  const SamplerFamily* fam;
  double e = NAN, lam = NAN;
  FamilyExponents last{0, 0};
  const FamilyExponents& at(double energy, double lambda) {
    if (energy != e || lambda != lam) {
      last = family_exponents(energy, lambda, fam->members);
      e = energy;
      lam = lambda;
    }
    return last;
  }
};

Certificate with_witness(Certificate c, double e, double lam) {
  c.witness_energy = e;
  c.witness_lambda = lam;
  return c;
}

struct EnlargeChoice {
  EnlargeRecipe recipe;
  SamplerFamily family;
  GridScan scan;
  ProbeOutcome probe;
  double ball = INFINITY;
  bool analytic = false, ok = false;
  bool evaluated = false;
};

bool better(const EnlargeChoice& a, const EnlargeChoice& b) {
  if (a.ok != b.ok) return a.ok;
  bool fa = a.evaluated && a.scan.floor > 0, fb = b.evaluated && b.scan.floor > 0;
  if (fa != fb) return fa;
  if (a.recipe.tilde_p != b.recipe.tilde_p) return a.recipe.tilde_p > b.recipe.tilde_p;
  return a.recipe.n2 > b.recipe.n2;
}

// log of the (1/3)(i-1)^{-p} threshold shared by items (v) and (vi).
double log_item_threshold(std::size_t i, double prev_tilde_p) {
  return std::log(1.0 / 3.0) - prev_tilde_p * std::log(static_cast<double>(i - 1));
}

void finish(StageRecord& rec) {
  for (const auto& c : rec.certificates)
    if (c.required && !c.passed) {
      rec.failure = c.name;
      return;
    }
}

}  // namespace

ConstructionLedger iterate(const RunConfig& config, std::size_t stage_count) {
  config.validate();
  if (stage_count == 0) throw DomainError("stage_count must be positive");
  ConstructionLedger ledger;
  ledger.config = config;
  ledger.config.stage_count = stage_count;
  ledger.status = "complete";

  const auto schedule = config.schedule();
  const auto& budget = config.search;
  const auto limit = budget.max_materialized_period;
  const PeriodicSampler base(config.base);

  StageFamily prev_out(SamplerFamily{{base}, {"f"}});
  double eps_prev = config.eps0, delta_prev = INFINITY;
  double prev_tilde_p = static_cast<double>(base.period());
  double prev_measure = band_spectrum(base.scaled(config.report_lambda), config.tol).total_measure();
  std::size_t used = 0;

  for (std::size_t i = 1; i <= stage_count; ++i) {
    StageRecord rec;
    rec.index = i;
    rec.eps = std::min(eps_prev, delta_prev) / 10.0;
    rec.lambdas = lambda_grid(rec.eps, config.grid.lambda_count);
    const std::size_t used_before = used;

    if (prev_out.period() > limit) {
      rec.certificates.push_back(Certificate::make("input_materializable", static_cast<double>(prev_out.period()),
                                                   "<=", static_cast<double>(limit)));
      finish(rec);
      ledger.stages.push_back(std::move(rec));
      ledger.status = "aborted";
      break;
    }
    const SamplerFamily input = prev_out.materialize(limit);
    const double ball_in = ball_radius(input, base);
    const std::int64_t p_in = static_cast<std::int64_t>(input.period());

    // ---- enlargement: search tilde_p, N1, N2 ----
    std::vector<std::size_t> periods;
    for (std::size_t level = 1; level <= schedule.depth(); ++level) {
      auto q = schedule.index(level);
      if (q % p_in == 0 && q > p_in && static_cast<std::size_t>(q) <= budget.max_probe_period)
        periods.push_back(static_cast<std::size_t>(q));
    }
    ProbeCache probes(rec.lambdas, config.tol, budget.max_probe_candidates, used);
    ExplicitExponents in_exp{&input};
    std::optional<EnlargeChoice> best;
    bool budget_hit = false;

    for (std::size_t pi = 0; pi < periods.size() && !budget_hit; ++pi) {
      const std::size_t tp = periods[pi];
      const bool last = pi + 1 == periods.size();
      const double range = kFourPi / (rec.eps * static_cast<double>(tp));
      ++used;
      if (ball_in + range >= config.eps0 && !last) continue;

      std::int64_t n1 = 2 * p_in + 1;
      auto probe = probes.run(input, tp, n1);
      auto bump_of = [&](const ProbeOutcome& p, std::int64_t n) {
        return static_cast<double>(*std::max_element(p.j0.begin(), p.j0.end())) / static_cast<double>(n);
      };
      // A smaller bump leaves room for the ball.
      for (int k = 0; k < 8 && probe.opened && ball_in + range + bump_of(probe, n1) >= config.eps0 &&
                      used < budget.max_evaluations;
           ++k) {
        auto next = probes.run(input, tp, 2 * n1);
        if (!next.opened) break;
        n1 *= 2;
        probe = std::move(next);
      }

      for (std::int64_t n2 = 1; n2 <= budget.max_n2 && input.size() * static_cast<std::size_t>(n2 + 1) <= budget.max_family_members;
           n2 *= 2) {
        if (used >= budget.max_evaluations) {
          budget_hit = true;
          break;
        }
        ++used;
        EnlargeChoice c;
        c.recipe = EnlargeRecipe{rec.eps, tp, n1, n2, probe.j0};
        c.probe = probe;
        c.analytic = c.recipe.shift_step() < 1.0 / 3.0;
        if (!c.analytic && !last) continue;
        c.family = realize(c.recipe, input);
        c.ball = ball_radius(c.family, base);
        c.analytic = c.analytic && c.ball < config.eps0;
        if (!c.analytic && !last) continue;

        ExplicitExponents out_exp{&c.family};
        ExponentFn out = [&](double e, double l) { return out_exp.at(e, l).mean; };
        ExponentFn mx = [&](double e, double l) { return out_exp.at(e, l).max; };
        ExponentFn in = [&](double e, double l) { return in_exp.at(e, l).mean; };
        c.scan = scan_grid(out, &in, &mx, rec.lambdas, c.family.sup_norm(), config.grid, 1.0 / rec.eps);
        c.evaluated = true;
        c.ok = c.analytic && probe.opened && c.scan.floor > 0 && (i == 1 || c.scan.closeness < rec.eps / 2);
        bool accept = c.ok;
        if (!best || better(c, *best)) best = std::move(c);
        if (accept) break;
      }
      if (best && best->ok) break;
    }

    if (!best || !best->evaluated) {
      rec.certificates.push_back(Certificate::make("search_budget", static_cast<double>(used), "<",
                                                   static_cast<double>(budget.max_evaluations)));
      rec.certificates.push_back(Certificate::make("enlarge_candidate_found", 0, ">", 0));
      rec.evaluations = used - used_before;
      finish(rec);
      ledger.stages.push_back(std::move(rec));
      ledger.status = "aborted";
      break;
    }

    EnlargeChoice& ch = *best;
    rec.enlarge = ch.recipe;
    rec.tilde_delta = ch.scan.floor;
    rec.member_floor = ch.scan.member_floor;
    rec.probe_opened = ch.probe.opened;
    rec.probe_min_gap = ch.probe.min_gap;
    const double tp = static_cast<double>(ch.recipe.tilde_p);
    const double step = ch.recipe.shift_step();

    auto& certs = rec.certificates;
    certs.push_back(Certificate::make("search_budget", static_cast<double>(used), "<=",
                                      static_cast<double>(budget.max_evaluations)));
    certs.push_back(Certificate::make("probe_gaps_open", static_cast<double>(ch.probe.min_band_count), ">=", tp));
    // N2 > 4 pi / (eps h p~) with h the certified minimal gap; the search uses the grid instead.
    certs.push_back(Certificate::make("n2_gap_bound", static_cast<double>(ch.recipe.n2), ">",
                                      ch.probe.min_gap > 0 ? kFourPi / (rec.eps * ch.probe.min_gap * tp) : INFINITY,
                                      false));
    certs.push_back(with_witness(Certificate::make("enlarged_floor", ch.scan.floor, ">", 0), ch.scan.floor_energy,
                                 ch.scan.floor_lambda));
    certs.push_back(with_witness(Certificate::make("enlarged_closeness", ch.scan.closeness, "<", rec.eps / 2, i > 1),
                                 ch.scan.close_energy, ch.scan.close_lambda));
    certs.push_back(Certificate::make("shift_step", step, "<", 1.0 / 3.0));

    const SamplerFamily& tilde = ch.family;
    const double tilde_ball = ball_radius(tilde, base);

    if (i == 1) {
      StageFamily out(tilde);
      rec.period = static_cast<std::int64_t>(tilde.period());
      rec.family_size = tilde.size();
      rec.diameter = tilde.diameter();
      rec.band_measure =
          band_spectrum(tilde.members.front().scaled(config.report_lambda), config.tol).total_measure();
      certs.push_back(with_witness(Certificate::make("stage_floor", ch.scan.floor, ">", 0), ch.scan.floor_energy,
                                   ch.scan.floor_lambda));
      certs.push_back(with_witness(Certificate::make("stage_closeness", ch.scan.closeness, "<", rec.eps, false),
                                   ch.scan.close_energy, ch.scan.close_lambda));
      certs.push_back(Certificate::make("global_ball", tilde_ball, "<", config.eps0));
      rec.delta = std::min(0.9 * ch.scan.floor, 0.9);
      prev_out = std::move(out);
    } else {
      // ---- concatenation: smallest schedule period meeting the analytic items ----
      const std::size_t m = tilde.size();
      const int n_eff = static_cast<int>(2 * i);
      const double ii = static_cast<double>(i);
      const double item_log = log_item_threshold(i, prev_tilde_p);
      struct Analytic {
        std::int64_t period = 0, r = 0;
        double log_diam = 0;
        bool ok = false;
      };
      auto analyse = [&](std::int64_t P) {
        Analytic a;
        a.period = P;
        a.r = P / (static_cast<std::int64_t>(m) * static_cast<std::int64_t>(tp));
        double lr = std::log(static_cast<double>(a.r)), lp = std::log(static_cast<double>(P));
        a.log_diam = -n_eff * lr + std::log(static_cast<double>(a.r - 1));
        a.ok = a.log_diam <= -lp && a.log_diam <= -ii * lp && -ii * lp <= std::log(rec.eps) && -ii * lp < item_log;
        return a;
      };
      std::optional<Analytic> pick, fallback;
      for (std::size_t level = 1; level <= schedule.depth(); ++level) {
        auto P = schedule.index(level);
        if (P % static_cast<std::int64_t>(tp) != 0) continue;
        if (P / (static_cast<std::int64_t>(m) * static_cast<std::int64_t>(tp)) < 3) continue;
        ++used;
        auto a = analyse(P);
        fallback = a;
        if (a.ok) {
          pick = a;
          break;
        }
      }
      if (!pick) pick = fallback;
      if (!pick) {
        certs.push_back(Certificate::make("concatenation_period_found", 0, ">", 0));
        rec.evaluations = used - used_before;
        finish(rec);
        ledger.stages.push_back(std::move(rec));
        ledger.status = "aborted";
        break;
      }
      const std::int64_t P = pick->period;
      const double lp = std::log(static_cast<double>(P));
      auto fam = concatenate_perturb(tilde, P, n_eff, budget.materialized_members, config.seed + i);
      const auto& bc = fam.base;
      rec.concat = ConcatRecord{P, n_eff, bc.r(), bc.d(), m, fam.t};

      certs.push_back(Certificate::make("log_diameter_desk", pick->log_diam, "<=", -lp));
      certs.push_back(Certificate::make("log_diameter_lemma", pick->log_diam, "<=", -0.5 * n_eff * lp));
      certs.push_back(Certificate::make("log_ball_iii", pick->log_diam, "<=", -ii * lp));
      certs.push_back(Certificate::make("log_nested_ball", -ii * lp, "<=", std::log(rec.eps)));
      certs.push_back(Certificate::make("log_item_v", -ii * lp, "<", item_log));
      certs.push_back(Certificate::make("log_item_vi", std::log(step), "<", item_log));
      const double decay = rec.member_floor > 0
                               ? std::log(kFourPi * static_cast<double>(P)) -
                                     rec.member_floor * static_cast<double>(bc.r() - 2) * tp
                               : std::log(kFourPi * static_cast<double>(P));
      certs.push_back(Certificate::make("log_measure_decay_iv", decay, "<=",
                                        -prev_tilde_p * std::sqrt(static_cast<double>(P))));

      // Measured spectrum size at the report coupling.
      if (P <= limit) {
        auto f = bc.materialize(fam.t.front());
        rec.band_measure = band_spectrum(f.scaled(config.report_lambda), config.tol).total_measure();
        rec.measure_is_bound = false;
      } else {
        auto grid = energy_grid_for(config.report_lambda, tilde.sup_norm(), config.grid);
        double log_c = INFINITY;
        double witness = 0;
        for (std::size_t k = 0; k < grid.count; ++k) {
          double e = grid.at(k);
          double g = bc.log_growth_at(e, config.report_lambda);
          if (g < log_c) log_c = g, witness = e;
        }
        log_c = std::max(0.0, log_c);
        rec.band_measure = std::exp(std::log(kFourPi * static_cast<double>(P)) - log_c);
        rec.measure_is_bound = true;
        Certificate c = Certificate::make("log_growth_c", log_c, ">", 0, false);
        c.witness_energy = witness;
        c.witness_lambda = config.report_lambda;
        certs.push_back(c);
      }
      certs.push_back(Certificate::make("measure_decrease", rec.band_measure, "<", prev_measure));

      StageFamily out(fam);
      ExponentFn outf = [&](double e, double l) { return out.exponent(e, l); };
      ExponentFn in = [&](double e, double l) { return in_exp.at(e, l).mean; };
      auto scan = scan_grid(outf, &in, nullptr, rec.lambdas, tilde.sup_norm(), config.grid, 1.0 / rec.eps);
      ++used;
      rec.period = P;
      rec.family_size = fam.t.size();
      rec.diameter = fam.diameter();
      certs.push_back(
          with_witness(Certificate::make("stage_floor", scan.floor, ">", 0), scan.floor_energy, scan.floor_lambda));
      certs.push_back(with_witness(Certificate::make("stage_closeness", scan.closeness, "<", rec.eps),
                                   scan.close_energy, scan.close_lambda));
      certs.push_back(Certificate::make("global_ball", tilde_ball + rec.diameter, "<", config.eps0));
      rec.delta = std::min(0.9 * scan.floor, 0.9);
      prev_out = std::move(out);
    }

    rec.evaluations = used - used_before;
    prev_measure = rec.band_measure;
    prev_tilde_p = tp;
    eps_prev = rec.eps;
    delta_prev = rec.delta;
    finish(rec);
    const bool abort = !(rec.delta > 0);
    ledger.stages.push_back(std::move(rec));
    if (abort) {
      ledger.status = "aborted";
      break;
    }
  }
  if (ledger.status == "complete" &&
      std::any_of(ledger.stages.begin(), ledger.stages.end(), [](const StageRecord& s) { return !s.passed(); }))
    ledger.status = "failed";
  return ledger;
}

}  // namespace lpso
