#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "lpso/construction.hpp"
#include "lpso/error.hpp"
#include "lpso/ledger.hpp"

using namespace lpso;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.grid.energy_per_unit = 20;
  c.grid.min_energy_points = 101;
  c.grid.max_energy_points = 201;
  c.grid.lambda_count = 3;
  c.search.max_probe_period = 256;
  c.stage_count = 1;
  return c;
}

}  // namespace

TEST_CASE("lambda grid is log-uniform inside the window") {
  auto l = lambda_grid(0.1, 5);
  REQUIRE(l.size() == 5);
  for (double x : l) CHECK((x > 0.1 && x < 10));
  CHECK_THAT(l[2], WithinAbs(1.0, 1e-15));
  CHECK_THAT(l[0] * l[4], WithinRel(1.0, 1e-14));
  CHECK_THAT(l[1] / l[0], WithinRel(l[4] / l[3], 1e-12));
  CHECK_THROWS_AS(lambda_grid(1.0, 5), DomainError);
}

TEST_CASE("certificates re-check their relation") {
  auto c = Certificate::make("x", 1.0, "<", 2.0);
  CHECK(c.passed);
  CHECK(c.recheck());
  CHECK_FALSE(Certificate::make("x", NAN, "<", 2.0).passed);
  CHECK_FALSE(Certificate::make("x", 2.0, ">", 2.0).passed);
  CHECK(Certificate::make("x", 2.0, ">=", 2.0).passed);
  CHECK_THROWS_AS(Certificate::make("x", 1, "~", 1), DomainError);
}

TEST_CASE("gap-opening probe on the free sampler") {
  PeriodicSampler zero;
  auto cand = probe_candidate(zero, 2, 3, 1);
  CHECK(cand == PeriodicSampler({0.0, 1.0 / 3}));
  // D(E) = E(E - b) - 2 at bump b: bands split at the roots of E(E - b) = 0.
  auto s = band_spectrum(cand);
  REQUIRE(s.bands.size() == 2);
  CHECK_THAT(s.bands[0].right, WithinAbs(0, 1e-10));
  CHECK_THAT(s.bands[1].left, WithinAbs(1.0 / 3, 1e-10));
  CHECK(band_spectrum(probe_candidate(zero, 2, 3, 0)).bands.size() == 1);

  std::vector<double> lambdas{0.5, 1.0, 2.0};
  auto r = gap_opening_probe(zero, 2, 3, lambdas);
  CHECK(r.opened);
  CHECK(r.j0 == 1);
  CHECK(r.min_gap > 0);
  int differing = 0;
  for (std::int64_t k = 0; k < 2; ++k) differing += r.sampler(k) != zero(k);
  CHECK(differing == 1);

  auto wide = gap_opening_probe(zero, 8, 3, lambdas);
  CHECK(wide.opened);
  CHECK_THROWS_AS(gap_opening_probe(zero, 8, 2, lambdas), DomainError);
  CHECK_THROWS_AS(gap_opening_probe(PeriodicSampler({1.0, 2.0}), 3, 5, lambdas), DomainError);
}

TEST_CASE("probe failure carries per-candidate reports") {
  // A constant sampler promoted to period 2 with coupling zero keeps one band.
  std::vector<double> lambdas{0.0};
  try {
    gap_opening_probe(PeriodicSampler{}, 2, 3, lambdas);
    FAIL("probe should fail");
  } catch (const ProbeFailure& e) {
    REQUIRE(e.reports.size() == 3);
    for (const auto& r : e.reports) CHECK(r.min_band_count == 1);
  }
}

TEST_CASE("enlargement by constant shifts") {
  SamplerFamily in{{PeriodicSampler{}, PeriodicSampler::constant(0.25)}, {"a", "b"}};
  EnlargeRecipe rec{0.5, 4, 3, 5, {1, 2}};
  auto out = realize(rec, in);
  CHECK(out.size() == in.size() * 6);
  CHECK(out.labels.front() == "(1,0)");
  CHECK(out.labels.back() == "(1,1)");
  double step = 4 * std::numbers::pi / (0.5 * 4 * 5);
  CHECK_THAT(rec.shift_step(), WithinRel(step, 1e-15));
  CHECK_THAT(sup_distance(out.members.back(), out.members.front()), WithinRel(step, 1e-12));
  for (std::size_t k = 0; k < out.size(); ++k) {
    // every member is a probe output plus a constant
    const auto& f = out.members[k];
    std::size_t src = k < 5 || k == out.size() - 1 ? 0 : 1;
    auto base = probe_candidate(in.members[src], 4, 3, rec.j0[src]);
    double c = f(0) - base(0);
    for (std::int64_t s = 0; s < 4; ++s) CHECK_THAT(f(s) - base(s), WithinAbs(c, 1e-12));
  }
  CHECK_THROWS_AS(realize(EnlargeRecipe{0.5, 4, 3, 5, {1}}, in), DomainError);
}

TEST_CASE("family scan on identical families") {
  SamplerFamily f{{PeriodicSampler({0.0, 1.0})}, {"f"}};
  ExponentFn a = [&](double e, double l) { return family_lyapunov(e, l, f.members); };
  std::vector<double> lambdas{0.5, 2.0};
  GridSpec g{20, 51, 101, 2};
  auto s = scan_grid(a, &a, &a, lambdas, 1.0, g, 100);
  CHECK(s.closeness == 0);
  CHECK(s.points == 2 * 101);
  CHECK(s.floor >= 0);
  CHECK(s.member_floor == s.floor);
  auto fe = family_exponents(3, 1, f.members);
  CHECK(fe.mean == fe.max);
}

TEST_CASE("block concatenation arithmetic") {
  std::vector<PeriodicSampler> blocks{PeriodicSampler({1.0, 2.0}), PeriodicSampler({-1.0, 0.5}),
                                      PeriodicSampler({0.0, 3.0})};
  // P = m p~ r + d with m = 3, p~ = 2, r = 2, d = 4: two extended segments.
  BlockConcatenation bc(blocks, 16, 2);
  CHECK(bc.r() == 2);
  CHECK(bc.d() == 4);
  CHECK(bc.segment_length(0) == 3);
  CHECK(bc.segment_length(1) == 3);
  CHECK(bc.segment_length(2) == 2);
  CHECK(bc.segment_start(2) == 6);
  CHECK(bc.bump_block(0) == 2);
  CHECK(bc.bump_block(1) == 5);
  CHECK(bc.bump_block(2) == 6);
  CHECK(bc.bump_unit() == 0.25);

  std::vector<std::int64_t> zero{0, 0, 0}, t{1, 0, 1};
  CHECK(bc.value(0, zero) == 1.0);
  CHECK(bc.value(10, zero) == -1.0);
  CHECK(bc.value(12, t) == 0.25);  // block 6 carries t_3
  CHECK(bc.value(4, t) == 1.25);   // block 2 carries t_1
  CHECK(bc.value(-1, zero) == bc.value(15, zero));

  auto f = bc.materialize(t);
  for (double e : {-3.0, 0.1, 2.5})
    CHECK_THAT(bc.lyapunov(e, 1.3, t), WithinAbs(lyapunov_periodic(e, f, 1.3), 1e-12));
  std::vector<std::vector<std::int64_t>> ts{zero, t};
  double mean = (bc.lyapunov(0.7, 2, zero) + bc.lyapunov(0.7, 2, t)) / 2;
  CHECK_THAT(bc.mean_lyapunov(0.7, 2, ts), WithinAbs(mean, 1e-13));

  CHECK_THROWS_AS(BlockConcatenation(blocks, 10, 2), DomainError);  // r = 1
  CHECK_THROWS_AS(BlockConcatenation(blocks, 17, 2), DomainError);  // not a multiple of p~
}

TEST_CASE("single block concatenation") {
  BlockConcatenation bc({PeriodicSampler({1.0, 2.0})}, 8, 2);
  CHECK(bc.r() == 4);
  CHECK(bc.d() == 0);
  CHECK(bc.bump_block(0) == 2);
  std::vector<std::int64_t> t{3};
  auto f = bc.materialize(t);
  CHECK(f == PeriodicSampler({1.0, 2.0, 1.0, 2.0, 1.1875, 2.1875, 1.0, 2.0}));
  auto g = bc.materialize(std::vector<std::int64_t>{0});
  CHECK(g == PeriodicSampler({1.0, 2.0}).promoted(8));
  CHECK_THAT(log_spectral_radius(bc.monodromy(5, 1, t)) / 8, WithinAbs(lyapunov_periodic(5, f), 1e-13));
  // log ||M^{r-2}|| at a segment start
  auto m = scaled_transfer_product(5, PeriodicSampler({1.0, 2.0}), 2);
  CHECK_THAT(bc.log_growth_at(5, 1), WithinAbs(scaled_power(m, 2).log_norm(), 1e-13));
}

TEST_CASE("bump vectors and family diameter") {
  auto a = bump_vectors(4, 5, 4, 9), b = bump_vectors(4, 5, 4, 9);
  CHECK(a == b);
  CHECK(a[0] == std::vector<std::int64_t>(4, 0));
  CHECK(a[1] == std::vector<std::int64_t>(4, 4));
  for (const auto& t : a)
    for (auto x : t) CHECK((x >= 0 && x < 5));

  SamplerFamily tilde{{PeriodicSampler({1.0, 2.0}), PeriodicSampler({0.0, 0.5})}, {"a", "b"}};
  auto fam = concatenate_perturb(tilde, 24, 2, 3, 1);
  CHECK(fam.base.r() == 6);
  // r^{-N} (r - 1)
  CHECK_THAT(fam.diameter(), WithinRel(5.0 / 36, 1e-15));
  double measured = 0;
  for (std::size_t x = 0; x < fam.t.size(); ++x)
    for (std::size_t y = x + 1; y < fam.t.size(); ++y)
      measured = std::max(measured, sup_distance(fam.base.materialize(fam.t[x]), fam.base.materialize(fam.t[y])));
  CHECK_THAT(measured, WithinAbs(fam.diameter(), 1e-15));
}

TEST_CASE("bumps below double resolution are detected") {
  BlockConcatenation bc({PeriodicSampler({1e6, 2.0})}, std::int64_t{1} << 40, 4);
  CHECK_FALSE(bc.bump_visible(0, 1));
  std::vector<std::int64_t> t{bc.r() - 1};
  CHECK(bc.lyapunov(3, 1, t) == bc.lyapunov(3, 1, std::vector<std::int64_t>{0}));
}

TEST_CASE("first stage from the free sampler") {
  auto cfg = small_config();
  auto l = iterate(cfg, 1);
  REQUIRE(l.stages.size() == 1);
  const auto& s = l.stages[0];
  CHECK(s.eps == 0.1);
  CHECK(s.probe_opened);
  for (const char* name : {"probe_gaps_open", "enlarged_floor", "shift_step", "stage_floor", "global_ball"}) {
    INFO(name);
    REQUIRE(s.find(name));
    CHECK(s.find(name)->passed);
  }
  CHECK(s.delta > 0);
  CHECK(s.delta < 1);
  auto views = replay(l);
  REQUIRE(views.size() == 1);
  const auto& fam = *views[0].output.explicit_family();
  CHECK(fam.size() == s.family_size);
  CHECK(fam.size() == s.enlarge.n2 + 1);
  for (const auto& f : fam.members) CHECK(f.sup_norm() < cfg.eps0);
  CHECK_THAT(sup_distance(fam.members.back(), fam.members.front()), WithinRel(s.enlarge.shift_step(), 1e-12));

  // Stored certificates re-check from stored numbers; the floor reproduces.
  for (const auto& c : s.certificates) CHECK(c.recheck() == c.passed);
  const auto* floor = s.find("stage_floor");
  double again = views[0].output.exponent(*floor->witness_energy, *floor->witness_lambda);
  CHECK_THAT(again, WithinAbs(floor->value, 1e-9));
}

TEST_CASE("ledger JSON round-trip") {
  auto l = iterate(small_config(), 1);
  auto j = to_json(l);
  auto back = ledger_from_json(j);
  CHECK(dump(to_json(back)) == dump(j));
  CHECK_THROWS_AS(ledger_from_json(json::parse(R"({"config":{}})")), ParseError);
}

TEST_CASE("config parsing") {
  auto c = run_config_from_json(json::parse(R"({"eps0": 0.5, "grid": {"lambda_count": 3}, "seed": 4})"));
  CHECK(c.eps0 == 0.5);
  CHECK(c.grid.lambda_count == 3);
  CHECK(c.seed == 4);
  CHECK(c.schedule().index(1) == 2);
  CHECK(dump(to_json(run_config_from_json(to_json(c)))) == dump(to_json(c)));
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"eps": 1})")), ParseError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"eps0": -1})")), ParseError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"base": []})")), ParseError);
}
