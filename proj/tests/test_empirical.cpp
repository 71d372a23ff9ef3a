#include <cmath>
#include <vector>

#include "doctest.h"
#include "valley/empirical.hpp"
#include "valley/error.hpp"

using namespace valley;

TEST_CASE("ingest timestamps with drop accounting") {
  const std::vector<double> ts = {0.0, 1.0, 1.0, 1.5, 100.0, 100.001, 102.0};
  IngestOptions opts;
  opts.gap_cutoff = 50.0;
  opts.min_duration = 0.01;
  const EventSeries s = ingest(ts, opts, "ticks");
  REQUIRE(s.size() == 3);
  CHECK(s.durations[0] == 1.0);
  CHECK(s.durations[1] == 0.5);
  CHECK(s.durations[2] == doctest::Approx(1.999).epsilon(1e-12));
  CHECK(s.meta.source == "ticks");
  CHECK(s.meta.dropped.at(kDropNonPositive) == 1);
  CHECK(s.meta.dropped.at(kDropSessionBreak) == 1);
  CHECK(s.meta.dropped.at(kDropBelowMin) == 1);
}

TEST_CASE("ingest errors") {
  const std::vector<double> bad = {0.0, 2.0, 1.0};
  try {
    ingest(bad, {});
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(e.index() == 2);
  }
  const std::vector<double> nan = {1.0, std::nan("")};
  CHECK_THROWS_AS(ingest(nan, {InputKind::Durations, {}, 0.0}), IngestError);
  CHECK_THROWS_AS(ingest(nan, {InputKind::Durations, 0.5, 1.0}), DomainError);
}

TEST_CASE("q grid") {
  const auto g = make_q_grid(-0.5, 0.5, 0.1);
  REQUIRE(g.size() == 11);
  CHECK(g[5] == 0.0);
  CHECK(g.back() == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_q_grid(-1.0, 1.0, 0.1), DomainError);
  CHECK_THROWS_AS(make_q_grid(0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("empirical q-moments") {
  EventSeries s;
  s.durations = {1.0, 2.0, 3.0};
  const std::vector<double> q = {0.0, 1.0, 2.0};
  const QMomentCurve c = empirical_qmoments(s, q);
  CHECK(c.log_norm_moment[0] == 0.0);
  CHECK(c.log_norm_moment[1] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(c.log_norm_moment[2] == doctest::Approx(std::log(14.0 / 6.0)).epsilon(1e-15));
  CHECK(c.n_samples == 3);
  REQUIRE(c.has_stderr());
  CHECK(c.stderr_log[0] == 0.0);
  CHECK(c.stderr_log[2] > c.stderr_log[1]);

  // Huge durations stay finite through the log-sum-exp.
  EventSeries big;
  big.durations = {1e300, 2e300};
  const std::vector<double> q3 = {3.0};
  const double v = empirical_qmoments(big, q3).log_norm_moment[0];
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(std::log((1.0 + 8.0) / 2.0 / 6.0) + 900 * std::log(10.0)));
}

TEST_CASE("empirical sojourn") {
  EventSeries s;
  s.durations = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> t = {0.0, 2.0, 10.0};
  CHECK(empirical_sojourn(s, t) == std::vector<double>{1.0, 0.5, 0.0});
  const std::vector<double> bad = {2.0, 1.0};
  CHECK_THROWS_AS(empirical_sojourn(s, bad), DomainError);
}

TEST_CASE("collapse diagnostics on exact curves") {
  const HMFParams p{1.8, 0.4, 1.2, 0.3};
  const auto grid = make_q_grid(0.0, 10.0, 0.5);
  const QMomentCurve c = hmf_curve(grid, p);
  for (const auto& pt : f_HMF(c, p)) {
    if (pt.q == 0.0) {
      CHECK_FALSE(pt.value.has_value());
      continue;
    }
    REQUIRE(pt.value.has_value());
    CHECK(*pt.value == doctest::Approx(1.0 - std::exp(-pt.abscissa)).epsilon(1e-12));
  }
  QMomentCurve mono;
  mono.q_grid = grid;
  for (double q : grid) mono.log_norm_moment.push_back(q * std::log(4.0));
  for (const auto& pt : f_F(mono, 4.0)) {
    if (pt.q != 0.0) CHECK(*pt.value == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto phi = phi_ratio(c, 2.0, 2.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(*phi[i].value == doctest::Approx(c.log_norm_moment[i]));
  }
  CHECK_THROWS_AS(f_F(c, 1.0), DomainError);
}

TEST_CASE("scale_q matches saturation variables") {
  const HMFParams mkt{1.7, 0.0, 1.0, 0.2}, ref{1.9, 0.0, 1.0, 0.33};
  for (double q : {0.5, 2.0, 7.0}) {
    const double qh = scale_q(q, mkt, ref);
    CHECK(mkt.b1 * std::pow(qh, 1 / (mkt.alpha - 1)) ==
          doctest::Approx(ref.b1 * std::pow(q, 1 / (ref.alpha - 1))).epsilon(1e-13));
  }
  CHECK(scale_q(3.0, ref, ref) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(scale_q(0.0, mkt, ref), DomainError);
}
