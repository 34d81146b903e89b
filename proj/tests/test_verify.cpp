#include <catch2/catch_amalgamated.hpp>

#include "flowlab/verify.hpp"

using namespace flowlab;

TEST_CASE("report helpers track verdicts") {
  CheckReport r;
  r.check_id = "demo";
  require_below(r, "a", 1e-5, 1e-4);
  CHECK(r.verdict == "pass");
  warn_if_above(r, "b", 2e-3, 1e-3);
  CHECK(r.verdict == "warn");
  require_below(r, "c", 1.0, 1e-4);
  CHECK(r.verdict == "fail");
  CHECK(r.residual_sup == 1.0);

  CheckReport r2;
  require_below(r2, "nan", std::numeric_limits<double>::quiet_NaN(), 1.0);
  CHECK(r2.verdict == "fail");
  CheckReport r3;
  require_above(r3, "ord", 1.9, 1.8);
  CHECK(r3.verdict == "pass");
}

TEST_CASE("tolerance table and overrides") {
  VerifyOptions opt;
  CHECK(opt.tol("sphere-exact.rel_err") == 1e-4);
  opt.overrides["sphere-exact.rel_err"] = 5e-4;
  CHECK(opt.tol("sphere-exact.rel_err") == 5e-4);
  CHECK_THROWS_AS(opt.tol("no-such-key"), Error);
  CHECK(opt.knob("resolution.N", 96.0) == 96.0);
}

TEST_CASE("derivative arrays match smooth data") {
  int n = 41;
  double h = 1.0 / (n - 1);
  Vec u(n);
  for (int i = 0; i < n; ++i) u[i] = std::sin(2.0 * (i * h));
  Vec d1 = fd_derivative_array(u, h, 1, false);
  Vec d2 = fd_derivative_array(u, h, 2, false);
  for (int i : {0, 1, 10, n - 2, n - 1}) {
    CHECK(std::abs(d1[i] - 2.0 * std::cos(2.0 * (i * h))) < 1e-5);
    CHECK(std::abs(d2[i] + 4.0 * std::sin(2.0 * (i * h))) < 1e-3);
  }
}

TEST_CASE("ladder order recovers the slope") {
  CHECK(std::abs(ladder_order({1e-2, 2.5e-3, 6.25e-4}) - 2.0) < 1e-12);
}

TEST_CASE("registry covers the advertised checks") {
  const auto& defs = check_registry();
  CHECK(defs.size() >= 25);
  std::vector<std::string> ids;
  for (const auto& d : defs) ids.push_back(d.id);
  for (const char* want : {"sphere-exact", "di-monotonicity", "huisken-shrinker",
                           "harnack-bowl", "identities-curved", "entropy-ecker-ball",
                           "general-moving-boundary"})
    CHECK(std::find(ids.begin(), ids.end(), want) != ids.end());
  CHECK_THROWS_AS(run_checks({"no-such-check"}, VerifyOptions{}), Error);
}

TEST_CASE("fast checks pass") {
  VerifyOptions opt;
  for (const char* id : {"identities-flat-sphere", "identities-bianchi",
                         "weighted-reduction", "action-reduction",
                         "harnack-sphere-control", "conjugate-soliton"}) {
    auto reps = run_checks({id}, opt);
    REQUIRE(reps.size() == 1);
    INFO(reps[0].check_id << ": " << reps[0].note);
    for (const auto& [k, v] : reps[0].details) INFO("  " << k << " = " << v);
    CHECK(reps[0].passed());
    CHECK(reps[0].verdict != "warn");
  }
}

TEST_CASE("not-checked marker is reported, not hidden") {
  auto reps = run_checks({"general-moving-boundary"}, VerifyOptions{});
  REQUIRE(reps.size() == 1);
  CHECK(reps[0].verdict == "not-checked");
  CHECK(!reps[0].note.empty());
}
