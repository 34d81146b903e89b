// acceptance gate: one line per criterion, each backed by a named subset of the
// verification suite at the default pinned tolerances; nonzero exit on any failure.

#include <iostream>

#include "flowlab/verify.hpp"

using namespace flowlab;

namespace {

struct Criterion {
  const char* title;
  std::vector<std::string> checks;
  double runtime_budget_s;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"exact shrinking-sphere reproduction", {"sphere-exact"}, 30.0},
      {"boundary evolution equations with time-order ladder",
       {"evolution-mcf-shrinking-sphere", "evolution-mcf-latitude-sphere",
        "evolution-mcf-warped-slice", "evolution-mcf-warped-slice-far",
        "evolution-modified-warped-slice"},
       300.0},
      {"first variation of the action, secant order 2",
       {"variation-dilaton-direction", "variation-conformal", "variation-mixed"}, 120.0},
      {"action time-derivative forms and monotonicity",
       {"di-monotonicity", "di-monotonicity-lott", "di-monotonicity-steady"}, 300.0},
      {"weighted-area monotonicity on soliton backgrounds",
       {"huisken-shrinker", "huisken-perturbed-sphere", "huisken-bowl-steady"}, 120.0},
      {"Harnack expression: translator vanishing and control",
       {"harnack-bowl", "harnack-sphere-control", "harnack-translator-identities"}, 60.0},
      {"Simons / Codazzi / Bianchi identities with refinement",
       {"identities-flat-sphere", "identities-curved", "identities-bianchi"}, 120.0},
      {"conjugate heat: mass conservation and exact profiles",
       {"conjugate-mass", "conjugate-kernel", "conjugate-soliton"}, 120.0},
      {"constant-dilaton and zero-potential reductions",
       {"action-reduction", "weighted-reduction"}, 60.0},
      {"entropy rate formulas, closed and with boundary",
       {"entropy-extended-closed", "entropy-ecker-ball"}, 120.0},
  };

  VerifyOptions opt;  // pinned defaults only
  bool all_ok = true;
  int idx = 0;
  for (const Criterion& c : criteria) {
    ++idx;
    bool ok = true;
    double runtime = 0;
    std::string why;
    std::vector<CheckReport> reps = run_checks(c.checks, opt);
    for (const CheckReport& r : reps) {
      runtime += r.runtime_s;
      if (!r.passed()) {
        ok = false;
        why += (why.empty() ? "" : ", ") + r.check_id;
      }
    }
    if (runtime > c.runtime_budget_s) {
      ok = false;
      why += (why.empty() ? "" : ", ") + std::string("runtime budget exceeded");
    }
    std::cout << "criterion " << idx << " [" << c.title << "]: " << (ok ? "PASS" : "FAIL");
    if (!ok) std::cout << " (" << why << ")";
    std::cout << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
