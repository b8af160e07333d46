#ifndef CORROSCALE_ASSUMPTIONS_HPP
#define CORROSCALE_ASSUMPTIONS_HPP

#include <string>
#include <vector>

#include "corroscale/config.hpp"

namespace corroscale {

/// Structural model assumptions, checked numerically where they are not
/// plain parameter constraints:
///   A1 diffusion tensors symmetric positive definite
///   A2 surface rate factorization (R monotone sublinear with R(0) = 0,
///      Q a linear cutoff)
///   A3 nonnegative bounded initial data
///   A4 invariant-region balance equalities for the ceilings M_i
///   A5 nonnegative exchange and bulk rates
///   A6 admissible gas boundary data
///   A7 surface rate coefficient nonnegative and bounded
enum class AssumptionStatus { Pass, Warn, Fail };

struct AssumptionEntry {
  std::string id;
  AssumptionStatus status = AssumptionStatus::Pass;
  std::string note;
};

struct AssumptionReport {
  std::vector<AssumptionEntry> entries;
  bool any_fail = false;
  bool any_warn = false;

  void add(const std::string& id, AssumptionStatus st, const std::string& note) {
    entries.push_back({id, st, note});
    if (st == AssumptionStatus::Fail) any_fail = true;
    if (st == AssumptionStatus::Warn) any_warn = true;
  }
};

/// Checks (A1)-(A7) against a parsed config. In strict mode the balance
/// equalities of A4 are a hard failure; otherwise they only warn.
inline AssumptionReport validate_assumptions(const RunConfig& c, bool strict) {
  AssumptionReport rep;

  bool a1 = true;
  std::string a1_note = "all diffusion tensors symmetric positive definite";
  for (int i = 0; i < 4; ++i)
    if (!is_spd(c.diffusion.d[i].tensor)) {
      a1 = false;
      a1_note = "d" + std::to_string(i + 1) + " is not symmetric positive definite";
      break;
    }
  rep.add("A1", a1 ? AssumptionStatus::Pass : AssumptionStatus::Fail, a1_note);

  {
    const RateLaw& law = c.kinetics.law;
    bool ok = law.c_R > 0 && law.beta_max > 0 &&
              (law.r_kind != RateLaw::RKind::Saturating || law.K_half > 0);
    // Sampled structure checks: R(0) = 0, monotone, sublinear; Q clamps.
    if (ok) {
      ok = eval_R(law, 0.0) == 0.0 && eval_R(law, -1.0) == 0.0;
      double prev = 0.0;
      for (int k = 1; k <= 64 && ok; ++k) {
        const double s = 0.25 * k;
        const double v = eval_R(law, s);
        ok = v >= prev && v <= law.c_R * (1.0 + s) + 1e-12;
        prev = v;
      }
      ok = ok && eval_Q(law, 0.0) == 1.0 && eval_Q(law, law.beta_max) == 0.0 &&
           eval_Q(law, 2.0 * law.beta_max) == 0.0;
    }
    rep.add("A2", ok ? AssumptionStatus::Pass : AssumptionStatus::Fail,
            ok ? "surface rate factorization well formed" : "rate law structure violated");
  }

  {
    bool ok = true;
    for (int i = 0; i < 5; ++i) ok = ok && c.macro.u_init[i] >= 0;
    rep.add("A3", ok ? AssumptionStatus::Pass : AssumptionStatus::Fail,
            ok ? "initial data nonnegative and bounded" : "negative initial data");
  }

  {
    const BalanceCheck bal = check_balance(c.kinetics.bounds, c.kinetics.k1, c.kinetics.k2,
                                           c.kinetics.henry.a, c.kinetics.henry.b);
    if (bal.ok(1e-9)) {
      rep.add("A4", AssumptionStatus::Pass, "ceiling balance equalities hold");
    } else {
      const std::string note = "balance defects: exchange=" + format_g17(bal.defect_exchange) +
                               " moisture=" + format_g17(bal.defect_moisture) +
                               " interconversion=" + format_g17(bal.defect_interconv);
      rep.add("A4", strict ? AssumptionStatus::Fail : AssumptionStatus::Warn, note);
    }
  }

  {
    const bool ok = c.kinetics.henry.a >= 0 && c.kinetics.henry.b >= 0 && c.kinetics.k1 >= 0 &&
                    c.kinetics.k2 >= 0;
    rep.add("A5", ok ? AssumptionStatus::Pass : AssumptionStatus::Fail,
            ok ? "exchange and bulk rates nonnegative" : "negative rate constant");
  }

  {
    bool ok = c.macro.u3_dirichlet >= 0;
    for (double v : c.macro.u3_dirichlet_values) ok = ok && v >= 0;
    for (std::size_t k = 1; k < c.macro.u3_dirichlet_times.size(); ++k)
      ok = ok && c.macro.u3_dirichlet_times[k] > c.macro.u3_dirichlet_times[k - 1];
    bool any_dirichlet = false;
    for (auto b : c.macro.bc) any_dirichlet = any_dirichlet || b == BcKind::DirichletU3;
    rep.add("A6", ok ? AssumptionStatus::Pass : AssumptionStatus::Fail,
            ok ? (any_dirichlet ? "gas boundary data admissible"
                                : "no gas Dirichlet boundary in use")
               : "gas boundary data inadmissible");
  }

  {
    const bool ok = c.kinetics.k3 >= 0 && std::isfinite(c.kinetics.k3);
    rep.add("A7", ok ? AssumptionStatus::Pass : AssumptionStatus::Fail,
            ok ? "surface rate coefficient nonnegative and bounded" : "bad k3");
  }
  return rep;
}

inline std::string format_report(const AssumptionReport& rep) {
  std::string s;
  for (const auto& e : rep.entries) {
    const char* st = e.status == AssumptionStatus::Pass   ? "pass"
                     : e.status == AssumptionStatus::Warn ? "warn"
                                                          : "FAIL";
    s += e.id + "  " + st + "  " + e.note + "\n";
  }
  return s;
}

}  // namespace corroscale

#endif
