#ifndef CORROSCALE_KINETICS_HPP
#define CORROSCALE_KINETICS_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "corroscale/errors.hpp"

namespace corroscale {

/// Surface reaction factorization eta(alpha, beta) = k3 * R(alpha) * Q(beta):
/// R is the acid dependence (monotone, sublinear, R(s) = 0 for s <= 0), Q the
/// gypsum blocking factor (linear cutoff, Q = 0 once beta reaches beta_max).
struct RateLaw {
  enum class RKind { TruncatedLinear, Saturating };
  RKind r_kind = RKind::TruncatedLinear;
  double c_R = 1.0;
  double K_half = 1.0;  // Saturating only
  double beta_max = 1.0;

  bool operator==(const RateLaw&) const = default;
};

inline double eval_R(const RateLaw& law, double alpha) {
  const double s = std::max(alpha, 0.0);
  switch (law.r_kind) {
    case RateLaw::RKind::TruncatedLinear: return law.c_R * s;
    case RateLaw::RKind::Saturating: return law.c_R * s / (law.K_half + s);
  }
  return 0;
}

inline double eval_Q(const RateLaw& law, double beta) {
  return std::max(1.0 - beta / law.beta_max, 0.0);
}

inline double eval_eta(const RateLaw& law, double k3, double alpha, double beta) {
  return k3 * eval_R(law, alpha) * eval_Q(law, beta);
}

/// Lipschitz moduli of the two factors (used for explicit step-size bounds).
inline double lipschitz_R(const RateLaw& law) {
  switch (law.r_kind) {
    case RateLaw::RKind::TruncatedLinear: return law.c_R;
    case RateLaw::RKind::Saturating: return law.c_R / law.K_half;
  }
  return 0;
}
inline double lipschitz_Q(const RateLaw& law) { return 1.0 / law.beta_max; }

/// Backward Euler step of d beta / dt = k3 R(alpha) Q(beta) with the linear
/// cutoff Q. The implicit equation is linear as long as the cutoff stays
/// inactive and the closed form below also covers the capped regime: the
/// update is monotone in beta_n, nondecreasing, and never exceeds beta_max.
inline double gypsum_implicit_step(const RateLaw& law, double k3, double alpha, double beta_n,
                                   double dt) {
  const double kappa = k3 * eval_R(law, alpha);
  if (kappa <= 0.0) return beta_n;
  if (beta_n >= law.beta_max) return beta_n;
  return (beta_n + dt * kappa) / (1.0 + dt * kappa / law.beta_max);
}

/// Dissolution exchange between gaseous and aqueous phases. Returns the gain
/// of the aqueous species; the gaseous species loses the same amount.
struct HenryLaw {
  double a = 1.0;  // absorption, gas -> aqueous
  double b = 1.0;  // release, aqueous -> gas
  bool operator==(const HenryLaw&) const = default;
};

inline double henry_exchange(const HenryLaw& h, double u2, double u3) {
  return h.a * u3 - h.b * u2;
}

/// Invariant-region ceilings M_i for the five species, with the balance
/// equalities that make them time independent (u4's ceiling grows linearly):
///   a_inf M3 = b_inf M2,  k1_inf M1 = M4,  k1_min M1 = k2_inf M2.
/// With constant rates the sup/inf values coincide with the constants.
struct BoundsA4 {
  double M1 = 1, M2 = 1, M3 = 1, M4 = 1, M5 = 1;
  bool operator==(const BoundsA4&) const = default;
};

struct BalanceCheck {
  double defect_exchange = 0;  // |a M3 - b M2| relative
  double defect_moisture = 0;  // |k1 M1 - M4| relative
  double defect_interconv = 0; // |k1 M1 - k2 M2| relative
  bool ok(double tol = 1e-9) const {
    return defect_exchange <= tol && defect_moisture <= tol && defect_interconv <= tol;
  }
};

inline BalanceCheck check_balance(const BoundsA4& m, double k1, double k2, double a, double b) {
  auto rel = [](double x, double y) {
    return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
  };
  BalanceCheck c;
  c.defect_exchange = rel(a * m.M3, b * m.M2);
  c.defect_moisture = rel(k1 * m.M1, m.M4);
  c.defect_interconv = rel(k1 * m.M1, k2 * m.M2);
  return c;
}

inline void validate_rate_law(const RateLaw& law) {
  if (!(law.c_R > 0)) fail(ErrorCode::InvalidConfig, "rate law needs c_R > 0");
  if (!(law.beta_max > 0)) fail(ErrorCode::InvalidConfig, "rate law needs beta_max > 0");
  if (law.r_kind == RateLaw::RKind::Saturating && !(law.K_half > 0))
    fail(ErrorCode::InvalidConfig, "saturating rate law needs K_half > 0");
}

}  // namespace corroscale

#endif
