#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rover/power.hpp"
#include "support.hpp"

using namespace rover;
using rover::testing::close_rel;

namespace {

PowerParams bare() {
  PowerParams p;
  p.C0 = p.C1 = p.C2 = 0.0;
  return p;
}

MotionState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> speed(0.05, 2.0), ang(-3.1, 3.1), acc(-1.0, 1.0),
      terrain(-0.6, 0.6), rate(-1.0, 1.0), tilt(0.0, 0.6);
  MotionState s;
  const double v = speed(rng), dir = ang(rng);
  s.vx_G = v * std::cos(dir);
  s.vy_G = v * std::sin(dir);
  s.ax_G = acc(rng);
  s.ay_G = acc(rng);
  s.psi_G = ang(rng);
  s.omega_G = rate(rng);
  s.domega_G = rate(rng);
  s.phi = terrain(rng);
  s.xi = tilt(rng);
  return s;
}

// Writable pointer to the i-th argument of P_lin (0..5) or P_rot (6..8).
double& field(MotionState& s, int i) {
  double* f[] = {&s.vx_G, &s.vy_G, &s.ax_G, &s.ay_G, &s.psi_G, &s.phi, &s.omega_G, &s.domega_G, &s.xi};
  return *f[i];
}

PowerBreakdown breakdown_from(double P_lin, double P_rot, double P_res, const PowerParams& p, TauMode mode) {
  PowerBreakdown b;
  b.P_lin = P_lin;
  b.P_rot = P_rot;
  b.P_res = P_res;
  b.P_base = p.P_base;
  b.P_cons = P_lin + P_rot + P_res + p.P_base;
  b.S = std::hypot(P_lin, P_rot);
  b.tau = mode == TauMode::kHeadroom ? p.cap() - p.P_base - P_res : p.cap() - b.P_cons;
  return b;
}

}  // namespace

TEST(MotionPower, RestState) {
  const PowerParams p;
  const PowerBreakdown b = motion_power(MotionState{}, p);
  EXPECT_EQ(b.P_lin, 0.0);
  EXPECT_EQ(b.P_rot, 0.0);
  EXPECT_EQ(b.P_res, 0.0);
  EXPECT_EQ(b.P_cons, p.P_base);
  EXPECT_EQ(b.P_avail, 200.0);
}

TEST(MotionPower, HandEvaluations) {
  PowerParams p = bare();
  MotionState s;
  s.vx_G = 0.5;
  s.ax_G = 0.2;
  EXPECT_NEAR(motion_power(s, p).P_lin, 15.0, 1e-12);

  MotionState climb;
  climb.vx_G = 0.5;
  climb.phi = std::asin(0.1);
  EXPECT_NEAR(motion_power(climb, p).P_lin, 150.0 * 0.162 * 0.5 / std::cos(climb.phi), 1e-12);
  EXPECT_NEAR(motion_power(climb, p).P_lin, 12.21, 5e-3);

  PowerParams q = bare();
  q.I_z = 30.0;
  MotionState turn;
  turn.domega_G = 0.1;
  turn.omega_G = 0.2;
  EXPECT_NEAR(motion_power(turn, q).P_rot, 0.6, 1e-12);

  PowerParams r = bare();
  r.C0 = 5.0;
  r.C1 = 2.0;
  EXPECT_NEAR(resistive_power(0.5, r), 3.0, 1e-12);
  MotionState cruise;
  cruise.vx_G = 0.5;
  EXPECT_NEAR(motion_power(cruise, r).P_res, 3.0, 1e-12);
}

TEST(MotionPower, DecompositionIsExact) {
  std::mt19937_64 rng(2);
  const PowerParams p;
  for (int i = 0; i < 1000; ++i) {
    const PowerBreakdown b = motion_power(random_state(rng), p);
    EXPECT_NEAR(b.P_cons - b.P_base, b.P_lin + b.P_rot + b.P_res, 1e-12 * (1.0 + std::abs(b.P_cons)));
    EXPECT_EQ(b.P_cons, b.P_lin + b.P_rot + b.P_res + b.P_base);
    EXPECT_EQ(b.S, std::hypot(b.P_lin, b.P_rot));
  }
}

TEST(MotionPower, ResistanceFollowsForwardMotion) {
  const PowerParams p;
  for (double v : {0.0, 0.1, 0.7, 2.0}) EXPECT_GE(resistive_power(v, p), 0.0);
  EXPECT_LT(resistive_power(-0.3, p), 0.0);
}

TEST(MotionPower, FlatTerrainReduction) {
  std::mt19937_64 rng(4);
  const PowerParams p;
  for (int i = 0; i < 500; ++i) {
    MotionState s = random_state(rng);
    s.phi = s.xi = 0.0;
    const double v = std::hypot(s.vx_G, s.vy_G);
    const double a = s.ax_G * std::cos(s.psi_G) + s.ay_G * std::sin(s.psi_G);
    const PowerBreakdown b = motion_power(s, p);
    EXPECT_NEAR(b.P_lin, p.m * a * v, 1e-12 * (1 + std::abs(b.P_lin)));
    EXPECT_NEAR(b.P_rot, p.I_z * s.domega_G * s.omega_G, 1e-12 * (1 + std::abs(b.P_rot)));
  }
}

TEST(MotionPower, LinearInMassAndInertia) {
  std::mt19937_64 rng(6);
  PowerParams p;
  PowerParams q = p;
  q.m *= 2.0;
  q.I_z *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const MotionState s = random_state(rng);
    EXPECT_NEAR(motion_power(s, q).P_lin, 2.0 * motion_power(s, p).P_lin, 1e-9);
    EXPECT_NEAR(motion_power(s, q).P_rot, 2.0 * motion_power(s, p).P_rot, 1e-9);
  }
}

TEST(MotionPowerGradient, Examples) {
  const PowerParams p;
  MotionState s;
  s.vx_G = 0.5;
  s.domega_G = 0.3;
  s.xi = 0.2;
  const PowerGradient g = motion_power_gradient(s, p);
  EXPECT_EQ(g.d_P_rot(1), 0.0);
  EXPECT_EQ(g.d_P_rot(2), 0.0);
  EXPECT_NEAR(g.d_P_lin(5), p.m * 0.5 * p.g, 1e-12);
}

TEST(MotionPowerGradient, DegenerateSpeedRejected) {
  MotionState s;
  s.vx_G = 1e-8;
  EXPECT_THROW(motion_power_gradient(s, PowerParams{}), DegenerateStateError);
}

TEST(MotionPowerGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(1234);
  const PowerParams p;
  const double h = 1e-6;
  for (int trial = 0; trial < 1000; ++trial) {
    const MotionState s = random_state(rng);
    const PowerGradient g = motion_power_gradient(s, p);
    for (int i = 0; i < 9; ++i) {
      MotionState plus = s, minus = s;
      field(plus, i) += h;
      field(minus, i) -= h;
      const bool lin = i < 6;
      const double fp = lin ? motion_power(plus, p).P_lin : motion_power(plus, p).P_rot;
      const double fm = lin ? motion_power(minus, p).P_lin : motion_power(minus, p).P_rot;
      const double fd = (fp - fm) / (2 * h);
      const double an = lin ? g.d_P_lin(i) : g.d_P_rot(i - 6);
      EXPECT_TRUE(close_rel(an, fd, 1e-4, std::abs(an) < 1e-6 ? 1e-8 : 0.0))
          << "entry " << i << ": " << an << " vs " << fd;
    }
  }
}

TEST(ResistivePowerGradient, Values) {
  PowerParams p;
  p.C0 = 5.0;
  p.C1 = 2.0;
  p.C2 = 1.0;
  EXPECT_EQ(resistive_power_gradient(0.0, p), 5.0);
  EXPECT_NEAR(resistive_power_gradient(0.5, p), 7.75, 1e-12);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    double x = v(rng);
    if (std::abs(x) < 1e-3) x = 0.5;
    const double h = 1e-6;
    const double fd = (resistive_power(x + h, p) - resistive_power(x - h, p)) / (2 * h);
    EXPECT_TRUE(close_rel(resistive_power_gradient(x, p), fd, 1e-6, 0.0));
  }
}

TEST(PowerPenalty, DeepFeasibleIsNegligible) {
  PowerParams p;
  PowerBreakdown b;
  b.S = 0.0;
  b.tau = 50.0 / p.kappa + 1.0;
  const PenaltyResult r = power_penalty(b, p);
  const double bound = p.omega_E * std::pow(std::exp(p.kappa * r.z) / p.kappa, 2);
  EXPECT_LE(r.J_P, bound * (1 + 1e-9));
  EXPECT_LT(r.J_P, 1e-40);
}

TEST(PowerPenalty, ValueAtZero) {
  PowerParams p;
  p.kappa = 10.0;
  p.omega_E = 1.0;
  PowerBreakdown b;
  b.S = 3.0;
  b.tau = 3.0;
  const PenaltyResult r = power_penalty(b, p);
  EXPECT_NEAR(softplus(0.0, 10.0), 0.069314718055994531, 1e-15);
  EXPECT_NEAR(r.J_P, 4.8045301391820144e-3, 1e-15);
}

TEST(PowerPenalty, SlopeMatchesFiniteDifference) {
  PowerParams p;
  p.kappa = 1.0;
  p.omega_E = 0.5;
  for (double z : {-1.0, 0.0, 1.0, 10.0}) {
    auto J = [&](double zz) {
      PowerBreakdown b;
      b.S = 5.0 + zz;
      b.tau = 5.0;
      return power_penalty(b, p).J_P;
    };
    PowerBreakdown b;
    b.S = 5.0 + z;
    b.tau = 5.0;
    const double h = 1e-6;
    const double fd = (J(z + h) - J(z - h)) / (2 * h);
    EXPECT_TRUE(close_rel(power_penalty(b, p).dJ_dz, fd, 1e-6, 0.0)) << z;
  }
}

TEST(PowerPenalty, PartialsMatchFiniteDifferences) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> P(-80.0, 150.0), res(0.0, 30.0);
  PowerParams p;
  for (TauMode mode : {TauMode::kHeadroom, TauMode::kLiteral}) {
    for (int i = 0; i < 200; ++i) {
      const double lin = P(rng), rot = 0.3 * P(rng), pres = res(rng);
      const PenaltyResult r = power_penalty(breakdown_from(lin, rot, pres, p, mode), p, mode);
      const double h = 1e-5;
      auto J = [&](double a, double b, double c) {
        return power_penalty(breakdown_from(a, b, c, p, mode), p, mode).J_P;
      };
      const double fl = (J(lin + h, rot, pres) - J(lin - h, rot, pres)) / (2 * h);
      const double fr = (J(lin, rot + h, pres) - J(lin, rot - h, pres)) / (2 * h);
      const double fs = (J(lin, rot, pres + h) - J(lin, rot, pres - h)) / (2 * h);
      EXPECT_TRUE(close_rel(r.dJ_dPlin, fl, 1e-4, 1e-10)) << r.dJ_dPlin << " vs " << fl;
      EXPECT_TRUE(close_rel(r.dJ_dProt, fr, 1e-4, 1e-10)) << r.dJ_dProt << " vs " << fr;
      EXPECT_TRUE(close_rel(r.dJ_dPres, fs, 1e-4, 1e-10)) << r.dJ_dPres << " vs " << fs;
    }
  }
}

TEST(PowerPenalty, ZeroMagnitudeHasZeroShares) {
  PowerParams p;
  PowerBreakdown b;
  b.tau = -10.0;
  const PenaltyResult r = power_penalty(b, p);
  EXPECT_GT(r.dJ_dz, 0.0);
  EXPECT_EQ(r.dJ_dPlin, 0.0);
  EXPECT_EQ(r.dJ_dProt, 0.0);
}

TEST(Softplus, BoundsAndMonotonicity) {
  for (double kappa : {0.01, 0.05, 1.0}) {
    double prev = -1.0;
    double prevJ = -1.0;
    PowerParams p;
    p.kappa = kappa;
    for (int i = -20000; i <= 20000; ++i) {
      const double z = i * 0.05 / kappa * 0.01;
      const double sp = softplus(z, kappa);
      EXPECT_GE(sp, std::max(z, 0.0));
      EXPECT_LE(sp, std::max(z, 0.0) + std::log(2.0) / kappa * (1 + 1e-15));
      EXPECT_GE(sp, prev);
      PowerBreakdown b;
      b.S = z;
      const double J = power_penalty(b, p).J_P;
      EXPECT_GE(J, prevJ);
      prev = sp;
      prevJ = J;
    }
    EXPECT_NEAR(softplus(0.0, kappa), std::log(2.0) / kappa, 1e-12);
  }
  EXPECT_TRUE(std::isfinite(softplus(1e6, 1.0)));
  EXPECT_EQ(softplus(-1e6, 1.0), 0.0);
}

TEST(AvailablePower, ConstantAndTable) {
  PowerParams p;
  EXPECT_EQ(available_power(0.0, p), 200.0);
  EXPECT_EQ(available_power(1234.5, p), 200.0);
  PowerParams none = p;
  none.P_RTG = none.P_solar = 0.0;
  EXPECT_EQ(available_power(3.0, none), 0.0);
  AvailabilityTable t{{{0.0, 100.0}, {10.0, 200.0}}};
  EXPECT_NEAR(available_power(5.0, p, &t), 150.0, 1e-12);
  EXPECT_THROW(available_power(11.0, p, &t), std::out_of_range);
  EXPECT_THROW(available_power(-1.0, p), std::invalid_argument);
}

TEST(PowerParams, Validation) {
  PowerParams p;
  EXPECT_NO_THROW(p.validate());
  p.m = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  PowerParams q;
  q.kappa = -1.0;
  EXPECT_THROW(q.validate(), std::invalid_argument);
  PowerParams c;
  EXPECT_EQ(c.cap(), 200.0);
  c.P_limit = 10000.0;
  EXPECT_EQ(c.cap(), 10000.0);
}
