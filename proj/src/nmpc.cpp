#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "rover/tracker.hpp"

namespace rover {

void NMPCConfig::validate() const {
  if (N_c < 1 || N_p < N_c) throw std::invalid_argument("NMPC needs N_p >= N_c >= 1");
  if (!(dt_ctrl > 0.0)) throw std::invalid_argument("NMPC dt_ctrl must be positive");
  if ((Q.array() < 0.0).any() || (R.array() < 0.0).any() || (R_d.array() < 0.0).any()) {
    throw std::invalid_argument("NMPC weights must be non-negative");
  }
  if (!(Q.x() + R.x() > 0.0 && Q.y() + R.y() > 0.0 && Q.z() > 0.0)) {
    throw std::invalid_argument("NMPC weights Q + R must be positive on the diagonal");
  }
  if (!(v_bounds[0] <= v_bounds[1]) || !(omega_bounds[0] <= omega_bounds[1])) {
    throw std::invalid_argument("NMPC control bounds must be ordered");
  }
  if (max_sqp_iters < 1 || max_qp_iters < 1) throw std::invalid_argument("NMPC iteration caps must be >= 1");
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(a, 2.0 * pi);
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

Control map_to_body(const Control& u, double phi, double xi) {
  return {u.v / std::cos(phi), u.omega / std::cos(xi)};
}

Control project_to_plane(const Control& u, double phi, double xi) {
  return {u.v * std::cos(phi), u.omega * std::cos(xi)};
}

ReferenceWindow build_reference(const SplineTrajectorySE2& traj, double t_now, const NMPCConfig& cfg) {
  ReferenceWindow ref;
  ref.X.reserve(cfg.N_p + 1);
  ref.U.reserve(cfg.N_c + 1);
  const Pose2 goal = traj.end_pose();
  for (int k = 0; k <= cfg.N_p; ++k) {
    const double t = t_now + k * cfg.dt_ctrl;
    if (t >= traj.end_time()) {
      ref.X.emplace_back(goal.x, goal.y, goal.psi);
      if (k <= cfg.N_c) ref.U.emplace_back(0.0, 0.0);
      continue;
    }
    const TrajectorySample s = traj.evaluate(std::max(t, traj.t0()));
    ref.X.emplace_back(s.x, s.y, s.psi);
    if (k <= cfg.N_c) ref.U.emplace_back(std::hypot(s.vx, s.vy), s.omega);
  }
  return ref;
}

namespace {

class Horizon {
 public:
  Horizon(const SimState& s, const ReferenceWindow& ref, const NMPCConfig& cfg)
      : s_(s), ref_(ref), cfg_(cfg), nu_(2 * (cfg.N_c + 1)),
        nr_(3 * cfg.N_p + 2 * (cfg.N_c + 1) + 2 * cfg.N_c) {
    sq_Q_ = cfg.Q.cwiseSqrt();
    sq_R_ = cfg.R.cwiseSqrt();
    sq_Rd_ = cfg.R_d.cwiseSqrt();
  }

  int variables() const { return nu_; }

  // Stacked weighted residuals; the Jacobian is filled when J is given.
  Eigen::VectorXd residuals(const Eigen::VectorXd& u, Eigen::MatrixXd* J) const {
    Eigen::VectorXd r(nr_);
    if (J != nullptr) J->setZero(nr_, nu_);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, nu_);  // d state / d u
    double x = s_.x, y = s_.y, psi = s_.psi;
    const double dt = cfg_.dt_ctrl;
    for (int k = 0; k < cfg_.N_p; ++k) {
      const int j = std::min(k, cfg_.N_c);
      const double v = u[2 * j], w = u[2 * j + 1];
      const double c = std::cos(psi), sn = std::sin(psi);
      if (J != nullptr) {
        const Eigen::RowVectorXd sp = S.row(2);
        S.row(0) += -v * sn * dt * sp;
        S.row(1) += v * c * dt * sp;
        S(0, 2 * j) += c * dt;
        S(1, 2 * j) += sn * dt;
        S(2, 2 * j + 1) += dt;
      }
      x += v * c * dt;
      y += v * sn * dt;
      psi += w * dt;
      const Eigen::Vector3d& xr = ref_.X[k + 1];
      r[3 * k] = sq_Q_[0] * (x - xr[0]);
      r[3 * k + 1] = sq_Q_[1] * (y - xr[1]);
      r[3 * k + 2] = sq_Q_[2] * wrap_angle(psi - xr[2]);
      if (J != nullptr) {
        for (int d = 0; d < 3; ++d) J->row(3 * k + d) = sq_Q_[d] * S.row(d);
      }
    }
    int row = 3 * cfg_.N_p;
    for (int k = 0; k <= cfg_.N_c; ++k) {
      for (int d = 0; d < 2; ++d) {
        r[row] = sq_R_[d] * (u[2 * k + d] - ref_.U[k][d]);
        if (J != nullptr) (*J)(row, 2 * k + d) = sq_R_[d];
        ++row;
      }
    }
    for (int k = 1; k <= cfg_.N_c; ++k) {
      for (int d = 0; d < 2; ++d) {
        r[row] = sq_Rd_[d] * (u[2 * k + d] - u[2 * (k - 1) + d]);
        if (J != nullptr) {
          (*J)(row, 2 * k + d) = sq_Rd_[d];
          (*J)(row, 2 * (k - 1) + d) = -sq_Rd_[d];
        }
        ++row;
      }
    }
    return r;
  }

  double cost(const Eigen::VectorXd& u) const { return residuals(u, nullptr).squaredNorm(); }

 private:
  const SimState& s_;
  const ReferenceWindow& ref_;
  const NMPCConfig& cfg_;
  int nu_;
  int nr_;
  Eigen::Vector3d sq_Q_;
  Eigen::Vector2d sq_R_;
  Eigen::Vector2d sq_Rd_;
};

// min 0.5 d'Hd + g'd subject to lo <= d <= hi, FISTA with fixed step 1/L.
Eigen::VectorXd box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi, int max_iters, double tol) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  const double L = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(g.size()).cwiseMax(lo).cwiseMin(hi);
  Eigen::VectorXd yk = d;
  double t = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd next = (yk - (H * yk + g) / L).cwiseMax(lo).cwiseMin(hi);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yk = next + ((t - 1.0) / t_next) * (next - d);
    const double step = (next - d).norm();
    d = next;
    t = t_next;
    if (step <= tol * (1.0 + d.norm())) break;
  }
  return d;
}

}  // namespace

double nmpc_cost(const SimState& state, const ReferenceWindow& ref, const NMPCConfig& cfg,
                 const std::vector<Eigen::Vector2d>& controls) {
  const Horizon h(state, ref, cfg);
  Eigen::VectorXd u(h.variables());
  for (int k = 0; k <= cfg.N_c; ++k) u.segment<2>(2 * k) = controls[k];
  return h.cost(u);
}

NMPCSolution solve_nmpc(const SimState& state, const ReferenceWindow& ref, const NMPCConfig& cfg) {
  if (static_cast<int>(ref.X.size()) != cfg.N_p + 1 || static_cast<int>(ref.U.size()) != cfg.N_c + 1) {
    throw std::invalid_argument("reference window does not match the NMPC horizon");
  }
  const Horizon h(state, ref, cfg);
  const int n = h.variables();
  Eigen::VectorXd lo(n), hi(n), u(n);
  for (int k = 0; k <= cfg.N_c; ++k) {
    lo[2 * k] = cfg.v_bounds[0];
    hi[2 * k] = cfg.v_bounds[1];
    lo[2 * k + 1] = cfg.omega_bounds[0];
    hi[2 * k + 1] = cfg.omega_bounds[1];
    u.segment<2>(2 * k) = ref.U[k];
  }
  u = u.cwiseMax(lo).cwiseMin(hi);

  NMPCSolution sol;
  double cost = h.cost(u);
  for (int it = 0; it < cfg.max_sqp_iters; ++it) {
    Eigen::MatrixXd J;
    const Eigen::VectorXd r = h.residuals(u, &J);
    const Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    const Eigen::VectorXd d = box_qp(H, g, lo - u, hi - u, cfg.max_qp_iters, cfg.qp_tol);
    sol.iterations = it + 1;
    if (d.norm() <= 1e-9 * (1.0 + u.norm())) {
      sol.converged = true;
      break;
    }
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 20; ++ls) {
      const Eigen::VectorXd trial = u + alpha * d;
      const double c = h.cost(trial);
      if (c < cost) {
        u = trial;
        moved = cost - c <= 1e-12 * (1.0 + cost) ? false : true;
        cost = c;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) {
      sol.converged = true;
      break;
    }
  }
  sol.cost = cost;
  sol.plan.resize(cfg.N_c + 1);
  for (int k = 0; k <= cfg.N_c; ++k) sol.plan[k] = u.segment<2>(2 * k);
  sol.u = {u[0], u[1]};
  return sol;
}

}  // namespace rover
