#include "rover/scenario.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rover {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed`, naming the section.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw ScenarioError(section + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ScenarioError("unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Pose2 read_pose(const json& j, const std::string& section) {
  check_keys(j, {"x", "y", "psi"}, section);
  Pose2 p;
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  read(j, "psi", p.psi);
  return p;
}

PowerParams read_power(const json& j) {
  check_keys(j, {"m", "I_z", "g", "C0", "C1", "C2", "P_base", "P_RTG", "P_solar", "omega_E", "kappa", "P_limit"},
             "power");
  PowerParams p;
  read(j, "m", p.m);
  read(j, "I_z", p.I_z);
  read(j, "g", p.g);
  read(j, "C0", p.C0);
  read(j, "C1", p.C1);
  read(j, "C2", p.C2);
  read(j, "P_base", p.P_base);
  read(j, "P_RTG", p.P_RTG);
  read(j, "P_solar", p.P_solar);
  read(j, "omega_E", p.omega_E);
  read(j, "kappa", p.kappa);
  if (j.contains("P_limit") && !j.at("P_limit").is_null()) p.P_limit = j.at("P_limit").get<double>();
  p.validate();
  return p;
}

TauMode parse_tau_mode(const std::string& s) {
  if (s == "headroom") return TauMode::kHeadroom;
  if (s == "literal") return TauMode::kLiteral;
  throw ScenarioError("tau_mode must be 'headroom' or 'literal', got '" + s + "'");
}

PlannerConfig read_planner(const json& j) {
  check_keys(j,
             {"rho_T", "rho_r", "lambda_c", "vx_B_max", "ax_B_max", "ay_B_max", "n_segments",
              "samples_per_segment", "max_outer_iters", "max_inner_iters", "grad_tol", "constraint_tol",
              "kinematic_tol", "kinematic_weight", "kinematic_kappa", "tau_mode", "v_nominal",
              "profile_dt", "E_bank0", "risk_seed_threshold", "parallel"},
             "planner");
  PlannerConfig c;
  read(j, "rho_T", c.rho_T);
  read(j, "rho_r", c.rho_r);
  read(j, "lambda_c", c.lambda_c);
  read(j, "vx_B_max", c.vx_B_max);
  read(j, "ax_B_max", c.ax_B_max);
  read(j, "ay_B_max", c.ay_B_max);
  read(j, "n_segments", c.n_segments);
  read(j, "samples_per_segment", c.samples_per_segment);
  read(j, "max_outer_iters", c.max_outer_iters);
  read(j, "max_inner_iters", c.max_inner_iters);
  read(j, "grad_tol", c.grad_tol);
  read(j, "constraint_tol", c.constraint_tol);
  read(j, "kinematic_tol", c.kinematic_tol);
  read(j, "kinematic_weight", c.kinematic_weight);
  read(j, "kinematic_kappa", c.kinematic_kappa);
  if (j.contains("tau_mode")) c.tau_mode = parse_tau_mode(j.at("tau_mode").get<std::string>());
  read(j, "v_nominal", c.v_nominal);
  read(j, "profile_dt", c.profile_dt);
  read(j, "E_bank0", c.E_bank0);
  read(j, "risk_seed_threshold", c.risk_seed_threshold);
  read(j, "parallel", c.parallel);
  c.validate();
  return c;
}

template <int N>
void read_vec(const json& j, const char* key, Eigen::Matrix<double, N, 1>& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<double>>();
  if (static_cast<int>(v.size()) != N) {
    throw ScenarioError(std::string("nmpc.") + key + " needs " + std::to_string(N) + " entries");
  }
  for (int i = 0; i < N; ++i) out[i] = v[i];
}

NMPCConfig read_nmpc(const json& j) {
  check_keys(j,
             {"N_p", "N_c", "dt_ctrl", "Q", "R", "R_d", "v_bounds", "omega_bounds", "max_sqp_iters",
              "max_qp_iters", "qp_tol"},
             "nmpc");
  NMPCConfig c;
  read(j, "N_p", c.N_p);
  read(j, "N_c", c.N_c);
  read(j, "dt_ctrl", c.dt_ctrl);
  read_vec<3>(j, "Q", c.Q);
  read_vec<2>(j, "R", c.R);
  read_vec<2>(j, "R_d", c.R_d);
  read_vec<2>(j, "v_bounds", c.v_bounds);
  read_vec<2>(j, "omega_bounds", c.omega_bounds);
  read(j, "max_sqp_iters", c.max_sqp_iters);
  read(j, "max_qp_iters", c.max_qp_iters);
  read(j, "qp_tol", c.qp_tol);
  c.validate();
  return c;
}

void read_tracking(const json& j, TrackingOptions& t) {
  check_keys(j, {"goal_tolerance", "grace_time", "substeps", "actuation_sigma", "power_sigma"},
             "disturbance");
  read(j, "goal_tolerance", t.goal_tolerance);
  read(j, "grace_time", t.grace_time);
  read(j, "substeps", t.substeps);
  read(j, "actuation_sigma", t.disturbance.actuation_sigma);
  read(j, "power_sigma", t.disturbance.power_sigma);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Scenario scenario_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  try {
    const json j = json::parse(text);
    check_keys(j,
               {"label", "terrain", "start", "goal", "power", "planner", "nmpc", "seed", "output_dir",
                "disturbance"},
               "scenario");
    Scenario s;
    read(j, "label", s.label);
    const json& terrain = j.at("terrain");
    check_keys(terrain, {"path", "format"}, "terrain");
    s.terrain.path = resolve(base_dir, terrain.at("path").get<std::string>());
    if (terrain.contains("format")) {
      s.terrain.format = parse_heightmap_format(terrain.at("format").get<std::string>());
    }
    if (!std::filesystem::exists(s.terrain.path)) {
      throw ScenarioError("terrain file not found: " + s.terrain.path.string());
    }
    s.start = read_pose(j.at("start"), "start");
    s.goal = read_pose(j.at("goal"), "goal");
    if (j.contains("power")) s.power = read_power(j.at("power"));
    if (j.contains("planner")) s.planner = read_planner(j.at("planner"));
    if (j.contains("nmpc")) s.nmpc = read_nmpc(j.at("nmpc"));
    if (j.contains("disturbance")) read_tracking(j.at("disturbance"), s.tracking);
    read(j, "seed", s.seed);
    s.tracking.seed = s.seed;
    s.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str(), path.parent_path());
}

PowerParams power_params_from_json(const std::string& text) {
  try {
    return read_power(json::parse(text));
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("power parameters JSON: ") + e.what());
  }
}

std::string power_params_to_json(const PowerParams& p) {
  nlohmann::ordered_json j;
  j["m"] = p.m;
  j["I_z"] = p.I_z;
  j["g"] = p.g;
  j["C0"] = p.C0;
  j["C1"] = p.C1;
  j["C2"] = p.C2;
  j["P_base"] = p.P_base;
  j["P_RTG"] = p.P_RTG;
  j["P_solar"] = p.P_solar;
  j["omega_E"] = p.omega_E;
  j["kappa"] = p.kappa;
  if (p.P_limit) j["P_limit"] = *p.P_limit;
  return j.dump(2) + "\n";
}

std::string plan_metrics_json(const PlanResult& r, const std::string& label) {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["P_pmax"] = r.P_pmax;
  j["budget_margin"] = r.budget_margin;
  j["wait_time_inserted"] = r.wait_time_inserted;
  j["objective_terms"] = {{"jerk", r.objective_terms.jerk},
                          {"time", r.objective_terms.time},
                          {"risk", r.objective_terms.risk},
                          {"power_penalty", r.objective_terms.power_penalty},
                          {"kinematic_penalty", r.objective_terms.kinematic_penalty}};
  j["converged"] = r.converged;
  j["power_violation"] = r.power_violation;
  j["kinematic_violation"] = r.kinematic_violation;
  j["total_duration"] = r.trajectory.total_duration();
  j["outer_iterations"] = r.outer_iterations;
  j["inner_iterations"] = r.inner_iterations;
  return j.dump(2) + "\n";
}

std::string profile_csv(const PowerProfile& p) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,P_lin,P_rot,P_res,P_base,P_cons,P_avail\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& s = p.samples[i];
    out << p.times[i] << ',' << s.P_lin << ',' << s.P_rot << ',' << s.P_res << ',' << s.P_base << ','
        << s.P_cons << ',' << s.P_avail << '\n';
  }
  return out.str();
}

}  // namespace rover
