// Command-line front end: trajectory simulation, Hartmann-Hahn sweeps,
// fixed-point tables and the invariant battery, with CSV output.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "disent/evolve.hpp"
#include "disent/twospin.hpp"
#include "disent/types.hpp"
#include "disent/verify.hpp"

using nlohmann::json;
using namespace disent;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RunConfig {
  std::string system;              // generic | twospin | twospin-truncated
  std::string frame = "double";    // twospin only
  std::string representation = "amplitudes";  // twospin-truncated only
  TwoSpinParams params;
  Eigen::Index n1 = 2, n2 = 2;     // generic only
  Eigen::MatrixXcd h_generic;      // generic only
  StateVector initial;             // resolved amplitudes (or Bloch 3-vector)
  DisentanglerConfig disentangler;
  IntegratorConfig integrator;
  SweepGrid sweep;
  bool has_sweep = false;
  std::uint64_t seed = 0;
  std::string output_path;
  std::uint64_t config_hash = 0;
};

Eigen::MatrixXcd load_matrix_file(const std::string& path, Eigen::Index n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open H matrix file: " + path);
  Eigen::MatrixXcd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double re, im;
      if (!(in >> re >> im))
        throw ConfigError("H matrix file " + path + ": expected " +
                          std::to_string(2 * n * n) + " numbers");
      h(i, j) = Complex(re, im);
    }
  if (hermiticity_deviation(h) > kOperatorTol)
    throw ConfigError("H matrix file " + path + " is not Hermitian");
  return h;
}

StateVector resolve_initial(const json& spec, Eigen::Index dim,
                            Eigen::Index n2) {
  StateVector v = StateVector::Zero(dim);
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "bell") {
      if (dim != 4) throw ConfigError("initial_state 'bell' needs a 2x2 system");
      v(0) = v(3) = 1.0 / std::sqrt(2.0);
    } else if (s == "plus-x") {
      v.setOnes();
      v /= v.norm();
    } else if (s.rfind("product:", 0) == 0) {
      const std::string idx = s.substr(8);
      if (idx.size() != 2 || !std::isdigit(idx[0]) || !std::isdigit(idx[1]))
        throw ConfigError("initial_state: expected product:<k1><k2>");
      const Eigen::Index k1 = idx[0] - '0', k2 = idx[1] - '0';
      const Eigen::Index flat = k1 * n2 + k2;
      if (flat < 0 || flat >= dim)
        throw ConfigError("initial_state: product index out of range");
      v(flat) = 1.0;
    } else {
      throw ConfigError("initial_state: unknown preset '" + s + "'");
    }
    return v;
  }
  if (!spec.is_array() || static_cast<Eigen::Index>(spec.size()) != dim)
    throw ConfigError("initial_state: expected preset string or list of " +
                      std::to_string(dim) + " [re, im] pairs");
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& e = spec[static_cast<std::size_t>(i)];
    if (!e.is_array() || e.size() != 2)
      throw ConfigError("initial_state: entries must be [re, im] pairs");
    v(i) = Complex(e[0].get<double>(), e[1].get<double>());
  }
  const double nrm = v.norm();
  if (nrm == 0.0) throw ConfigError("initial_state: zero vector");
  if (std::abs(nrm - 1.0) > 1e-6)
    std::cerr << "warning: initial state renormalized (norm was "
              << format_double(nrm) << ")\n";
  return v / nrm;
}

RunConfig load_config(const std::string& path, bool need_initial) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("config parse error: ") + ex.what());
  }

  RunConfig cfg;
  cfg.config_hash = fnv1a64(bytes);
  try {
    cfg.system = j.value("system", "twospin");
    if (cfg.system != "generic" && cfg.system != "twospin" &&
        cfg.system != "twospin-truncated")
      throw ConfigError("system must be generic, twospin or twospin-truncated");
    cfg.frame = j.value("frame", "double");
    if (cfg.frame != "lab" && cfg.frame != "rotating" && cfg.frame != "double")
      throw ConfigError("frame must be lab, rotating or double");
    cfg.representation = j.value("representation", "amplitudes");
    if (cfg.representation != "amplitudes" && cfg.representation != "bloch")
      throw ConfigError("representation must be amplitudes or bloch");

    const json params = j.value("params", json::object());
    if (cfg.system == "generic") {
      cfg.n1 = params.value("n1", 2);
      cfg.n2 = params.value("n2", 2);
      if (cfg.n1 < 2 || cfg.n2 < 2)
        throw ConfigError("generic system needs n1, n2 >= 2");
      if (!params.contains("h_file"))
        throw ConfigError("generic system needs params.h_file");
      cfg.h_generic =
          load_matrix_file(params["h_file"].get<std::string>(), cfg.n1 * cfg.n2);
    } else {
      cfg.params.omega_a = params.value("omega_a", 0.0);
      cfg.params.omega_b = params.value("omega_b", 0.0);
      cfg.params.omega_1 = params.value("omega_1", 0.0);
      cfg.params.delta = params.value("delta", 0.0);
      cfg.params.g = params.value("g", 0.0);
      cfg.params.gamma_d = params.value("gamma_d", 0.0);
    }

    const json dis = j.value("disentangler", json::object());
    cfg.disentangler.gamma_d =
        dis.value("gamma_d", cfg.params.gamma_d);
    cfg.disentangler.eps_witness = dis.value("eps_witness", 1e-14);
    cfg.disentangler.eps_parallel = dis.value("eps_parallel", 1e-12);
    cfg.disentangler.validate();
    if (!dis.contains("gamma_d")) cfg.params.gamma_d = cfg.disentangler.gamma_d;

    const json integ = j.value("integrator", json::object());
    cfg.integrator.rtol = integ.value("rtol", 1e-9);
    cfg.integrator.atol = integ.value("atol", 1e-12);
    cfg.integrator.dt_init = integ.value("dt_init", 1e-4);
    cfg.integrator.t_final = integ.value("t_final", 0.0);
    cfg.integrator.renormalize = integ.value("renormalize", true);
    cfg.integrator.record_every = integ.value("record_every", 1e-2);

    if (j.contains("sweep")) {
      const json sw = j["sweep"];
      cfg.sweep.delta_min = sw.value("delta_min", 0.0);
      cfg.sweep.delta_max = sw.value("delta_max", 0.0);
      cfg.sweep.delta_count = sw.value("delta_count", 0);
      cfg.sweep.omega1_min = sw.value("omega1_min", 0.0);
      cfg.sweep.omega1_max = sw.value("omega1_max", 0.0);
      cfg.sweep.omega1_count = sw.value("omega1_count", 0);
      cfg.has_sweep = true;
    }

    cfg.seed = j.value("seed", 0ull);
    cfg.output_path = j.value("output_path", "");

    if (need_initial) {
      if (!j.contains("initial_state"))
        throw ConfigError("missing initial_state");
      Eigen::Index dim = cfg.n1 * cfg.n2;
      Eigen::Index ncols = cfg.n2;
      if (cfg.system == "twospin") { dim = 4; ncols = 2; }
      if (cfg.system == "twospin-truncated") {
        if (cfg.representation == "bloch" && j["initial_state"].is_array() &&
            j["initial_state"].size() == 3 &&
            j["initial_state"][0].is_number()) {
          // direct Bloch vector
          StateVector v(3);
          for (int i = 0; i < 3; ++i)
            v(i) = j["initial_state"][static_cast<std::size_t>(i)].get<double>();
          if (std::abs(v.norm() - 1.0) > 1e-6)
            std::cerr << "warning: Bloch vector renormalized\n";
          cfg.initial = v / v.norm();
          return cfg;
        }
        dim = 2;
        ncols = 1;
      }
      cfg.initial = resolve_initial(j["initial_state"], dim, ncols);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config error: ") + ex.what());
  }
  return cfg;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& override_path) {
  const std::string path =
      override_path.empty() ? cfg.output_path : override_path;
  if (path.empty())
    throw ConfigError("no output path (set output_path or pass --output)");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  char head[80];
  std::snprintf(head, sizeof head, "# disent %s config=fnv1a:%016llx\n",
                kVersion, static_cast<unsigned long long>(cfg.config_hash));
  out << head;
  return out;
}

void write_trajectory(std::ofstream& out, const Trajectory& traj,
                      const std::vector<std::pair<int, int>>& labels) {
  out << "t,norm,Q,expP";
  for (const auto& [k1, k2] : labels)
    out << ",re_c" << k1 << k2 << ",im_c" << k1 << k2;
  out << "\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.times[i]) << ',' << format_double(traj.norms[i])
        << ',' << format_double(traj.q_values[i]) << ','
        << format_double(traj.exp_p[i]);
    for (Eigen::Index k = 0; k < traj.states[i].size(); ++k)
      out << ',' << format_double(traj.states[i](k).real()) << ','
          << format_double(traj.states[i](k).imag());
    out << "\n";
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
  const RunConfig cfg = load_config(config_path, true);
  if (!(cfg.integrator.t_final > 0.0))
    throw ConfigError("integrator.t_final must be positive");
  std::ofstream out = open_output(cfg, out_path);

  if (cfg.system == "twospin-truncated" && cfg.representation == "bloch") {
    Eigen::Vector3d p0;
    if (cfg.initial.size() == 3) {
      p0 = cfg.initial.real();
    } else {
      const Complex a = cfg.initial(0), d = cfg.initial(1);
      p0 = Eigen::Vector3d(2.0 * (std::conj(d) * a).real(),
                           (Complex(0, 1) * (std::conj(d) * a -
                                             std::conj(a) * d)).real(),
                           std::norm(a) - std::norm(d));
    }
    const TruncatedModel tm = truncated_model(cfg.params);
    const BlochTrajectory traj =
        bloch_evolve(p0, tm.omega, cfg.disentangler.gamma_d, cfg.integrator);
    out << "t,Px,Py,Pz,Q\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      out << format_double(traj.times[i]) << ','
          << format_double(traj.points[i].x()) << ','
          << format_double(traj.points[i].y()) << ','
          << format_double(traj.points[i].z()) << ','
          << format_double(traj.q_values[i]) << "\n";
    return kExitOk;
  }

  if (cfg.system == "twospin-truncated") {
    const TruncatedModel tm = truncated_model(cfg.params);
    const Trajectory traj =
        evolve_truncated(Eigen::Vector2cd(cfg.initial(0), cfg.initial(1)),
                         tm.matrix, cfg.disentangler.gamma_d, cfg.integrator);
    write_trajectory(out, traj, {{0, 0}, {1, 1}});
    return kExitOk;
  }

  HamiltonianFn h;
  Eigen::Index n1 = cfg.n1, n2 = cfg.n2;
  if (cfg.system == "twospin") {
    n1 = n2 = 2;
    const TwoSpinParams p = cfg.params;
    if (cfg.frame == "lab") {
      h = [p](double t) -> Eigen::MatrixXcd { return omega_lab(t, p); };
    } else if (cfg.frame == "rotating") {
      const Eigen::MatrixXcd hr = omega_rotating(p).cast<Complex>();
      h = [hr](double) { return hr; };
    } else {
      const Eigen::MatrixXcd hd = omega_double(p).cast<Complex>();
      h = [hd](double) { return hd; };
    }
  } else {
    const Eigen::MatrixXcd hg = cfg.h_generic;
    h = [hg](double) { return hg; };
  }

  const Trajectory traj =
      evolve(cfg.initial, n1, n2, h, cfg.disentangler, cfg.integrator);
  std::vector<std::pair<int, int>> labels;
  for (Eigen::Index k1 = 0; k1 < n1; ++k1)
    for (Eigen::Index k2 = 0; k2 < n2; ++k2)
      labels.emplace_back(static_cast<int>(k1), static_cast<int>(k2));
  write_trajectory(out, traj, labels);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path) {
  const RunConfig cfg = load_config(config_path, false);
  if (!cfg.has_sweep) throw ConfigError("missing sweep block");
  const std::vector<SweepRow> rows = hh_sweep(cfg.params, cfg.sweep);

  std::size_t max_roots = 1;
  for (const auto& r : rows) max_roots = std::max(max_roots, r.roots.size());

  std::ofstream out = open_output(cfg, out_path);
  out << "delta,omega1,omega_r,omega_x,omega_z,theta_h,n_fixed";
  for (std::size_t k = 1; k <= max_roots; ++k)
    out << ",theta_" << k << ",phi_" << k << ",stab_" << k;
  out << "\n";
  for (const auto& r : rows) {
    if (!r.error.empty())
      std::cerr << "warning: sweep point (delta=" << r.delta
                << ", omega1=" << r.omega_1 << "): " << r.error << "\n";
    out << format_double(r.delta) << ',' << format_double(r.omega_1) << ','
        << format_double(r.omega_r) << ',' << format_double(r.omega_x) << ','
        << format_double(r.omega_z) << ',' << format_double(r.theta_h) << ','
        << r.roots.size();
    for (std::size_t k = 0; k < max_roots; ++k) {
      if (k < r.roots.size())
        out << ',' << format_double(r.roots[k].theta) << ','
            << format_double(r.roots[k].phi) << ','
            << to_string(r.roots[k].stability);
      else
        out << ",,,";
    }
    out << "\n";
  }
  return kExitOk;
}

int cmd_fixed_points(const std::string& config_path,
                     const std::string& out_path) {
  const RunConfig cfg = load_config(config_path, false);
  const TruncatedModel tm = truncated_model(cfg.params);
  const auto roots = fixed_points(tm.omega, cfg.params.gamma_d);
  std::ofstream out = open_output(cfg, out_path);
  out << "theta,phi,px,py,pz,residual,eq_residual,stability\n";
  for (const auto& fp : roots)
    out << format_double(fp.theta) << ',' << format_double(fp.phi) << ','
        << format_double(fp.p.x()) << ',' << format_double(fp.p.y()) << ','
        << format_double(fp.p.z()) << ',' << format_double(fp.residual) << ','
        << format_double(fp.eq_residual) << ',' << to_string(fp.stability)
        << "\n";
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, bool quick, const std::string& json_path) {
  const auto checks = run_verification(seed, quick);
  bool all_pass = true;
  std::printf("%-40s %12s %10s  %s\n", "check", "residual", "tolerance",
              "status");
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    std::printf("%-40s %12.3e %10.0e  %s\n", c.name.c_str(), c.residual,
                c.tolerance, c.pass ? "PASS" : "FAIL");
  }
  std::printf("verify: %s (%zu checks, seed %llu%s)\n",
              all_pass ? "PASS" : "FAIL", checks.size(),
              static_cast<unsigned long long>(seed), quick ? ", quick" : "");
  if (!json_path.empty()) {
    json rep;
    rep["seed"] = seed;
    rep["quick"] = quick;
    rep["pass"] = all_pass;
    rep["version"] = kVersion;
    rep["checks"] = json::array();
    for (const auto& c : checks)
      rep["checks"].push_back({{"name", c.name},
                               {"residual", c.residual},
                               {"tolerance", c.tolerance},
                               {"pass", c.pass}});
    std::ofstream out(json_path);
    if (!out) throw ConfigError("cannot open report file: " + json_path);
    out << rep.dump(2) << "\n";
  }
  return all_pass ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disent: bipartite disentangling-dynamics simulator"};
  app.require_subcommand(1);

  std::string config_path, output_path, json_path;
  std::uint64_t seed = 0;
  bool quick = false;

  auto* sim = app.add_subcommand("simulate", "integrate one trajectory");
  sim->add_option("--config", config_path, "JSON run configuration")
      ->required();
  sim->add_option("--output", output_path, "override output path");

  auto* sweep = app.add_subcommand("sweep", "fixed-point map over a grid");
  sweep->add_option("--config", config_path, "JSON run configuration")
      ->required();
  sweep->add_option("--output", output_path, "override output path");

  auto* fps = app.add_subcommand("fixed-points", "fixed points of one setup");
  fps->add_option("--config", config_path, "JSON run configuration")
      ->required();
  fps->add_option("--output", output_path, "override output path");

  auto* ver = app.add_subcommand("verify", "run the invariant battery");
  ver->add_option("--seed", seed, "base seed");
  ver->add_flag("--quick", quick, "reduced sample counts");
  ver->add_option("--json", json_path, "also write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitConfig : kExitOk;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, output_path);
    if (sweep->parsed()) return cmd_sweep(config_path, output_path);
    if (fps->parsed()) return cmd_fixed_points(config_path, output_path);
    return cmd_verify(seed, quick, json_path);
  } catch (const ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitNumerical;
  }
}
