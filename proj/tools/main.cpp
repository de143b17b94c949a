#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "lvopt/baseline.hpp"
#include "lvopt/config.hpp"
#include "lvopt/errors.hpp"
#include "lvopt/flight_outputs.hpp"
#include "lvopt/optimizer.hpp"
#include "lvopt/report.hpp"

namespace fs = std::filesystem;
using namespace lvopt;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNotConverged = 3, kDiverged = 4 };

struct Settings {
  std::string vehicle;
  std::string mission;
  std::string out = "out";
  int nodes = 50;
  double tol = 1e-6;
  int max_iter = 300;
  int baseline_iter = 50;
  double damping = 0.0;
  bool warm_start = false;
  bool loss_free_start = false;
  int workers = 0;
  unsigned seed = 0;
  std::string state;
  bool quiet = false;
};

struct Scenario {
  VehicleSpec vehicle;
  MissionSpec mission;
  PhaseSchedule schedule;
};

Scenario load(const Settings& s) {
  if (s.vehicle.empty()) throw ConfigError("--vehicle is required");
  if (s.mission.empty()) throw ConfigError("--mission is required");
  Scenario sc;
  sc.vehicle = load_vehicle(s.vehicle);
  const MissionConfig mc = load_mission(s.mission);
  sc.mission = bind_mission(mc, sc.vehicle);
  sc.schedule = default_schedule(static_cast<int>(sc.vehicle.stages.size()), mc.schedule);
  return sc;
}

fs::path prepare_out(const Settings& s) {
  const fs::path dir(s.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError(s.out + ": cannot create output directory");
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError(path.string() + ": cannot write file");
  os << text;
}

OptimizerOptions optimizer_options(const Settings& s) {
  OptimizerOptions o;
  o.nodes_per_phase = s.nodes;
  o.sqp.kkt_tol = s.tol;
  o.sqp.max_iter = s.max_iter;
  o.sqp.workers = s.workers;
  if (!s.quiet) {
    o.sqp.on_iterate = [](const SqpIterate& it) {
      std::fprintf(stderr, "  it %3d  f %.6f  kkt %.2e  eq %.2e  ineq %.2e  step %.2e  alpha %.3g%s\n", it.iteration,
                   it.f, it.kkt, it.eq_violation, it.ineq_violation, it.step, it.alpha, it.elastic ? "  elastic" : "");
    };
  }
  return o;
}

void write_artifacts(const fs::path& dir, const std::string& caption, const SummaryColumn& col, const Evaluation& eval,
                     const PhaseSchedule& schedule, const MissionSpec& mission, const EarthModel& earth) {
  const SummaryColumn cols[] = {col};
  write_file(dir / "summary.txt", format_summary(caption, cols));
  write_file(dir / "summary.kv", format_key_values(col));
  std::ofstream csv(dir / "trajectory.csv");
  write_trajectory_csv(csv, eval.trajectory, earth);
  write_file(dir / "tracks.geojson", tracks_geojson(eval.trajectory, schedule, mission, earth));
  std::cout << format_summary(caption, cols);
}

int run_simulate(const Settings& s) {
  const Scenario sc = load(s);
  const EarthModel earth;
  ProblemOptions po;
  po.nodes_per_phase = s.nodes;
  const AscentProblem problem(sc.mission, sc.vehicle, sc.schedule, earth, po);
  const Eigen::VectorXd x = problem.pack(problem.initial_guess());
  const Evaluation eval = problem.evaluate(x);
  if (!eval.ok) {
    std::cerr << "simulation failed: " << eval.failure << '\n';
    return kNotConverged;
  }
  OptimizationResult r = summarize(problem, x, eval);
  r.status = SqpStatus::MaxIterations;
  SummaryColumn col = summary_column(r, "Reference program");
  col.status = "simulated";
  const fs::path dir = prepare_out(s);
  write_artifacts(dir, sc.mission.name + ": reference vehicle, reference pitch program", col, eval,
                  problem.schedule(), sc.mission, earth);
  return kOk;
}

int run_optimize(const Settings& s) {
  const Scenario sc = load(s);
  const EarthModel earth;
  const OptimizationResult r = solve_simultaneous(sc.mission, sc.vehicle, sc.schedule, std::nullopt, optimizer_options(s), earth);
  const fs::path dir = prepare_out(s);
  ProblemOptions po;
  po.nodes_per_phase = s.nodes;
  const AscentProblem problem(sc.mission, sc.vehicle, sc.schedule, earth, po);
  write_artifacts(dir, sc.mission.name + ": simultaneous optimization", summary_column(r, "Simultaneous Optimization"),
                  r.evaluation, problem.schedule(), sc.mission, earth);
  if (r.status != SqpStatus::Converged) {
    std::cerr << "optimizer did not converge (" << to_string(r.status) << ")";
    if (!r.violated.empty()) {
      std::cerr << "; violated:";
      for (const auto& name : r.violated) std::cerr << ' ' << name;
    }
    std::cerr << '\n';
    return kNotConverged;
  }
  return kOk;
}

BaselineOptions baseline_options(const Settings& s) {
  BaselineOptions b;
  b.max_iter = s.baseline_iter;
  b.damping = s.damping;
  b.warm_start = s.warm_start;
  b.loss_free_start = s.loss_free_start;
  b.inner = optimizer_options(s);
  b.inner.sqp.on_iterate = nullptr;
  return b;
}

std::string iteration_log(const BaselineResult& r) {
  std::ostringstream os;
  os << "iteration,assumed_loss_m_s,computed_loss_m_s,payload_max_kg,liftoff_kg,change,inner_status\n";
  auto join = [](const std::vector<double>& v) {
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.3f", v[i]);
      out += (i ? ";" : "") + std::string(buf);
    }
    return out;
  };
  for (const BaselineIteration& it : r.iterations) {
    char buf[128];
    std::snprintf(buf, sizeof buf, ",%.3f,%.3f,%.6e,", it.payload_max, it.m_liftoff, it.change);
    os << it.index << ',' << join(it.assumed_losses) << ',' << join(it.computed_losses) << buf
       << to_string(it.inner_status) << '\n';
  }
  return os.str();
}

int baseline_exit(const BaselineResult& r) {
  switch (r.status) {
    case BaselineStatus::Converged: return kOk;
    case BaselineStatus::Diverged: return kDiverged;
    case BaselineStatus::MaxIterations: return kNotConverged;
  }
  return kNotConverged;
}

int run_baseline(const Settings& s) {
  const Scenario sc = load(s);
  const EarthModel earth;
  const BaselineResult r = solve_sequential(sc.mission, sc.vehicle, sc.schedule, baseline_options(s), earth);
  const fs::path dir = prepare_out(s);
  write_file(dir / "iterations.csv", iteration_log(r));
  SummaryColumn col = summary_column(r, "Staging - Trajectory Iteration");
  if (r.final) {
    ProblemOptions po;
    po.nodes_per_phase = s.nodes;
    const AscentProblem problem(sc.mission, sc.vehicle, sc.schedule, earth, po);
    write_artifacts(dir, sc.mission.name + ": staging - trajectory iteration", col, r.final->evaluation,
                    problem.schedule(), sc.mission, earth);
  } else {
    const SummaryColumn cols[] = {col};
    write_file(dir / "summary.txt", format_summary(sc.mission.name, cols));
    write_file(dir / "summary.kv", format_key_values(col));
  }
  std::cout << "baseline: " << to_string(r.status);
  if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
  std::cout << " after " << r.iterations.size() << " iterations\n";
  return baseline_exit(r);
}

int run_compare(const Settings& s) {
  const Scenario sc = load(s);
  const EarthModel earth;
  const BaselineResult base = solve_sequential(sc.mission, sc.vehicle, sc.schedule, baseline_options(s), earth);
  const OptimizationResult sim =
      solve_simultaneous(sc.mission, sc.vehicle, sc.schedule, std::nullopt, optimizer_options(s), earth);
  const SummaryColumn cols[] = {summary_column(base, "Staging - Trajectory Iteration"),
                                summary_column(sim, "Simultaneous Optimization")};
  std::ostringstream os;
  os << format_summary(sc.mission.name + ": method comparison", cols);
  if (cols[0].m_liftoff > 0.0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "\nLift-off mass, simultaneous vs sequential: %+.2f %%\n",
                  liftoff_delta_percent(cols[0], cols[1]));
    os << buf;
  }
  if (base.status != BaselineStatus::Converged) os << "Sequential method " << to_string(base.status) << ": " << base.reason << '\n';
  const fs::path dir = prepare_out(s);
  write_file(dir / "compare.txt", os.str());
  write_file(dir / "compare.kv", format_key_values(cols[0], "sequential.") + format_key_values(cols[1], "simultaneous."));
  write_file(dir / "iterations.csv", iteration_log(base));
  std::cout << os.str();
  return sim.status == SqpStatus::Converged ? kOk : kNotConverged;
}

int run_iip(const Settings& s) {
  std::vector<double> v;
  std::stringstream ss(s.state);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("--state: '" + tok + "' is not a number");
    }
  }
  if (v.size() != 7) throw ConfigError("--state expects t,x,y,z,vx,vy,vz (ECI, m and m/s)");
  const EarthModel earth;
  const IipResult r = iip_predict(Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6]), v[0], earth);
  std::printf("t_go_s = %.6f\nlatitude_deg = %.9f\nlongitude_deg = %.9f\n", r.t_go, rad2deg(r.latitude),
              wrap_longitude_deg(rad2deg(r.longitude)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Launch vehicle stage sizing and ascent trajectory optimization"};
  app.require_subcommand(1);
  Settings s;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--vehicle", s.vehicle, "vehicle YAML file")->required();
    sub->add_option("--mission", s.mission, "mission YAML file")->required();
    sub->add_option("--out", s.out, "output directory")->capture_default_str();
    sub->add_option("--nodes-per-phase", s.nodes, "RK4 steps per phase")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", s.seed, "recorded for reproducibility")->capture_default_str();
    sub->add_flag("--quiet", s.quiet, "no iteration log");
  };
  auto solver = [&](CLI::App* sub) {
    sub->add_option("--tol", s.tol, "KKT tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", s.max_iter, "SQP iteration limit")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--workers", s.workers, "gradient threads (0: all cores)")->capture_default_str();
  };
  auto sequential = [&](CLI::App* sub) {
    sub->add_option("--baseline-iter", s.baseline_iter, "outer iteration limit")->capture_default_str();
    sub->add_option("--damping", s.damping, "weight of the previous loss assumption")->capture_default_str();
    sub->add_flag("--warm-start", s.warm_start, "warm-start attitude solves");
    sub->add_flag("--loss-free-start", s.loss_free_start, "first staging assumes zero losses");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "fly the reference vehicle on the reference program");
  common(simulate);
  CLI::App* optimize = app.add_subcommand("optimize", "simultaneous stage sizing and trajectory optimization");
  common(optimize);
  solver(optimize);
  CLI::App* baseline = app.add_subcommand("baseline", "sequential staging - trajectory iteration");
  common(baseline);
  solver(baseline);
  sequential(baseline);
  CLI::App* compare = app.add_subcommand("compare", "both methods side by side");
  common(compare);
  solver(compare);
  sequential(compare);
  CLI::App* iip = app.add_subcommand("iip", "impact point of one inertial state");
  iip->add_option("--state", s.state, "t,x,y,z,vx,vy,vz in ECI [s, m, m/s]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*simulate) return run_simulate(s);
    if (*optimize) return run_optimize(s);
    if (*baseline) return run_baseline(s);
    if (*compare) return run_compare(s);
    if (*iip) return run_iip(s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotConverged;
  }
  return kOk;
}
