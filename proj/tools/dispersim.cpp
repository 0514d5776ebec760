#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dispersim/csv.hpp"
#include "dispersim/dispersion.hpp"
#include "dispersim/measurement.hpp"
#include "dispersim/manifest.hpp"
#include "dispersim/measles.hpp"
#include "dispersim/mif.hpp"
#include "dispersim/model_io.hpp"
#include "dispersim/parallel.hpp"
#include "dispersim/pfilter.hpp"
#include "dispersim/simulator.hpp"

namespace {

using namespace dispersim;
using nlohmann::json;

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void write_error_json(const std::string& path, const std::string& what) {
  if (path.empty()) return;
  json j;
  j["error"] = what;
  std::ofstream out(path);
  if (out) out << j.dump(2) << '\n';
}

// cases/params for filter-style commands
struct DataSeries {
  std::vector<double> times;
  std::vector<double> values;
};

DataSeries load_data_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int date = t.column("date");
  if (date < 0) date = t.column("time");
  int cases = t.column("cases");
  if (date < 0 || cases < 0)
    throw std::runtime_error("data csv needs date (or time) and cases columns");
  DataSeries d;
  for (const auto& r : t.rows) {
    d.times.push_back(r[std::size_t(date)]);
    d.values.push_back(r[std::size_t(cases)]);
  }
  return d;
}

// Generic filter construction for models loaded from JSON: measurement
// parameters rho/psi must exist in the model's parameter block.
FilterModel make_filter(const ModelBundle& bundle, const DataSeries& data,
                        const std::string& incidence, double t0, double dt,
                        const std::string& init_state_path) {
  FilterModel fm;
  fm.model = &bundle.model;
  auto sep = incidence.find("->");
  if (sep == std::string::npos)
    throw std::runtime_error("incidence arrow must look like tail->head");
  fm.incidence_arrow = bundle.model.graph.arrow_index(incidence.substr(0, sep),
                                                      incidence.substr(sep + 2));
  fm.t0 = t0;
  fm.dt = dt;
  fm.obs_times = data.times;
  fm.observations = data.values;
  int rho_idx = bundle.model.params.index("rho");
  int psi_idx = bundle.model.params.index("psi");
  fm.log_dmeasure = [rho_idx, psi_idx](double y, double C,
                                       std::span<const double> p) {
    return dmeasure(y, C, p[std::size_t(rho_idx)], p[std::size_t(psi_idx)]);
  };
  SystemState init = load_state_json(init_state_path, bundle.model.graph);
  fm.make_init = [init](std::span<const double>) { return init; };
  return fm;
}

std::string manifest_path_for(const std::string& out) {
  return out + ".manifest.json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dispersim: over-dispersed Markov counting processes on graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  // keep the long help only so that `--h` stays free for diagnose
  app.set_help_flag("--help", "print help");
  int threads = hardware_threads();
  app.add_option("--threads", threads, "engine parallelism cap");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "run the Euler scheme");
  std::string sim_model, sim_plan, sim_state, sim_out = "traj.csv";
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false, sim_binary = false;
  sim->add_option("--model", sim_model, "model json")->required();
  sim->add_option("--plan", sim_plan, "plan json")->required();
  sim->add_option("--state", sim_state, "initial state json")->required();
  sim->add_option("--seed", sim_seed, "seed (overrides plan)")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim->add_option("--out", sim_out, "output csv (replicate index appended)");
  sim->add_flag("--binary", sim_binary, "also write the binary format");

  // ---- diagnose ----
  auto* diag = app.add_subcommand("diagnose", "estimate infinitesimal dispersion");
  std::string dg_model, dg_state, dg_out = "diag.json";
  std::string dg_h = "1e-3,5e-4";
  std::int64_t dg_M = 200000;
  std::uint64_t dg_seed = 0;
  diag->add_option("--model", dg_model)->required();
  diag->add_option("--state", dg_state)->required();
  diag->add_option("--h,--h-grid", dg_h, "comma-separated decreasing step sizes");
  diag->add_option("--M", dg_M, "replicates per step size");
  diag->add_option("--seed", dg_seed)->required();
  diag->add_option("--out", dg_out);

  // ---- filter ----
  auto* fil = app.add_subcommand("filter", "bootstrap particle filter loglik");
  std::string f_model, f_data, f_params, f_state, f_out = "filter.json";
  std::string f_incidence = "E->I";
  double f_t0 = 0.0, f_dt = 1.0 / 365.25;
  std::int64_t f_J = 2000;
  std::uint64_t f_seed = 0;
  fil->add_option("--model", f_model)->required();
  fil->add_option("--data", f_data)->required();
  fil->add_option("--params", f_params, "params json overriding model defaults");
  fil->add_option("--state", f_state, "initial state json")->required();
  fil->add_option("--incidence", f_incidence);
  fil->add_option("--t0", f_t0)->required();
  fil->add_option("--dt", f_dt);
  fil->add_option("--J", f_J);
  fil->add_option("--seed", f_seed)->required();
  fil->add_option("--out", f_out);

  // ---- mif ----
  auto* mif = app.add_subcommand("mif", "iterated filtering (IF2)");
  std::string m_model, m_data, m_params, m_state, m_out = "mif.json";
  std::string m_incidence = "E->I", m_estimate, m_transforms;
  double m_t0 = 0.0, m_dt = 1.0 / 365.25, m_cooling = 0.95, m_sd = 0.02;
  std::int64_t m_J = 2000;
  int m_iter = 50;
  std::uint64_t m_seed = 0;
  mif->add_option("--model", m_model)->required();
  mif->add_option("--data", m_data)->required();
  mif->add_option("--params", m_params);
  mif->add_option("--state", m_state)->required();
  mif->add_option("--incidence", m_incidence);
  mif->add_option("--t0", m_t0)->required();
  mif->add_option("--dt", m_dt);
  mif->add_option("--J", m_J);
  mif->add_option("--iterations", m_iter);
  mif->add_option("--cooling", m_cooling);
  mif->add_option("--sd", m_sd, "random-walk sd on the estimation scale");
  mif->add_option("--estimate", m_estimate, "comma-separated parameter names")
      ->required();
  mif->add_option("--transforms", m_transforms,
                  "comma-separated name=log|logit|identity overrides");
  mif->add_option("--seed", m_seed)->required();
  mif->add_option("--out", m_out);

  // ---- profile ----
  auto* prof = app.add_subcommand("profile", "profile likelihood over one parameter");
  std::string p_model, p_data, p_params, p_state, p_out = "profile.json";
  std::string p_incidence = "E->I", p_estimate, p_name, p_grid, p_transforms;
  double p_t0 = 0.0, p_dt = 1.0 / 365.25, p_cooling = 0.95, p_sd = 0.02;
  std::int64_t p_J = 2000;
  int p_iter = 20, p_reps = 3;
  std::uint64_t p_seed = 0;
  prof->add_option("--model", p_model)->required();
  prof->add_option("--data", p_data)->required();
  prof->add_option("--params", p_params);
  prof->add_option("--state", p_state)->required();
  prof->add_option("--incidence", p_incidence);
  prof->add_option("--t0", p_t0)->required();
  prof->add_option("--dt", p_dt);
  prof->add_option("--J", p_J);
  prof->add_option("--iterations", p_iter);
  prof->add_option("--cooling", p_cooling);
  prof->add_option("--sd", p_sd);
  prof->add_option("--estimate", p_estimate);
  prof->add_option("--transforms", p_transforms);
  prof->add_option("--name", p_name, "profiled parameter")->required();
  prof->add_option("--grid", p_grid, "comma-separated grid values")->required();
  prof->add_option("--reps", p_reps);
  prof->add_option("--seed", p_seed)->required();
  prof->add_option("--out", p_out);

  // ---- measles ----
  auto* mea = app.add_subcommand("measles", "SEIR case study");
  std::string s_config, s_mode = "desk", s_out = "report.json";
  mea->add_option("--config", s_config, "study toml")->required();
  mea->add_option("--mode", s_mode, "desk or full");
  mea->add_option("--out", s_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  Clock clock;
  std::string out_path;
  try {
    if (*sim) {
      out_path = sim_out;
      ModelBundle bundle = load_model_json(sim_model);
      SimulationPlan plan = load_plan_json(sim_plan);
      if (sim_seed_set) plan.seed = sim_seed;
      SystemState init = load_state_json(sim_state, bundle.model.graph);
      auto trajs = simulate(bundle.model, init, plan, threads);
      RunManifest man;
      man.command = "simulate";
      man.add_config(sim_model);
      man.add_config(sim_plan);
      man.add_config(sim_state);
      man.seed = plan.seed;
      man.threads = threads;
      for (std::size_t r = 0; r < trajs.size(); ++r) {
        std::string path = sim_out;
        if (trajs.size() > 1) {
          auto dot = path.rfind('.');
          path = path.substr(0, dot) + "_" + std::to_string(r) + path.substr(dot);
        }
        write_trajectory_csv(path, bundle.model, trajs[r]);
        man.outputs.push_back(path);
        if (sim_binary) {
          std::string bpath = path + ".bin";
          write_trajectory_binary(bpath, bundle.model, trajs[r]);
          man.outputs.push_back(bpath);
        }
      }
      man.wall_seconds = clock.seconds();
      man.write(manifest_path_for(sim_out));
    } else if (*diag) {
      out_path = dg_out;
      ModelBundle bundle = load_model_json(dg_model);
      SystemState state = load_state_json(dg_state, bundle.model.graph);
      InfinitesimalOptions opts;
      opts.h_grid.clear();
      {
        std::stringstream ss(dg_h);
        std::string tok;
        while (std::getline(ss, tok, ',')) opts.h_grid.push_back(std::stod(tok));
      }
      opts.replicates = dg_M;
      opts.seed = dg_seed;
      opts.threads = threads;
      std::vector<ArrowId> arrows;
      for (ArrowId a = 0; a < bundle.model.graph.n_arrows(); ++a)
        arrows.push_back(a);
      LabResult lab = estimate_infinitesimal(bundle.model, state, arrows, {}, opts);
      json j;
      json per = json::array();
      for (const auto& e : lab.arrows) {
        per.push_back({{"arrow", bundle.model.graph.arrow_name(e.arrow)},
                       {"mean_rate", e.mean_rate},
                       {"mean_se", e.mean_se},
                       {"var_rate", e.var_rate},
                       {"var_se", e.var_se},
                       {"D", e.index},
                       {"D_se", e.index_se}});
      }
      j["arrows"] = per;
      j["classification"] = to_string(classify_systemic(lab.arrows));
      j["boundary_redraws"] = lab.boundary_redraws;
      std::ofstream out(dg_out);
      out << j.dump(2) << '\n';
      RunManifest man;
      man.command = "diagnose";
      man.add_config(dg_model);
      man.add_config(dg_state);
      man.seed = dg_seed;
      man.threads = threads;
      man.outputs.push_back(dg_out);
      man.wall_seconds = clock.seconds();
      man.write(manifest_path_for(dg_out));
    } else if (*fil) {
      out_path = f_out;
      ModelBundle bundle = load_model_json(f_model);
      if (!f_params.empty()) apply_params_json(f_params, bundle.model);
      DataSeries data = load_data_csv(f_data);
      FilterModel fm =
          make_filter(bundle, data, f_incidence, f_t0, f_dt, f_state);
      FilterResult res = particle_filter(fm, bundle.model.param_defaults, f_J,
                                         f_seed, threads, true);
      json j;
      j["loglik"] = res.loglik;
      j["cond_logliks"] = res.cond_logliks;
      j["ess"] = res.ess;
      std::ofstream out(f_out);
      out << j.dump(2) << '\n';
      RunManifest man;
      man.command = "filter";
      man.add_config(f_model);
      man.add_config(f_data);
      man.add_config(f_state);
      if (!f_params.empty()) man.add_config(f_params);
      man.seed = f_seed;
      man.threads = threads;
      man.outputs.push_back(f_out);
      man.wall_seconds = clock.seconds();
      man.write(manifest_path_for(f_out));
    } else if (*mif || *prof) {
      bool is_mif = bool(*mif);
      out_path = is_mif ? m_out : p_out;
      std::string model_path = is_mif ? m_model : p_model;
      ModelBundle bundle = load_model_json(model_path);
      std::string params_path = is_mif ? m_params : p_params;
      if (!params_path.empty()) apply_params_json(params_path, bundle.model);
      DataSeries data = load_data_csv(is_mif ? m_data : p_data);
      FilterModel fm = make_filter(bundle, data, is_mif ? m_incidence : p_incidence,
                                   is_mif ? m_t0 : p_t0, is_mif ? m_dt : p_dt,
                                   is_mif ? m_state : p_state);
      // transform tags: log by default, overridable per name
      ParamSet ps;
      std::map<std::string, Transform> overrides;
      {
        std::stringstream ss(is_mif ? m_transforms : p_transforms);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          auto eq = tok.find('=');
          if (eq == std::string::npos) continue;
          overrides[tok.substr(0, eq)] =
              transform_from_string(tok.substr(eq + 1));
        }
      }
      for (std::size_t i = 0; i < bundle.model.params.names.size(); ++i) {
        const std::string& name = bundle.model.params.names[i];
        Transform t = Transform::Log;
        if (auto it = overrides.find(name); it != overrides.end()) t = it->second;
        ps.add(name, bundle.model.param_defaults[i], t);
      }
      ps.validate();
      Mif2Options mo;
      mo.iterations = is_mif ? m_iter : p_iter;
      mo.cooling = is_mif ? m_cooling : p_cooling;
      mo.J = is_mif ? m_J : p_J;
      mo.seed = is_mif ? m_seed : p_seed;
      mo.threads = threads;
      mo.rw_sd.assign(ps.values.size(), 0.0);
      {
        std::stringstream ss(is_mif ? m_estimate : p_estimate);
        std::string tok;
        while (std::getline(ss, tok, ','))
          if (!tok.empty())
            mo.rw_sd[std::size_t(ps.layout.index(tok))] = is_mif ? m_sd : p_sd;
      }
      json j;
      if (is_mif) {
        Mif2Result mr = iterated_filtering(fm, ps, mo);
        json jp = json::object();
        for (std::size_t i = 0; i < mr.params.size(); ++i)
          jp[ps.layout.names[i]] = mr.params[i];
        j["params"] = jp;
        j["loglik_trace"] = mr.loglik_trace;
      } else {
        std::vector<double> grid;
        std::stringstream ss(p_grid);
        std::string tok;
        while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
        ProfileOptions po;
        po.mif = mo;
        po.pf_particles = p_J;
        po.pf_replicates = p_reps;
        ProfileResult pr =
            profile_likelihood(fm, ps, ps.layout.index(p_name), grid, po);
        json pts = json::array();
        for (const auto& pt : pr.points)
          pts.push_back({{"value", pt.value},
                         {"loglik", pt.loglik},
                         {"se", pt.se},
                         {"ok", pt.ok},
                         {"error", pt.error}});
        j["points"] = pts;
        j["ci"] = {pr.ci_lo, pr.ci_hi};
        j["ci_ok"] = pr.ci_ok;
      }
      std::ofstream out(out_path);
      out << j.dump(2) << '\n';
      RunManifest man;
      man.command = is_mif ? "mif" : "profile";
      man.add_config(model_path);
      man.add_config(is_mif ? m_data : p_data);
      man.add_config(is_mif ? m_state : p_state);
      if (!params_path.empty()) man.add_config(params_path);
      man.seed = is_mif ? m_seed : p_seed;
      man.threads = threads;
      man.outputs.push_back(out_path);
      man.wall_seconds = clock.seconds();
      man.write(manifest_path_for(out_path));
    } else if (*mea) {
      out_path = s_out;
      StudyConfig cfg = StudyConfig::from_toml(s_config);
      cfg.threads = threads;
      Table1Report rep = reproduce_table1(cfg, s_mode);
      std::ofstream out(s_out);
      out << rep.json() << '\n';
      RunManifest man;
      man.command = "measles";
      man.add_config(s_config);
      man.seed = cfg.seed;
      man.threads = threads;
      man.outputs.push_back(s_out);
      man.extra.push_back({"mode", s_mode});
      man.wall_seconds = clock.seconds();
      man.write(manifest_path_for(s_out));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    write_error_json(out_path.empty() ? "error.json" : out_path + ".error.json",
                     e.what());
    // unreadable inputs are usage errors (exit 2); engine failures exit 1
    return std::string(e.what()).find("cannot open") != std::string::npos ? 2 : 1;
  }
  return 0;
}
