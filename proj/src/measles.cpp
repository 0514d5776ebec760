#include "dispersim/measles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dispersim/csv.hpp"
#include "dispersim/measurement.hpp"
#include "dispersim/sha256.hpp"
#include "dispersim/toml_lite.hpp"

namespace dispersim {

namespace {

constexpr double kWeekYears = 7.0 / 365.25;

void verify_manifest(const std::string& manifest_path,
                     const std::string& file) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open data manifest: " + manifest_path);
  nlohmann::json j;
  in >> j;
  std::string base = std::filesystem::path(file).filename().string();
  if (!j.contains(base)) return;  // unlisted files pass through
  std::string want = j.at(base).get<std::string>();
  std::string got = sha256_file_hex(file);
  if (want != got)
    throw std::runtime_error("checksum mismatch for " + base + ": manifest " +
                             want + ", file " + got);
}

}  // namespace

StudyConfig StudyConfig::from_toml(const std::string& path) {
  TomlLite t = TomlLite::parse_file(path);
  StudyConfig cfg;
  auto resolve = [&](const std::string& rel) {
    if (rel.empty()) return rel;
    std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(path).parent_path() / p).string();
  };
  cfg.cases_csv = resolve(t.get_string("data", "cases"));
  cfg.births_csv = resolve(t.get_string("data", "births"));
  cfg.population_csv = resolve(t.get_string("data", "population"));
  cfg.data_manifest = resolve(t.get_string("data", "manifest", ""));

  cfg.p = t.get_number("fixed", "p", cfg.p);
  cfg.birth_delay_years = t.get_number("fixed", "birth_delay_years", cfg.birth_delay_years);
  cfg.mortality = t.get_number("fixed", "mortality", cfg.mortality);
  cfg.admission_doy = t.get_number("fixed", "admission_doy", cfg.admission_doy);
  cfg.pulse_days = t.get_number("fixed", "pulse_days", cfg.pulse_days);

  cfg.noise = t.get_string("model", "noise", cfg.noise);
  cfg.incidence_arrow = t.get_string("model", "incidence_arrow", cfg.incidence_arrow);
  cfg.dt = t.get_number("model", "dt_days", 1.0) / kDaysPerYear;
  std::string cal = t.get_string("model", "term_calendar", cfg.term_calendar);
  cfg.term_calendar = cal == "default-england" ? cal : resolve(cal);

  cfg.R0 = t.get_number("params", "R0", cfg.R0);
  cfg.r_EI = t.get_number("params", "r_EI", cfg.r_EI);
  cfg.r_IR = t.get_number("params", "r_IR", cfg.r_IR);
  cfg.alpha = t.get_number("params", "alpha", cfg.alpha);
  cfg.iota = t.get_number("params", "iota", cfg.iota);
  cfg.theta_c = t.get_number("params", "theta_c", cfg.theta_c);
  cfg.theta_a = t.get_number("params", "theta_a", cfg.theta_a);
  cfg.rho = t.get_number("params", "rho", cfg.rho);
  cfg.psi = t.get_number("params", "psi", cfg.psi);
  cfg.c = t.get_number("params", "c", cfg.c);
  cfg.X_S0 = t.get_number("params", "X_S0", cfg.X_S0);
  cfg.X_E0 = t.get_number("params", "X_E0", cfg.X_E0);
  cfg.X_I0 = t.get_number("params", "X_I0", cfg.X_I0);
  cfg.X_R0 = t.get_number("params", "X_R0", cfg.X_R0);

  if (t.has("estimate", "names"))
    cfg.estimated = t.get_string_array("estimate", "names");
  cfg.rw_sd = t.get_number("estimate", "rw_sd", cfg.rw_sd);
  cfg.cooling = t.get_number("estimate", "cooling", cfg.cooling);
  cfg.mif_iterations = int(t.get_number("estimate", "iterations", cfg.mif_iterations));
  cfg.mif_J = std::int64_t(t.get_number("estimate", "J", double(cfg.mif_J)));
  cfg.filter_J = std::int64_t(t.get_number("filter", "J", double(cfg.filter_J)));
  cfg.filter_replicates = int(t.get_number("filter", "replicates", cfg.filter_replicates));
  cfg.seed = std::uint64_t(t.get_number("run", "seed", 1.0));
  cfg.threads = int(t.get_number("run", "threads", 1.0));
  return cfg;
}

std::unique_ptr<Study> build_study(const StudyConfig& cfg) {
  auto study = std::make_unique<Study>();
  study->config = cfg;

  if (!cfg.data_manifest.empty()) {
    verify_manifest(cfg.data_manifest, cfg.cases_csv);
    verify_manifest(cfg.data_manifest, cfg.births_csv);
    verify_manifest(cfg.data_manifest, cfg.population_csv);
  }

  // case series: weekly, contiguous
  CsvTable cases = read_csv(cfg.cases_csv);
  int date_col = cases.column("date");
  int case_col = cases.column("cases");
  if (date_col < 0 || case_col < 0)
    throw std::runtime_error("cases csv needs 'date' and 'cases' columns");
  for (const auto& row : cases.rows) {
    study->data_times.push_back(row[std::size_t(date_col)]);
    study->data_cases.push_back(row[std::size_t(case_col)]);
  }
  if (study->data_times.size() < 2)
    throw std::runtime_error("cases series too short");
  for (std::size_t i = 1; i < study->data_times.size(); ++i) {
    double gap = study->data_times[i] - study->data_times[i - 1];
    if (std::fabs(gap - kWeekYears) > 0.1 * kWeekYears)
      throw std::runtime_error("non-weekly cadence in case series at row " +
                               std::to_string(i));
  }

  // covariates: births (delayed recruitment) and census population
  CsvTable births = read_csv(cfg.births_csv);
  CsvTable pop = read_csv(cfg.population_csv);
  int bt = births.column("time"), bv = births.column("births");
  int pt = pop.column("time"), pv = pop.column("pop");
  if (bt < 0 || bv < 0) throw std::runtime_error("births csv needs time,births");
  if (pt < 0 || pv < 0) throw std::runtime_error("population csv needs time,pop");

  std::vector<double> grid;
  std::vector<double> bcol, pcol;
  for (const auto& r : births.rows) {
    grid.push_back(r[std::size_t(bt)]);
    bcol.push_back(r[std::size_t(bv)]);
  }
  // interpolate population onto the births grid if grids differ
  {
    std::vector<double> pgrid, pvals;
    for (const auto& r : pop.rows) {
      pgrid.push_back(r[std::size_t(pt)]);
      pvals.push_back(r[std::size_t(pv)]);
    }
    CovariateTable ptab(pgrid, {"pop"}, {pvals}, {Interp::Linear});
    for (double t : grid) pcol.push_back(ptab.value(0, t));
  }
  study->bundle.covariates = std::make_shared<CovariateTable>(
      grid, std::vector<std::string>{"births", "pop"},
      std::vector<std::vector<double>>{bcol, pcol},
      std::vector<Interp>{Interp::Linear, Interp::Linear});

  double t0 = study->data_times.front() - kWeekYears;
  double t_end = study->data_times.back();
  const CovariateTable& cov = *study->bundle.covariates;
  if (cov.t_min() > t0 - cfg.birth_delay_years || cov.t_max() < t_end)
    throw std::runtime_error("covariates do not cover the observation window");

  auto forcing = std::make_shared<SeasonalForcing>();
  forcing->p = cfg.p;
  forcing->calendar = cfg.term_calendar == "default-england"
                          ? TermCalendar::default_england()
                          : TermCalendar::from_json_file(cfg.term_calendar);
  SeasonalForcing::validate_theta_a(cfg.theta_a, cfg.p);
  study->bundle.forcing = forcing;

  // parameters with transforms; initial fractions normalized onto the simplex
  ParamSet ps;
  ps.add("R0", cfg.R0, Transform::Log);
  ps.add("r_EI", cfg.r_EI, Transform::Log);
  ps.add("r_IR", cfg.r_IR, Transform::Log);
  ps.add("alpha", cfg.alpha, Transform::Log);
  ps.add("iota", cfg.iota, Transform::Log);
  ps.add("theta_c", cfg.theta_c, Transform::Logit);
  ps.add("theta_a", cfg.theta_a, Transform::Logit);
  ps.add("rho", cfg.rho, Transform::Logit);
  ps.add("psi", cfg.psi, Transform::Log);
  ps.add("c", cfg.c, Transform::Log);
  double frac_sum = cfg.X_S0 + cfg.X_E0 + cfg.X_I0 + cfg.X_R0;
  if (!(frac_sum > 0.0)) throw std::runtime_error("initial fractions must sum > 0");
  int i_s = ps.add("X_S0", cfg.X_S0 / frac_sum, Transform::Simplex);
  int i_e = ps.add("X_E0", cfg.X_E0 / frac_sum, Transform::Simplex);
  int i_i = ps.add("X_I0", cfg.X_I0 / frac_sum, Transform::Simplex);
  int i_r = ps.add("X_R0", cfg.X_R0 / frac_sum, Transform::Simplex);
  ps.simplex_groups.push_back({i_s, i_e, i_i, i_r});
  ps.validate();

  // SEIR graph; B and D close the system off
  DirectedGraph::Spec gspec;
  for (const char* v : {"B", "S", "E", "I", "R", "D"})
    gspec.vertices.push_back({v, "none"});
  gspec.arrows = {{"B", "S"}, {"S", "E"}, {"E", "I"}, {"I", "R"},
                  {"S", "D"}, {"E", "D"}, {"I", "D"}, {"R", "D"}};
  DirectedGraph graph = DirectedGraph::build(gspec);

  ParamLayout layout = ps.layout;
  RateContext ctx{study->bundle.covariates.get(), study->bundle.forcing.get()};
  RateSpec rates(graph, ctx);
  int births_col = cov.column("births");
  int pop_col = cov.column("pop");
  rates.set(graph.arrow_index("B", "S"),
            rate_recruitment(births_col, cfg.birth_delay_years,
                             Coef::ref(layout.index("theta_c")),
                             cfg.admission_doy, cfg.pulse_days));
  rates.set(graph.arrow_index("S", "E"),
            rate_force_of_infection(
                {Coef::ref(layout.index("R0")), Coef::ref(layout.index("r_IR"))},
                Coef::ref(layout.index("theta_a")),
                Coef::ref(layout.index("iota")),
                Coef::ref(layout.index("alpha")), graph.vertex_index("I"),
                pop_col));
  rates.set(graph.arrow_index("E", "I"),
            rate_constant(Coef::ref(layout.index("r_EI"))));
  rates.set(graph.arrow_index("I", "R"),
            rate_constant(Coef::ref(layout.index("r_IR"))));
  for (const char* tail : {"S", "E", "I", "R"})
    rates.set(graph.arrow_index(tail, "D"),
              rate_constant(Coef::lit(cfg.mortality)));

  GroupingPolicy policy;
  policy.groups.push_back({GroupKind::Singleton, {{"B", "S"}}});
  policy.groups.push_back({GroupKind::OutgoingStar, {{"S", "E"}, {"S", "D"}}});
  policy.groups.push_back({GroupKind::OutgoingStar, {{"E", "I"}, {"E", "D"}}});
  policy.groups.push_back({GroupKind::OutgoingStar, {{"I", "R"}, {"I", "D"}}});
  policy.groups.push_back({GroupKind::Singleton, {{"R", "D"}}});

  std::vector<KernelSpec> kernels(policy.groups.size());
  kernels[0] = {KernelLaw::SourcePoisson, 0.0, -1};
  if (cfg.noise == "dirichlet-multinomial") {
    kernels[1] = {KernelLaw::DirichletMultinomial, cfg.c, layout.index("c")};
  } else if (cfg.noise == "equi") {
    kernels[1] = {KernelLaw::EquiMultinomial, 0.0, -1};
  } else {
    throw std::runtime_error("unknown study noise setting: " + cfg.noise);
  }
  kernels[2] = {KernelLaw::EquiMultinomial, 0.0, -1};
  kernels[3] = {KernelLaw::EquiMultinomial, 0.0, -1};
  kernels[4] = {KernelLaw::EquiMultinomial, 0.0, -1};

  Model& model = study->bundle.model;
  model.graph = std::move(graph);
  model.groups = partition_arrow_groups(model.graph, policy);
  model.kernels = std::move(kernels);
  model.rates = std::move(rates);
  model.params = layout;
  model.param_defaults = ps.values;
  model.validate();

  study->params = std::move(ps);

  // filter binding
  FilterModel& fm = study->filter;
  fm.model = &model;
  fm.incidence_arrow = [&] {
    auto sep = cfg.incidence_arrow.find("->");
    if (sep == std::string::npos)
      throw std::runtime_error("incidence arrow must look like E->I");
    return model.graph.arrow_index(cfg.incidence_arrow.substr(0, sep),
                                   cfg.incidence_arrow.substr(sep + 2));
  }();
  fm.t0 = t0;
  fm.dt = cfg.dt;
  fm.obs_times = study->data_times;
  fm.observations = study->data_cases;
  int rho_idx = layout.index("rho");
  int psi_idx = layout.index("psi");
  fm.log_dmeasure = [rho_idx, psi_idx](double y, double C,
                                       std::span<const double> params) {
    return dmeasure(y, C, params[std::size_t(rho_idx)],
                    params[std::size_t(psi_idx)]);
  };
  const Model* model_ptr = &model;
  auto cov_ptr = study->bundle.covariates;
  int xs = layout.index("X_S0"), xe = layout.index("X_E0"),
      xi = layout.index("X_I0"), xr = layout.index("X_R0");
  double study_t0 = t0;
  int pop_ci = pop_col;
  fm.make_init = [model_ptr, cov_ptr, xs, xe, xi, xr, study_t0,
                  pop_ci](std::span<const double> params) {
    SystemState s = SystemState::zero(model_ptr->graph);
    s.time = study_t0;
    double n0 = cov_ptr->value(pop_ci, study_t0);
    double fs = params[std::size_t(xs)], fe = params[std::size_t(xe)],
           fi = params[std::size_t(xi)], fr = params[std::size_t(xr)];
    double sum = fs + fe + fi + fr;
    s.counts[std::size_t(model_ptr->graph.vertex_index("S"))] =
        std::llround(fs / sum * n0);
    s.counts[std::size_t(model_ptr->graph.vertex_index("E"))] =
        std::llround(fe / sum * n0);
    s.counts[std::size_t(model_ptr->graph.vertex_index("I"))] =
        std::llround(fi / sum * n0);
    s.counts[std::size_t(model_ptr->graph.vertex_index("R"))] =
        std::llround(fr / sum * n0);
    return s;
  };

  // deterministic digest of everything that defines the study
  {
    std::ostringstream os;
    os << cfg.noise << '|' << cfg.incidence_arrow << '|' << cfg.p << '|'
       << cfg.birth_delay_years << '|' << cfg.mortality << '|'
       << cfg.admission_doy << '|' << cfg.pulse_days << '|' << cfg.dt;
    for (std::size_t i = 0; i < study->params.values.size(); ++i)
      os << '|' << study->params.layout.names[i] << '=' << study->params.values[i];
    os << '|' << sha256_file_hex(cfg.cases_csv)
       << '|' << sha256_file_hex(cfg.births_csv)
       << '|' << sha256_file_hex(cfg.population_csv);
    study->model_hash = sha256_hex(os.str());
  }
  return study;
}

std::string Table1Report::json() const {
  nlohmann::json j;
  j["dirichlet"] = {{"loglik", dirichlet_loglik}, {"se", dirichlet_se}};
  j["equi"] = {{"loglik", equi_loglik}, {"se", equi_se}};
  j["dirichlet_beats_equi"] = dirichlet_beats_equi;
  nlohmann::json jp = nlohmann::json::object();
  for (const auto& [k, v] : params) jp[k] = v;
  j["params"] = jp;
  if (full_mode) {
    nlohmann::json jm = nlohmann::json::object();
    for (const auto& [k, v] : mle) jm[k] = v;
    j["mle"] = jm;
    j["mle_loglik"] = mle_loglik;
    j["r0_profile_ci"] = {r0_ci_lo, r0_ci_hi};
  }
  return j.dump(2);
}

void synthesize_case_series(const StudyConfig& cfg, double t_first, int weeks,
                            std::uint64_t seed) {
  {
    // placeholder series so the study assembles against the right grid
    std::ofstream out(cfg.cases_csv);
    if (!out) throw std::runtime_error("cannot write " + cfg.cases_csv);
    out.precision(12);
    out << "date,cases\n";
    for (int k = 1; k <= weeks; ++k)
      out << t_first + double(k) * kWeekYears << ",0\n";
  }
  auto study = build_study(cfg);
  SystemState s = study->filter.make_init(study->params.values);
  s.time = study->filter.t0;
  RngStream meas = make_stream(seed, std::uint64_t(StreamPurpose::Synthesize), 1);
  std::vector<double> cases;
  std::int64_t flow_before = 0;
  for (double t_next : study->filter.obs_times) {
    std::uint64_t key =
        make_stream(seed, std::uint64_t(StreamPurpose::Synthesize),
                    2, std::uint64_t(cases.size()))();
    advance_state(study->bundle.model, s, t_next, cfg.dt, study->params.values,
                  key);
    double C = double(s.flows[std::size_t(study->filter.incidence_arrow)] -
                      flow_before);
    flow_before = s.flows[std::size_t(study->filter.incidence_arrow)];
    double mean = cfg.rho * C;
    double var =
        cfg.rho * (1 - cfg.rho) * C + (cfg.psi * mean) * (cfg.psi * mean);
    double y = mean + std::sqrt(std::max(var, 1e-8)) * normal01(meas);
    cases.push_back(std::max(0.0, std::round(y)));
  }
  std::ofstream out(cfg.cases_csv);
  if (!out) throw std::runtime_error("cannot write " + cfg.cases_csv);
  out.precision(12);
  out << "date,cases\n";
  for (std::size_t k = 0; k < cases.size(); ++k)
    out << study->filter.obs_times[k] << ',' << cases[k] << '\n';
}

Table1Report reproduce_table1(const StudyConfig& cfg, const std::string& mode) {
  if (mode != "desk" && mode != "full")
    throw std::runtime_error("mode must be desk or full");
  Table1Report rep;

  auto study = build_study(cfg);
  auto rl = replicated_loglik(study->filter, study->params.values,
                              cfg.filter_J, cfg.filter_replicates, cfg.seed,
                              cfg.threads);
  rep.dirichlet_loglik = rl.logmeanexp;
  rep.dirichlet_se = rl.se;

  StudyConfig equi_cfg = cfg;
  equi_cfg.noise = "equi";
  auto equi = build_study(equi_cfg);
  auto rle = replicated_loglik(equi->filter, equi->params.values,
                               cfg.filter_J, cfg.filter_replicates, cfg.seed,
                               cfg.threads);
  rep.equi_loglik = rle.logmeanexp;
  rep.equi_se = rle.se;
  rep.dirichlet_beats_equi = rep.dirichlet_loglik > rep.equi_loglik;

  for (std::size_t i = 0; i < study->params.values.size(); ++i)
    rep.params.push_back(
        {study->params.layout.names[i], study->params.values[i]});

  if (mode == "full") {
    rep.full_mode = true;
    Mif2Options mo;
    mo.iterations = cfg.mif_iterations;
    mo.cooling = cfg.cooling;
    mo.J = cfg.mif_J;
    mo.seed = cfg.seed;
    mo.threads = cfg.threads;
    mo.rw_sd.assign(study->params.values.size(), 0.0);
    for (const auto& name : cfg.estimated)
      mo.rw_sd[std::size_t(study->params.layout.index(name))] = cfg.rw_sd;
    Mif2Result mr = iterated_filtering(study->filter, study->params, mo);
    auto rl_mle = replicated_loglik(study->filter, mr.params, cfg.filter_J,
                                    cfg.filter_replicates, cfg.seed + 1,
                                    cfg.threads);
    rep.mle_loglik = rl_mle.logmeanexp;
    for (std::size_t i = 0; i < mr.params.size(); ++i)
      rep.mle.push_back({study->params.layout.names[i], mr.params[i]});

    // R0 profile with alpha fixed at 1
    ParamSet prof_start = study->params;
    prof_start.set("alpha", 1.0);
    for (std::size_t i = 0; i < mr.params.size(); ++i)
      if (study->params.layout.names[i] != "alpha")
        prof_start.values[i] = mr.params[i];
    ProfileOptions po;
    po.mif = mo;
    po.mif.rw_sd[std::size_t(study->params.layout.index("alpha"))] = 0.0;
    po.pf_particles = cfg.filter_J;
    po.pf_replicates = cfg.filter_replicates;
    double r0_hat = prof_start.get("R0");
    std::vector<double> grid;
    for (double f = 0.7; f <= 1.5001; f += 0.1) grid.push_back(r0_hat * f);
    ProfileResult pr = profile_likelihood(
        study->filter, prof_start, study->params.layout.index("R0"), grid, po);
    rep.r0_ci_lo = pr.ci_lo;
    rep.r0_ci_hi = pr.ci_hi;
  }
  return rep;
}

}  // namespace dispersim
