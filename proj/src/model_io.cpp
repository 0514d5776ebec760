#include "dispersim/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dispersim {

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("bad json in " + path + ": " + e.what());
  }
  return j;
}

std::string sibling_path(const std::string& anchor, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(anchor).parent_path() / p).string();
}

Coef parse_coef(const json& j, ParamLayout& layout) {
  if (j.is_number()) return Coef::lit(j.get<double>());
  if (j.is_object() && j.contains("param"))
    return Coef::ref(layout.index(j.at("param").get<std::string>()));
  throw std::runtime_error("coefficient must be a number or {\"param\": name}");
}

GroupKind group_kind_from_string(const std::string& s) {
  if (s == "outgoing-star") return GroupKind::OutgoingStar;
  if (s == "incoming-star") return GroupKind::IncomingStar;
  if (s == "color-matched-bounded") return GroupKind::ColorMatchedBounded;
  if (s == "color-matched-unbounded") return GroupKind::ColorMatchedUnbounded;
  if (s == "singleton") return GroupKind::Singleton;
  throw std::runtime_error("unknown group kind: " + s);
}

RateExprPtr parse_rate(const json& j, const DirectedGraph& g,
                       ParamLayout& layout, const CovariateTable* cov) {
  std::string form = j.at("form").get<std::string>();
  auto covariate_column = [&](const std::string& key) {
    if (!cov) throw std::runtime_error("rate form needs covariates, none given");
    return cov->column(j.at(key).get<std::string>());
  };
  if (form == "constant") return rate_constant(parse_coef(j.at("value"), layout));
  if (form == "covariate") return rate_covariate(covariate_column("name"));
  if (form == "count")
    return rate_count(g.vertex_index(j.at("vertex").get<std::string>()));
  if (form == "power")
    return rate_power(parse_rate(j.at("base"), g, layout, cov),
                      parse_coef(j.at("exponent"), layout));
  if (form == "product") {
    std::vector<RateExprPtr> factors;
    for (const auto& f : j.at("factors"))
      factors.push_back(parse_rate(f, g, layout, cov));
    return rate_product(std::move(factors));
  }
  if (form == "force-of-infection") {
    std::vector<Coef> beta;
    const json& jb = j.at("beta");
    if (jb.is_array())
      for (const auto& f : jb) beta.push_back(parse_coef(f, layout));
    else
      beta.push_back(parse_coef(jb, layout));
    Coef theta_a = j.contains("theta_a") ? parse_coef(j.at("theta_a"), layout)
                                         : Coef::lit(0.0);
    Coef iota = j.contains("iota") ? parse_coef(j.at("iota"), layout)
                                   : Coef::lit(0.0);
    Coef alpha = j.contains("alpha") ? parse_coef(j.at("alpha"), layout)
                                     : Coef::lit(1.0);
    return rate_force_of_infection(
        std::move(beta), theta_a, iota, alpha,
        g.vertex_index(j.at("infectious").get<std::string>()),
        covariate_column("population"));
  }
  if (form == "recruitment") {
    return rate_recruitment(
        covariate_column("births"),
        j.value("delay_years", 0.0),
        j.contains("cohort") ? parse_coef(j.at("cohort"), layout) : Coef::lit(0.0),
        j.value("admission_doy", 251.0), j.value("pulse_days", 1.0));
  }
  throw std::runtime_error("unknown rate form: " + form);
}

}  // namespace

ModelBundle load_model_json(const std::string& path) {
  json j = load_json_file(path);
  ModelBundle bundle;

  DirectedGraph::Spec gspec;
  for (const auto& v : j.at("vertices"))
    gspec.vertices.push_back(
        {v.at("id").get<std::string>(), v.value("color", std::string("none"))});
  for (const auto& a : j.at("arrows"))
    gspec.arrows.push_back(
        {a.at("tail").get<std::string>(), a.at("head").get<std::string>()});
  DirectedGraph graph = DirectedGraph::build(gspec);

  if (j.contains("covariates")) {
    const json& jc = j.at("covariates");
    std::vector<std::pair<std::string, Interp>> interp;
    if (jc.contains("interp")) {
      for (auto it = jc.at("interp").begin(); it != jc.at("interp").end(); ++it) {
        std::string mode = it.value().get<std::string>();
        if (mode != "linear" && mode != "step")
          throw std::runtime_error("interp must be linear or step");
        interp.push_back(
            {it.key(), mode == "step" ? Interp::Step : Interp::Linear});
      }
    }
    bundle.covariates = std::make_shared<CovariateTable>(CovariateTable::from_csv(
        sibling_path(path, jc.at("file").get<std::string>()), interp));
  }

  if (j.contains("forcing")) {
    const json& jf = j.at("forcing");
    auto forcing = std::make_shared<SeasonalForcing>();
    forcing->p = jf.value("p", 0.7589);
    std::string cal = jf.value("calendar", std::string("default-england"));
    forcing->calendar = cal == "default-england"
                            ? TermCalendar::default_england()
                            : TermCalendar::from_json_file(sibling_path(path, cal));
    bundle.forcing = std::move(forcing);
  }

  ParamLayout layout;
  std::vector<double> defaults;
  if (j.contains("params")) {
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
      layout.add(it.key());
      defaults.push_back(it.value().get<double>());
    }
  }

  RateContext ctx{bundle.covariates.get(), bundle.forcing.get()};
  RateSpec rates(graph, ctx);
  const json& jr = j.at("rates");
  for (ArrowId a = 0; a < graph.n_arrows(); ++a) {
    std::string name = graph.arrow_name(a);
    if (!jr.contains(name))
      throw std::runtime_error("model json: no rate for arrow " + name);
    rates.set(a, parse_rate(jr.at(name), graph, layout, bundle.covariates.get()));
  }

  GroupingPolicy policy;
  for (const auto& grp : j.at("groups")) {
    GroupingPolicy::GroupSpec gs;
    gs.kind = group_kind_from_string(grp.at("kind").get<std::string>());
    for (const auto& m : grp.at("members"))
      gs.members.push_back(
          {m.at(0).get<std::string>(), m.at(1).get<std::string>()});
    policy.groups.push_back(std::move(gs));
  }
  std::vector<ArrowGroup> groups = partition_arrow_groups(graph, policy);

  std::vector<KernelSpec> kernels;
  for (const auto& grp : j.at("groups")) {
    KernelSpec ks;
    const json& jk = grp.at("kernel");
    ks.law = kernel_law_from_string(jk.at("law").get<std::string>());
    ks.c = jk.value("c", 0.0);
    kernels.push_back(ks);
  }

  bundle.model.graph = std::move(graph);
  bundle.model.groups = std::move(groups);
  bundle.model.kernels = std::move(kernels);
  bundle.model.rates = std::move(rates);
  bundle.model.params = std::move(layout);
  bundle.model.param_defaults = std::move(defaults);
  bundle.model.validate();
  return bundle;
}

SystemState load_state_json(const std::string& path, const DirectedGraph& g) {
  json j = load_json_file(path);
  SystemState s = SystemState::zero(g);
  s.time = j.value("time", 0.0);
  const json& counts = j.at("counts");
  for (auto it = counts.begin(); it != counts.end(); ++it)
    s.counts[std::size_t(g.vertex_index(it.key()))] =
        it.value().get<std::int64_t>();
  return s;
}

SimulationPlan load_plan_json(const std::string& path) {
  json j = load_json_file(path);
  SimulationPlan plan;
  plan.t0 = j.at("t0").get<double>();
  plan.t1 = j.at("t1").get<double>();
  plan.dt = j.at("dt").get<double>();
  plan.seed = j.value("seed", 0ULL);
  plan.replicates = j.value("replicates", 1);
  if (j.contains("record_times")) {
    for (const auto& t : j.at("record_times"))
      plan.record_times.push_back(t.get<double>());
  } else {
    long every = j.value("record_every", 1L);
    long n = std::lround((plan.t1 - plan.t0) / plan.dt);
    for (long i = 0; i <= n; i += every)
      plan.record_times.push_back(plan.t0 + double(i) * plan.dt);
  }
  plan.validate();
  return plan;
}

void apply_params_json(const std::string& path, Model& model) {
  json j = load_json_file(path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    int idx = model.params.index(it.key());
    model.param_defaults[std::size_t(idx)] = it.value().get<double>();
  }
}

}  // namespace dispersim
