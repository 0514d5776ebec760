// Regenerates the bundled data files: London-style demographic
// covariates, the default term calendar, a synthetic stand-in for the
// weekly case series (simulated from the study model at its configured
// parameters), the two-year test fixture, and the checksum manifest.
//
//   make_fixtures --out <repo-root>
//
// The real 1950-1964 London case series is not redistributed here; see
// the README for how to point the study at it.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <json.hpp>

#include "dispersim/csv.hpp"
#include "dispersim/forcing.hpp"
#include "dispersim/measles.hpp"
#include "dispersim/sha256.hpp"

using namespace dispersim;
namespace fs = std::filesystem;

namespace {

void write_demography(const std::string& data_dir) {
  // smooth London-like series: post-war birth peak decaying to the
  // mid-50s plateau; population drifting down from 3.39M
  std::ofstream births(data_dir + "/london_births.csv");
  births << "time,births\n";
  for (int y = 1939; y <= 1966; ++y) {
    double t = double(y);
    double boom = 20000.0 * std::exp(-0.5 * (t - 1947.0) * (t - 1947.0) / 9.0);
    double base = 52000.0 + 3000.0 * std::exp(-(t - 1939.0) / 8.0);
    births << y << ".0," << std::llround(base + boom) << "\n";
  }
  std::ofstream pop(data_dir + "/london_population.csv");
  pop << "time,pop\n";
  for (int y = 1939; y <= 1966; ++y) {
    double p = 3389306.0 - 12000.0 * (y - 1950);
    pop << y << ".0," << std::llround(p) << "\n";
  }
}

void write_calendar(const std::string& data_dir) {
  TermCalendar cal = TermCalendar::default_england();
  nlohmann::json j = nlohmann::json::array();
  for (const auto& iv : cal.intervals)
    j.push_back({{"start_doy", iv.start_doy}, {"end_doy", iv.end_doy}});
  std::ofstream out(data_dir + "/term_calendar.json");
  out << j.dump(2) << '\n';
}

void subset_weeks(const std::string& src, const std::string& dst, int weeks) {
  CsvTable t = read_csv(src);
  std::ofstream out(dst);
  out.precision(12);
  out << "date,cases\n";
  for (int i = 0; i < weeks && i < int(t.rows.size()); ++i)
    out << t.rows[std::size_t(i)][0] << ',' << t.rows[std::size_t(i)][1] << '\n';
}

void write_manifest(const std::string& data_dir,
                    const std::vector<std::string>& files) {
  nlohmann::json j;
  for (const auto& f : files)
    j[fs::path(f).filename().string()] = sha256_file_hex(f);
  std::ofstream out(data_dir + "/MANIFEST.json");
  out << j.dump(2) << '\n';
}

void write_study_configs(const std::string& root) {
  std::ofstream desk(root + "/configs/study_desk.toml");
  desk << R"(# Desk-scale study against the bundled two-year fixture.
[data]
cases = "../data/fixture_2yr/cases.csv"
births = "../data/london_births.csv"
population = "../data/london_population.csv"
manifest = "../data/MANIFEST.json"

[fixed]
p = 0.7589
birth_delay_years = 4
mortality = 0.02
admission_doy = 251
pulse_days = 1

[model]
noise = "dirichlet-multinomial"
incidence_arrow = "E->I"
dt_days = 1
term_calendar = "default-england"

[params]
R0 = 34.09
r_EI = 52.71
r_IR = 22.88
alpha = 1.017
iota = 55.08
theta_c = 1.0
theta_a = 0.48
rho = 0.492
psi = 0.118
c = 652.8
X_S0 = 0.032
X_E0 = 6.99e-5
X_I0 = 4.52e-5
X_R0 = 0.968

[filter]
J = 2000
replicates = 5

[run]
seed = 2057
)";

  std::ofstream full(root + "/configs/study_full.toml");
  full << R"(# Full study configuration: point [data] cases at the real London
# 1950-1964 weekly series to reproduce the published numbers; the
# bundled file is a synthetic stand-in simulated from this same model.
[data]
cases = "../data/london_cases_synth.csv"
births = "../data/london_births.csv"
population = "../data/london_population.csv"
manifest = "../data/MANIFEST.json"

[fixed]
p = 0.7589
birth_delay_years = 4
mortality = 0.02
admission_doy = 251
pulse_days = 1

[model]
noise = "dirichlet-multinomial"
incidence_arrow = "E->I"
dt_days = 1
term_calendar = "default-england"

[params]
R0 = 34.09
r_EI = 52.71
r_IR = 22.88
alpha = 1.017
iota = 55.08
theta_c = 1.0
theta_a = 0.48
rho = 0.492
psi = 0.118
c = 652.8
X_S0 = 0.032
X_E0 = 6.99e-5
X_I0 = 4.52e-5
X_R0 = 0.968

[estimate]
names = ["R0", "r_EI", "r_IR", "alpha", "iota", "theta_c", "theta_a", "rho", "psi", "c", "X_S0", "X_E0", "X_I0"]
rw_sd = 0.02
cooling = 0.95
iterations = 50
J = 2000

[filter]
J = 10000
replicates = 10

[run]
seed = 2057
)";
}

}  // namespace

int main(int argc, char** argv) {
  std::string root = ".";
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--out" && i + 1 < argc) root = argv[++i];

  try {
    std::string data_dir = root + "/data";
    fs::create_directories(data_dir);
    fs::create_directories(data_dir + "/fixture_2yr");
    fs::create_directories(root + "/configs");

    write_demography(data_dir);
    write_calendar(data_dir);

    StudyConfig cfg;
    cfg.cases_csv = data_dir + "/london_cases_synth.csv";
    cfg.births_csv = data_dir + "/london_births.csv";
    cfg.population_csv = data_dir + "/london_population.csv";
    std::cout << "synthesizing 15 years of weekly cases...\n";
    synthesize_case_series(cfg, 1950.0, 15 * 52, 19501964);
    subset_weeks(cfg.cases_csv, data_dir + "/fixture_2yr/cases.csv", 104);

    write_manifest(data_dir, {
                                 data_dir + "/london_births.csv",
                                 data_dir + "/london_population.csv",
                                 data_dir + "/london_cases_synth.csv",
                                 data_dir + "/fixture_2yr/cases.csv",
                             });
    write_study_configs(root);

    CsvTable t = read_csv(cfg.cases_csv);
    double total = 0.0, peak = 0.0;
    for (const auto& r : t.rows) {
      total += r[1];
      peak = std::max(peak, r[1]);
    }
    std::cout << "cases: " << t.rows.size() << " weeks, mean "
              << total / double(t.rows.size()) << ", peak " << peak << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
