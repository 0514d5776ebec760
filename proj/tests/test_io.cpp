#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "dispersim/csv.hpp"
#include "dispersim/manifest.hpp"
#include "dispersim/model_io.hpp"
#include "dispersim/sha256.hpp"
#include "dispersim/toml_lite.hpp"

using namespace dispersim;

namespace {

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
        "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
}

TEST_CASE("csv round trip") {
  write_csv("io_test.csv", {"time", "x"}, {{0.0, 1.5}, {1.0, 2.5}});
  CsvTable t = read_csv("io_test.csv");
  REQUIRE(t.header.size() == 2);
  CHECK(t.column("x") == 1);
  CHECK(t.rows[1][1] == doctest::Approx(2.5));
  CHECK_THROWS(read_csv("does_not_exist.csv"));
}

TEST_CASE("toml subset parsing") {
  write_file("io_test.toml", R"([data]
cases = "a.csv"  # comment
n = 42
flag = true
names = ["x", "y"]
grid = [1.0, 2.5, 4]
)");
  TomlLite t = TomlLite::parse_file("io_test.toml");
  CHECK(t.get_string("data", "cases") == "a.csv");
  CHECK(t.get_number("data", "n") == 42.0);
  CHECK(t.get_bool("data", "flag", false));
  CHECK(t.get_string_array("data", "names") ==
        std::vector<std::string>{"x", "y"});
  CHECK(t.get_number_array("data", "grid") == std::vector<double>{1.0, 2.5, 4.0});
  CHECK(t.get_number("data", "absent", 7.0) == 7.0);
  CHECK_THROWS(t.get_number("data", "cases"));
  CHECK_THROWS(TomlLite::parse("key value", "inline"));
}

TEST_CASE("model json loads, validates, and simulates") {
  write_file("io_model.json", R"({
    "vertices": [{"id":"u"},{"id":"v"},{"id":"w"}],
    "arrows": [{"tail":"u","head":"v"},{"tail":"u","head":"w"}],
    "groups": [
      {"kind":"outgoing-star","members":[["u","v"],["u","w"]],
       "kernel":{"law":"dirichlet-multinomial","c":8.0}}
    ],
    "params": {"r1": 1.0},
    "rates": {
      "u->v": {"form":"constant","value":{"param":"r1"}},
      "u->w": {"form":"constant","value":0.5}
    }
  })");
  ModelBundle b = load_model_json("io_model.json");
  CHECK(b.model.graph.n_arrows() == 2);
  CHECK(b.model.kernels[0].law == KernelLaw::DirichletMultinomial);
  CHECK(b.model.param_defaults[0] == 1.0);

  write_file("io_state.json", R"({"time": 0, "counts": {"u": 100}})");
  SystemState s = load_state_json("io_state.json", b.model.graph);
  CHECK(s.counts[std::size_t(b.model.graph.vertex_index("u"))] == 100);

  write_file("io_plan.json",
             R"({"t0":0,"t1":0.5,"dt":0.01,"seed":4,"record_every":10})");
  SimulationPlan plan = load_plan_json("io_plan.json");
  CHECK(plan.record_times.size() == 6);

  auto trajs = simulate(b.model, s, plan, 1);
  REQUIRE(trajs.size() == 1);
  CHECK(trajs[0].times.size() == 6);

  write_file("io_params.json", R"({"r1": 2.5})");
  apply_params_json("io_params.json", b.model);
  CHECK(b.model.param_defaults[0] == 2.5);
}

TEST_CASE("model json rejects broken specs") {
  write_file("io_bad1.json", R"({
    "vertices": [{"id":"u"},{"id":"v"}],
    "arrows": [{"tail":"u","head":"v"}],
    "groups": [],
    "rates": {"u->v": {"form":"constant","value":1.0}}
  })");
  CHECK_THROWS(load_model_json("io_bad1.json"));  // arrow not covered

  write_file("io_bad2.json", R"({
    "vertices": [{"id":"u"},{"id":"v"}],
    "arrows": [{"tail":"u","head":"v"}],
    "groups": [{"kind":"singleton","members":[["u","v"]],
                "kernel":{"law":"dirichlet-multinomial"}}],
    "rates": {"u->v": {"form":"constant","value":1.0}}
  })");
  CHECK_THROWS(load_model_json("io_bad2.json"));  // missing c
}

TEST_CASE("manifest writes configs, seed, and outputs") {
  write_file("io_cfg.json", "{}");
  RunManifest man;
  man.command = "simulate";
  man.add_config("io_cfg.json");
  man.seed = 42;
  man.threads = 4;
  man.outputs.push_back("out.csv");
  man.write("io_manifest.json");

  std::ifstream in("io_manifest.json");
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(body.find("\"seed\": 42") != std::string::npos);
  CHECK(body.find("io_cfg.json") != std::string::npos);
  CHECK(body.find(sha256_file_hex("io_cfg.json")) != std::string::npos);
}

TEST_CASE("color-matched groups load from json and simulate") {
  write_file("io_color.json", R"({
    "vertices": [{"id":"s1","color":"purple"},{"id":"t1","color":"red"},
                 {"id":"s2","color":"purple"},{"id":"t2","color":"red"}],
    "arrows": [{"tail":"s1","head":"t1"},{"tail":"s2","head":"t2"}],
    "groups": [
      {"kind":"color-matched-bounded","members":[["s1","t1"],["s2","t2"]],
       "kernel":{"law":"beta-binomial-shared","c":6.0}}
    ],
    "rates": {
      "s1->t1": {"form":"constant","value":1.2},
      "s2->t2": {"form":"constant","value":1.2}
    }
  })");
  ModelBundle b = load_model_json("io_color.json");
  CHECK(b.model.groups[0].kind == GroupKind::ColorMatchedBounded);

  write_file("io_color_state.json", R"({"counts": {"s1": 30, "s2": 50}})");
  SystemState s = load_state_json("io_color_state.json", b.model.graph);
  write_file("io_color_plan.json",
             R"({"t0":0,"t1":1.0,"dt":0.01,"seed":2,"record_every":100})");
  SimulationPlan plan = load_plan_json("io_color_plan.json");
  auto trajs = simulate(b.model, s, plan, 1);
  // thinning conserves each pair's total
  auto& tr = trajs[0];
  std::size_t last = tr.times.size() - 1;
  CHECK(tr.count_at(last, b.model.graph.vertex_index("s1")) +
            tr.count_at(last, b.model.graph.vertex_index("t1")) ==
        30);
  CHECK(tr.count_at(last, b.model.graph.vertex_index("s2")) +
            tr.count_at(last, b.model.graph.vertex_index("t2")) ==
        50);
}

TEST_CASE("the bundled cholera example graph loads and simulates") {
  ModelBundle b = load_model_json(DISPERSIM_SOURCE_DIR "/configs/cholera_graph.json");
  CHECK(b.model.graph.n_vertices() == 10);
  CHECK(b.model.graph.n_arrows() == 11);
  SystemState s = load_state_json(
      DISPERSIM_SOURCE_DIR "/configs/cholera_state.json", b.model.graph);
  SimulationPlan plan;
  plan.t0 = 0.0;
  plan.t1 = 0.5;
  plan.dt = 0.005;
  plan.seed = 31;
  plan.record_times = {0.5};
  auto trajs = simulate(b.model, s, plan, 2);
  // flows moved and nothing went negative outside the unbounded head
  const auto& tr = trajs[0];
  std::int64_t total_flow = 0;
  for (ArrowId a = 0; a < b.model.graph.n_arrows(); ++a)
    total_flow += tr.flow_at(0, a);
  CHECK(total_flow > 0);
  for (VertexId v = 0; v < b.model.graph.n_vertices(); ++v)
    if (b.model.bounded_tail[std::size_t(v)])
      CHECK(tr.count_at(0, v) >= 0);
}
