#include "flexlink/scenario.hpp"
#include "flexlink/errors.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace flexlink;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const char* name) {
    return std::string(FLEXLINK_SCENARIO_DIR) + "/" + name;
}

nlohmann::json default_doc() {
    std::ifstream in(scenario_path("default.json"));
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return j;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("default scenario loads and gates pass") {
    const PreparedScenario prep = load_scenario_file(scenario_path("default.json"));
    CHECK(prep.hash.size() == 16);
    CHECK(prep.hierarchy.ok);
    CHECK(prep.q_report.gains_ok());
    CHECK(prep.systems.truth.n_modes == 2);
    CHECK(prep.systems.design.n_modes == 1);

    // bounds in the prepared scenario equal direct library calls
    const SettlingBounds direct = settling_bound_controller(prep.gains.controller);
    CHECK(prep.controller_bounds.total == direct.total);
    CHECK(prep.observer_bound ==
          settling_bound_observer(prep.systems.canon, prep.gains.observer));
}

TEST_CASE("schema violations name the offending field") {
    nlohmann::json doc = default_doc();
    doc["controller"].erase("eta");
    CHECK_THROWS_WITH_AS(scenario_from_json(doc), doctest::Contains("/controller"),
                         ConfigError);

    doc = default_doc();
    doc["beam"]["rho"] = "half";
    CHECK_THROWS_WITH_AS(scenario_from_json(doc), doctest::Contains("/beam/rho"),
                         ConfigError);

    doc = default_doc();
    doc["sim"]["plant_ic"] = {0.0, 0.0};
    CHECK_THROWS_WITH_AS(scenario_from_json(doc), doctest::Contains("/sim/plant_ic"),
                         ConfigError);

    doc = default_doc();
    doc["sim"]["t_end"] = 0.0;
    CHECK_THROWS_WITH_AS(scenario_from_json(doc), doctest::Contains("/sim/t_end"),
                         ConfigError);
}

TEST_CASE("assumption gates reject inconsistent disturbance settings") {
    // switching gain below the assumed disturbance bound
    nlohmann::json doc = default_doc();
    doc["controller"]["eta"] = 0.3;  // dist_bound stays 0.5
    CHECK_THROWS_WITH_AS(scenario_from_json(doc), doctest::Contains("eta"), ConfigError);

    // realized disturbance above the assumed bound
    doc = default_doc();
    doc["sim"]["disturbance"]["kind"] = "sine";
    doc["sim"]["disturbance"]["bound"] = 0.7;
    CHECK_THROWS_WITH_AS(prepare_scenario(scenario_from_json(doc)),
                         doctest::Contains("dist_bound"), ConfigError);
}

TEST_CASE("time hierarchy gate rejects slow observers") {
    nlohmann::json doc = default_doc();
    doc["observer"] = {{"poles", {-20.0, -22.0, -24.0, -26.0}},
                       {"k1_scale", 0.05},
                       {"k2_scale", 0.05},
                       {"mu1", 0.6},
                       {"mu2", 1.4}};
    CHECK_THROWS_WITH_AS(prepare_scenario(scenario_from_json(doc)),
                         doctest::Contains("time-scale"), ConfigError);
}

TEST_CASE("hash is stable and content sensitive") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
    CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
}

TEST_CASE("trace csv format is frozen and deterministic") {
    CHECK(trace_csv_header() ==
          "t,theta,theta_dot,p1,p1_dot,p2,p2_dot,"
          "z1,z2,z3,z4,zhat1,zhat2,zhat3,zhat4,"
          "s0,s1,s2,s3,u_raw,u_sat,theta_t,theta_c,xi,ey_norm");

    const PreparedScenario prep = load_scenario_file(scenario_path("default.json"));
    SimConfig cfg = prep.scenario.sim;
    cfg.t_end = 0.2;
    const SimTrace trace = run_scenario(cfg, prep.systems, prep.gains);

    const fs::path dir = fs::temp_directory_path() / "flexlink_csv_test";
    fs::create_directories(dir);
    write_trace_csv((dir / "a.csv").string(), trace, prep.hash);
    write_trace_csv((dir / "b.csv").string(), trace, prep.hash);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a.find("scenario_hash=" + prep.hash) != std::string::npos);
    CHECK(a.find(trace_csv_header()) != std::string::npos);

    size_t lines = 0;
    for (char ch : a)
        if (ch == '\n') ++lines;
    CHECK(lines == trace.size() + 2);  // comment + header + rows
    fs::remove_all(dir);
}

TEST_CASE("run summary carries metrics, bounds, and events") {
    const PreparedScenario prep = load_scenario_file(scenario_path("default.json"));
    SimConfig cfg = prep.scenario.sim;
    cfg.t_end = 1.0;
    const SimTrace trace = run_scenario(cfg, prep.systems, prep.gains);
    const nlohmann::json summary = summarize_run(prep, trace, ControllerSelect::proposed);

    CHECK(summary.at("scenario_hash") == prep.hash);
    CHECK(summary.at("controller") == "proposed");
    CHECK(summary.at("metrics").at("tip").contains("settling_time"));
    CHECK(summary.at("metrics").at("joint").contains("itae"));
    CHECK(summary.at("bounds").at("T_ctrl").get<double>() ==
          prep.controller_bounds.total);
    CHECK(summary.at("bounds").at("hierarchy_ok").get<bool>());
    CHECK(summary.at("events").contains("saturation_steps"));
    CHECK(summary.at("events").contains("boundary_dwell_fraction"));
}

TEST_CASE("plot script references the trace and the scenario hash") {
    const fs::path dir = fs::temp_directory_path() / "flexlink_plot_test";
    fs::create_directories(dir);
    write_plot_script((dir / "plot.gp").string(), "run_trace.csv", "deadbeef00000000");
    const std::string script = slurp(dir / "plot.gp");
    CHECK(script.find("run_trace.csv") != std::string::npos);
    CHECK(script.find("deadbeef00000000") != std::string::npos);
    CHECK(script.find("multiplot") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("sweep report serialization") {
    const PreparedScenario prep = load_scenario_file(scenario_path("ic_sweep.json"));
    SimConfig cfg = prep.scenario.sim;
    cfg.t_end = 4.0;
    const SweepReport report =
        sweep_initial_conditions(cfg, prep.systems, prep.gains, {1.0, -1.0});
    const nlohmann::json j = sweep_to_json(report, prep.hash);
    CHECK(j.at("runs").size() == 2);
    CHECK(j.at("runs").at(1).at("mirrored").get<bool>());
    CHECK(j.at("scenario_hash") == prep.hash);
}

TEST_CASE("cli artifacts match direct library invocation") {
    const char* cli = std::getenv("FLEXLINK_CLI");
    if (!cli) return;  // only meaningful under ctest where the path is provided

    const fs::path dir = fs::temp_directory_path() / "flexlink_cli_golden";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cmd = std::string("\"") + cli + "\" run " +
                            scenario_path("default.json") + " --out " + dir.string() +
                            " > " + (dir / "stdout.txt").string();
    REQUIRE(std::system(cmd.c_str()) == 0);

    nlohmann::json cli_summary;
    {
        std::ifstream in(dir / "run_summary.json");
        REQUIRE(in.good());
        in >> cli_summary;
    }

    const PreparedScenario prep = load_scenario_file(scenario_path("default.json"));
    const SimTrace trace = run_scenario(prep.scenario.sim, prep.systems, prep.gains);
    const nlohmann::json lib_summary = summarize_run(prep, trace, ControllerSelect::proposed);
    CHECK(cli_summary == lib_summary);  // every number traceable to a library call

    // trace is identical too
    const fs::path dir2 = dir / "lib";
    fs::create_directories(dir2);
    write_trace_csv((dir2 / "trace.csv").string(), trace, prep.hash);
    CHECK(slurp(dir / "run_trace.csv") == slurp(dir2 / "trace.csv"));
    fs::remove_all(dir);
}

}  // TEST_SUITE
