#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cpr/experiment.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cpr;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "cpr-cli-test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const std::string& name, const json& cfg) {
    fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << cfg.dump(2);
    return p;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(CPR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

json small_threshold_config() {
    return {{"kind", "threshold-table"},
            {"success", {{"model", "slotted-aloha"}}},
            {"degrees", {3}},
            {"windows", {1}},
            {"G_lo", 0.5},
            {"G_hi", 0.9},
            {"step", 1e-3},
            {"threads", 2}};
}

}  // namespace

TEST_CASE("config overrides") {
    json cfg = {{"kind", "evolve"}, {"G", 0.5}};
    apply_override(cfg, "G=0.9");
    CHECK(cfg["G"] == doctest::Approx(0.9));
    apply_override(cfg, "success.model=slotted-aloha");
    CHECK(cfg["success"]["model"] == "slotted-aloha");
    apply_override(cfg, "degree=3");
    CHECK(cfg["degree"] == 3);
    apply_override(cfg, "windows=[1,2]");
    CHECK(cfg["windows"].is_array());
    CHECK_THROWS_AS(apply_override(cfg, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "=5"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "a..b=5"), ConfigError);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(Experiment::from_json(json{{"kind", "no-such-kind"}}), ConfigError);
    CHECK_THROWS_AS(Experiment::from_json(json{{"G", 0.5}}), ConfigError);
    CHECK_THROWS_AS(Experiment::from_json(json::array()), ConfigError);
    CHECK_THROWS_AS(Experiment::from_file("/nonexistent/path.json"), ConfigError);

    // Unknown fields are rejected at run time.
    json cfg = small_threshold_config();
    cfg["bogus"] = 1;
    CHECK_THROWS_AS(Experiment::from_json(cfg).run(), ConfigError);

    json missing = small_threshold_config();
    missing.erase("success");
    CHECK_THROWS_AS(Experiment::from_json(missing).run(), ConfigError);

    json empty = small_threshold_config();
    empty["degrees"] = json::array();
    CHECK_THROWS_AS(Experiment::from_json(empty).run(), ConfigError);

    json badsuccess = small_threshold_config();
    badsuccess["success"] = {{"model", "unknown"}};
    CHECK_THROWS_AS(Experiment::from_json(badsuccess).run(), ConfigError);

    json baddegree = {{"kind", "evolve"},
                      {"success", {{"model", "slotted-aloha"}}},
                      {"degree", {{"coeffs", {{"1", 1.0}}}}},
                      {"G", 0.5}};
    CHECK_THROWS_AS(Experiment::from_json(baddegree).run(), ConfigError);
}

TEST_CASE("threshold table output schema") {
    Experiment exp = Experiment::from_json(small_threshold_config());
    RunOutput out = exp.run();
    CHECK(out.name == "threshold-table");
    std::istringstream csv(out.csv);
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("# version:", 0) == 0);
    std::getline(csv, line);
    CHECK(line.rfind("# config:", 0) == 0);
    std::getline(csv, line);
    CHECK(line == "d,w=1,G_s,G_conv,G_up");
    std::getline(csv, line);
    CHECK(line.rfind("3,0.818", 0) == 0);

    const json& row = out.json["rows"][0];
    CHECK(row["degree"] == 3);
    CHECK(row["thresholds"]["w=1"].get<double>() == doctest::Approx(0.818).epsilon(1e-2));
    CHECK(row["G_up_star"].get<double>() == doctest::Approx(0.94048).epsilon(1e-3));
}

TEST_CASE("runs are reproducible from the resolved config") {
    Experiment exp = Experiment::from_json(small_threshold_config());
    RunOutput a = exp.run();
    RunOutput b = Experiment::from_json(exp.config()).run();
    CHECK(a.csv == b.csv);
    CHECK(a.json == b.json);
}

TEST_CASE("evolve experiment") {
    json cfg = {{"kind", "evolve"},
                {"success", {{"model", "slotted-aloha"}}},
                {"degree", 3},
                {"G", 0.91},
                {"L", 20},
                {"w", 2},
                {"mode", "punctured"}};
    RunOutput out = Experiment::from_json(cfg).run();
    CHECK(out.json["converged"] == true);
    CHECK(out.json["stable"] == true);
    CHECK(out.json["q"][0].size() == 20);
    std::istringstream csv(out.csv);
    std::string line;
    std::getline(csv, line);
    std::getline(csv, line);
    std::getline(csv, line);
    CHECK(line == "stage,q,p,success");

    json bad = cfg;
    bad["mode"] = "sideways";
    CHECK_THROWS_AS(Experiment::from_json(bad).run(), ConfigError);
}

TEST_CASE("simulate experiment stays near its prediction") {
    json cfg = {{"kind", "simulate"},
                {"success", {{"model", "slotted-aloha"}}},
                {"degree", 3},
                {"G", 0.5},
                {"T", 2000},
                {"rounds", 3},
                {"seed", 7}};
    RunOutput out = Experiment::from_json(cfg).run();
    double rate = out.json["success_rate"][0].get<double>();
    double pred = out.json["de_prediction"].get<double>();
    CHECK(pred == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rate > 0.99);
    // Seed changes change the sample, seed reuse reproduces it.
    RunOutput again = Experiment::from_json(cfg).run();
    CHECK(out.json["users_total"] == again.json["users_total"]);
}

TEST_CASE("bounds experiment modes") {
    json cfg = {{"kind", "bounds-check"},
                {"mode", "mixture-root"},
                {"degree", 3},
                {"weights", {1.0}}};
    RunOutput out = Experiment::from_json(cfg).run();
    CHECK(out.json["mixture_bound_root"].get<double>() == doctest::Approx(0.9405).epsilon(1e-3));

    json generic = {{"kind", "bounds-check"},
                    {"mode", "generic"},
                    {"system",
                     {{"G", {0.5}},
                      {"degrees", {3}},
                      {"routing", {{1.0}}},
                      {"partition", {1.0}},
                      {"success", {{{"model", "slotted-aloha"}}}}}},
                    {"envelope", {{"b", {1}}, {"B", 1}}}};
    RunOutput gv = Experiment::from_json(generic).run();
    CHECK(gv.json["holds"] == true);

    json badmode = cfg;
    badmode["mode"] = "nope";
    CHECK_THROWS_AS(Experiment::from_json(badmode).run(), ConfigError);
}

TEST_CASE("command line exit codes") {
    fs::path cfg_dir = temp_dir();
    fs::path dir = cfg_dir / "out";
    fs::path evolve_cfg = write_config("evolve-config.json",
                                       {{"kind", "evolve"},
                                        {"success", {{"model", "slotted-aloha"}}},
                                        {"degree", 3},
                                        {"G", 0.5}});
    CHECK(run_cli("evolve --config " + evolve_cfg.string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "evolve.csv"));
    CHECK(run_cli("evolve --config " + evolve_cfg.string() + " --out " + dir.string() +
                  " --format json") == 0);
    CHECK(fs::exists(dir / "evolve.json"));

    // Config problems exit with 2.
    CHECK(run_cli("evolve --config /nonexistent.json") == 2);
    CHECK(run_cli("threshold --config " + evolve_cfg.string()) == 2);  // kind mismatch
    fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{not json";
    CHECK(run_cli("evolve --config " + broken.string()) == 2);

    // Numeric failures exit with 3: scanning from an unstable starting load.
    fs::path bad_scan = write_config("badscan.json", [] {
        json c = small_threshold_config();
        c["G_lo"] = 0.93;
        c["G_hi"] = 0.94;
        return c;
    }());
    CHECK(run_cli("threshold --config " + bad_scan.string() + " --out " + dir.string()) == 3);

    // Overrides reach the run.
    CHECK(run_cli("evolve --config " + evolve_cfg.string() + " --set G=0.6 --out " +
                  dir.string()) == 0);
}
