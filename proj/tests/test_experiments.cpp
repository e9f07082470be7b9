#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "intermix/experiments.hpp"

using namespace intermix;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json small_tails_config(const std::string& out) {
    json j;
    j["experiment"] = "tails";
    j["seeds"] = {1, 2, 3};
    j["out_dir"] = out;
    j["params"] = {{"n_r", 400}, {"n_lo", 20}};
    return j;
}

}  // namespace

TEST_CASE("catalog lists every experiment with a claim string") {
    const auto& cat = experiment_catalog();
    CHECK(cat.size() >= 14);
    bool has_assumption = false;
    for (const auto& e : cat) {
        CHECK(!e.name.empty());
        CHECK(!e.claim.empty());
        CHECK(!e.params_doc.empty());
        if (e.name == "assumption") {
            has_assumption = true;
            CHECK(e.claim.find("(A)/(B)") != std::string::npos);
        }
    }
    CHECK(has_assumption);
}

TEST_CASE("config validation: empty seeds and unknown experiments are rejected") {
    json j = small_tails_config("/tmp/intermix_t0");
    j["seeds"] = json::array();
    CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(j)), ConfigError);

    json j2 = small_tails_config("/tmp/intermix_t0");
    j2["experiment"] = "no-such-thing";
    CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(j2)), ConfigError);

    json j3 = small_tails_config("/tmp/intermix_t0");
    j3["family"] = "bogus";
    CHECK_THROWS_AS(ExperimentConfig::from_json(j3), ConfigError);
}

TEST_CASE("rerunning a config yields byte-identical CSVs, at any worker count") {
    const fs::path a = "/tmp/intermix_ta", b = "/tmp/intermix_tb";
    fs::remove_all(a);
    fs::remove_all(b);
    json ja = small_tails_config(a.string());
    ja["threads"] = 1;
    json jb = small_tails_config(b.string());
    jb["threads"] = 4;
    const RunManifest ma = run_experiment(ExperimentConfig::from_json(ja));
    const RunManifest mb = run_experiment(ExperimentConfig::from_json(jb));
    CHECK(ma.status == "done");
    CHECK(mb.status == "done");
    CHECK(slurp(a / "tails.csv") == slurp(b / "tails.csv"));
    CHECK(slurp(a / "tails_fit.csv") == slurp(b / "tails_fit.csv"));
}

TEST_CASE("manifest checksums match the artifact bytes; no temp files linger") {
    const fs::path out = "/tmp/intermix_tc";
    fs::remove_all(out);
    const RunManifest man =
        run_experiment(ExperimentConfig::from_json(small_tails_config(out.string())));
    CHECK(man.outputs.size() >= 2);
    for (const auto& o : man.outputs) {
        const std::string bytes = slurp(out / o.path);
        CHECK(fnv1a64(bytes.data(), bytes.size()) == o.checksum);
        CHECK(bytes.size() == o.bytes);
    }
    int tmp_files = 0;
    for (const auto& e : fs::directory_iterator(out))
        if (e.path().string().find(".tmp") != std::string::npos) ++tmp_files;
    CHECK(tmp_files == 0);

    const json parsed = json::parse(slurp(out / "manifest.json"));
    CHECK(parsed["status"] == "done");
    CHECK(parsed["schema_version"] == 1);
    CHECK(parsed["experiment"] == "tails");
}

TEST_CASE("a quick pass over small instances of the remaining experiments") {
    struct Case {
        std::string name;
        json params;
        std::string family = "pik";
    };
    const std::vector<Case> cases = {
        {"ladder", {{"depth", 60}}},
        {"partition", {{"n_r", 40}}},
        {"annealed-tails", {{"n_lo", 4}, {"n_hi", 24}, {"samples", 10}}},
        {"assumption", {{"n_max", 2000}}},
        {"hoeffding", {{"n", 400}, {"trials", 300}}},
        {"quenched-bound", {{"n_max", 400}, {"trials", 20}}},
        {"distortion", {{"n_r", 12}, {"pairs", 1}}},
        {"schwarzian", {{"grid", 500}, {"count", 3}}},
        {"koebe", {{"n_max", 120}}},
        {"correlations", {{"n_lo", 2}, {"n_hi", 8}, {"points", 20000}}},
        {"gh-validate", json::object(), "gh"},
        {"density", {{"bins", 64}, {"points", 50000}, {"depth", 10}, {"depth_lo", 8}}, "gh"},
        {"tower-mass", {{"levels", 12}, {"block", 16}}},
    };
    for (const auto& c : cases) {
        const fs::path out = "/tmp/intermix_all/" + c.name;
        fs::remove_all(out);
        json j;
        j["experiment"] = c.name;
        j["seeds"] = {1, 2};
        j["out_dir"] = out.string();
        j["params"] = c.params;
        j["family"] = c.family;
        INFO("experiment ", c.name);
        const RunManifest man = run_experiment(ExperimentConfig::from_json(j));
        CHECK(man.status == "done");
        CHECK(!man.outputs.empty());
    }
}

TEST_CASE("density experiment refuses Pikovsky (Lebesgue is exact there)") {
    json j;
    j["experiment"] = "density";
    j["seeds"] = {1};
    j["out_dir"] = "/tmp/intermix_td";
    j["family"] = "pik";
    CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(j)), ConfigError);
}
