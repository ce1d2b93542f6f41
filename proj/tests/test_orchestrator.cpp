#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "keysig/orchestrator.hpp"
#include "keysig/util.hpp"

using namespace keysig;
namespace fs = std::filesystem;

namespace {

const fs::path kData = KEYSIG_TEST_DATA_DIR;
const fs::path kTmp = fs::path(KEYSIG_TEST_TMP_DIR) / "orchestrator";

RunConfig fixture_config(const std::string& out_name) {
    RunConfig cfg;
    cfg.sources = {(kData / "i2c" / "i2c_master_top.v").string(),
                   (kData / "i2c" / "i2c_master_byte_ctrl.v").string(),
                   (kData / "i2c" / "i2c_master_bit_ctrl.v").string()};
    cfg.rank.selection.k = 3;
    cfg.endpoint.mock_dir = (kData / "mock").string();
    cfg.overview_path = (kData / "overview.txt").string();
    cfg.out_dir = (kTmp / out_name).string();
    return cfg;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("smoke: one-module design with k=1 produces the full artifact tree") {
    fs::remove_all(kTmp / "smoke");
    RunConfig cfg;
    cfg.sources = {(kData / "corpus" / "pos29_fsm.v").string()};
    cfg.rank.selection.k = 1;
    cfg.endpoint.mock_dir = (kData / "mock").string();
    cfg.out_dir = (kTmp / "smoke").string();

    auto result = run_pipeline(cfg);
    CHECK(result.modules == 1);
    CHECK(result.selected.size() == 1);
    CHECK(result.generated);
    fs::path out = cfg.out_dir;
    for (const char* f : {"graph.json", "graph.dot", "ranking.json", "ranking.txt", "run.cfg",
                          "run_report.json"})
        CHECK(fs::exists(out / f));
    CHECK(fs::exists(out / "slices"));
    CHECK(fs::exists(out / "assertions"));
}

TEST_CASE("k = 0 fails validation before any work") {
    RunConfig cfg = fixture_config("never_created");
    cfg.rank.selection.k = 0;
    try {
        run_pipeline(cfg);
        FAIL("expected StageFailure");
    } catch (const StageFailure& e) {
        CHECK(e.stage == "config");
        CHECK(e.exit_code == 1);
    }
    CHECK(!fs::exists(kTmp / "never_created"));
}

TEST_CASE("a missing source surfaces as a parse-stage failure with usage exit code") {
    RunConfig cfg = fixture_config("missing_src");
    cfg.sources = {"/nonexistent/nowhere.v"};
    try {
        run_pipeline(cfg);
        FAIL("expected StageFailure");
    } catch (const StageFailure& e) {
        CHECK(e.stage == "parse");
        CHECK(e.exit_code == 1);
    }
}

TEST_CASE("the persisted config replays to a byte-identical ranking") {
    fs::remove_all(kTmp / "echo");
    RunConfig cfg = fixture_config("echo");
    auto first = run_pipeline(cfg);
    CHECK(first.selected.size() == 3);
    std::string ranking_before = read_file(fs::path(cfg.out_dir) / "ranking.json");

    RunConfig replay = load_config_file((fs::path(cfg.out_dir) / "run.cfg").string());
    replay.validate();
    auto second = run_pipeline(replay);
    CHECK(second.selected == first.selected);
    CHECK(read_file(fs::path(cfg.out_dir) / "ranking.json") == ranking_before);
}

TEST_CASE("generation can be switched off and artifacts from earlier stages remain") {
    fs::remove_all(kTmp / "nogen");
    RunConfig cfg = fixture_config("nogen");
    cfg.generate = false;
    auto result = run_pipeline(cfg);
    CHECK(!result.generated);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "ranking.json"));
    CHECK(!fs::exists(fs::path(cfg.out_dir) / "run_report.json"));
}
