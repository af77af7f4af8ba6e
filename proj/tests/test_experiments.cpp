#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "weylwalk/experiments.hpp"

using namespace weylwalk;
using experiments::Registry;
using experiments::RunRecord;
using experiments::Scenario;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

const std::string kTmp = "/tmp/weylwalk_test_runs";

} // namespace

TEST_CASE("fast scenarios pass with default parameters") {
    Registry reg;
    for (const char* name : {"continuity_criterion", "shift_truncation", "fourier_decay",
                             "taylor_check", "mom_taylor_check"}) {
        const RunRecord rec = experiments::run_scenario({name, {}, 7}, reg);
        CHECK(!rec.refused);
        CHECK(rec.pass());
        CHECK(!rec.rows.empty());
    }
}

TEST_CASE("triviality contrast reproduces the dichotomy") {
    Registry reg;
    const RunRecord rec = experiments::run_scenario({"triviality_contrast", {}, 7}, reg);
    CHECK(rec.pass());
    REQUIRE(!rec.rows.empty());
    CHECK(rec.rows.front().label == "partial_norm_loglog_slope");
    CHECK(rec.rows.front().value == doctest::Approx(-0.357).epsilon(0.1));
}

TEST_CASE("walk scenarios with reduced samples") {
    Registry reg;
    Scenario diff{"diffusion_chernoff", {{"M", int64_t{20000}}}, 7};
    CHECK(experiments::run_scenario(diff, reg).pass());

    Scenario osc{"oscillator_chernoff", {{"M", int64_t{30000}}, {"tol_extra", 0.02}}, 7};
    CHECK(experiments::run_scenario(osc, reg).pass());

    Scenario pmix{"pmix_chernoff", {{"M", int64_t{30000}}, {"tol_extra", 0.02}}, 7};
    CHECK(experiments::run_scenario(pmix, reg).pass());
}

TEST_CASE("hypothesis refusal names the violated condition") {
    Registry reg;
    reg.sequences.emplace("d_slow", seq::ParamSeq::power(0.1, 2.0));
    Scenario sc{"diffusion_chernoff", {{"dx_seq", std::string("d_slow")}}, 7};
    const RunRecord rec = experiments::run_scenario(sc, reg);
    CHECK(rec.refused);
    CHECK(!rec.pass());
    CHECK(rec.refusal_reason.find("^{1/2} nuclear") != std::string::npos);
}

TEST_CASE("unknown scenario names are rejected with the known list") {
    Registry reg;
    try {
        (void)experiments::run_scenario({"no_such_thing", {}, 1}, reg);
        FAIL("expected an exception");
    } catch (const std::invalid_argument& ex) {
        CHECK(std::string(ex.what()).find("continuity_criterion") != std::string::npos);
    }
}

TEST_CASE("persist writes deterministic CSV and JSON") {
    std::filesystem::remove_all(kTmp);
    Registry reg;
    const Scenario sc{"fourier_decay", {}, 99};
    const RunRecord a = experiments::run_scenario(sc, reg);
    const auto pa = experiments::persist(a, kTmp);
    const std::string body1 = slurp(pa.csv_path);
    const RunRecord b = experiments::run_scenario(sc, reg);
    const auto pb = experiments::persist(b, kTmp);
    CHECK(pa.csv_path == pb.csv_path);
    CHECK(body1 == slurp(pb.csv_path)); // byte-identical

    CHECK(body1.rfind("scenario,label,value,uncertainty,verdict\r\n", 0) == 0);
    CHECK(slurp(pa.json_path).find("\"pass\": true") != std::string::npos);

    // Monte-Carlo scenarios are reproducible too: per-sample streams plus an
    // index-ordered reduction
    const Scenario mc{"diffusion_chernoff", {{"M", int64_t{5000}}}, 11};
    const auto m1 = experiments::persist(experiments::run_scenario(mc, reg), kTmp);
    const std::string mc_body = slurp(m1.csv_path);
    const auto m2 = experiments::persist(experiments::run_scenario(mc, reg), kTmp);
    CHECK(mc_body == slurp(m2.csv_path));
}

TEST_CASE("persist handles empty rows and unicode labels") {
    std::filesystem::remove_all(kTmp + "/quoting");
    RunRecord rec;
    rec.scenario = "quoting_probe";
    rec.seed = 3;
    const auto p0 = experiments::persist(rec, kTmp + "/quoting");
    CHECK(slurp(p0.csv_path) == "scenario,label,value,uncertainty,verdict\r\n");

    rec.rows.push_back({"π-label, with \"quotes\"\nand newline", 1.5, 0.25, "pass"});
    const auto p1 = experiments::persist(rec, kTmp + "/quoting");
    const std::string body = slurp(p1.csv_path);
    // strip the header, unfold the quoted newline, and re-split
    const std::string data = body.substr(body.find("\r\n") + 2);
    std::string joined = data.substr(0, data.rfind("\r\n"));
    const auto fields = split_csv_line(joined);
    REQUIRE(fields.size() == 5);
    CHECK(fields[0] == "quoting_probe");
    CHECK(fields[1] == "π-label, with \"quotes\"\nand newline");
    CHECK(fields[4] == "pass");
}

TEST_CASE("registry references resolve or fail loudly") {
    Registry reg;
    reg.sequences.emplace("h", seq::ParamSeq::geometric(1.0, 0.5));
    Scenario ok{"continuity_criterion", {{"h", std::string("h")}}, 1};
    CHECK(experiments::run_scenario(ok, reg).pass());

    Scenario bad{"continuity_criterion", {{"h", std::string("missing")}}, 1};
    CHECK_THROWS_AS((void)experiments::run_scenario(bad, reg), std::invalid_argument);
}
