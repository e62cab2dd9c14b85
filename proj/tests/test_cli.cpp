#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "closeout/report.hpp"

using nlohmann::json;

#ifndef CLOSEOUT_CLI_PATH
#define CLOSEOUT_CLI_PATH "closeout"
#endif
#ifndef CLOSEOUT_SOURCE_DIR
#define CLOSEOUT_SOURCE_DIR "."
#endif

namespace {

struct CliResult {
    int exit_code;
    std::string out;
};

// Runs the CLI and captures stdout (stderr goes to a scratch file).
CliResult cli(const std::string& args) {
    std::string cmd = std::string(CLOSEOUT_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string scenario(const std::string& name) {
    return std::string(CLOSEOUT_SOURCE_DIR) + "/scenarios/" + name;
}

}  // namespace

TEST_CASE("run: clean scenario exits 0 and reports the quotation") {
    auto r = cli("run " + scenario("table1_row1.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("91.67") != std::string::npos);
    CHECK(r.out.find("settled") != std::string::npos);
}

TEST_CASE("run: structured output parses back into a report") {
    auto r = cli("run " + scenario("table1_row1.json") + " --format structured");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("content_hash").get<std::string>().size() == 64);
    closeout::RunReport report = closeout::report_from_json(j);
    CHECK(closeout::content_hash(report) == j.at("content_hash").get<std::string>());
    CHECK(report.market_quotation->value.to_string() == "91.67");
}

TEST_CASE("run: a cancelled trade is still a completed run") {
    // row 1 with the margin forced to zero: cost 6.67 > 0 cancels
    auto r = cli("run " + scenario("table1_row1.json") + " --im 0.00 --format structured");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("report").at("outcome").at("decision") == "cancel_cost_exceeds_im");
}

TEST_CASE("run: malformed files exit 2") {
    std::string bad = std::string(CLOSEOUT_SOURCE_DIR) + "/tests/fixtures/malformed.json";
    CHECK(cli("run " + bad).exit_code == 2);
    CHECK(cli("run /no/such/file.json").exit_code == 2);
    CHECK(cli("run " + scenario("table1_row1.json") + " --im -1.00").exit_code == 2);
}

TEST_CASE("run: an aborted protocol run exits 3") {
    std::string aborting = std::string(CLOSEOUT_SOURCE_DIR) + "/tests/fixtures/all_no_reveal.json";
    auto r = cli("run " + aborting + " --format structured");
    CHECK(r.exit_code == 3);
    json j = json::parse(r.out);  // the report is still printed
    CHECK(j.at("report").at("abort").at("kind") == "protocol");
}

TEST_CASE("run: an IM integrity breach exits 4") {
    std::string broken = std::string(CLOSEOUT_SOURCE_DIR) + "/tests/fixtures/im_mismatch.json";
    auto r = cli("run " + broken);
    CHECK(r.exit_code == 4);
}

TEST_CASE("validate: accepts the bundled files and rejects garbage") {
    CHECK(cli("validate " + scenario("table1_row5.json")).exit_code == 0);
    std::string bad = std::string(CLOSEOUT_SOURCE_DIR) + "/tests/fixtures/malformed.json";
    CHECK(cli("validate " + bad).exit_code == 2);
}

TEST_CASE("table1: the bundled suite passes") {
    auto r = cli("table1 --dir " + std::string(CLOSEOUT_SOURCE_DIR) + "/scenarios");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    // five pass lines
    std::size_t count = 0, pos = 0;
    while ((pos = r.out.find("pass", pos)) != std::string::npos) {
        ++count;
        pos += 4;
    }
    CHECK(count == 5);
}

TEST_CASE("table1: a missing bundled file exits 2") {
    CHECK(cli("table1 --dir /no/such/dir").exit_code == 2);
}

TEST_CASE("table1: a result drifting from the expectations exits 1") {
    // stage the five files, then change row 1's quotes so its aggregate moves
    std::string dir = "/tmp/closeout_table1_drift";
    REQUIRE(std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) == 0);
    for (const char* name : {"table1_row1.json", "table1_row2.json", "table1_row3.json",
                             "table1_row4.json", "table1_row5.json"}) {
        std::ifstream in(scenario(name));
        json j = json::parse(in);
        if (std::string(name) == "table1_row1.json")
            for (auto& b : j["bidders"]) b["mid"] = "42.00";
        std::ofstream out(dir + "/" + name);
        out << j.dump(2);
    }
    auto r = cli("table1 --dir " + dir);
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("sweep: decision flips exactly once at the least cent above the cost") {
    auto r = cli("sweep " + scenario("table1_row1.json") +
                 " --im-from 6.60 --im-to 6.80 --im-step 0.01");
    CHECK(r.exit_code == 0);
    // rows up to 6.66 cancel, 6.67 onward trade (cost = 20/3 = 6.666...)
    int flips = 0;
    bool trading = false;
    std::istringstream lines(r.out);
    std::string line;
    std::string first_trade_im;
    while (std::getline(lines, line)) {
        if (line.find("cancel_cost_exceeds_im") != std::string::npos) {
            CHECK_FALSE(trading);  // never flips back
        } else if (line.find("trade") != std::string::npos) {
            if (!trading) {
                ++flips;
                first_trade_im = line.substr(0, line.find(' '));
            }
            trading = true;
        }
    }
    CHECK(flips == 1);
    CHECK(first_trade_im == "6.67");
}

TEST_CASE("sweep: step larger than the range runs once") {
    auto r = cli("sweep " + scenario("table1_row1.json") +
                 " --im-from 10.00 --im-to 12.00 --im-step 99.00");
    CHECK(r.exit_code == 0);
    std::size_t rows = 0, pos = 0;
    while ((pos = r.out.find("trade", pos)) != std::string::npos) {
        ++rows;
        pos += 5;
    }
    CHECK(rows == 1);
}

TEST_CASE("sweep: bad bounds exit 2") {
    CHECK(cli("sweep " + scenario("table1_row1.json") +
              " --im-from 5.00 --im-to 1.00 --im-step 1.00")
              .exit_code == 2);
    CHECK(cli("sweep " + scenario("table1_row1.json") +
              " --im-from -1.00 --im-to 1.00 --im-step 1.00")
              .exit_code == 2);
    CHECK(cli("sweep " + scenario("table1_row1.json") +
              " --im-from 1.00 --im-to 2.00 --im-step 0.00")
              .exit_code == 2);
}

TEST_CASE("seed overrides layer over the file without mutating it") {
    auto base = cli("run " + scenario("stochastic_demo.json") + " --format structured");
    auto same = cli("run " + scenario("stochastic_demo.json") + " --seed 424242 --format structured");
    auto other = cli("run " + scenario("stochastic_demo.json") + " --seed 1 --format structured");
    REQUIRE(base.exit_code == 0);
    auto hash = [](const CliResult& r) {
        return json::parse(r.out).at("content_hash").get<std::string>();
    };
    CHECK(hash(base) == hash(same));  // the file's own seed
    CHECK(hash(base) != hash(other));
}

TEST_CASE("unknown flags exit 2") {
    CHECK(cli("run --bogus").exit_code == 2);
    CHECK(cli("frobnicate").exit_code == 2);
}
