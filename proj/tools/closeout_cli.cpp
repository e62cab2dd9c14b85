// closeout: auction-based close-out of defaulted OTC derivative portfolios.
//
// Subcommands:
//   run       run one scenario file and print the report
//   validate  check a scenario file against the schema
//   table1    run the bundled reference scenarios against their expectations
//   sweep     re-run one scenario across a range of IM values
//
// Exit codes: 0 completed (a cancelled trade is a valid result), 1 expectation
// mismatch (table1), 2 validation failure, 3 runtime protocol error,
// 4 conservation failure.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "closeout/harness.hpp"
#include "closeout/report.hpp"
#include "closeout/scenario.hpp"

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitValidation = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitConservation = 4;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> im;
};

// Overrides layer over the file; the file itself stays authoritative.
closeout::Scenario load_with_overrides(const std::string& path, const Overrides& ov) {
    closeout::Scenario sc = closeout::load_scenario(path);
    if (ov.seed) sc.seed = *ov.seed;
    if (ov.im) {
        closeout::Money im = closeout::Money::parse(*ov.im, sc.agreement.currency);
        if (im.signum() < 0) throw closeout::validation_error("--im must be >= 0");
        sc.agreement.im_posted_by_a = im;
        sc.auction.im_reference = im;
    }
    return sc;
}

int report_exit_code(const closeout::RunReport& report) {
    if (report.abort) return report.abort->kind == "integrity" ? kExitConservation : kExitProtocol;
    if (report.conservation && !report.conservation->passed) return kExitConservation;
    return 0;
}

void print_report(const closeout::RunReport& report, const std::string& format) {
    if (format == "structured")
        std::cout << closeout::to_json(report).dump(2) << "\n";
    else
        std::cout << closeout::render_human(report);
}

int cmd_run(const std::string& path, const Overrides& ov, const std::string& format) {
    closeout::Scenario sc = load_with_overrides(path, ov);
    closeout::RunReport report = closeout::run(sc);
    print_report(report, format);
    int code = report_exit_code(report);
    if (code != 0 && report.abort)
        std::cerr << "run aborted at tick " << report.abort->tick << " [" << report.abort->actor
                  << "]: " << report.abort->reason << "\n";
    return code;
}

int cmd_validate(const std::string& path) {
    closeout::Scenario sc = closeout::load_scenario(path);
    std::cout << "ok: " << path << " (scenario '" << sc.name << "', " << sc.bidders.size()
              << " bidder script(s))\n";
    return 0;
}

struct Table1Row {
    const char* file;
    const char* mq;
    const char* winner;
    const char* price;
};

int cmd_table1(const std::string& dir, const std::string& format) {
    // Expectations embedded here mirror each file's own `expected` block.
    static constexpr Table1Row rows[] = {
        {"table1_row1.json", "91.67", "4", "85.00"},
        {"table1_row2.json", "92.50", "3", "80.00"},
        {"table1_row3.json", "95.00", "4", "90.00"},
        {"table1_row4.json", "93.33", "3", "75.00"},
        {"table1_row5.json", "90.00", "3", "88.00"},
    };
    bool all_ok = true;
    nlohmann::json structured = nlohmann::json::array();
    for (const auto& row : rows) {
        std::string path = dir + "/" + row.file;
        if (!std::filesystem::exists(path)) {
            std::cerr << "missing bundled scenario: " << path << "\n";
            return kExitValidation;
        }
        closeout::Scenario sc = closeout::load_scenario(path);
        closeout::RunReport report = closeout::run(sc);
        std::string mq = report.market_quotation ? report.market_quotation->value.to_string() : "-";
        std::string winner =
            report.outcome && report.outcome->winner ? *report.outcome->winner : "-";
        std::string price = report.outcome && report.outcome->execution_price
                                ? report.outcome->execution_price->to_string()
                                : "-";
        bool ok = !report.abort && mq == row.mq && winner == row.winner && price == row.price;
        all_ok = all_ok && ok;
        if (format == "structured") {
            structured.push_back({{"scenario", sc.name},
                                  {"mq", mq},
                                  {"winner", winner},
                                  {"price", price},
                                  {"pass", ok}});
        } else {
            std::cout << (ok ? "pass" : "FAIL") << "  " << std::left << std::setw(14) << sc.name
                      << " mq " << mq << " (want " << row.mq << ")"
                      << "  winner " << winner << " (want " << row.winner << ")"
                      << "  price " << price << " (want " << row.price << ")\n";
            if (!ok && report.abort) std::cout << "      aborted: " << report.abort->reason << "\n";
        }
    }
    if (format == "structured") std::cout << structured.dump(2) << "\n";
    return all_ok ? 0 : kExitMismatch;
}

int cmd_sweep(const std::string& path, const Overrides& ov, const std::string& from,
              const std::string& to, const std::string& step) {
    closeout::Scenario base = load_with_overrides(path, ov);
    const std::string& ccy = base.agreement.currency;
    closeout::Money im_from = closeout::Money::parse(from, ccy);
    closeout::Money im_to = closeout::Money::parse(to, ccy);
    closeout::Money im_step = closeout::Money::parse(step, ccy);
    if (im_from.signum() < 0 || im_to.signum() < 0)
        throw closeout::validation_error("sweep: IM bounds must be >= 0");
    if (im_step.signum() <= 0) throw closeout::validation_error("sweep: step must be > 0");
    if (im_from > im_to) throw closeout::validation_error("sweep: empty progression");
    std::cout << std::left << std::setw(12) << "im" << std::setw(26) << "decision"
              << "residual\n";
    int code = 0;
    for (closeout::Money im = im_from; im <= im_to; im += im_step) {
        closeout::Scenario sc = base;
        sc.agreement.im_posted_by_a = im;
        sc.auction.im_reference = im;
        closeout::RunReport report = closeout::run(sc);
        std::string decision = report.outcome ? closeout::decision_name(report.outcome->decision)
                                              : "aborted";
        std::string residual = report.outcome && report.outcome->residual
                                   ? report.outcome->residual->to_string()
                                   : "-";
        std::cout << std::left << std::setw(12) << im.to_string() << std::setw(26) << decision
                  << residual << "\n";
        code = std::max(code, report_exit_code(report));
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic close-out auction engine for defaulted OTC portfolios"};
    app.require_subcommand(1);

    std::string scenario_path, format = "human";
    Overrides ov;
    std::string seed_str, im_str;

    auto add_format = [&format](CLI::App* cmd) {
        cmd->add_option("--format", format, "Output format")
            ->check(CLI::IsMember({"human", "structured"}));
    };

    auto* run_cmd = app.add_subcommand("run", "Run a scenario file");
    run_cmd->add_option("scenario", scenario_path, "Scenario file path")->required();
    run_cmd->add_option("--seed", seed_str, "Override the scenario seed");
    run_cmd->add_option("--im", im_str, "Override the posted IM, e.g. 10.00");
    add_format(run_cmd);

    auto* validate_cmd = app.add_subcommand("validate", "Validate a scenario file");
    validate_cmd->add_option("scenario", scenario_path, "Scenario file path")->required();

    std::string table1_dir = "scenarios";
    auto* table1_cmd = app.add_subcommand("table1", "Run the bundled reference scenarios");
    table1_cmd->add_option("--dir", table1_dir, "Directory with the bundled scenarios");
    add_format(table1_cmd);

    std::string im_from, im_to, im_step;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep a scenario across IM values");
    sweep_cmd->add_option("scenario", scenario_path, "Scenario file path")->required();
    sweep_cmd->add_option("--im-from", im_from, "Inclusive lower IM bound")->required();
    sweep_cmd->add_option("--im-to", im_to, "Inclusive upper IM bound")->required();
    sweep_cmd->add_option("--im-step", im_step, "IM increment")->required();
    sweep_cmd->add_option("--seed", seed_str, "Override the scenario seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (!seed_str.empty()) ov.seed = std::stoull(seed_str);
        if (!im_str.empty()) ov.im = im_str;
        if (run_cmd->parsed()) return cmd_run(scenario_path, ov, format);
        if (validate_cmd->parsed()) return cmd_validate(scenario_path);
        if (table1_cmd->parsed()) return cmd_table1(table1_dir, format);
        if (sweep_cmd->parsed()) return cmd_sweep(scenario_path, ov, im_from, im_to, im_step);
    } catch (const closeout::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const closeout::integrity_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConservation;
    } catch (const closeout::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
