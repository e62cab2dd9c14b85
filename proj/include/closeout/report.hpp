#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "closeout/auction.hpp"
#include "closeout/lifecycle.hpp"
#include "closeout/settlement.hpp"
#include "closeout/sha256.hpp"

namespace closeout {

struct AbortRecord {
    Tick tick = 0;
    std::string actor;
    std::string kind;  // "protocol" or "integrity"
    std::string reason;
};

// Machine-readable record of one run.  Everything except wall_time_us is
// covered by the content hash, and repeated runs of the same (scenario, seed)
// produce a byte-identical hashed body.
struct RunReport {
    std::string scenario_name;
    std::string currency;
    std::uint64_t seed = 0;
    std::string generator;
    LifecycleState final_state = LifecycleState::active;
    std::vector<LifecycleEvent> lifecycle_log;
    std::vector<TranscriptEntry> transcript;
    std::optional<MarketQuotationResult> market_quotation;
    std::optional<AuctionOutcome> outcome;
    std::optional<TerminationStatement> statement;
    std::vector<LedgerEntry> ledger;
    std::optional<ConservationReport> conservation;
    std::optional<AbortRecord> abort;
    std::int64_t wall_time_us = 0;
};

namespace report_json {

inline nlohmann::json quotes_json(const std::vector<std::pair<std::string, Money>>& quotes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [bidder, mid] : quotes) arr.push_back({{"bidder", bidder}, {"mid", mid.to_string()}});
    return arr;
}

inline nlohmann::json outcome_json(const AuctionOutcome& o) {
    nlohmann::json j;
    j["mq"] = o.mq.to_string();
    j["winner"] = o.winner ? nlohmann::json(*o.winner) : nlohmann::json();
    j["execution_price"] =
        o.execution_price ? nlohmann::json(o.execution_price->to_string()) : nlohmann::json();
    j["trade_cost"] = o.trade_cost ? nlohmann::json(o.trade_cost->to_string()) : nlohmann::json();
    j["decision"] = decision_name(o.decision);
    j["residual"] = o.residual ? nlohmann::json(o.residual->to_string()) : nlohmann::json();
    return j;
}

}  // namespace report_json

// The deterministic body: everything except wall time.
inline nlohmann::json report_body(const RunReport& r) {
    nlohmann::json body;
    body["schema_version"] = 1;
    body["scenario"] = r.scenario_name;
    body["currency"] = r.currency;
    body["seed"] = r.seed;
    body["generator"] = r.generator;
    body["final_state"] = state_name(r.final_state);

    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : r.lifecycle_log)
        log.push_back({{"tick", e.tick},
                       {"from", state_name(e.from)},
                       {"to", state_name(e.to)},
                       {"label", e.label}});
    body["lifecycle_log"] = log;

    nlohmann::json transcript = nlohmann::json::array();
    for (const auto& t : r.transcript) {
        nlohmann::json e;
        e["tick"] = t.tick;
        e["bidder"] = t.bidder;
        e["action"] = t.action == TranscriptAction::commit ? "commit" : "reveal";
        e["result"] = t.result;
        if (t.action == TranscriptAction::commit) e["digest"] = t.digest_hex;
        if (t.mid) e["mid"] = t.mid->to_string();
        if (t.trade) e["trade"] = t.trade->to_string();
        transcript.push_back(std::move(e));
    }
    body["auction_transcript"] = transcript;

    if (r.market_quotation) {
        body["market_quotation"] = {
            {"value", r.market_quotation->value.to_string()},
            {"quotes_used", report_json::quotes_json(r.market_quotation->quotes_used)},
            {"quotes_discarded", report_json::quotes_json(r.market_quotation->quotes_discarded)}};
    } else {
        body["market_quotation"] = nullptr;
    }
    body["outcome"] = r.outcome ? report_json::outcome_json(*r.outcome) : nlohmann::json();
    if (r.statement) {
        body["statement"] = {
            {"early_termination_date", r.statement->early_termination_date},
            {"unpaid", r.statement->unpaid.to_string()},
            {"market_quotation", r.statement->market_quotation.to_string()},
            {"termination_amount", r.statement->termination_amount.to_string()},
            {"payer", r.statement->payer ? nlohmann::json(*r.statement->payer) : nlohmann::json()}};
    } else {
        body["statement"] = nullptr;
    }

    nlohmann::json ledger = nlohmann::json::array();
    for (const auto& e : r.ledger)
        ledger.push_back({{"from", e.from},
                          {"to", e.to},
                          {"amount", e.amount.to_string()},
                          {"purpose", purpose_name(e.purpose)}});
    body["ledger"] = ledger;

    body["conservation"] = r.conservation
                               ? nlohmann::json{{"passed", r.conservation->passed},
                                                {"detail", r.conservation->detail}}
                               : nlohmann::json();
    body["abort"] = r.abort ? nlohmann::json{{"tick", r.abort->tick},
                                             {"actor", r.abort->actor},
                                             {"kind", r.abort->kind},
                                             {"reason", r.abort->reason}}
                            : nlohmann::json();
    return body;
}

inline std::string content_hash(const RunReport& r) {
    return hex_encode(Sha256::hash(report_body(r).dump()));
}

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j;
    j["report"] = report_body(r);
    j["content_hash"] = content_hash(r);
    j["wall_time_us"] = r.wall_time_us;
    return j;
}

// Reconstructs a report from its structured rendering (monetary values come
// back at the 2-decimal reporting precision).
inline RunReport report_from_json(const nlohmann::json& j) {
    const nlohmann::json& body = j.contains("report") ? j.at("report") : j;
    RunReport r;
    r.scenario_name = body.at("scenario").get<std::string>();
    r.currency = body.at("currency").get<std::string>();
    r.seed = body.at("seed").get<std::uint64_t>();
    r.generator = body.at("generator").get<std::string>();
    const std::string& ccy = r.currency;
    auto money = [&ccy](const nlohmann::json& v) { return Money::parse(v.get<std::string>(), ccy); };
    auto parse_state = [](const std::string& s) {
        for (int i = 0; i <= static_cast<int>(LifecycleState::settled); ++i)
            if (s == state_name(static_cast<LifecycleState>(i)))
                return static_cast<LifecycleState>(i);
        throw validation_error("report: unknown lifecycle state '" + s + "'");
    };
    r.final_state = parse_state(body.at("final_state").get<std::string>());
    for (const auto& e : body.at("lifecycle_log"))
        r.lifecycle_log.push_back({e.at("tick").get<Tick>(),
                                   parse_state(e.at("from").get<std::string>()),
                                   parse_state(e.at("to").get<std::string>()),
                                   e.at("label").get<std::string>()});
    for (const auto& t : body.at("auction_transcript")) {
        TranscriptEntry e;
        e.tick = t.at("tick").get<Tick>();
        e.bidder = t.at("bidder").get<std::string>();
        e.action = t.at("action").get<std::string>() == "commit" ? TranscriptAction::commit
                                                                 : TranscriptAction::reveal;
        e.result = t.at("result").get<std::string>();
        e.digest_hex = t.value("digest", std::string{});
        if (t.contains("mid")) e.mid = money(t.at("mid"));
        if (t.contains("trade")) e.trade = money(t.at("trade"));
        r.transcript.push_back(std::move(e));
    }
    if (!body.at("market_quotation").is_null()) {
        const auto& mj = body.at("market_quotation");
        MarketQuotationResult mq{money(mj.at("value")), {}, {}};
        for (const auto& q : mj.at("quotes_used"))
            mq.quotes_used.emplace_back(q.at("bidder").get<std::string>(), money(q.at("mid")));
        for (const auto& q : mj.at("quotes_discarded"))
            mq.quotes_discarded.emplace_back(q.at("bidder").get<std::string>(), money(q.at("mid")));
        r.market_quotation = std::move(mq);
    }
    if (!body.at("outcome").is_null()) {
        const auto& oj = body.at("outcome");
        AuctionOutcome o;
        o.mq = money(oj.at("mq"));
        if (!oj.at("winner").is_null()) o.winner = oj.at("winner").get<std::string>();
        if (!oj.at("execution_price").is_null()) o.execution_price = money(oj.at("execution_price"));
        if (!oj.at("trade_cost").is_null()) o.trade_cost = money(oj.at("trade_cost"));
        if (!oj.at("residual").is_null()) o.residual = money(oj.at("residual"));
        std::string d = oj.at("decision").get<std::string>();
        o.decision = d == "trade" ? AuctionDecision::trade
                     : d == "cancel_cost_exceeds_im" ? AuctionDecision::cancel_cost_exceeds_im
                                                     : AuctionDecision::no_trade_bids;
        r.outcome = std::move(o);
    }
    if (!body.at("statement").is_null()) {
        const auto& sj = body.at("statement");
        TerminationStatement st;
        st.early_termination_date = sj.at("early_termination_date").get<Tick>();
        st.unpaid = money(sj.at("unpaid"));
        st.market_quotation = money(sj.at("market_quotation"));
        st.termination_amount = money(sj.at("termination_amount"));
        if (!sj.at("payer").is_null()) st.payer = sj.at("payer").get<std::string>();
        r.statement = std::move(st);
    }
    for (const auto& e : body.at("ledger")) {
        std::string p = e.at("purpose").get<std::string>();
        TransferPurpose purpose = TransferPurpose::termination_amount;
        for (int i = 0; i <= static_cast<int>(TransferPurpose::vm_return); ++i)
            if (p == purpose_name(static_cast<TransferPurpose>(i)))
                purpose = static_cast<TransferPurpose>(i);
        r.ledger.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                            money(e.at("amount")), purpose});
    }
    if (!body.at("conservation").is_null())
        r.conservation = ConservationReport{body.at("conservation").at("passed").get<bool>(),
                                            body.at("conservation").at("detail").get<std::string>()};
    if (!body.at("abort").is_null())
        r.abort = AbortRecord{body.at("abort").at("tick").get<Tick>(),
                              body.at("abort").at("actor").get<std::string>(),
                              body.at("abort").at("kind").get<std::string>(),
                              body.at("abort").at("reason").get<std::string>()};
    if (j.contains("wall_time_us")) r.wall_time_us = j.at("wall_time_us").get<std::int64_t>();
    return r;
}

// Line-oriented summary for terminals; not contract-bound.
inline std::string render_human(const RunReport& r) {
    std::ostringstream out;
    out << "scenario   " << r.scenario_name << "  (seed " << r.seed << ")\n";
    out << "state      " << state_name(r.final_state) << "\n";
    for (const auto& e : r.lifecycle_log)
        out << "  tick " << e.tick << "  " << e.label << "\n";
    if (r.abort)
        out << "ABORTED    tick " << r.abort->tick << " [" << r.abort->actor << "] "
            << r.abort->reason << "\n";
    if (r.market_quotation) {
        out << "mq         " << r.market_quotation->value.to_string() << " " << r.currency
            << "  (" << r.market_quotation->quotes_used.size() << " used, "
            << r.market_quotation->quotes_discarded.size() << " discarded)\n";
    }
    if (r.outcome) {
        out << "decision   " << decision_name(r.outcome->decision) << "\n";
        if (r.outcome->winner)
            out << "winner     " << *r.outcome->winner << " at "
                << r.outcome->execution_price->to_string() << " (cost "
                << r.outcome->trade_cost->to_string() << ")\n";
        if (r.outcome->residual) out << "residual   " << r.outcome->residual->to_string() << "\n";
    }
    if (r.statement)
        out << "statement  unpaid " << r.statement->unpaid.to_string() << ", mq "
            << r.statement->market_quotation.to_string() << ", termination amount "
            << r.statement->termination_amount.to_string()
            << (r.statement->payer ? " payable by " + *r.statement->payer : std::string{})
            << "\n";
    for (const auto& e : r.ledger)
        out << "  ledger   " << e.from << " -> " << e.to << "  " << e.amount.to_string() << "  "
            << purpose_name(e.purpose) << "\n";
    if (r.conservation)
        out << "conserved  " << (r.conservation->passed ? "yes" : "NO: " + r.conservation->detail)
            << "\n";
    out << "hash       " << content_hash(r) << "\n";
    return out.str();
}

}  // namespace closeout
