#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "closeout/auction.hpp"
#include "closeout/errors.hpp"
#include "closeout/lifecycle.hpp"
#include "closeout/model.hpp"
#include "closeout/money.hpp"
#include "closeout/settlement.hpp"

namespace closeout {

// Bidder behaviors.  Monetary fields are decimal strings in the file and
// parsed exactly.
struct ScriptedBehavior {
    Money mid;
    std::optional<Money> trade;
};

struct StochasticBehavior {
    Money true_value;
    Money mid_noise_sd;
    Money trade_spread;
    double participation_probability = 1.0;
};

// Commits but never reveals.
struct NoRevealBehavior {
    Money mid;
    std::optional<Money> trade;
};

// Commits one bid, reveals a different mid; the digest check excludes it.
struct TamperedRevealBehavior {
    Money mid;
    std::optional<Money> trade;
    Money revealed_mid;
};

struct BidderScript {
    std::string bidder;
    std::variant<ScriptedBehavior, StochasticBehavior, NoRevealBehavior, TamperedRevealBehavior>
        behavior;
    std::optional<Tick> commit_at;  // default: the auction open tick
    std::optional<Tick> reveal_at;  // default: commit_deadline + 1
};

struct EventSpec {
    bool auto_detect = false;  // declare on the first missed payment by party A
    std::optional<DefaultCause> cause;
    std::optional<Tick> occurred_at;
    std::optional<Tick> early_termination_at;  // default: the default tick
};

struct ExpectedOutcome {
    std::optional<std::string> mq;
    std::optional<std::string> winner;
    std::optional<std::string> execution_price;
    std::optional<std::string> decision;
    std::optional<std::string> termination_amount;
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    std::vector<Party> parties;
    MasterAgreement agreement;
    std::vector<Transaction> transactions;
    std::set<PaymentKey> payments_made;
    EventSpec event;
    AuctionConfig auction;
    std::vector<BidderScript> bidders;
    std::uint64_t seed = 0;
    bool force_trade_override = false;
    ResidualPolicy residual_policy = ResidualPolicy::always_revert;
    std::optional<ExpectedOutcome> expected;
};

namespace detail {

[[noreturn]] inline void bad_field(const std::string& where, const std::string& what) {
    throw validation_error("scenario: " + where + ": " + what);
}

inline const nlohmann::json& need(const nlohmann::json& j, const std::string& key,
                                  const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) bad_field(where, "missing field '" + key + "'");
    return *it;
}

inline Money money_field(const nlohmann::json& j, const std::string& key,
                         const std::string& currency, const std::string& where) {
    const auto& v = need(j, key, where);
    if (!v.is_string()) bad_field(where, "'" + key + "' must be a decimal string");
    try {
        return Money::parse(v.get<std::string>(), currency);
    } catch (const error& e) {
        bad_field(where, std::string("'") + key + "': " + e.what());
    }
}

inline std::optional<Money> optional_money(const nlohmann::json& j, const std::string& key,
                                           const std::string& currency, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return money_field(j, key, currency, where);
}

inline Tick tick_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
    const auto& v = need(j, key, where);
    if (!v.is_number_integer()) bad_field(where, "'" + key + "' must be an integer tick");
    return v.get<Tick>();
}

inline DefaultCause parse_cause(const std::string& s, const std::string& where) {
    for (int i = 0; i <= static_cast<int>(DefaultCause::merger_without_assumption); ++i) {
        auto c = static_cast<DefaultCause>(i);
        if (s == cause_name(c)) return c;
    }
    bad_field(where, "unknown default cause '" + s + "'");
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
    using detail::bad_field;
    using detail::money_field;
    using detail::need;
    using detail::optional_money;
    using detail::tick_field;

    Scenario sc;
    const auto& version = need(j, "schema_version", "root");
    if (!version.is_number_integer() || version.get<int>() != 1)
        bad_field("root", "unsupported schema_version (expected 1)");
    sc.schema_version = 1;
    sc.name = j.value("name", std::string("unnamed"));

    // parties
    std::set<std::string> party_ids;
    for (const auto& pj : need(j, "parties", "root")) {
        Party p;
        p.id = need(pj, "id", "parties").get<std::string>();
        p.name = pj.value("name", p.id);
        std::string role = pj.value("role", std::string("bidder"));
        if (role == "dealer")
            p.role = PartyRole::dealer;
        else if (role == "end_user")
            p.role = PartyRole::end_user;
        else if (role == "bidder")
            p.role = PartyRole::bidder;
        else
            bad_field("parties", "unknown role '" + role + "' for '" + p.id + "'");
        if (p.id.empty()) bad_field("parties", "empty party id");
        if (p.id == kImAccount) bad_field("parties", "party id '" + p.id + "' is reserved");
        if (!party_ids.insert(p.id).second)
            bad_field("parties", "duplicate party id '" + p.id + "'");
        sc.parties.push_back(std::move(p));
    }

    // agreement + transactions
    const auto& aj = need(j, "agreement", "root");
    sc.agreement.party_a = need(aj, "party_a", "agreement").get<std::string>();
    sc.agreement.party_b = need(aj, "party_b", "agreement").get<std::string>();
    sc.agreement.currency = need(aj, "currency", "agreement").get<std::string>();
    if (sc.agreement.currency.size() != 3)
        bad_field("agreement", "currency must be a 3-letter code");
    for (const auto* id : {&sc.agreement.party_a, &sc.agreement.party_b})
        if (!party_ids.contains(*id))
            bad_field("agreement", "references unknown party '" + *id + "'");
    if (sc.agreement.party_a == sc.agreement.party_b)
        bad_field("agreement", "party_a and party_b must differ");
    const std::string& ccy = sc.agreement.currency;
    sc.agreement.vm_held_by_b = money_field(aj, "vm_held_by_b", ccy, "agreement");
    sc.agreement.im_posted_by_a = money_field(aj, "im_posted_by_a", ccy, "agreement");
    if (sc.agreement.im_posted_by_a.signum() < 0)
        bad_field("agreement", "im_posted_by_a must be >= 0");

    std::set<std::string> tx_ids;
    for (const auto& tj : need(aj, "transactions", "agreement")) {
        Transaction tx;
        tx.id = need(tj, "id", "transactions").get<std::string>();
        if (!tx_ids.insert(tx.id).second)
            bad_field("transactions", "duplicate transaction id '" + tx.id + "'");
        tx.description = tj.value("description", std::string{});
        tx.scripted_mark = optional_money(tj, "scripted_mark", ccy, "transactions");
        if (tj.contains("payments")) {
            for (const auto& pj : tj.at("payments")) {
                ScheduledPayment p;
                p.due = tick_field(pj, "due", "payments");
                p.payer = need(pj, "payer", "payments").get<std::string>();
                p.amount = money_field(pj, "amount", ccy, "payments");
                if (p.amount.signum() <= 0)
                    bad_field("payments", "amounts must be strictly positive");
                if (p.payer != sc.agreement.party_a && p.payer != sc.agreement.party_b)
                    bad_field("payments", "payer '" + p.payer + "' is not a party");
                tx.payments.push_back(std::move(p));
            }
            for (std::size_t i = 1; i < tx.payments.size(); ++i) {
                const auto& prev = tx.payments[i - 1];
                const auto& cur = tx.payments[i];
                if (cur.due < prev.due || (cur.due == prev.due && cur.payer < prev.payer))
                    bad_field("payments",
                              "schedule of '" + tx.id + "' not sorted by (due, payer)");
            }
        }
        sc.agreement.transaction_ids.push_back(tx.id);
        sc.transactions.push_back(std::move(tx));
    }

    if (j.contains("payments_made")) {
        for (const auto& pj : j.at("payments_made")) {
            PaymentKey key{need(pj, "transaction", "payments_made").get<std::string>(),
                           tick_field(pj, "due", "payments_made")};
            bool found = false;
            for (const auto& tx : sc.transactions)
                if (tx.id == key.transaction)
                    for (const auto& p : tx.payments)
                        if (p.due == key.due) found = true;
            if (!found)
                bad_field("payments_made", "no schedule entry for transaction '" +
                                               key.transaction + "' due " +
                                               std::to_string(key.due));
            sc.payments_made.insert(std::move(key));
        }
    }

    // event of default
    const auto& ej = need(j, "event", "root");
    sc.event.auto_detect = ej.value("auto_detect", false);
    if (!sc.event.auto_detect) {
        sc.event.cause = detail::parse_cause(
            need(ej, "cause", "event").get<std::string>(), "event");
        sc.event.occurred_at = tick_field(ej, "occurred_at", "event");
        if (*sc.event.occurred_at < 0) bad_field("event", "occurred_at must be >= 0");
    }
    if (ej.contains("early_termination_at")) {
        sc.event.early_termination_at = ej.at("early_termination_at").get<Tick>();
        if (sc.event.occurred_at && *sc.event.early_termination_at < *sc.event.occurred_at)
            bad_field("event", "early_termination_at precedes the default tick");
    }
    if (sc.event.auto_detect) {
        std::optional<Tick> detected;
        for (const auto& tx : sc.transactions)
            for (const auto& p : tx.payments)
                if (p.payer == sc.agreement.party_a &&
                    !sc.payments_made.contains({tx.id, p.due}))
                    detected = detected ? std::min(*detected, p.due) : p.due;
        if (!detected)
            bad_field("event", "auto_detect set but the defaulting party misses no payment");
        if (sc.event.early_termination_at && *sc.event.early_termination_at < *detected)
            bad_field("event", "early_termination_at precedes the detected default at tick " +
                                   std::to_string(*detected));
    }

    // auction config
    const auto& cj = need(j, "auction", "root");
    sc.auction.commit_deadline = tick_field(cj, "commit_deadline", "auction");
    sc.auction.reveal_deadline = tick_field(cj, "reveal_deadline", "auction");
    if (sc.auction.commit_deadline >= sc.auction.reveal_deadline)
        bad_field("auction", "commit_deadline must precede reveal_deadline");
    sc.auction.min_mid_quotes = cj.value("min_mid_quotes", 3);
    if (sc.auction.min_mid_quotes < 1) bad_field("auction", "min_mid_quotes must be >= 1");
    sc.auction.im_reference = cj.contains("im_reference")
                                  ? money_field(cj, "im_reference", ccy, "auction")
                                  : sc.agreement.im_posted_by_a;
    if (sc.auction.im_reference.signum() < 0)
        bad_field("auction", "im_reference must be >= 0");
    std::set<std::string> invited;
    if (cj.contains("invited")) {
        for (const auto& idj : cj.at("invited")) {
            std::string id = idj.get<std::string>();
            if (!party_ids.contains(id))
                bad_field("auction", "invited bidder '" + id + "' is not a declared party");
            if (id == sc.agreement.party_a || id == sc.agreement.party_b)
                bad_field("auction", "agreement parties cannot bid");
            if (!invited.insert(id).second)
                bad_field("auction", "duplicate invited bidder '" + id + "'");
            sc.auction.invited_bidders.push_back(id);
        }
    }

    // bidder scripts
    std::set<std::string> script_ids;
    bool any_stochastic = false;
    for (const auto& bj : j.value("bidders", nlohmann::json::array())) {
        BidderScript script;
        script.bidder = need(bj, "id", "bidders").get<std::string>();
        if (!party_ids.contains(script.bidder))
            bad_field("bidders", "bidder '" + script.bidder + "' is not a declared party");
        if (!script_ids.insert(script.bidder).second)
            bad_field("bidders", "duplicate bidder id '" + script.bidder + "'");
        std::string kind = need(bj, "behavior", "bidders").get<std::string>();
        const std::string where = "bidder '" + script.bidder + "'";
        if (kind == "scripted") {
            script.behavior = ScriptedBehavior{money_field(bj, "mid", ccy, where),
                                               optional_money(bj, "trade", ccy, where)};
        } else if (kind == "stochastic") {
            any_stochastic = true;
            StochasticBehavior b;
            b.true_value = money_field(bj, "true_value", ccy, where);
            b.mid_noise_sd = money_field(bj, "mid_noise_sd", ccy, where);
            b.trade_spread = money_field(bj, "trade_spread", ccy, where);
            if (b.mid_noise_sd.signum() < 0 || b.trade_spread.signum() < 0)
                bad_field(where, "noise parameters must be >= 0");
            b.participation_probability = need(bj, "participation_probability", where).get<double>();
            if (!(b.participation_probability >= 0.0 && b.participation_probability <= 1.0))
                bad_field(where, "participation_probability must lie in [0,1]");
            script.behavior = std::move(b);
        } else if (kind == "no_reveal") {
            script.behavior = NoRevealBehavior{money_field(bj, "mid", ccy, where),
                                               optional_money(bj, "trade", ccy, where)};
        } else if (kind == "tampered_reveal") {
            TamperedRevealBehavior b;
            b.mid = money_field(bj, "mid", ccy, where);
            b.trade = optional_money(bj, "trade", ccy, where);
            auto revealed = optional_money(bj, "revealed_mid", ccy, where);
            b.revealed_mid = revealed ? *revealed : b.mid + Money::parse("5.00", ccy);
            if (b.revealed_mid == b.mid)
                bad_field(where, "tampered reveal must differ from the committed mid");
            script.behavior = std::move(b);
        } else {
            bad_field(where, "unknown behavior '" + kind + "'");
        }
        if (bj.contains("commit_at")) script.commit_at = bj.at("commit_at").get<Tick>();
        if (bj.contains("reveal_at")) script.reveal_at = bj.at("reveal_at").get<Tick>();
        sc.bidders.push_back(std::move(script));
    }

    if (j.contains("seed")) {
        sc.seed = j.at("seed").get<std::uint64_t>();
    } else if (any_stochastic) {
        bad_field("root", "seed is required when any bidder is stochastic");
    }
    sc.force_trade_override = j.value("force_trade_override", false);
    std::string policy = j.value("residual_policy", std::string("always_revert"));
    if (policy == "always_revert")
        sc.residual_policy = ResidualPolicy::always_revert;
    else if (policy == "only_when_payable")
        sc.residual_policy = ResidualPolicy::only_when_payable;
    else
        bad_field("root", "unknown residual_policy '" + policy + "'");

    if (j.contains("expected")) {
        const auto& xj = j.at("expected");
        ExpectedOutcome x;
        auto str = [&](const char* key) -> std::optional<std::string> {
            if (!xj.contains(key) || xj.at(key).is_null()) return std::nullopt;
            return xj.at(key).get<std::string>();
        };
        x.mq = str("mq");
        x.winner = str("winner");
        x.execution_price = str("execution_price");
        x.decision = str("decision");
        x.termination_amount = str("termination_amount");
        sc.expected = std::move(x);
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("scenario: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("scenario: '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return parse_scenario(j);
    } catch (const nlohmann::json::exception& e) {  // ill-typed field
        throw validation_error("scenario: '" + path + "': " + e.what());
    }
}

}  // namespace closeout
