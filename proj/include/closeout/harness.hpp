#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "closeout/auction.hpp"
#include "closeout/errors.hpp"
#include "closeout/lifecycle.hpp"
#include "closeout/model.hpp"
#include "closeout/report.hpp"
#include "closeout/rng.hpp"
#include "closeout/scenario.hpp"
#include "closeout/settlement.hpp"

namespace closeout {

// Deterministic salt per (scenario seed, bidder): commitments are
// reproducible without storing 32 raw bytes in scenario files.
inline std::array<std::uint8_t, 32> derive_salt(std::uint64_t seed, const std::string& bidder) {
    Sha256 h;
    h.update(std::string_view("closeout-salt-v1"));
    std::uint8_t seed_be[8];
    for (int i = 0; i < 8; ++i) seed_be[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    h.update(seed_be, sizeof(seed_be));
    h.update(bidder.data(), bidder.size());
    return h.finish();
}

// Draws a stochastic bidder's quote, or nothing if it sits out.  The mid is
// the true value plus gaussian noise rounded to cents; the trade quote
// concedes the spread below the bidder's own mid.
inline std::optional<Bid> stochastic_bid(const StochasticBehavior& script, BidderRng& rng,
                                         const std::string& bidder, const std::string& currency,
                                         const std::array<std::uint8_t, 32>& salt) {
    double participation = rng.uniform01();
    double z = rng.gaussian();  // drawn unconditionally so draws stay aligned
    if (participation >= script.participation_probability) return std::nullopt;
    double noise_cents = z * script.mid_noise_sd.amount().to_double() * 100.0;
    Money mid = script.true_value + Money::from_cents(std::llround(noise_cents), currency);
    return Bid{bidder, mid, mid - script.trade_spread, salt};
}

namespace harness_detail {

struct BidPlan {
    std::string bidder;
    std::optional<Bid> committed;
    std::optional<Bid> revealed;
    Tick commit_at = 0;
    Tick reveal_at = 0;
};

inline std::vector<BidPlan> plan_bids(const Scenario& sc, Tick open_tick) {
    std::vector<BidPlan> plans;
    for (const auto& script : sc.bidders) {
        BidPlan plan;
        plan.bidder = script.bidder;
        plan.commit_at = std::max(script.commit_at.value_or(open_tick), open_tick);
        plan.reveal_at = script.reveal_at.value_or(sc.auction.commit_deadline + 1);
        auto salt = derive_salt(sc.seed, script.bidder);
        const std::string& ccy = sc.agreement.currency;
        if (const auto* b = std::get_if<ScriptedBehavior>(&script.behavior)) {
            plan.committed = Bid{script.bidder, b->mid, b->trade, salt};
            plan.revealed = plan.committed;
        } else if (const auto* b = std::get_if<NoRevealBehavior>(&script.behavior)) {
            plan.committed = Bid{script.bidder, b->mid, b->trade, salt};
        } else if (const auto* b = std::get_if<TamperedRevealBehavior>(&script.behavior)) {
            plan.committed = Bid{script.bidder, b->mid, b->trade, salt};
            plan.revealed = Bid{script.bidder, b->revealed_mid, b->trade, salt};
        } else if (const auto* b = std::get_if<StochasticBehavior>(&script.behavior)) {
            BidderRng rng(sc.seed, script.bidder);
            auto bid = stochastic_bid(*b, rng, script.bidder, ccy, salt);
            if (bid) {
                plan.committed = bid;
                plan.revealed = bid;
            }
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

}  // namespace harness_detail

// Runs one scenario end to end: declare -> designate -> cease -> auction
// (commit, reveal, aggregate) -> statement -> settle -> conservation check.
// Strictly sequential; all per-tick activity is applied in (tick, bidder id,
// commit-before-reveal) order, so a run is a pure function of (scenario, seed).
// Module failures abort the run but the report keeps the partial transcript.
inline RunReport run(const Scenario& sc) {
    auto started = std::chrono::steady_clock::now();
    RunReport report;
    report.scenario_name = sc.name;
    report.currency = sc.agreement.currency;
    report.seed = sc.seed;
    report.generator = kGeneratorName;

    LifecycleEngine lifecycle;
    Tick now = 0;
    std::string stage = "lifecycle";
    try {
        // Event of default: scripted, or the first missed payment by party A.
        EventOfDefault event;
        event.defaulting_party = sc.agreement.party_a;
        if (sc.event.auto_detect) {
            std::optional<Tick> detected;
            for (const auto& tx : sc.transactions)
                for (const auto& p : tx.payments)
                    if (p.payer == sc.agreement.party_a &&
                        !sc.payments_made.contains({tx.id, p.due}))
                        detected = detected ? std::min(*detected, p.due) : p.due;
            if (!detected)
                throw protocol_error("auto-detect: the defaulting party misses no payment");
            event.cause = DefaultCause::failure_to_pay_or_deliver;
            event.occurred_at = *detected;
        } else {
            event.cause = *sc.event.cause;
            event.occurred_at = *sc.event.occurred_at;
        }
        now = event.occurred_at;
        lifecycle.declare_default(event, now);

        Tick etd = sc.event.early_termination_at.value_or(event.occurred_at);
        now = etd;
        lifecycle.designate_early_termination(etd);
        lifecycle.cease_obligations(etd);

        Money unpaid = unpaid_amounts(sc.transactions, sc.agreement, etd, sc.payments_made);

        Money mq = Money::zero(sc.agreement.currency);
        std::optional<AuctionOutcome> outcome;
        if (sc.auction.invited_bidders.empty()) {
            // No bidders configured: the auction stage is skipped and the
            // valuation falls back to the scripted marks (direct market cover).
            stage = "auction";
            if (!sc.bidders.empty())
                throw protocol_error("bidder scripts present but nobody was invited");
            mq = net_scripted_value(sc.transactions, sc.agreement);
            AuctionOutcome fallback;
            fallback.mq = mq;
            fallback.decision = AuctionDecision::no_trade_bids;
            outcome = fallback;
            now = etd;
            lifecycle.record_amounts(now, /*auction_skipped=*/true);
        } else {
            stage = "auction";
            lifecycle.begin_auction(etd);
            AuctionEngine auction(sc.auction,
                                  PortfolioSnapshot{sc.agreement.currency, sc.transactions,
                                                    sc.agreement.party_a, sc.agreement.party_b},
                                  etd);
            auto plans = harness_detail::plan_bids(sc, etd);
            // Commit phase, then reveal phase; each sequenced by (tick, bidder).
            std::sort(plans.begin(), plans.end(), [](const auto& a, const auto& b) {
                return std::tie(a.commit_at, a.bidder) < std::tie(b.commit_at, b.bidder);
            });
            for (const auto& plan : plans) {
                if (!plan.committed) continue;
                now = plan.commit_at;
                auction.commit_bid(
                    {plan.bidder, commitment_digest(*plan.committed), plan.commit_at},
                    plan.commit_at);
            }
            std::sort(plans.begin(), plans.end(), [](const auto& a, const auto& b) {
                return std::tie(a.reveal_at, a.bidder) < std::tie(b.reveal_at, b.bidder);
            });
            for (const auto& plan : plans) {
                if (!plan.committed || !plan.revealed) continue;
                now = plan.reveal_at;
                auction.reveal_bid(*plan.revealed, plan.reveal_at);
            }
            now = sc.auction.reveal_deadline + 1;
            try {
                FinalizedAuction fin = auction.finalize(now, sc.force_trade_override);
                report.market_quotation = fin.mq;
                outcome = fin.outcome;
                mq = fin.mq.value;
            } catch (...) {
                report.transcript = auction.transcript();
                throw;
            }
            report.transcript = auction.transcript();
            lifecycle.record_amounts(now);
        }
        report.outcome = outcome;

        stage = "lifecycle";
        TerminationStatement statement = build_statement(
            unpaid, mq, sc.agreement.party_a, sc.agreement.party_b, etd, outcome);
        lifecycle.deliver_statement(now);
        report.statement = statement;

        stage = "settlement";
        CollateralState posted{sc.agreement.vm_held_by_b, sc.agreement.im_posted_by_a};
        std::vector<std::string> party_ids;
        for (const auto& p : sc.parties) party_ids.push_back(p.id);
        SettlementEngine engine(
            AccountSet(sc.agreement.currency, party_ids, posted.im_segregated));
        AccountSet before = engine.accounts();
        report.ledger = engine.settle(statement, *outcome, sc.agreement,
                                      sc.auction.im_reference, sc.residual_policy);
        report.conservation = verify_conservation(report.ledger, before, engine.accounts(),
                                                  statement, *outcome, sc.agreement,
                                                  sc.residual_policy);
        if (!collateral_after_settlement(engine.accounts(), sc.agreement).im_segregated.is_zero())
            throw integrity_error("settle: segregated IM not released in full");
        lifecycle.mark_settled(now);
    } catch (const integrity_error& e) {
        report.abort = AbortRecord{now, stage, "integrity", e.what()};
    } catch (const error& e) {
        report.abort = AbortRecord{now, stage, "protocol", e.what()};
    }

    report.final_state = lifecycle.state();
    report.lifecycle_log = lifecycle.log();
    report.wall_time_us = std::chrono::duration_cast<std::chrono::microseconds>(
                              std::chrono::steady_clock::now() - started)
                              .count();
    return report;
}

}  // namespace closeout
