#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "closeout/settlement.hpp"

using namespace closeout;

namespace {

Money usd(const char* s) { return Money::parse(s, "USD"); }
Money cents(long long c) { return Money::from_cents(c, "USD"); }

const std::vector<std::string> kParties = {"A", "B", "w1", "w2"};

MasterAgreement agreement_with(const char* vm, const char* im) {
    MasterAgreement a;
    a.party_a = "A";
    a.party_b = "B";
    a.currency = "USD";
    a.vm_held_by_b = usd(vm);
    a.im_posted_by_a = usd(im);
    return a;
}

TerminationStatement statement_for(const char* unpaid, const char* mq) {
    return build_statement(usd(unpaid), usd(mq), "A", "B", 2);
}

AuctionOutcome trade_outcome(const char* mq, const char* price, const char* im) {
    return apply_stopping_rule(usd(mq), TradeSelection{"w1", usd(price)}, usd(im));
}

AuctionOutcome no_bids_outcome(const char* mq) {
    return apply_stopping_rule(usd(mq), std::nullopt, usd("0.00"));
}

// Finds the single entry with the given purpose, or fails.
const LedgerEntry& only(const std::vector<LedgerEntry>& entries, TransferPurpose p) {
    const LedgerEntry* found = nullptr;
    for (const auto& e : entries) {
        if (e.purpose != p) continue;
        REQUIRE(found == nullptr);
        found = &e;
    }
    REQUIRE(found != nullptr);
    return *found;
}

bool has_purpose(const std::vector<LedgerEntry>& entries, TransferPurpose p) {
    for (const auto& e : entries)
        if (e.purpose == p) return true;
    return false;
}

}  // namespace

TEST_CASE("settlement composes the reference trade case") {
    // statement +91.67ish (exact 275/3), trade at 85 with IM 10
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    Money mq(Rational(BigInt(275), BigInt(3)), "USD");
    TerminationStatement st = build_statement(usd("0.00"), mq, "A", "B", 2);
    AuctionOutcome out = apply_stopping_rule(mq, TradeSelection{"w1", usd("85.00")}, usd("10.00"));

    SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
    AccountSet before = engine.accounts();
    auto entries = engine.settle(st, out, agreement, agreement.im_posted_by_a);

    REQUIRE(entries.size() == 4);
    const auto& term = only(entries, TransferPurpose::termination_amount);
    CHECK(term.from == "B");
    CHECK(term.to == "A");
    CHECK(term.amount.to_string() == "91.67");
    const auto& novation = only(entries, TransferPurpose::trade_novation_payment);
    CHECK(novation.from == "w1");
    CHECK(novation.to == "B");
    CHECK(novation.amount.to_string() == "85.00");
    const auto& cost = only(entries, TransferPurpose::im_cost_to_non_defaulter);
    CHECK(cost.from == kImAccount);
    CHECK(cost.to == "B");
    CHECK(cost.amount.to_string() == "6.67");
    const auto& residual = only(entries, TransferPurpose::im_residual_to_defaulter);
    CHECK(residual.to == "A");
    CHECK(residual.amount.to_string() == "3.33");
    CHECK(cost.amount + residual.amount == usd("10.00"));  // IM exhausted exactly

    auto verdict = verify_conservation(entries, before, engine.accounts(), st, out, agreement);
    CHECK(verdict.passed);
    CHECK(engine.accounts().balance(kImAccount).is_zero());
    CHECK(collateral_after_settlement(engine.accounts(), agreement).im_segregated.is_zero());
    CHECK(engine.accounts().total() == before.total());
}

TEST_CASE("no trade bids hand the whole margin to the non-defaulter") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    TerminationStatement st = statement_for("0.00", "92.50");
    AuctionOutcome out = no_bids_outcome("92.50");
    SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
    AccountSet before = engine.accounts();
    auto entries = engine.settle(st, out, agreement, agreement.im_posted_by_a);
    REQUIRE(entries.size() == 2);
    const auto& full = only(entries, TransferPurpose::im_full_to_non_defaulter);
    CHECK(full.amount.to_string() == "10.00");
    CHECK(full.to == "B");
    CHECK_FALSE(has_purpose(entries, TransferPurpose::trade_novation_payment));
    CHECK(verify_conservation(entries, before, engine.accounts(), st, out, agreement).passed);
}

TEST_CASE("cancelled trades also forfeit the residual") {
    MasterAgreement agreement = agreement_with("0.00", "4.00");
    Money mq = usd("95.00");
    TerminationStatement st = build_statement(usd("0.00"), mq, "A", "B", 2);
    AuctionOutcome out = apply_stopping_rule(mq, TradeSelection{"w1", usd("90.00")}, usd("4.00"));
    REQUIRE(out.decision == AuctionDecision::cancel_cost_exceeds_im);
    SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
    AccountSet before = engine.accounts();
    auto entries = engine.settle(st, out, agreement, agreement.im_posted_by_a);
    CHECK(only(entries, TransferPurpose::im_full_to_non_defaulter).amount == usd("4.00"));
    CHECK_FALSE(has_purpose(entries, TransferPurpose::trade_novation_payment));
    CHECK_FALSE(has_purpose(entries, TransferPurpose::im_residual_to_defaulter));
    CHECK(verify_conservation(entries, before, engine.accounts(), st, out, agreement).passed);
}

TEST_CASE("zero statement with zero-cost trade moves only the margin") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    TerminationStatement st = statement_for("0.00", "0.00");
    AuctionOutcome out = trade_outcome("0.00", "0.00", "10.00");
    REQUIRE(out.trade_cost->is_zero());
    SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
    auto entries = engine.settle(st, out, agreement, agreement.im_posted_by_a);
    REQUIRE(entries.size() == 1);  // no termination entry, no novation at price zero
    const auto& residual = only(entries, TransferPurpose::im_residual_to_defaulter);
    CHECK(residual.amount.to_string() == "10.00");
    CHECK(residual.to == "A");
}

TEST_CASE("VM netting covers all four sign quadrants") {
    SUBCASE("payer B, B holds A's collateral: both legs flow to A") {
        MasterAgreement agreement = agreement_with("7.00", "0.00");
        TerminationStatement st = statement_for("0.00", "20.00");
        auto entries = settle_entries(st, no_bids_outcome("20.00"), agreement);
        CHECK(only(entries, TransferPurpose::termination_amount).amount == usd("20.00"));
        const auto& ret = only(entries, TransferPurpose::vm_return);
        CHECK(ret.from == "B");
        CHECK(ret.to == "A");
        CHECK(ret.amount == usd("7.00"));
    }
    SUBCASE("payer B, A holds more of B's collateral than the amount") {
        MasterAgreement agreement = agreement_with("-30.00", "0.00");
        TerminationStatement st = statement_for("0.00", "20.00");
        auto entries = settle_entries(st, no_bids_outcome("20.00"), agreement);
        CHECK_FALSE(has_purpose(entries, TransferPurpose::termination_amount));
        const auto& ret = only(entries, TransferPurpose::vm_return);
        CHECK(ret.from == "A");
        CHECK(ret.to == "B");
        CHECK(ret.amount == usd("10.00"));  // collateral minus the applied amount
    }
    SUBCASE("payer B, A holds less of B's collateral than the amount") {
        MasterAgreement agreement = agreement_with("-8.00", "0.00");
        TerminationStatement st = statement_for("0.00", "20.00");
        auto entries = settle_entries(st, no_bids_outcome("20.00"), agreement);
        CHECK_FALSE(has_purpose(entries, TransferPurpose::vm_return));
        const auto& term = only(entries, TransferPurpose::termination_amount);
        CHECK(term.from == "B");
        CHECK(term.amount == usd("12.00"));
    }
    SUBCASE("payer A, B holds A's collateral and applies it") {
        MasterAgreement agreement = agreement_with("5.00", "0.00");
        TerminationStatement st = statement_for("0.00", "-12.00");  // A owes 12
        auto entries = settle_entries(st, no_bids_outcome("-12.00"), agreement);
        const auto& term = only(entries, TransferPurpose::termination_amount);
        CHECK(term.from == "A");
        CHECK(term.to == "B");
        CHECK(term.amount == usd("7.00"));
    }
    SUBCASE("payer A, A also holds B's collateral: both legs flow to B") {
        MasterAgreement agreement = agreement_with("-5.00", "0.00");
        TerminationStatement st = statement_for("0.00", "-12.00");
        auto entries = settle_entries(st, no_bids_outcome("-12.00"), agreement);
        CHECK(only(entries, TransferPurpose::termination_amount).amount == usd("12.00"));
        const auto& ret = only(entries, TransferPurpose::vm_return);
        CHECK(ret.from == "A");
        CHECK(ret.amount == usd("5.00"));
    }
}

TEST_CASE("negative execution price reverses the novation direction") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    Money mq = usd("-20.00");
    TerminationStatement st = build_statement(usd("0.00"), mq, "A", "B", 2);
    AuctionOutcome out = apply_stopping_rule(mq, TradeSelection{"w1", usd("-25.00")}, usd("10.00"));
    REQUIRE(out.decision == AuctionDecision::trade);
    auto entries = settle_entries(st, out, agreement);
    const auto& novation = only(entries, TransferPurpose::trade_novation_payment);
    CHECK(novation.from == "B");  // B pays the winner to assume a liability
    CHECK(novation.to == "w1");
    CHECK(novation.amount == usd("25.00"));
}

TEST_CASE("settling twice is rejected and leaves the ledger unchanged") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    TerminationStatement st = statement_for("0.00", "91.67");
    AuctionOutcome out = trade_outcome("91.67", "85.00", "10.00");
    SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
    (void)engine.settle(st, out, agreement, agreement.im_posted_by_a);
    auto snapshot = engine.accounts().balances();
    CHECK_THROWS_AS((void)engine.settle(st, out, agreement, agreement.im_posted_by_a), protocol_error);
    CHECK(engine.accounts().balances() == snapshot);
}

TEST_CASE("IM account must match the posted margin") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    TerminationStatement st = statement_for("0.00", "91.67");
    AuctionOutcome out = trade_outcome("91.67", "85.00", "10.00");
    // account was funded with a different amount than the agreement says
    SettlementEngine engine(AccountSet("USD", kParties, usd("9.00")));
    CHECK_THROWS_AS((void)engine.settle(st, out, agreement, agreement.im_posted_by_a), integrity_error);
}

TEST_CASE("currency mismatch is rejected") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    agreement.currency = "EUR";
    TerminationStatement st = statement_for("0.00", "91.67");
    AuctionOutcome out = trade_outcome("91.67", "85.00", "10.00");
    CHECK_THROWS_AS((void)settle_entries(st, out, agreement), arithmetic_error);
}

TEST_CASE("conservation check flags a perturbed entry") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    TerminationStatement st = statement_for("0.00", "91.67");
    AuctionOutcome out = trade_outcome("91.67", "85.00", "10.00");
    SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
    AccountSet before = engine.accounts();
    auto entries = engine.settle(st, out, agreement, agreement.im_posted_by_a);

    // replay the perturbed entries onto a fresh account set
    auto tampered = entries;
    tampered[0].amount += usd("0.01");
    AccountSet replayed("USD", kParties, agreement.im_posted_by_a);
    replayed.apply(tampered);
    auto verdict = verify_conservation(tampered, before, replayed, st, out, agreement);
    CHECK_FALSE(verdict.passed);
    CHECK_FALSE(verdict.detail.empty());
}

TEST_CASE("empty entry list passes for an all-zero settlement") {
    MasterAgreement agreement = agreement_with("0.00", "0.00");
    TerminationStatement st = statement_for("0.00", "0.00");
    AuctionOutcome out = no_bids_outcome("0.00");
    SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
    AccountSet before = engine.accounts();
    auto entries = engine.settle(st, out, agreement, agreement.im_posted_by_a);
    CHECK(entries.empty());
    CHECK(verify_conservation(entries, before, engine.accounts(), st, out, agreement).passed);
}

TEST_CASE("residual goes to the non-defaulter under only_when_payable if B owes nothing") {
    MasterAgreement agreement = agreement_with("0.00", "10.00");
    Money mq = usd("-5.00");  // A owes B: termination amount not payable by B
    TerminationStatement st = build_statement(usd("0.00"), mq, "A", "B", 2);
    AuctionOutcome out = apply_stopping_rule(mq, TradeSelection{"w1", usd("-6.00")}, usd("10.00"));
    REQUIRE(out.decision == AuctionDecision::trade);

    SUBCASE("default policy reverts to A") {
        auto entries = settle_entries(st, out, agreement, ResidualPolicy::always_revert);
        CHECK(only(entries, TransferPurpose::im_residual_to_defaulter).amount == usd("9.00"));
    }
    SUBCASE("conditional policy pays the whole margin to B") {
        auto entries = settle_entries(st, out, agreement, ResidualPolicy::only_when_payable);
        CHECK_FALSE(has_purpose(entries, TransferPurpose::im_residual_to_defaulter));
        CHECK(only(entries, TransferPurpose::im_full_to_non_defaulter).amount == usd("10.00"));
        // conservation still verifies under the same policy
        AccountSet before("USD", kParties, agreement.im_posted_by_a);
        AccountSet after = before;
        after.apply(entries);
        CHECK(verify_conservation(entries, before, after, st, out, agreement,
                                  ResidualPolicy::only_when_payable)
                  .passed);
    }
}

TEST_CASE("fuzzed settlements conserve and exhaust the margin") {
    std::mt19937_64 gen(61);
    for (int round = 0; round < 3000; ++round) {
        MasterAgreement agreement = agreement_with("0.00", "0.00");
        agreement.vm_held_by_b = cents(static_cast<long long>(gen() % 8001) - 4000);
        agreement.im_posted_by_a = cents(static_cast<long long>(gen() % 3000));
        Money unpaid = cents(static_cast<long long>(gen() % 2001) - 1000);
        Money mq = cents(static_cast<long long>(gen() % 20001) - 10000);
        TerminationStatement st = build_statement(unpaid, mq, "A", "B", 2);
        std::optional<TradeSelection> sel;
        if (gen() % 4 != 0)
            sel = TradeSelection{gen() % 2 ? "w1" : "w2",
                                 cents(static_cast<long long>(gen() % 20001) - 10000)};
        AuctionOutcome out = apply_stopping_rule(mq, sel, agreement.im_posted_by_a);

        SettlementEngine engine(AccountSet("USD", kParties, agreement.im_posted_by_a));
        AccountSet before = engine.accounts();
        auto entries = engine.settle(st, out, agreement, agreement.im_posted_by_a);
        auto verdict = verify_conservation(entries, before, engine.accounts(), st, out, agreement);
        CHECK(verdict.passed);
        if (!verdict.passed) FAIL(verdict.detail);
        CHECK(engine.accounts().total() == before.total());
        CHECK(engine.accounts().balance(kImAccount).is_zero());
        if (out.decision == AuctionDecision::trade)
            CHECK(*out.trade_cost + *out.residual == agreement.im_posted_by_a);
    }
}
