#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "closeout/auction.hpp"
#include "closeout/errors.hpp"
#include "closeout/lifecycle.hpp"
#include "closeout/model.hpp"
#include "closeout/money.hpp"

namespace closeout {

// Account id of the segregated IM account.  Party ids may not collide with it.
inline constexpr const char* kImAccount = "im_segregated";

enum class TransferPurpose {
    termination_amount,
    trade_novation_payment,
    im_cost_to_non_defaulter,
    im_residual_to_defaulter,
    im_full_to_non_defaulter,
    vm_return,
};

inline const char* purpose_name(TransferPurpose p) {
    switch (p) {
        case TransferPurpose::termination_amount: return "termination_amount";
        case TransferPurpose::trade_novation_payment: return "trade_novation_payment";
        case TransferPurpose::im_cost_to_non_defaulter: return "im_cost_to_non_defaulter";
        case TransferPurpose::im_residual_to_defaulter: return "im_residual_to_defaulter";
        case TransferPurpose::im_full_to_non_defaulter: return "im_full_to_non_defaulter";
        case TransferPurpose::vm_return: return "vm_return";
    }
    return "?";
}

struct LedgerEntry {
    std::string from;
    std::string to;
    Money amount;  // strictly positive
    TransferPurpose purpose;
};

// One cash account per party plus the segregated IM account.
class AccountSet {
public:
    AccountSet(const std::string& currency, std::span<const std::string> party_ids,
               const Money& im_posted_by_a)
        : currency_(currency) {
        for (const auto& id : party_ids) {
            if (id == kImAccount)
                throw validation_error("accounts: party id collides with the IM account");
            balances_.emplace(id, Money::zero(currency));
        }
        if (im_posted_by_a.signum() < 0)
            throw validation_error("accounts: segregated IM cannot be negative");
        balances_.emplace(kImAccount, im_posted_by_a);
    }

    const Money& balance(const std::string& account) const {
        auto it = balances_.find(account);
        if (it == balances_.end())
            throw protocol_error("accounts: unknown account '" + account + "'");
        return it->second;
    }

    bool has(const std::string& account) const { return balances_.contains(account); }

    Money total() const {
        Money t = Money::zero(currency_);
        for (const auto& [id, bal] : balances_) t += bal;
        return t;
    }

    const std::map<std::string, Money>& balances() const { return balances_; }
    const std::string& currency() const { return currency_; }

    // All entries apply or none.
    void apply(std::span<const LedgerEntry> entries) {
        std::map<std::string, Money> next = balances_;
        for (const auto& e : entries) {
            if (e.amount.signum() <= 0)
                throw integrity_error("ledger: non-positive transfer amount " +
                                      e.amount.to_string());
            if (e.from == e.to)
                throw integrity_error("ledger: transfer from an account to itself: " + e.from);
            auto from = next.find(e.from);
            auto to = next.find(e.to);
            if (from == next.end() || to == next.end())
                throw protocol_error("ledger: transfer references unknown account");
            from->second -= e.amount;
            to->second += e.amount;
        }
        balances_ = std::move(next);
    }

private:
    std::string currency_;
    std::map<std::string, Money> balances_;
};

// Whether the IM residual reverts to the defaulting party in every Trade
// branch (default) or only when the termination amount is payable by the
// non-defaulting party.  Under only_when_payable with a non-payable amount
// the whole segregated balance goes to the non-defaulting party.
enum class ResidualPolicy { always_revert, only_when_payable };

// Builds the atomic transfer set for a delivered statement:
//   (1) termination amount netted against the VM balance, excess VM returned;
//   (2) trade novation with the winner at the execution price;
//   (3) the IM split (cost to the non-defaulter, residual reverted).
inline std::vector<LedgerEntry> settle_entries(const TerminationStatement& statement,
                                               const AuctionOutcome& outcome,
                                               const MasterAgreement& agreement,
                                               ResidualPolicy policy = ResidualPolicy::always_revert) {
    const std::string& ccy = agreement.currency;
    if (statement.termination_amount.currency() != ccy ||
        agreement.vm_held_by_b.currency() != ccy)
        throw arithmetic_error("settle: currency mismatch between statement and agreement");
    const std::string& a = agreement.party_a;  // defaulting
    const std::string& b = agreement.party_b;  // non-defaulting
    std::vector<LedgerEntry> entries;
    auto transfer = [&](const std::string& from, const std::string& to, const Money& amount,
                        TransferPurpose purpose) {
        if (amount.signum() > 0) entries.push_back({from, to, amount, purpose});
    };

    // (1) Termination amount vs the VM balance.  T > 0: B pays A.  V > 0: B
    // holds A's collateral.  Collateral the payee holds is applied first;
    // collateral the payer holds flows back in full as a VM return.
    const Money& t = statement.termination_amount;
    const Money& v = agreement.vm_held_by_b;
    if (t.signum() >= 0 && v.signum() >= 0) {
        transfer(b, a, t, TransferPurpose::termination_amount);
        transfer(b, a, v, TransferPurpose::vm_return);
    } else if (t.signum() <= 0 && v.signum() <= 0) {
        transfer(a, b, -t, TransferPurpose::termination_amount);
        transfer(a, b, -v, TransferPurpose::vm_return);
    } else if (t.signum() < 0) {  // A pays, B holds A's collateral: apply it
        Money owed = -t;
        if (v >= owed)
            transfer(b, a, v - owed, TransferPurpose::vm_return);
        else
            transfer(a, b, owed - v, TransferPurpose::termination_amount);
    } else {  // B pays, A holds B's collateral: apply it
        Money held = -v;
        if (held >= t)
            transfer(a, b, held - t, TransferPurpose::vm_return);
        else
            transfer(b, a, t - held, TransferPurpose::termination_amount);
    }

    // (2) Replacement-trade novation.  A positive execution price means the
    // portfolio is an asset to the winner, so the winner pays for it.
    if (outcome.decision == AuctionDecision::trade) {
        const Money& price = *outcome.execution_price;
        if (price.signum() > 0)
            transfer(*outcome.winner, b, price, TransferPurpose::trade_novation_payment);
        else if (price.signum() < 0)
            transfer(b, *outcome.winner, -price, TransferPurpose::trade_novation_payment);
    }

    // (3) IM split: the replacement cost to the non-defaulting party, the
    // residual back to the defaulting party; the margin serves its original
    // purpose in full when no trade happens.
    const Money& im = agreement.im_posted_by_a;
    if (outcome.decision == AuctionDecision::trade) {
        bool revert = policy == ResidualPolicy::always_revert ||
                      statement.termination_amount.signum() > 0;
        if (revert) {
            Money residual = *outcome.residual;
            transfer(kImAccount, b, im - residual, TransferPurpose::im_cost_to_non_defaulter);
            transfer(kImAccount, a, residual, TransferPurpose::im_residual_to_defaulter);
        } else {
            transfer(kImAccount, b, im, TransferPurpose::im_full_to_non_defaulter);
        }
    } else {
        transfer(kImAccount, b, im, TransferPurpose::im_full_to_non_defaulter);
    }
    return entries;
}

// Applies settlement atomically exactly once per statement.
class SettlementEngine {
public:
    explicit SettlementEngine(AccountSet accounts) : accounts_(std::move(accounts)) {}

    const AccountSet& accounts() const { return accounts_; }

    // im_reference is the margin the auction's stopping rule reasoned about;
    // settlement refuses to distribute a segregated balance that differs.
    std::vector<LedgerEntry> settle(const TerminationStatement& statement,
                                    const AuctionOutcome& outcome,
                                    const MasterAgreement& agreement,
                                    const Money& im_reference,
                                    ResidualPolicy policy = ResidualPolicy::always_revert) {
        if (settled_)
            throw protocol_error("settle: statement already settled; ledger unchanged");
        if (accounts_.balance(kImAccount) != im_reference)
            throw integrity_error("settle: segregated IM balance " +
                                  accounts_.balance(kImAccount).to_string() +
                                  " does not match the auction's IM reference " +
                                  im_reference.to_string());
        std::vector<LedgerEntry> entries = settle_entries(statement, outcome, agreement, policy);
        accounts_.apply(entries);
        settled_ = true;
        return entries;
    }

private:
    AccountSet accounts_;
    bool settled_ = false;
};

// Collateral view over the settled accounts: the VM balance nets into the
// termination payment, so nothing remains outstanding, and the segregated
// account must have been emptied.
inline CollateralState collateral_after_settlement(const AccountSet& accounts,
                                                   const MasterAgreement& agreement) {
    return {Money::zero(agreement.currency), accounts.balance(kImAccount)};
}

struct ConservationReport {
    bool passed = false;
    std::string detail;  // first violating account on failure
};

// Independent settlement check: zero-sum over all accounts, the IM account
// emptied with the expected decomposition, and each party's net change equal
// to a closed form recomputed from the statement and outcome alone.
inline ConservationReport verify_conservation(std::span<const LedgerEntry> entries,
                                              const AccountSet& before, const AccountSet& after,
                                              const TerminationStatement& statement,
                                              const AuctionOutcome& outcome,
                                              const MasterAgreement& agreement,
                                              ResidualPolicy policy = ResidualPolicy::always_revert) {
    const std::string& ccy = agreement.currency;
    auto fail = [](std::string detail) { return ConservationReport{false, std::move(detail)}; };

    // (a) zero-sum
    if (before.total() != after.total())
        return fail("total balance changed: " + before.total().to_string() + " -> " +
                    after.total().to_string());

    // Net change per account.
    auto delta = [&](const std::string& account) {
        return after.balance(account) - before.balance(account);
    };

    // (b) the IM account empties by exactly the posted margin, decomposed as
    // cost + residual or a full transfer.
    Money im_delta = delta(kImAccount);
    if (im_delta != -agreement.im_posted_by_a)
        return fail("IM account changed by " + im_delta.to_string() + ", expected -" +
                    agreement.im_posted_by_a.to_string());
    Money im_out = Money::zero(ccy);
    Money im_cost_part = Money::zero(ccy);
    Money im_residual_part = Money::zero(ccy);
    for (const auto& e : entries) {
        if (e.from != kImAccount) continue;
        im_out += e.amount;
        if (e.purpose == TransferPurpose::im_residual_to_defaulter)
            im_residual_part += e.amount;
        else
            im_cost_part += e.amount;
    }
    if (im_out != agreement.im_posted_by_a)
        return fail("IM outflow " + im_out.to_string() + " does not exhaust the margin");
    if (im_cost_part + im_residual_part != agreement.im_posted_by_a)
        return fail("IM decomposition does not add up");

    // (c) closed-form per-party changes, recomputed from statement + outcome.
    bool trade = outcome.decision == AuctionDecision::trade;
    bool revert = trade && (policy == ResidualPolicy::always_revert ||
                            statement.termination_amount.signum() > 0);
    Money net_to_a = statement.termination_amount + agreement.vm_held_by_b;
    Money residual = revert ? *outcome.residual : Money::zero(ccy);
    Money price = trade ? *outcome.execution_price : Money::zero(ccy);

    Money expect_a = net_to_a + residual;
    Money expect_b = -net_to_a + price + (agreement.im_posted_by_a - residual);
    if (delta(agreement.party_a) != expect_a)
        return fail("defaulting party " + agreement.party_a + " changed by " +
                    delta(agreement.party_a).to_string() + ", closed form expects " +
                    expect_a.to_string());
    if (delta(agreement.party_b) != expect_b)
        return fail("non-defaulting party " + agreement.party_b + " changed by " +
                    delta(agreement.party_b).to_string() + ", closed form expects " +
                    expect_b.to_string());
    if (trade && outcome.winner) {
        if (delta(*outcome.winner) != -price)
            return fail("winner " + *outcome.winner + " changed by " +
                        delta(*outcome.winner).to_string() + ", closed form expects " +
                        (-price).to_string());
    }
    for (const auto& [account, bal] : after.balances()) {
        if (account == kImAccount || account == agreement.party_a ||
            account == agreement.party_b)
            continue;
        if (trade && outcome.winner && account == *outcome.winner) continue;
        if (bal != before.balance(account))
            return fail("bystander account " + account + " changed");
    }
    return {true, ""};
}

}  // namespace closeout
