#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "closeout/errors.hpp"
#include "closeout/money.hpp"

namespace closeout {

// Simulation time is an integer tick; no calendar conventions.
using Tick = std::int64_t;

enum class PartyRole { dealer, end_user, bidder };

struct Party {
    std::string id;
    std::string name;
    PartyRole role = PartyRole::bidder;
};

struct ScheduledPayment {
    Tick due = 0;
    std::string payer;  // party id
    Money amount;       // strictly positive, agreement currency
};

// One netted unit under the master agreement.  Product-level pricing is out
// of scope: the present value from the defaulting party's perspective arrives
// as a scripted mark.
struct Transaction {
    std::string id;
    std::string description;
    std::vector<ScheduledPayment> payments;  // sorted by (due, payer)
    std::optional<Money> scripted_mark;      // value to the defaulting party
};

struct MasterAgreement {
    std::string party_a;  // the defaulting party in scenarios
    std::string party_b;  // the non-defaulting party
    std::string currency;
    std::vector<std::string> transaction_ids;
    Money vm_held_by_b;    // VM B holds from A; negative = A holds from B
    Money im_posted_by_a;  // segregated initial margin, >= 0
};

struct CollateralState {
    Money vm_balance;
    Money im_segregated;  // >= 0; zero once settlement completes
};

// Identifies one schedule entry as paid: all entries of the transaction due
// at that tick are covered.
struct PaymentKey {
    std::string transaction;
    Tick due = 0;
    friend auto operator<=>(const PaymentKey&, const PaymentKey&) = default;
};

// Net present value of the portfolio from the defaulting party's perspective
// (positive = asset to the defaulting party).
inline Money net_scripted_value(std::span<const Transaction> portfolio,
                                const MasterAgreement& agreement) {
    Money total = Money::zero(agreement.currency);
    for (const auto& tx : portfolio) {
        if (!tx.scripted_mark)
            throw protocol_error("net_scripted_value: transaction '" + tx.id +
                                 "' has no scripted mark");
        total += *tx.scripted_mark;
    }
    return total;
}

// Missed payments due strictly before `as_of`, signed positive when the
// defaulting party was the payer (amounts owed to the non-defaulting party).
inline Money unpaid_amounts(std::span<const Transaction> portfolio,
                            const MasterAgreement& agreement, Tick as_of,
                            const std::set<PaymentKey>& payments_made) {
    if (as_of < 0) throw protocol_error("unpaid_amounts: as_of must be >= 0");
    for (const auto& key : payments_made) {
        bool found = false;
        for (const auto& tx : portfolio) {
            if (tx.id != key.transaction) continue;
            for (const auto& p : tx.payments)
                if (p.due == key.due) found = true;
        }
        if (!found)
            throw validation_error("unpaid_amounts: payment record for transaction '" +
                                   key.transaction + "' due " + std::to_string(key.due) +
                                   " matches no schedule entry");
    }
    Money total = Money::zero(agreement.currency);
    for (const auto& tx : portfolio) {
        for (const auto& p : tx.payments) {
            if (p.due >= as_of) continue;  // strict cutoff; due-at-date excluded
            if (payments_made.contains({tx.id, p.due})) continue;
            if (p.payer == agreement.party_a)
                total += p.amount;
            else if (p.payer == agreement.party_b)
                total -= p.amount;
            else
                throw validation_error("unpaid_amounts: payer '" + p.payer +
                                       "' is not a party to the agreement");
        }
    }
    return total;
}

}  // namespace closeout
