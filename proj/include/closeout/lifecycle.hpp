#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "closeout/auction.hpp"
#include "closeout/errors.hpp"
#include "closeout/model.hpp"
#include "closeout/money.hpp"

namespace closeout {

enum class DefaultCause {
    failure_to_pay_or_deliver,
    breach_of_agreement,
    credit_support_default,
    misrepresentation,
    default_under_specified_transaction,
    cross_default,
    bankruptcy,
    merger_without_assumption,
};

inline const char* cause_name(DefaultCause c) {
    switch (c) {
        case DefaultCause::failure_to_pay_or_deliver: return "failure_to_pay_or_deliver";
        case DefaultCause::breach_of_agreement: return "breach_of_agreement";
        case DefaultCause::credit_support_default: return "credit_support_default";
        case DefaultCause::misrepresentation: return "misrepresentation";
        case DefaultCause::default_under_specified_transaction:
            return "default_under_specified_transaction";
        case DefaultCause::cross_default: return "cross_default";
        case DefaultCause::bankruptcy: return "bankruptcy";
        case DefaultCause::merger_without_assumption: return "merger_without_assumption";
    }
    return "?";
}

struct EventOfDefault {
    DefaultCause cause = DefaultCause::failure_to_pay_or_deliver;
    std::string defaulting_party;
    Tick occurred_at = 0;
};

enum class LifecycleState {
    active,
    default_declared,
    early_termination_designated,
    obligations_ceased,
    auction_in_progress,
    amounts_calculated,
    statement_delivered,
    settled,
};

inline const char* state_name(LifecycleState s) {
    switch (s) {
        case LifecycleState::active: return "active";
        case LifecycleState::default_declared: return "default_declared";
        case LifecycleState::early_termination_designated: return "early_termination_designated";
        case LifecycleState::obligations_ceased: return "obligations_ceased";
        case LifecycleState::auction_in_progress: return "auction_in_progress";
        case LifecycleState::amounts_calculated: return "amounts_calculated";
        case LifecycleState::statement_delivered: return "statement_delivered";
        case LifecycleState::settled: return "settled";
    }
    return "?";
}

// Net close-out statement.  Signs follow the single convention: positive =
// asset to the defaulting party, so termination_amount > 0 is payable by the
// non-defaulting party.
struct TerminationStatement {
    Tick early_termination_date = 0;
    Money unpaid;             // positive = owed to the non-defaulting party
    Money market_quotation;
    Money termination_amount; // market_quotation - unpaid
    std::optional<std::string> payer;  // absent when the amount is zero
    std::optional<AuctionOutcome> trade_leg;
};

inline TerminationStatement build_statement(const Money& unpaid, const Money& mq,
                                            const std::string& defaulting_party,
                                            const std::string& non_defaulting_party,
                                            Tick early_termination_date,
                                            std::optional<AuctionOutcome> trade_leg = {}) {
    if (unpaid.currency() != mq.currency())
        throw arithmetic_error("build_statement: unpaid and market quotation currencies differ");
    TerminationStatement st;
    st.early_termination_date = early_termination_date;
    st.unpaid = unpaid;
    st.market_quotation = mq;
    st.termination_amount = mq - unpaid;
    if (st.termination_amount.signum() > 0)
        st.payer = non_defaulting_party;
    else if (st.termination_amount.signum() < 0)
        st.payer = defaulting_party;
    st.trade_leg = std::move(trade_leg);
    return st;
}

struct LifecycleEvent {
    Tick tick = 0;
    LifecycleState from = LifecycleState::active;
    LifecycleState to = LifecycleState::active;
    std::string label;
};

// Early-termination state machine.  One mutation stream per agreement;
// every accepted transition appends exactly one log entry and rejected
// operations leave the state untouched.
class LifecycleEngine {
public:
    LifecycleState state() const { return state_; }
    const std::vector<LifecycleEvent>& log() const { return log_; }
    const std::optional<EventOfDefault>& default_event() const { return event_; }
    std::optional<Tick> early_termination_date() const { return etd_; }

    void declare_default(const EventOfDefault& event, Tick now) {
        require(LifecycleState::active, "declare_default");
        event_ = event;
        transition(LifecycleState::default_declared, now,
                   std::string("default declared: ") + cause_name(event.cause) + " by " +
                       event.defaulting_party);
    }

    void designate_early_termination(Tick date) {
        require(LifecycleState::default_declared, "designate_early_termination");
        if (date < event_->occurred_at)
            throw protocol_error("designate_early_termination: date " + std::to_string(date) +
                                 " precedes the default at tick " +
                                 std::to_string(event_->occurred_at));
        etd_ = date;
        transition(LifecycleState::early_termination_designated, date,
                   "early termination date designated");
    }

    void cease_obligations(Tick now) {
        require(LifecycleState::early_termination_designated, "cease_obligations");
        transition(LifecycleState::obligations_ceased, now,
                   "payment and delivery obligations ceased");
    }

    void begin_auction(Tick now) {
        require(LifecycleState::obligations_ceased, "begin_auction");
        transition(LifecycleState::auction_in_progress, now, "auction opened");
    }

    // The auction stage may be skipped only when no bidders are configured
    // (direct market cover).
    void record_amounts(Tick now, bool auction_skipped = false) {
        if (auction_skipped) {
            require(LifecycleState::obligations_ceased, "record_amounts");
            transition(LifecycleState::amounts_calculated, now,
                       "termination amounts calculated (no bidders, direct market cover)");
        } else {
            require(LifecycleState::auction_in_progress, "record_amounts");
            transition(LifecycleState::amounts_calculated, now,
                       "termination amounts calculated");
        }
    }

    void deliver_statement(Tick now) {
        require(LifecycleState::amounts_calculated, "deliver_statement");
        transition(LifecycleState::statement_delivered, now, "termination statement delivered");
    }

    void mark_settled(Tick now) {
        require(LifecycleState::statement_delivered, "mark_settled");
        transition(LifecycleState::settled, now, "termination amount paid, IM released");
    }

    // The log fully determines the final state.
    static LifecycleState replay(std::span<const LifecycleEvent> log) {
        LifecycleState state = LifecycleState::active;
        for (const auto& e : log) {
            if (e.from != state)
                throw protocol_error(std::string("replay: log entry from ") +
                                     state_name(e.from) + " but state is " + state_name(state));
            state = e.to;
        }
        return state;
    }

private:
    void require(LifecycleState expected, const char* op) const {
        if (state_ != expected)
            throw protocol_error(std::string(op) + ": invalid transition from " +
                                 state_name(state_) + " (requires " + state_name(expected) + ")");
    }

    void transition(LifecycleState to, Tick now, std::string label) {
        log_.push_back({now, state_, to, std::move(label)});
        state_ = to;
    }

    LifecycleState state_ = LifecycleState::active;
    std::vector<LifecycleEvent> log_;
    std::optional<EventOfDefault> event_;
    std::optional<Tick> etd_;
};

}  // namespace closeout
