#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "closeout/errors.hpp"
#include "closeout/model.hpp"
#include "closeout/money.hpp"
#include "closeout/sha256.hpp"

namespace closeout {

struct AuctionConfig {
    Tick commit_deadline = 0;           // inclusive
    Tick reveal_deadline = 0;           // inclusive, > commit_deadline
    int min_mid_quotes = 3;             // below this the MQ is undetermined
    Money im_reference;                 // segregated IM backing the stopping rule
    std::vector<std::string> invited_bidders;
};

// A bidder's quote for the whole portfolio, valued from the defaulting
// party's perspective.  The mid feeds the Market Quotation; the trade value,
// when present, enters second-price selection.
struct Bid {
    std::string bidder;
    Money mid;
    std::optional<Money> trade;
    std::array<std::uint8_t, 32> salt{};
};

struct BidCommitment {
    std::string bidder;
    Digest256 digest{};
    Tick committed_at = 0;
};

// Canonical bid encoding, the preimage bidders commit to:
//   u32 BE length of bidder id, bidder id UTF-8,
//   mid as sign byte + u32 BE length + big-endian magnitude for numerator,
//   then the same for the denominator,
//   one presence byte for the trade value (0x00 absent / 0x01 present),
//   trade encoded like the mid when present,
//   32 salt bytes.
inline std::vector<std::uint8_t> encode_bid(const Bid& bid) {
    std::vector<std::uint8_t> out;
    auto put_u32 = [&out](std::uint32_t v) {
        out.push_back(static_cast<std::uint8_t>(v >> 24));
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v));
    };
    auto put_bigint = [&](const BigInt& v) {
        out.push_back(v.signum() < 0 ? 0x01 : 0x00);
        auto bytes = v.magnitude_bytes_be();
        put_u32(static_cast<std::uint32_t>(bytes.size()));
        out.insert(out.end(), bytes.begin(), bytes.end());
    };
    auto put_amount = [&](const Money& m) {
        put_bigint(m.amount().num());
        put_bigint(m.amount().den());
    };
    put_u32(static_cast<std::uint32_t>(bid.bidder.size()));
    out.insert(out.end(), bid.bidder.begin(), bid.bidder.end());
    put_amount(bid.mid);
    out.push_back(bid.trade ? 0x01 : 0x00);
    if (bid.trade) put_amount(*bid.trade);
    out.insert(out.end(), bid.salt.begin(), bid.salt.end());
    return out;
}

inline Digest256 commitment_digest(const Bid& bid) { return Sha256::hash(encode_bid(bid)); }

enum class CommitResult { accepted, wrong_phase, late, not_invited, duplicate };
enum class RevealResult { accepted, too_early, late, no_commitment, digest_mismatch, duplicate };

struct MarketQuotationResult {
    Money value;
    std::vector<std::pair<std::string, Money>> quotes_used;       // by bidder id
    std::vector<std::pair<std::string, Money>> quotes_discarded;  // 0 or 2 entries
};

// Market Quotation over revealed mids:
//  - 4+ quotes: discard one instance of the maximum and one of the minimum,
//    exact mean of the rest;
//  - exactly 3: the median (same discard, one survivor);
//  - 1-2 (only reachable when min_mid_quotes is configured below 3): plain
//    exact mean, nothing discarded.
// Ties discard a single instance, lowest bidder id first.
inline MarketQuotationResult compute_market_quotation(
    std::vector<std::pair<std::string, Money>> mids, int min_mid_quotes,
    const std::string& currency) {
    if (static_cast<int>(mids.size()) < min_mid_quotes)
        throw mq_undetermined_error("market quotation undetermined: " +
                                    std::to_string(mids.size()) + " quote(s), need " +
                                    std::to_string(min_mid_quotes));
    std::sort(mids.begin(), mids.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    MarketQuotationResult result{Money::zero(currency), {}, {}};
    std::vector<std::pair<std::string, Money>> kept = mids;
    if (kept.size() >= 3) {
        auto max_it = std::max_element(kept.begin(), kept.end(),
                         [](const auto& a, const auto& b) { return a.second < b.second; });
        result.quotes_discarded.push_back(*max_it);
        kept.erase(max_it);
        auto min_it = std::min_element(kept.begin(), kept.end(),
                         [](const auto& a, const auto& b) { return a.second < b.second; });
        result.quotes_discarded.push_back(*min_it);
        kept.erase(min_it);
    }
    Money sum = Money::zero(currency);
    for (const auto& [bidder, mid] : kept) sum += mid;
    result.value = sum.divided_by(static_cast<long long>(kept.size()));
    result.quotes_used = std::move(kept);
    return result;
}

struct TradeSelection {
    std::string winner;
    Money execution_price;  // second-highest bid; the sole bid if only one
};

// Second-price selection.  The highest trade value wins (ties to the lowest
// bidder id) and pays the best among the remaining bids.  Values may be
// negative; the maximum is still best for the estate.
inline std::optional<TradeSelection> select_winner(
    const std::vector<std::pair<std::string, Money>>& trade_bids) {
    if (trade_bids.empty()) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < trade_bids.size(); ++i) {
        if (trade_bids[i].second > trade_bids[best].second ||
            (trade_bids[i].second == trade_bids[best].second &&
             trade_bids[i].first < trade_bids[best].first))
            best = i;
    }
    std::optional<Money> second;
    for (std::size_t i = 0; i < trade_bids.size(); ++i) {
        if (i == best) continue;
        if (!second || trade_bids[i].second > *second) second = trade_bids[i].second;
    }
    return TradeSelection{trade_bids[best].first,
                          second ? *second : trade_bids[best].second};
}

enum class AuctionDecision { trade, cancel_cost_exceeds_im, no_trade_bids };

struct AuctionOutcome {
    Money mq;
    std::optional<std::string> winner;
    std::optional<Money> execution_price;
    std::optional<Money> trade_cost;  // |mq - execution_price|
    AuctionDecision decision = AuctionDecision::no_trade_bids;
    std::optional<Money> residual;    // im - cost, floored at zero, Trade only
};

// Trade-cost stopping rule.  Cost above the IM cancels by default; the
// non-defaulting party holds a right, not an obligation, so an override can
// force the trade, in which case the residual is zero and the excess cost is
// borne outside the margin.
inline AuctionOutcome apply_stopping_rule(const Money& mq,
                                          const std::optional<TradeSelection>& selection,
                                          const Money& im, bool force_trade_override = false) {
    if (im.signum() < 0) throw protocol_error("stopping rule: negative IM reference");
    AuctionOutcome out;
    out.mq = mq;
    if (!selection) {
        out.decision = AuctionDecision::no_trade_bids;
        return out;
    }
    out.winner = selection->winner;
    out.execution_price = selection->execution_price;
    Money cost = (mq - selection->execution_price).abs();
    out.trade_cost = cost;
    if (cost <= im) {
        out.decision = AuctionDecision::trade;
        out.residual = im - cost;
    } else if (force_trade_override) {
        out.decision = AuctionDecision::trade;
        out.residual = Money::zero(im.currency());
    } else {
        out.decision = AuctionDecision::cancel_cost_exceeds_im;
    }
    return out;
}

// Frozen portfolio information distributed to bidders when the auction opens.
struct PortfolioSnapshot {
    std::string currency;
    std::vector<Transaction> transactions;
    std::string defaulting_party;
    std::string non_defaulting_party;
};

enum class TranscriptAction { commit, reveal };

struct TranscriptEntry {
    Tick tick = 0;
    std::string bidder;
    TranscriptAction action = TranscriptAction::commit;
    std::string result;              // rejection/acceptance code
    std::string digest_hex;          // commits
    std::optional<Money> mid;        // accepted reveals
    std::optional<Money> trade;      // accepted reveals
};

struct FinalizedAuction {
    MarketQuotationResult mq;
    AuctionOutcome outcome;
};

// Commit-reveal auction state machine.  Single writer; callers sequence
// commits and reveals by (tick, bidder id) before applying them.
class AuctionEngine {
public:
    AuctionEngine(AuctionConfig config, PortfolioSnapshot snapshot, Tick opened_at)
        : config_(std::move(config)), snapshot_(std::move(snapshot)), opened_at_(opened_at) {
        if (config_.invited_bidders.empty())
            throw protocol_error("auction: invitation list is empty");
        if (config_.commit_deadline >= config_.reveal_deadline)
            throw validation_error("auction: commit deadline must precede reveal deadline");
        if (config_.min_mid_quotes < 1)
            throw validation_error("auction: min_mid_quotes must be >= 1");
        if (config_.im_reference.signum() < 0)
            throw validation_error("auction: IM reference must be >= 0");
        std::set<std::string> seen;
        for (const auto& id : config_.invited_bidders)
            if (!seen.insert(id).second)
                throw validation_error("auction: duplicate invited bidder '" + id + "'");
    }

    const AuctionConfig& config() const { return config_; }
    const PortfolioSnapshot& snapshot() const { return snapshot_; }
    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
    Tick opened_at() const { return opened_at_; }

    CommitResult commit_bid(const BidCommitment& commitment, Tick now) {
        CommitResult result = CommitResult::accepted;
        if (finalized_)
            result = CommitResult::wrong_phase;
        else if (now > config_.commit_deadline)  // deadlines are inclusive
            result = CommitResult::late;
        else if (std::find(config_.invited_bidders.begin(), config_.invited_bidders.end(),
                           commitment.bidder) == config_.invited_bidders.end())
            result = CommitResult::not_invited;
        else if (commitments_.contains(commitment.bidder))
            result = CommitResult::duplicate;
        if (result == CommitResult::accepted) commitments_[commitment.bidder] = commitment;
        transcript_.push_back({now, commitment.bidder, TranscriptAction::commit,
                               commit_result_name(result), hex_encode(commitment.digest),
                               std::nullopt, std::nullopt});
        return result;
    }

    RevealResult reveal_bid(const Bid& bid, Tick now) {
        RevealResult result = RevealResult::accepted;
        if (finalized_ || now > config_.reveal_deadline)
            result = RevealResult::late;
        else if (now <= config_.commit_deadline)
            result = RevealResult::too_early;
        else if (excluded_.contains(bid.bidder))
            result = RevealResult::digest_mismatch;  // exclusion is permanent
        else if (!commitments_.contains(bid.bidder))
            result = RevealResult::no_commitment;
        else if (revealed_.contains(bid.bidder))
            result = RevealResult::duplicate;
        else if (commitment_digest(bid) != commitments_.at(bid.bidder).digest) {
            // A failed reveal removes the bidder from mid aggregation and
            // trade selection alike.
            result = RevealResult::digest_mismatch;
            excluded_.insert(bid.bidder);
        }
        bool ok = result == RevealResult::accepted;
        if (ok) revealed_[bid.bidder] = bid;
        transcript_.push_back({now, bid.bidder, TranscriptAction::reveal,
                               reveal_result_name(result), "",
                               ok ? std::optional<Money>(bid.mid) : std::nullopt,
                               ok ? bid.trade : std::nullopt});
        return result;
    }

    // Aggregates after the reveal window closes.  Throws mq_undetermined_error
    // when fewer valid mids than the floor were revealed.
    FinalizedAuction finalize(Tick now, bool force_trade_override = false) {
        if (finalized_) throw protocol_error("auction: already finalized");
        if (now <= config_.reveal_deadline)
            throw protocol_error("auction: cannot finalize before the reveal deadline");
        std::vector<std::pair<std::string, Money>> mids;
        std::vector<std::pair<std::string, Money>> trades;
        for (const auto& [bidder, bid] : revealed_) {  // map order = bidder id order
            mids.emplace_back(bidder, bid.mid);
            if (bid.trade) trades.emplace_back(bidder, *bid.trade);
        }
        FinalizedAuction fin{
            compute_market_quotation(std::move(mids), config_.min_mid_quotes,
                                     snapshot_.currency),
            {}};
        fin.outcome = apply_stopping_rule(fin.mq.value, select_winner(trades),
                                          config_.im_reference, force_trade_override);
        finalized_ = true;
        return fin;
    }

    static const char* commit_result_name(CommitResult r) {
        switch (r) {
            case CommitResult::accepted: return "accepted";
            case CommitResult::wrong_phase: return "wrong_phase";
            case CommitResult::late: return "late_commit";
            case CommitResult::not_invited: return "not_invited";
            case CommitResult::duplicate: return "duplicate_commit";
        }
        return "?";
    }

    static const char* reveal_result_name(RevealResult r) {
        switch (r) {
            case RevealResult::accepted: return "accepted";
            case RevealResult::too_early: return "early_reveal";
            case RevealResult::late: return "late_reveal";
            case RevealResult::no_commitment: return "no_commitment";
            case RevealResult::digest_mismatch: return "digest_mismatch";
            case RevealResult::duplicate: return "duplicate_reveal";
        }
        return "?";
    }

private:
    AuctionConfig config_;
    PortfolioSnapshot snapshot_;
    Tick opened_at_;
    bool finalized_ = false;
    std::map<std::string, BidCommitment> commitments_;
    std::map<std::string, Bid> revealed_;
    std::set<std::string> excluded_;
    std::vector<TranscriptEntry> transcript_;
};

inline const char* decision_name(AuctionDecision d) {
    switch (d) {
        case AuctionDecision::trade: return "trade";
        case AuctionDecision::cancel_cost_exceeds_im: return "cancel_cost_exceeds_im";
        case AuctionDecision::no_trade_bids: return "no_trade_bids";
    }
    return "?";
}

}  // namespace closeout
