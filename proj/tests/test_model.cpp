#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "closeout/model.hpp"
#include "oracles.hpp"

using namespace closeout;

namespace {

MasterAgreement test_agreement() {
    MasterAgreement a;
    a.party_a = "A";
    a.party_b = "B";
    a.currency = "USD";
    a.vm_held_by_b = Money::zero("USD");
    a.im_posted_by_a = Money::parse("10.00", "USD");
    return a;
}

Transaction marked(const std::string& id, const char* mark) {
    Transaction tx;
    tx.id = id;
    tx.scripted_mark = Money::parse(mark, "USD");
    return tx;
}

}  // namespace

TEST_CASE("net_scripted_value sums the marks exactly") {
    MasterAgreement agreement = test_agreement();

    SUBCASE("single transaction marked 100.00") {
        std::vector<Transaction> p{marked("t1", "100.00")};
        CHECK(net_scripted_value(p, agreement).to_string() == "100.00");
    }
    SUBCASE("empty portfolio sums to zero") {
        std::vector<Transaction> p;
        CHECK(net_scripted_value(p, agreement).to_string() == "0.00");
    }
    SUBCASE("mixed-sign marks, checked against the cent-sum oracle") {
        std::vector<Transaction> p{marked("t1", "60.00"), marked("t2", "55.00"),
                                   marked("t3", "-15.00")};
        long long expect = oracles::sum_cents({6000, 5500, -1500});
        CHECK(expect == 10000);
        CHECK(net_scripted_value(p, agreement) == Money::from_cents(expect, "USD"));
        CHECK(net_scripted_value(p, agreement).to_string() == "100.00");
    }
    SUBCASE("missing mark names the transaction") {
        std::vector<Transaction> p{marked("t1", "1.00")};
        Transaction unmarked;
        unmarked.id = "t2";
        p.push_back(unmarked);
        CHECK_THROWS_WITH_AS((void)net_scripted_value(p, agreement),
                             doctest::Contains("t2"), protocol_error);
    }
}

TEST_CASE("net_scripted_value is permutation-invariant") {
    MasterAgreement agreement = test_agreement();
    std::mt19937_64 gen(7);
    std::vector<Transaction> p;
    for (int i = 0; i < 12; ++i)
        p.push_back(marked("t" + std::to_string(i),
                           std::to_string((static_cast<long long>(gen() % 40000)) - 20000)
                               .c_str()));
    Money reference = net_scripted_value(p, agreement);
    for (int round = 0; round < 50; ++round) {
        std::shuffle(p.begin(), p.end(), gen);
        CHECK(net_scripted_value(p, agreement) == reference);
    }
}

TEST_CASE("unpaid_amounts enumerates missed payments before the cutoff") {
    MasterAgreement agreement = test_agreement();
    Transaction tx;
    tx.id = "t1";
    tx.payments = {{3, "A", Money::parse("5.00", "USD")},
                   {4, "B", Money::parse("2.00", "USD")},
                   {7, "A", Money::parse("9.00", "USD")}};
    std::vector<Transaction> p{tx};

    SUBCASE("nothing missed") {
        std::set<PaymentKey> made{{"t1", 3}, {"t1", 4}, {"t1", 7}};
        CHECK(unpaid_amounts(p, agreement, 10, made).to_string() == "0.00");
    }
    SUBCASE("one missed payment by the defaulting party") {
        std::set<PaymentKey> made{{"t1", 4}, {"t1", 7}};
        Money got = unpaid_amounts(p, agreement, 5, made);
        CHECK(got.to_string() == "5.00");
        CHECK(got == Money::from_cents(
                         oracles::unpaid_cents({{3, true, 500, false},
                                                {4, false, 200, true},
                                                {7, true, 900, true}},
                                               5),
                         "USD"));
    }
    SUBCASE("both sides missed payments, signs net") {
        std::set<PaymentKey> made{{"t1", 7}};
        Money got = unpaid_amounts(p, agreement, 5, made);
        CHECK(got.to_string() == "3.00");
        CHECK(got == Money::from_cents(
                         oracles::unpaid_cents({{3, true, 500, false},
                                                {4, false, 200, false},
                                                {7, true, 900, true}},
                                               5),
                         "USD"));
    }
    SUBCASE("payment due exactly at the cutoff is excluded") {
        std::set<PaymentKey> made;
        CHECK(unpaid_amounts(p, agreement, 3, made).to_string() == "0.00");
        CHECK(unpaid_amounts(p, agreement, 4, made).to_string() == "5.00");
    }
    SUBCASE("payments due after obligations cease never count") {
        std::set<PaymentKey> made;
        CHECK(unpaid_amounts(p, agreement, 5, made).to_string() == "3.00");  // tick-7 leg excluded
    }
    SUBCASE("unknown payment record is rejected") {
        std::set<PaymentKey> made{{"t1", 999}};
        CHECK_THROWS_AS((void)unpaid_amounts(p, agreement, 5, made), validation_error);
        std::set<PaymentKey> other{{"zzz", 3}};
        CHECK_THROWS_AS((void)unpaid_amounts(p, agreement, 5, other), validation_error);
    }
    SUBCASE("negative as_of is rejected") {
        CHECK_THROWS_AS((void)unpaid_amounts(p, agreement, -1, {}), protocol_error);
    }
}

TEST_CASE("unpaid_amounts is monotone in as_of when only the defaulter owes") {
    MasterAgreement agreement = test_agreement();
    std::mt19937_64 gen(11);
    for (int round = 0; round < 200; ++round) {
        Transaction tx;
        tx.id = "t";
        int n = static_cast<int>(gen() % 6);
        for (int i = 0; i < n; ++i)
            tx.payments.push_back(
                {static_cast<Tick>(gen() % 10), "A",
                 Money::from_cents(static_cast<long long>(gen() % 5000) + 1, "USD")});
        std::sort(tx.payments.begin(), tx.payments.end(),
                  [](const auto& a, const auto& b) { return a.due < b.due; });
        std::vector<Transaction> p{tx};
        Money prev = Money::zero("USD");
        for (Tick as_of = 0; as_of <= 11; ++as_of) {
            Money cur = unpaid_amounts(p, agreement, as_of, {});
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}
