#pragma once

#include <stdexcept>
#include <string>

namespace closeout {

// Base for everything thrown by the engine.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input: scenario files, configs, CLI bounds.  CLI exit code 2.
struct validation_error : error {
    explicit validation_error(const std::string& what) : error(what) {}
};

// A well-formed input drove the protocol into a rejected operation
// (invalid state transition, precondition breach at runtime).  CLI exit code 3.
struct protocol_error : error {
    explicit protocol_error(const std::string& what) : error(what) {}
};

// Mixed-currency arithmetic or division by zero.
struct arithmetic_error : error {
    explicit arithmetic_error(const std::string& what) : error(what) {}
};

// Ledger or collateral accounting does not balance.  CLI exit code 4.
struct integrity_error : error {
    explicit integrity_error(const std::string& what) : error(what) {}
};

// Fewer valid mid quotes than the configured floor; the auction aborts
// to manual negotiation.
struct mq_undetermined_error : protocol_error {
    explicit mq_undetermined_error(const std::string& what) : protocol_error(what) {}
};

}  // namespace closeout
