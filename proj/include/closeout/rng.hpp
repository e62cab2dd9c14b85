#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "closeout/normal.hpp"
#include "closeout/sha256.hpp"

namespace closeout {

// Pinned generator identity, recorded in every run report so frozen fixtures
// are tied to it.  mt19937_64 output is fixed by the standard; gaussians come
// from the Acklam inverse CDF, not std::normal_distribution (whose stream is
// implementation-defined).
inline constexpr const char* kGeneratorName = "mt19937_64-acklam-icdf/1";

// One independent stream per (scenario seed, bidder id): the stream seed is
// the first 8 bytes of SHA-256("closeout-rng-v1" || seed BE || bidder id), so
// bidder ordering never changes anyone's draws.
class BidderRng {
public:
    BidderRng(std::uint64_t scenario_seed, std::string_view bidder_id)
        : gen_(derive_seed(scenario_seed, bidder_id)) {}

    // Uniform on (0,1), both ends excluded.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian() { return inverse_normal_cdf(uniform01()); }

    static std::uint64_t derive_seed(std::uint64_t scenario_seed, std::string_view bidder_id) {
        Sha256 h;
        h.update(std::string_view("closeout-rng-v1"));
        std::uint8_t seed_be[8];
        for (int i = 0; i < 8; ++i)
            seed_be[i] = static_cast<std::uint8_t>(scenario_seed >> (56 - 8 * i));
        h.update(seed_be, sizeof(seed_be));
        h.update(bidder_id.data(), bidder_id.size());
        Digest256 d = h.finish();
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i) out = (out << 8) | d[static_cast<std::size_t>(i)];
        return out;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace closeout
