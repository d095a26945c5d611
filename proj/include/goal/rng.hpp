#pragma once

#include <cstdint>

namespace goal {

// xoshiro256++ seeded through splitmix64. Fixed algorithm so that a given
// seed yields the same stream on every platform; std:: distributions are
// deliberately avoided for the same reason.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();
    // uniform in [lo, hi)
    double uniform(double lo, double hi);
    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n);
    // standard normal via Box-Muller (explicit formula, deterministic)
    double gaussian();

    std::uint64_t seed() const { return seed_; }

    // derive an independent stream, e.g. per stage or per worker
    Rng split(std::uint64_t stream_id) const;

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace goal
