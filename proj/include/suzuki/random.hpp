#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "suzuki/linalg.hpp"
#include "suzuki/slp.hpp"

namespace sz {

// Product replacement with an accumulator (rattle), tracking SLPs alongside
// the matrices. Deterministic under a fixed seed.
class PrGenerator {
public:
    PrGenerator(std::vector<Mat4> X, std::uint64_t seed);

    // One replacement move; returns the accumulator (matrix, word over X).
    std::pair<Mat4, ExprPtr> next();

    const std::vector<Mat4>& gens() const { return X_; }

private:
    std::vector<Mat4> X_;
    std::vector<std::pair<Mat4, ExprPtr>> slots_;
    std::pair<Mat4, ExprPtr> acc_;
    std::mt19937_64 rng_;

    std::uint64_t pick(std::uint64_t k) { return rng_() % k; }  // avoids
    // std::uniform_int_distribution, whose output is implementation-defined
    void move_once();
};

}  // namespace sz
