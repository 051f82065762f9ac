#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "lstrack/error.hpp"

// Evaluates expr and checks that it throws lstrack::Error of the given kind.
#define CHECK_THROWS_KIND(expr, expected_kind)                               \
    do {                                                                     \
        bool thrown_ = false;                                                \
        try {                                                                \
            (void)(expr);                                                    \
        } catch (const lstrack::Error& e_) {                                 \
            thrown_ = true;                                                  \
            CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());          \
        }                                                                    \
        CHECK_MESSAGE(thrown_, "no lstrack::Error thrown by " #expr);        \
    } while (0)

namespace testing {

inline std::vector<double> uniform_point(std::mt19937_64& rng, int dim, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> p(static_cast<std::size_t>(dim));
    for (auto& x : p) x = u(rng);
    return p;
}

}  // namespace testing
