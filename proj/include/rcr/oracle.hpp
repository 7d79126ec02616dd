#pragma once

#include "rcr/compensate.hpp"
#include "rcr/model.hpp"

namespace rcr {

struct BruteForceResult {
    double value = kLogZero;
    Assignment argmax;  // filled for MPE; lexicographically smallest maximizer
};

/// Exhaustive enumeration over all complete assignments.  Refuses state
/// spaces above 2^24.
BruteForceResult brute_force(const FactorGraph& fg, Task task);

}  // namespace rcr
