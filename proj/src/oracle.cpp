#include "rcr/oracle.hpp"

#include <string>

namespace rcr {

BruteForceResult brute_force(const FactorGraph& fg, Task task) {
    const int n = fg.num_variables();
    double states = 1.0;
    for (int v = 0; v < n; ++v) states *= static_cast<double>(fg.cardinality(v));
    if (states > static_cast<double>(std::size_t(1) << 24))
        throw unsupported_error("brute force refused: state space of " +
                                std::to_string(states) + " assignments exceeds 2^24");

    BruteForceResult res;
    Assignment a(std::vector<int>(static_cast<std::size_t>(n), 0));
    // Streaming log-sum-exp: running max plus rescaled sum.
    double run_max = kLogZero;
    double run_sum = 0.0;

    for (;;) {
        double v = evaluate(fg, a);
        if (task == Task::MPE) {
            if (v > res.value) {
                res.value = v;
                res.argmax = a;
            }
        } else if (!is_log_zero(v)) {
            if (v > run_max) {
                run_sum = is_log_zero(run_max) ? 1.0 : run_sum * std::exp(run_max - v) + 1.0;
                run_max = v;
            } else {
                run_sum += std::exp(v - run_max);
            }
        }
        // Lexicographic successor: variable 0 is the most significant digit.
        int p = n - 1;
        while (p >= 0) {
            if (++a[p] < fg.cardinality(p)) break;
            a[p] = 0;
            --p;
        }
        if (p < 0) break;
    }

    if (task == Task::PR)
        res.value = is_log_zero(run_max) ? kLogZero : run_max + std::log(run_sum);
    if (task == Task::MPE && res.argmax.size() == 0 && n >= 0)
        res.argmax = a;  // all entries log-zero: any assignment attains the sentinel
    return res;
}

}  // namespace rcr
