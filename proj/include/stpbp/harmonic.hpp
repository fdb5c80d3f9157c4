#pragma once

#include <cmath>
#include <cstdint>

namespace stpbp {

inline constexpr double euler_mascheroni = 0.5772156649015329;

/* Compensated (Neumaier) accumulator. The epoch clock of the embedded
 * chain is a harmonic sum, and naive accumulation loses enough precision
 * by n ~ 1e6 to shift epoch boundaries; this keeps the error at a few ulp.
 */
class compensated_sum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// t_n = sum_{k=1..n} 1/k, exact to a few ulp. t_0 = 0.
double harmonic_number(uint64_t n);

// eta(t) = max{ n : t_n <= t }, computed against exact harmonic sums;
// 0 for t < 1.
uint64_t eta_exact(double t);

} // namespace stpbp
