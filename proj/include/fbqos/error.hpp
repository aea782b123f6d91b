#pragma once

#include <stdexcept>
#include <string>

namespace fbqos {

// Argument outside the mathematical domain of a function (p <= 0 for Q^-1,
// negative SNR, invalid channel or policy parameters).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Inputs are individually valid but the requested computation does not apply:
// unstable queue, Laplace on a point mass, blocklength below a bound's
// validity threshold, infeasible reliability target.
class precondition_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative method failed: quadrature did not converge, a root was not
// bracketed, bisection ran out of iterations.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fbqos
