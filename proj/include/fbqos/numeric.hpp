#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fbqos::numeric {

struct integral {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod (15/31) on a finite interval.
integral integrate(const std::function<double(double)>& f, double a, double b,
                   double rel_tol = 1e-11);

// Integrates over consecutive panels defined by sorted breakpoints.
integral integrate_panels(const std::function<double(double)>& f, std::span<const double> breaks,
                          double rel_tol = 1e-11);

// Breakpoints covering [lo, hi] with one panel per decade, plus extra points.
std::vector<double> decade_breaks(double lo, double hi, std::span<const double> extra = {});

// Bisection to full double precision on a sign change of f over [lo, hi].
// In log space when both ends are positive and log_space is set.
double bisect(const std::function<double(double)>& f, double lo, double hi, bool log_space = false,
              int max_iter = 400);

std::vector<double> linspace(double a, double b, std::size_t n);
// n points from a to b (values, not exponents), equally spaced in log.
std::vector<double> logspace(double a, double b, std::size_t n);

struct line_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_stderr = 0.0;
    std::size_t n = 0;
};

// Weighted least squares y = intercept + slope x. Empty weights means equal.
line_fit fit_line(std::span<const double> x, std::span<const double> y,
                  std::span<const double> w = {});

double log_add_exp(double a, double b);

}  // namespace fbqos::numeric
