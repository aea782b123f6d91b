#include "fbqos/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "fbqos/error.hpp"

namespace fbqos::numeric {

namespace {

// Boost's adaptive driver compares the unscaled [-1, 1] error with a scaled
// tolerance, which never converges on very narrow panels; the fixed 31-point
// rule is used directly and its error rescaled here.
void adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth,
           integral& acc, double& l1) {
    double err = 0.0, l1_local = 0.0;
    double est = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0,
                                                                                 &err, &l1_local);
    err *= 0.5 * (b - a);
    if (depth == 0 || err <= tol || !(err > 1e-300)) {
        acc.value += est;
        acc.error += err;
        l1 += l1_local;
        return;
    }
    double mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth - 1, acc, l1);
    adapt(f, mid, b, 0.5 * tol, depth - 1, acc, l1);
}

}  // namespace

integral integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    integral out;
    if (!(b > a)) return out;
    double err0 = 0.0, l1_0 = 0.0;
    double first = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0,
                                                                                   &err0, &l1_0);
    double l1 = 0.0;
    adapt(f, a, b, rel_tol * std::max(std::abs(first), l1_0), 15, out, l1);
    if (!std::isfinite(out.value)) {
        std::ostringstream msg;
        msg << "quadrature produced a non-finite value on [" << a << ", " << b << "]";
        throw numeric_error(msg.str());
    }
    if (out.error > 1e-6 * l1 && out.error > 1e-300) {
        std::ostringstream msg;
        msg << "quadrature did not converge on [" << a << ", " << b << "]: estimate "
            << out.value << ", error " << out.error << ", L1 " << l1;
        throw numeric_error(msg.str());
    }
    return out;
}

integral integrate_panels(const std::function<double(double)>& f, std::span<const double> breaks,
                          double rel_tol) {
    integral total;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
        integral part = integrate(f, breaks[i - 1], breaks[i], rel_tol);
        total.value += part.value;
        total.error += part.error;
    }
    return total;
}

std::vector<double> decade_breaks(double lo, double hi, std::span<const double> extra) {
    std::vector<double> b;
    if (!(hi > lo)) return b;
    b.push_back(lo);
    b.push_back(hi);
    if (lo > 0.0) {
        double d = std::pow(10.0, std::ceil(std::log10(lo)));
        for (; d < hi; d *= 10.0) {
            if (d > lo) b.push_back(d);
        }
    } else {
        b.push_back(std::min(hi, 1.0));
    }
    for (double e : extra) {
        if (e > lo && e < hi) b.push_back(e);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(),
                        [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::abs(y); }),
            b.end());
    return b;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, bool log_space,
              int max_iter) {
    if (log_space && !(lo > 0.0 && hi > 0.0))
        throw domain_error("bisect: log-space bracket must be positive");
    auto g = [&](double t) { return log_space ? f(std::exp(t)) : f(t); };
    double a = log_space ? std::log(lo) : lo;
    double b = log_space ? std::log(hi) : hi;
    double fa = g(a), fb = g(b);
    if (fa == 0.0) return lo;
    if (fb == 0.0) return hi;
    if (std::signbit(fa) == std::signbit(fb)) {
        std::ostringstream msg;
        msg << "bisect: no sign change on [" << lo << ", " << hi << "] (f = " << fa << ", "
            << fb << ")";
        throw numeric_error(msg.str());
    }
    boost::uintmax_t iters = static_cast<boost::uintmax_t>(max_iter);
    auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 2);
    std::pair<double, double> r;
    try {
        r = boost::math::tools::bisect(g, a, b, tol, iters);
    } catch (const std::exception& e) {
        throw numeric_error(std::string("bisect: ") + e.what());
    }
    if (iters >= static_cast<boost::uintmax_t>(max_iter))
        throw numeric_error("bisect: iteration limit reached");
    double t = 0.5 * (r.first + r.second);
    return log_space ? std::exp(t) : t;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
    v.back() = b;
    return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
    if (!(a > 0.0 && b > 0.0)) throw domain_error("logspace: endpoints must be positive");
    std::vector<double> v = linspace(std::log(a), std::log(b), n);
    for (double& x : v) x = std::exp(x);
    if (n > 0) {
        v.front() = a;
        v.back() = b;
    }
    return v;
}

line_fit fit_line(std::span<const double> x, std::span<const double> y,
                  std::span<const double> w) {
    line_fit fit;
    std::size_t n = std::min(x.size(), y.size());
    fit.n = n;
    if (n < 2) return fit;
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        sxx += wi * (x[i] - mx) * (x[i] - mx);
        sxy += wi * (x[i] - mx) * (y[i] - my);
        syy += wi * (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double wi = w.empty() ? 1.0 : w[i];
        double e = y[i] - fit.intercept - fit.slope * x[i];
        sse += wi * e * e;
    }
    fit.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    if (n > 2) fit.slope_stderr = std::sqrt(sse / double(n - 2) / sxx);
    return fit;
}

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace fbqos::numeric
