#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fbqos/channels.hpp"
#include "fbqos/error.hpp"

using namespace fbqos;

TEST_CASE("channel moments match the Gamma law") {
    auto ray = channel_model::rayleigh(2.0);
    CHECK(mean(ray) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(variance(ray) == doctest::Approx(4.0).epsilon(1e-14));

    auto nak = channel_model::nakagami(2.5, 3.0);
    CHECK(mean(nak) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(variance(nak) == doctest::Approx(9.0 / 2.5).epsilon(1e-14));

    auto div = channel_model::rayleigh_diversity(3);
    CHECK(mean(div) == doctest::Approx(3.0));
    CHECK(div.shape() == 3.0);
    CHECK(div.scale() == 1.0);

    auto tp = channel_model::two_point(0.2, 3.0, 0.25);
    CHECK(mean(tp) == doctest::Approx(0.25 * 0.2 + 0.75 * 3.0));
    CHECK(atoms(tp).size() == 2);
    CHECK(atoms(channel_model::awgn()).size() == 1);
    CHECK(atoms(ray).empty());
}

TEST_CASE("pdf integrates to the cdf") {
    for (auto model : {channel_model::rayleigh(), channel_model::nakagami(0.7, 1.0),
                       channel_model::nakagami(4.0, 2.0), channel_model::rayleigh_diversity(2)}) {
        CHECK(expect(model, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
        double x = 1.3;
        double below = 1.0 - expect(model, [](double) { return 1.0; }, {}, x);
        CHECK(below == doctest::Approx(cdf(model, x)).epsilon(1e-9));
    }
}

TEST_CASE("expect reproduces the mean") {
    auto nak = channel_model::nakagami(2.0, 1.5);
    CHECK(expect(nak, [](double x) { return x; }) == doctest::Approx(1.5).epsilon(1e-10));
    auto tp = channel_model::two_point(0.5, 2.0, 0.4);
    CHECK(expect(tp, [](double x) { return x * x; }) ==
          doctest::Approx(0.4 * 0.25 + 0.6 * 4.0).epsilon(1e-15));
}

TEST_CASE("quantiles invert the cdf") {
    auto model = channel_model::nakagami(1.7, 0.8);
    for (double p : {1e-12, 1e-6, 0.1, 0.5, 0.9}) {
        CHECK(cdf(model, quantile(model, p)) == doctest::Approx(p).epsilon(1e-9));
        CHECK(1.0 - cdf(model, upper_quantile(model, p)) == doctest::Approx(p).epsilon(1e-7));
    }
}

TEST_CASE("invalid channels are rejected") {
    CHECK_THROWS_AS(channel_model::nakagami(0.4, 1.0), domain_error);
    CHECK_THROWS_AS(channel_model::rayleigh(-1.0), domain_error);
    CHECK_THROWS_AS(channel_model::rayleigh_diversity(0), domain_error);
    CHECK_THROWS_AS(channel_model::two_point(0.1, 1.0, 1.5), domain_error);
    CHECK_THROWS_AS(channel_model::awgn(0), domain_error);
}

TEST_CASE("diversity sampler matches the Nakagami law") {
    auto div = channel_model::rayleigh_diversity(2);
    auto xs = sample_frames(div, 200000, 11);
    double m = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= double(xs.size() - 1);
    CHECK(m == doctest::Approx(2.0).epsilon(0.01));
    CHECK(v == doctest::Approx(2.0).epsilon(0.03));
    // Kolmogorov distance against the Gamma(2, 1) cdf
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); i += 97)
        d = std::max(d, std::abs(cdf(div, xs[i]) - double(i + 1) / double(xs.size())));
    CHECK(d < 0.01);
}

TEST_CASE("samplers are reproducible and streams differ") {
    auto model = channel_model::rayleigh();
    CHECK(sample_frames(model, 50, 7) == sample_frames(model, 50, 7));
    CHECK(sample_frames(model, 50, 7) != sample_frames(model, 50, 8));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("frames expand to slots") {
    auto slots = expand_to_slots({1.0, 2.0}, 3);
    CHECK(slots == std::vector<double>{1.0, 1.0, 1.0, 2.0, 2.0, 2.0});
}
