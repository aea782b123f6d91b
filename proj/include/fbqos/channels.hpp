#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace fbqos {

enum class channel_kind { awgn, rayleigh, nakagami, rayleigh_diversity, two_point };

std::string to_string(channel_kind k);

// Distribution of the channel power gain |h|^2 plus the frame length T in
// slots. The gain is constant within a frame and i.i.d. across frames.
struct channel_model {
    channel_kind kind = channel_kind::awgn;
    double m = 1.0;      // Nakagami shape
    double omega = 1.0;  // mean power gain
    int kappa = 1;       // diversity branches
    int frame_slots = 1;
    // two_point only: gains[i] with probability probs[i]
    double gains[2] = {1.0, 1.0};
    double probs[2] = {0.5, 0.5};

    static channel_model awgn(int frame_slots = 1);
    static channel_model rayleigh(double omega = 1.0, int frame_slots = 1);
    static channel_model nakagami(double m, double omega, int frame_slots = 1);
    static channel_model rayleigh_diversity(int kappa, int frame_slots = 1);
    static channel_model two_point(double g_lo, double g_hi, double p_lo, int frame_slots = 1);

    void validate() const;
    bool continuous() const;
    // Gamma(shape, scale) parameters of a continuous model.
    double shape() const;
    double scale() const;
};

struct atom {
    double gain;
    double prob;
};

// Point masses of a discrete model (awgn, two_point); empty when continuous.
std::vector<atom> atoms(const channel_model& model);

double pdf(const channel_model& model, double x);
double cdf(const channel_model& model, double x);
double mean(const channel_model& model);
double variance(const channel_model& model);
// Smallest x with cdf(x) >= p, and largest x with 1 - cdf(x) >= q.
double quantile(const channel_model& model, double p);
double upper_quantile(const channel_model& model, double q);

// E{g(|h|^2)}. Continuous models are integrated over decade panels between
// far tail quantiles; `breaks` adds panel boundaries (peaks, kinks) and `lo`
// drops the part of the support below it.
double expect(const channel_model& model, const std::function<double(double)>& g,
              const std::vector<double>& breaks = {}, double lo = 0.0, double* error = nullptr);

// Streaming per-frame gain source. Rayleigh diversity draws a sum of kappa
// unit exponentials so it is an independent route to the Nakagami(k, k) law.
class gain_sampler {
public:
    gain_sampler(const channel_model& model, std::uint64_t seed);
    double next();
    std::mt19937_64& engine() { return rng_; }

private:
    channel_model model_;
    std::mt19937_64 rng_;
    std::gamma_distribution<double> gamma_;
    std::exponential_distribution<double> expo_{1.0};
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

std::vector<double> sample_frames(const channel_model& model, std::size_t n_frames,
                                  std::uint64_t seed);
std::vector<double> expand_to_slots(const std::vector<double>& frames, int frame_slots);

// Derive independent stream seeds from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace fbqos
