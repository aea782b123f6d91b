#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "fbqos/asymptotics.hpp"
#include "fbqos/channels.hpp"
#include "fbqos/error.hpp"
#include "fbqos/fbc.hpp"
#include "fbqos/laplace.hpp"
#include "fbqos/power.hpp"
#include "fbqos/qos.hpp"
#include "fbqos/queuesim.hpp"
#include "fbqos/specfun.hpp"

namespace py = pybind11;
using namespace fbqos;

namespace {

using release = py::call_guard<py::gil_scoped_release>;

ec_method parse_method(const std::string& s) {
    if (s == "quadrature") return ec_method::quadrature;
    if (s == "mc" || s == "monte_carlo") return ec_method::monte_carlo;
    if (s == "laplace") return ec_method::laplace;
    throw fbqos::domain_error("unknown method '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite-blocklength effective capacity and queueing analysis";

    // Python-side classes mirror the C++ error taxonomy; domain errors are
    // also ValueErrors so generic argument checks catch them.
    static py::exception<fbqos::domain_error> domain_exc(m, "DomainError", PyExc_ValueError);
    static py::exception<precondition_error> precondition_exc(m, "PreconditionError",
                                                              PyExc_RuntimeError);
    static py::exception<numeric_error> numeric_exc(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const fbqos::domain_error& e) {
            domain_exc(e.what());
        } catch (const precondition_error& e) {
            precondition_exc(e.what());
        } catch (const numeric_error& e) {
            numeric_exc(e.what());
        }
    });

    auto sf = m.def_submodule("specfun", "Special functions");
    sf.def("gaussian_q", &specfun::gaussian_q, py::arg("x"));
    sf.def("gaussian_q_inv", &specfun::gaussian_q_inv, py::arg("p"));
    sf.def("gaussian_q_inv_derivative", &specfun::gaussian_q_inv_derivative, py::arg("y"));
    sf.def("lambert_w0", &specfun::lambert_w0, py::arg("y"));
    sf.def("upper_incomplete_gamma", &specfun::upper_incomplete_gamma, py::arg("s"), py::arg("x"));
    sf.def("k_function", &specfun::k_function, py::arg("x"), py::arg("c0") = 1.0);
    sf.def("k_over_dispersion_32", &specfun::k_over_dispersion_32, py::arg("x"),
           py::arg("c0") = 1.0);

    py::class_<channel_model>(m, "ChannelModel")
        .def_static("awgn", &channel_model::awgn, py::arg("frame_slots") = 1)
        .def_static("rayleigh", &channel_model::rayleigh, py::arg("omega") = 1.0,
                    py::arg("frame_slots") = 1)
        .def_static("nakagami", &channel_model::nakagami, py::arg("m"), py::arg("omega") = 1.0,
                    py::arg("frame_slots") = 1)
        .def_static("rayleigh_diversity", &channel_model::rayleigh_diversity, py::arg("kappa"),
                    py::arg("frame_slots") = 1)
        .def_static("two_point", &channel_model::two_point, py::arg("g_lo"), py::arg("g_hi"),
                    py::arg("p_lo"), py::arg("frame_slots") = 1)
        .def_property_readonly("kind", [](const channel_model& c) { return to_string(c.kind); })
        .def_readonly("frame_slots", &channel_model::frame_slots)
        .def("pdf", [](const channel_model& c, double x) { return pdf(c, x); })
        .def("cdf", [](const channel_model& c, double x) { return cdf(c, x); })
        .def("mean", [](const channel_model& c) { return mean(c); })
        .def("variance", [](const channel_model& c) { return variance(c); })
        .def("quantile", [](const channel_model& c, double p) { return quantile(c, p); })
        .def("sample", &sample_frames, py::arg("n_frames"), py::arg("seed"), release())
        .def("__repr__", [](const channel_model& c) {
            return "<ChannelModel " + to_string(c.kind) + ">";
        });

    py::class_<power_policy>(m, "PowerPolicy")
        .def_static("fixed", &power_policy::fixed, py::arg("snr_linear"))
        .def_static("water_filling", &power_policy::water_filling, py::arg("nu0"),
                    py::arg("gbar") = 1.0)
        .def_static("tang_zhang", &power_policy::tang_zhang, py::arg("a1"), py::arg("a2"),
                    py::arg("snr_linear"))
        .def_static("custom", &power_policy::custom, py::arg("xi"), py::arg("name") = "custom")
        .def_property_readonly("kind", [](const power_policy& p) { return to_string(p.kind()); })
        .def_property_readonly("level", &power_policy::level)
        .def_property_readonly("cutoff", &power_policy::cutoff)
        .def("__call__", &power_policy::evaluate, py::arg("gain"))
        .def("average_power", [](const power_policy& p, const channel_model& c) {
            return average_power(p, c);
        })
        .def("calibrated", [](const power_policy& p, const channel_model& c, double target) {
            return calibrate_average_power(p, c, target);
        }, py::arg("channel"), py::arg("mean_snr_linear"));

    py::class_<fbc_params>(m, "CodeParams")
        .def(py::init([](double n, double eps, double snr) {
                 fbc_params p{n, eps, snr};
                 p.validate();
                 return p;
             }),
             py::arg("blocklength"), py::arg("epsilon"), py::arg("snr_linear") = 1.0)
        .def_readonly("blocklength", &fbc_params::blocklength)
        .def_readonly("epsilon", &fbc_params::epsilon)
        .def_readonly("snr_linear", &fbc_params::snr);

    m.def("dispersion", &dispersion, py::arg("snr_linear"));
    m.def("normal_approx_rate",
          [](const fbc_params& p, double gain) {
              return normal_approx_rate(p, gain).bits_per_channel_use;
          },
          py::arg("code"), py::arg("gain"), "Rate in bits per channel use.");
    m.def("rate_function",
          [](double x, const power_policy& p, const fbc_params& c) {
              return rate_function_r(x, p, c);
          },
          py::arg("gain"), py::arg("policy"), py::arg("code"));
    m.def("optimal_received_snr", &optimal_received_snr, py::arg("code"));

    py::class_<arrival_process>(m, "ArrivalProcess")
        .def_static("deterministic", &arrival_process::deterministic, py::arg("bits_per_slot"))
        .def_static("bernoulli", &arrival_process::bernoulli_packet, py::arg("packet_bits"),
                    py::arg("probability"))
        .def_static("poisson", &arrival_process::poisson_bits, py::arg("mean_bits"))
        .def_property_readonly("kind", [](const arrival_process& a) { return to_string(a.kind); })
        .def_property_readonly("mean", &arrival_process::mean)
        .def_property_readonly("variance", &arrival_process::variance)
        .def("effective_bandwidth", [](const arrival_process& a, double theta) {
            return effective_bandwidth(a, theta);
        }, py::arg("theta"));

    py::class_<service_context>(m, "Service")
        .def(py::init([](const channel_model& c, const power_policy& p, const fbc_params& f,
                         bool arq) {
                 service_context s{c, p, f, arq};
                 s.validate();
                 return s;
             }),
             py::arg("channel"), py::arg("policy"), py::arg("code"), py::arg("arq") = false)
        .def_readonly("channel", &service_context::channel)
        .def_readonly("policy", &service_context::policy)
        .def_readonly("code", &service_context::fbc)
        .def_readonly("arq", &service_context::arq)
        .def("service_bits", &service_context::service_bits, py::arg("gain"))
        .def_property_readonly("mean_service_bits",
                               [](const service_context& s) { return mean_service_bits(s); });

    py::class_<ec_estimate>(m, "ECEstimate")
        .def_readonly("value", &ec_estimate::value, "bits per slot")
        .def_readonly("normalized", &ec_estimate::normalized, "bits per channel use")
        .def_readonly("error", &ec_estimate::error)
        .def_property_readonly("method", [](const ec_estimate& e) { return to_string(e.method); })
        .def("__repr__", [](const ec_estimate& e) {
            return "<ECEstimate " + to_string(e.method) + " " + std::to_string(e.value) + ">";
        });

    m.def("effective_capacity",
          [](const service_context& s, double theta, const std::string& method,
             std::size_t mc_frames, std::uint64_t seed) {
              switch (parse_method(method)) {
                  case ec_method::quadrature: return effective_capacity_quadrature(s, theta);
                  case ec_method::monte_carlo:
                      return effective_capacity_montecarlo(s, theta, mc_frames, seed);
                  case ec_method::laplace: break;
              }
              auto r = s.arq ? ec_laplace_arq(s.channel, s.policy, s.fbc, theta)
                             : ec_laplace(s.channel, s.policy, s.fbc, theta);
              ec_estimate e;
              e.value = r.ec_value;
              e.normalized = r.normalized;
              e.method = ec_method::laplace;
              e.error = std::nan("");
              return e;
          },
          py::arg("service"), py::arg("theta"), py::arg("method") = "quadrature",
          py::arg("mc_frames") = 100000, py::arg("seed") = 1, release(),
          "EC in bits per slot at QoS exponent theta (per bit).");

    py::class_<laplace_result>(m, "LaplaceResult")
        .def_readonly("x_star", &laplace_result::x_star)
        .def_readonly("r_at_star", &laplace_result::r_at_star)
        .def_readonly("r2_at_star", &laplace_result::r2_at_star)
        .def_readonly("value", &laplace_result::ec_value)
        .def_readonly("normalized", &laplace_result::normalized);
    m.def("ec_laplace_truncated",
          [](const service_context& s, double theta) {
              return ec_laplace_truncated(s.channel, s.policy, s.fbc, theta);
          },
          py::arg("service"), py::arg("theta"), release());
    m.def("solve_x_star", &solve_x_star, py::arg("policy"), py::arg("code"));

    m.def("theoretical_slope",
          [](const channel_model& c, double rho) { return theoretical_slope(c, rho); },
          py::arg("channel"), py::arg("theta_times_blocklength"));
    py::class_<slope_fit>(m, "SlopeFit")
        .def_readonly("slope", &slope_fit::slope)
        .def_readonly("intercept", &slope_fit::intercept)
        .def_readonly("r2", &slope_fit::r2)
        .def_readonly("ill_conditioned", &slope_fit::ill_conditioned)
        .def_readonly("log2_snr", &slope_fit::log2_snr)
        .def_readonly("normalized_ec", &slope_fit::lambda);
    m.def("empirical_slope", &empirical_slope, py::arg("channel"), py::arg("code"),
          py::arg("theta"), py::arg("snr_grid_linear"), release());

    py::class_<qos_solution>(m, "QoSSolution")
        .def_readonly("bounded", &qos_solution::bounded)
        .def_readonly("theta", &qos_solution::theta)
        .def_readonly("alpha_a", &qos_solution::alpha_a)
        .def_readonly("residual", &qos_solution::residual);
    m.def("solve_qos_exponent",
          [](const arrival_process& a, const service_context& s) {
              return solve_qos_exponent(a, s);
          },
          py::arg("arrival"), py::arg("service"), release());
    m.def("epsilon_chi_bound", &epsilon_chi_bound, py::arg("code"), py::arg("arrival"),
          py::arg("queue_threshold_bits"), py::arg("chi_threshold"));

    py::class_<tail_row>(m, "TailRow")
        .def_readonly("threshold", &tail_row::threshold)
        .def_readonly("count", &tail_row::count)
        .def_readonly("probability", &tail_row::probability)
        .def_readonly("ci_lo", &tail_row::ci_lo)
        .def_readonly("ci_hi", &tail_row::ci_hi);
    py::class_<tail_estimate>(m, "TailEstimate")
        .def_readonly("rows", &tail_estimate::rows)
        .def_readonly("samples", &tail_estimate::samples)
        .def_readonly("decay_rate", &tail_estimate::decay_rate)
        .def_readonly("decay_stderr", &tail_estimate::decay_stderr);
    py::class_<sim_result>(m, "SimResult")
        .def_readonly("queue", &sim_result::queue)
        .def_readonly("delay", &sim_result::delay)
        .def_property_readonly("mean_queue_bits",
                               [](const sim_result& r) { return r.stats.mean_queue_bits; })
        .def_property_readonly("unstable", [](const sim_result& r) { return r.stats.unstable; });
    m.def("simulate",
          [](const service_context& s, const arrival_process& a, std::uint64_t slots,
             std::uint64_t warmup, int replications, int jobs, std::uint64_t seed,
             std::vector<double> queue_thresholds, std::vector<double> delay_thresholds) {
              sim_config c;
              c.service = s;
              c.arrival = a;
              c.n_slots = slots;
              c.warmup = warmup;
              c.replications = replications;
              c.jobs = jobs;
              c.seed = seed;
              c.queue_thresholds_bits = std::move(queue_thresholds);
              c.delay_thresholds_slots = std::move(delay_thresholds);
              return simulate(c);
          },
          py::arg("service"), py::arg("arrival"), py::arg("slots"), py::arg("warmup") = 10000,
          py::arg("replications") = 1, py::arg("jobs") = 1, py::arg("seed") = 1,
          py::arg("queue_thresholds_bits") = std::vector<double>{},
          py::arg("delay_thresholds_slots") = std::vector<double>{}, release());
}
