#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sgn/rng.hpp"

namespace sgn {

// ---------------------------------------------------------------------------
// Process definitions
// ---------------------------------------------------------------------------

/// y'' + a y = 0
struct Harmonic {
    double a = 1.0;
    double y0 = 1.0;
    double v0 = 0.0;
};

/// y'' + b y' + a y = 0
struct Damped {
    double a = 1.0;
    double b = 0.1;
    double y0 = 1.0;
    double v0 = 0.0;
};

/// x_{n+1} = r x_n (1 - x_n)
struct Logistic {
    double r = 4.0;
    double x0 = 0.3;
};

enum class LorenzComponent { X, Y, Z };

struct Lorenz {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    std::array<double, 3> init{1.0, 1.0, 1.0};
    LorenzComponent component = LorenzComponent::X;
};

/// dX = theta (mu - X) dt + sigma dW
struct OU {
    double theta = 0.1;
    double mu = 0.0;
    double sigma = 0.2;
    double x0 = 0.0;
};

/// Merton jump diffusion with lognormal jump sizes.
struct JumpDiffusion {
    double alpha = -0.05;
    double lambda = 0.02;
    double sigma = 0.15;
    double jump_mu = 0.4;
    double jump_sigma = 0.1;
    double x0 = 1.0;
};

struct AR1 {
    double phi = 0.7;
    double c = 0.0;
    double sigma_eps = 1.0;
    double x0 = 0.0;
};

struct ARMA11 {
    double phi = 0.7;
    double theta_ma = 0.3;
    double c = 0.0;
    double sigma_eps = 1.0;
    double x0 = 0.0;
};

/// x_t = eps_t h_t,  h_t^2 = c + phi1 x_{t-1}^2
struct ARCH1 {
    double c = 1.0;
    double phi1 = 0.5;
    double x0 = 0.0;
};

using ProcessSpec =
    std::variant<Harmonic, Damped, Logistic, Lorenz, OU, JumpDiffusion, AR1, ARMA11, ARCH1>;

/// Throws ValidationError when a parameter is outside its admissible range.
void validate(const ProcessSpec& spec);

bool is_deterministic(const ProcessSpec& spec);
bool is_discrete_time(const ProcessSpec& spec);

/// Lower-case identifier: harmonic, damped, logistic, lorenz, ou,
/// jumpdiffusion, ar1, arma11, arch1.
std::string process_name(const ProcessSpec& spec);
std::vector<std::string> process_names();

/// Default spec for a process name; throws ValidationError if unknown.
ProcessSpec default_process(std::string_view name);
/// Default sampling interval used by the command line for each process.
double default_dt(const ProcessSpec& spec);

/// Overrides one named parameter (e.g. "theta", "x0", "init_y",
/// "component" with 0/1/2). Throws ValidationError for unknown keys.
void set_parameter(ProcessSpec& spec, std::string_view key, double value);
/// All structural parameters by name, in a stable order.
std::map<std::string, double> parameters(const ProcessSpec& spec);

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

struct SeriesF {
    std::vector<double> values;
    double dt = 1.0;
    std::optional<ProcessSpec> origin;

    std::size_t size() const noexcept { return values.size(); }
};

/// Throws ValidationError unless the series is non-empty, finite, dt > 0.
void validate(const SeriesF& series);

/// Draws n samples. Discrete-time processes ignore dt and emit dt = 1;
/// deterministic processes never touch rng.
SeriesF generate(const ProcessSpec& spec, std::size_t n, double dt, RngStream& rng);

// ---------------------------------------------------------------------------
// Integrator
// ---------------------------------------------------------------------------

using Derivative = std::function<std::vector<double>(std::span<const double>)>;

/// One classical fourth-order Runge-Kutta step.
std::vector<double> rk4_step(std::span<const double> state, const Derivative& derivative, double dt);

}  // namespace sgn
