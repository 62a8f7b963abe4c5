#include "sgn/processes.hpp"

#include <cmath>
#include <sstream>

#include "sgn/error.hpp"

namespace sgn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

void require(bool ok, const char* process, const char* what) {
    if (!ok) {
        std::ostringstream os;
        os << process << ": " << what;
        throw ValidationError(os.str());
    }
}

bool finite(double v) { return std::isfinite(v); }

void check(const Harmonic& p) {
    require(finite(p.a) && p.a > 0.0, "harmonic", "a must be > 0");
    require(finite(p.y0) && finite(p.v0), "harmonic", "initial conditions must be finite");
}

void check(const Damped& p) {
    require(finite(p.a) && p.a > 0.0, "damped", "a must be > 0");
    require(finite(p.b) && p.b >= 0.0, "damped", "b must be >= 0");
    require(finite(p.y0) && finite(p.v0), "damped", "initial conditions must be finite");
}

void check(const Logistic& p) {
    require(p.r > 0.0 && p.r <= 4.0, "logistic", "r must lie in (0, 4]");
    require(p.x0 > 0.0 && p.x0 < 1.0, "logistic", "x0 must lie in (0, 1)");
}

void check(const Lorenz& p) {
    require(finite(p.sigma) && finite(p.rho) && finite(p.beta), "lorenz", "parameters must be finite");
    for (double v : p.init) require(finite(v), "lorenz", "initial state must be finite");
}

void check(const OU& p) {
    require(finite(p.theta) && p.theta > 0.0, "ou", "theta must be > 0");
    require(finite(p.mu) && finite(p.x0), "ou", "mu and x0 must be finite");
    require(finite(p.sigma) && p.sigma >= 0.0, "ou", "sigma must be >= 0");
}

void check(const JumpDiffusion& p) {
    require(finite(p.alpha) && finite(p.jump_mu), "jumpdiffusion", "alpha and jump_mu must be finite");
    require(finite(p.lambda) && p.lambda >= 0.0, "jumpdiffusion", "lambda must be >= 0");
    require(finite(p.sigma) && p.sigma >= 0.0, "jumpdiffusion", "sigma must be >= 0");
    require(finite(p.jump_sigma) && p.jump_sigma >= 0.0, "jumpdiffusion", "jump_sigma must be >= 0");
    require(finite(p.x0) && p.x0 > 0.0, "jumpdiffusion", "x0 must be > 0");
}

void check(const AR1& p) {
    require(finite(p.phi) && finite(p.c) && finite(p.x0), "ar1", "parameters must be finite");
    require(finite(p.sigma_eps) && p.sigma_eps >= 0.0, "ar1", "sigma_eps must be >= 0");
}

void check(const ARMA11& p) {
    require(finite(p.phi) && finite(p.theta_ma) && finite(p.c) && finite(p.x0), "arma11",
            "parameters must be finite");
    require(finite(p.sigma_eps) && p.sigma_eps >= 0.0, "arma11", "sigma_eps must be >= 0");
}

void check(const ARCH1& p) {
    require(finite(p.c) && p.c > 0.0, "arch1", "c must be > 0");
    require(p.phi1 >= 0.0 && p.phi1 < 1.0, "arch1", "phi1 must lie in [0, 1)");
    require(finite(p.x0), "arch1", "x0 must be finite");
}

// Closed-form solution of y'' + b y' + a y = 0.
double damped_solution(double a, double b, double y0, double v0, double t) {
    const double gamma = 0.5 * b;
    const double disc = gamma * gamma - a;
    if (disc < 0.0) {
        const double w = std::sqrt(-disc);
        const double decay = gamma == 0.0 ? 1.0 : std::exp(-gamma * t);
        return decay * (y0 * std::cos(w * t) + (v0 + gamma * y0) / w * std::sin(w * t));
    }
    if (disc == 0.0) return std::exp(-gamma * t) * (y0 + (v0 + gamma * y0) * t);
    const double s = std::sqrt(disc);
    const double r1 = -gamma + s;
    const double r2 = -gamma - s;
    const double c1 = (v0 - r2 * y0) / (r1 - r2);
    const double c2 = y0 - c1;
    return c1 * std::exp(r1 * t) + c2 * std::exp(r2 * t);
}

std::vector<double> lorenz_field(const Lorenz& p, std::span<const double> s) {
    return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2]};
}

}  // namespace

void validate(const ProcessSpec& spec) {
    std::visit([](const auto& p) { check(p); }, spec);
}

bool is_deterministic(const ProcessSpec& spec) {
    return std::holds_alternative<Harmonic>(spec) || std::holds_alternative<Damped>(spec) ||
           std::holds_alternative<Logistic>(spec) || std::holds_alternative<Lorenz>(spec);
}

bool is_discrete_time(const ProcessSpec& spec) {
    return std::holds_alternative<Logistic>(spec) || std::holds_alternative<AR1>(spec) ||
           std::holds_alternative<ARMA11>(spec) || std::holds_alternative<ARCH1>(spec);
}

std::string process_name(const ProcessSpec& spec) {
    static const char* names[] = {"harmonic", "damped", "logistic", "lorenz", "ou",
                                  "jumpdiffusion", "ar1", "arma11", "arch1"};
    return names[spec.index()];
}

std::vector<std::string> process_names() {
    return {"harmonic", "damped", "logistic", "lorenz", "ou", "jumpdiffusion", "ar1", "arma11", "arch1"};
}

ProcessSpec default_process(std::string_view name) {
    if (name == "harmonic") return Harmonic{};
    if (name == "damped") return Damped{};
    if (name == "logistic") return Logistic{};
    if (name == "lorenz") return Lorenz{};
    if (name == "ou") return OU{};
    if (name == "jumpdiffusion") return JumpDiffusion{};
    if (name == "ar1") return AR1{};
    if (name == "arma11") return ARMA11{};
    if (name == "arch1") return ARCH1{};
    throw ValidationError("unknown process '" + std::string(name) + "'");
}

double default_dt(const ProcessSpec& spec) {
    return std::visit(Overloaded{
                          [](const Harmonic&) { return 0.05; },
                          [](const Damped&) { return 0.05; },
                          [](const Lorenz&) { return 0.01; },
                          [](const auto&) { return 1.0; },
                      },
                      spec);
}

namespace {

// Name → member table per process; drives both set_parameter and parameters.
template <class P>
using Fields = std::vector<std::pair<const char*, double P::*>>;

Fields<Harmonic> fields(const Harmonic*) { return {{"a", &Harmonic::a}, {"y0", &Harmonic::y0}, {"v0", &Harmonic::v0}}; }
Fields<Damped> fields(const Damped*) {
    return {{"a", &Damped::a}, {"b", &Damped::b}, {"y0", &Damped::y0}, {"v0", &Damped::v0}};
}
Fields<Logistic> fields(const Logistic*) { return {{"r", &Logistic::r}, {"x0", &Logistic::x0}}; }
Fields<Lorenz> fields(const Lorenz*) {
    return {{"sigma", &Lorenz::sigma}, {"rho", &Lorenz::rho}, {"beta", &Lorenz::beta}};
}
Fields<OU> fields(const OU*) {
    return {{"theta", &OU::theta}, {"mu", &OU::mu}, {"sigma", &OU::sigma}, {"x0", &OU::x0}};
}
Fields<JumpDiffusion> fields(const JumpDiffusion*) {
    return {{"alpha", &JumpDiffusion::alpha},     {"lambda", &JumpDiffusion::lambda},
            {"sigma", &JumpDiffusion::sigma},     {"jump_mu", &JumpDiffusion::jump_mu},
            {"jump_sigma", &JumpDiffusion::jump_sigma}, {"x0", &JumpDiffusion::x0}};
}
Fields<AR1> fields(const AR1*) {
    return {{"phi", &AR1::phi}, {"c", &AR1::c}, {"sigma_eps", &AR1::sigma_eps}, {"x0", &AR1::x0}};
}
Fields<ARMA11> fields(const ARMA11*) {
    return {{"phi", &ARMA11::phi}, {"theta_ma", &ARMA11::theta_ma}, {"c", &ARMA11::c},
            {"sigma_eps", &ARMA11::sigma_eps}, {"x0", &ARMA11::x0}};
}
Fields<ARCH1> fields(const ARCH1*) { return {{"c", &ARCH1::c}, {"phi1", &ARCH1::phi1}, {"x0", &ARCH1::x0}}; }

}  // namespace

void set_parameter(ProcessSpec& spec, std::string_view key, double value) {
    bool found = false;
    std::visit(
        [&](auto& p) {
            using P = std::decay_t<decltype(p)>;
            for (const auto& [name, member] : fields(static_cast<const P*>(nullptr))) {
                if (key == name) {
                    p.*member = value;
                    found = true;
                }
            }
            if constexpr (std::is_same_v<P, Lorenz>) {
                if (key == "init_x") p.init[0] = value, found = true;
                if (key == "init_y") p.init[1] = value, found = true;
                if (key == "init_z") p.init[2] = value, found = true;
                if (key == "component") {
                    if (value != 0.0 && value != 1.0 && value != 2.0)
                        throw ValidationError("lorenz: component must be 0 (x), 1 (y) or 2 (z)");
                    p.component = static_cast<LorenzComponent>(static_cast<int>(value));
                    found = true;
                }
            }
        },
        spec);
    if (!found)
        throw ValidationError("process '" + process_name(spec) + "' has no parameter '" + std::string(key) + "'");
}

std::map<std::string, double> parameters(const ProcessSpec& spec) {
    std::map<std::string, double> out;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            for (const auto& [name, member] : fields(static_cast<const P*>(nullptr))) out[name] = p.*member;
            if constexpr (std::is_same_v<P, Lorenz>) {
                out["init_x"] = p.init[0];
                out["init_y"] = p.init[1];
                out["init_z"] = p.init[2];
                out["component"] = static_cast<double>(p.component);
            }
        },
        spec);
    return out;
}

void validate(const SeriesF& series) {
    if (series.values.empty()) throw ValidationError("series is empty");
    if (!(series.dt > 0.0) || !std::isfinite(series.dt)) throw ValidationError("series dt must be > 0");
    for (double v : series.values)
        if (!std::isfinite(v)) throw ValidationError("series contains a non-finite value");
}

std::vector<double> rk4_step(std::span<const double> state, const Derivative& derivative, double dt) {
    const std::size_t n = state.size();
    std::vector<double> tmp(n);
    const auto k1 = derivative(state);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
    const auto k2 = derivative(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
    const auto k3 = derivative(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
    const auto k4 = derivative(tmp);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

SeriesF generate(const ProcessSpec& spec, std::size_t n, double dt, RngStream& rng) {
    validate(spec);
    if (n == 0) throw ValidationError("n must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
    if (is_discrete_time(spec)) dt = 1.0;

    SeriesF out;
    out.dt = dt;
    out.origin = spec;
    auto& x = out.values;
    x.resize(n);

    std::visit(
        Overloaded{
            [&](const Harmonic& p) {
                for (std::size_t i = 0; i < n; ++i) x[i] = damped_solution(p.a, 0.0, p.y0, p.v0, i * dt);
            },
            [&](const Damped& p) {
                for (std::size_t i = 0; i < n; ++i) x[i] = damped_solution(p.a, p.b, p.y0, p.v0, i * dt);
            },
            [&](const Logistic& p) {
                x[0] = p.x0;
                for (std::size_t i = 1; i < n; ++i) x[i] = p.r * x[i - 1] * (1.0 - x[i - 1]);
            },
            [&](const Lorenz& p) {
                const auto comp = static_cast<std::size_t>(p.component);
                std::vector<double> s(p.init.begin(), p.init.end());
                const Derivative f = [&p](std::span<const double> st) { return lorenz_field(p, st); };
                x[0] = s[comp];
                for (std::size_t i = 1; i < n; ++i) {
                    s = rk4_step(s, f, dt);
                    x[i] = s[comp];
                }
            },
            [&](const OU& p) {
                const double decay = std::exp(-p.theta * dt);
                const double scale = p.sigma * std::sqrt(-std::expm1(-2.0 * p.theta * dt) / (2.0 * p.theta));
                x[0] = p.x0;
                for (std::size_t i = 1; i < n; ++i) x[i] = p.mu + (x[i - 1] - p.mu) * decay + scale * rng.normal();
            },
            [&](const JumpDiffusion& p) {
                const double k = std::exp(p.jump_mu + 0.5 * p.jump_sigma * p.jump_sigma) - 1.0;
                const double drift = (p.alpha - p.lambda * k - 0.5 * p.sigma * p.sigma) * dt;
                const double vol = p.sigma * std::sqrt(dt);
                x[0] = p.x0;
                // Per step: one diffusion normal, one Poisson count, then one
                // normal per jump.
                for (std::size_t i = 1; i < n; ++i) {
                    double log_step = drift + vol * rng.normal();
                    const auto jumps = rng.poisson(p.lambda * dt);
                    for (std::uint64_t j = 0; j < jumps; ++j) log_step += p.jump_mu + p.jump_sigma * rng.normal();
                    x[i] = x[i - 1] * std::exp(log_step);
                }
            },
            [&](const AR1& p) {
                x[0] = p.x0;
                for (std::size_t i = 1; i < n; ++i) {
                    const double eps = p.sigma_eps * rng.normal();
                    x[i] = p.phi * x[i - 1] + eps + p.c;
                }
            },
            [&](const ARMA11& p) {
                x[0] = p.x0;
                double eps_prev = 0.0;
                for (std::size_t i = 1; i < n; ++i) {
                    const double eps = p.sigma_eps * rng.normal();
                    x[i] = p.phi * x[i - 1] + p.theta_ma * eps_prev + eps + p.c;
                    eps_prev = eps;
                }
            },
            [&](const ARCH1& p) {
                x[0] = p.x0;
                for (std::size_t i = 1; i < n; ++i) {
                    const double h = std::sqrt(p.c + p.phi1 * x[i - 1] * x[i - 1]);
                    x[i] = rng.normal() * h;
                }
            },
        },
        spec);

    for (double v : x)
        if (!std::isfinite(v)) throw NumericalError(process_name(spec) + ": generated a non-finite value");
    return out;
}

}  // namespace sgn
