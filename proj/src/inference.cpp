#include "sgn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgn/error.hpp"
#include "sgn/simplex.hpp"

namespace sgn {

std::string fit_kind_name(FitKind kind) {
    switch (kind) {
        case FitKind::AR1: return "ar1";
        case FitKind::ARMA11: return "arma11";
        case FitKind::ARCH1: return "arch1";
        case FitKind::OU: return "ou";
    }
    return "?";
}

FitKind parse_fit_kind(const std::string& name) {
    if (name == "ar1") return FitKind::AR1;
    if (name == "arma11") return FitKind::ARMA11;
    if (name == "arch1") return FitKind::ARCH1;
    if (name == "ou") return FitKind::OU;
    if (name == "jumpdiffusion")
        throw ValidationError("jump-diffusion parameters are not estimated; supported: ar1, arma11, arch1, ou");
    throw ValidationError("no estimator for process '" + name + "'; supported: ar1, arma11, arch1, ou");
}

namespace {

void require_length(std::span<const double> x, std::size_t n, const char* what) {
    if (x.size() < n)
        throw ValidationError(std::string(what) + " needs at least " + std::to_string(n) + " samples");
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": non-finite sample");
}

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

constexpr double kArchCap = 0.999;

}  // namespace

FitResult fit_ar1(std::span<const double> x) {
    require_length(x, 3, "fit_ar1");
    FitResult out;
    out.kind = FitKind::AR1;
    const std::size_t m = x.size() - 1;
    const auto lag = x.first(m);
    const auto cur = x.subspan(1);
    const double mx = mean(lag), my = mean(cur);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lag[i] - mx) * (lag[i] - mx);
        sxy += (lag[i] - mx) * (cur[i] - my);
    }
    if (!(sxx > 0.0)) {
        out.estimates = {{"phi", std::numeric_limits<double>::quiet_NaN()},
                         {"c", std::numeric_limits<double>::quiet_NaN()},
                         {"sigma_eps", std::numeric_limits<double>::quiet_NaN()}};
        return out;
    }
    const double phi = sxy / sxx;
    const double c = my - phi * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = cur[i] - c - phi * lag[i];
        ssr += e * e;
    }
    out.estimates = {{"phi", phi}, {"c", c}, {"sigma_eps", std::sqrt(ssr / static_cast<double>(m - 2 > 0 ? m - 2 : 1))}};
    out.objective = ssr;
    out.converged = true;
    return out;
}

double arma11_css(std::span<const double> x, double phi, double theta, double c) {
    double eps = 0.0, ssr = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        eps = x[t] - c - phi * x[t - 1] - theta * eps;
        ssr += eps * eps;
    }
    return ssr;
}

FitResult fit_arma11(std::span<const double> x) {
    require_length(x, 50, "fit_arma11");
    FitResult out;
    out.kind = FitKind::ARMA11;
    const double mu = mean(x);
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= static_cast<double>(x.size());
    const double sd = std::sqrt(var);

    auto objective = [&](const std::vector<double>& p) {
        return arma11_css(x, std::tanh(p[0]), std::tanh(p[1]), p[2]);
    };
    SimplexOptions opts;
    opts.initial_step = 0.3;
    SimplexResult best;
    best.value = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double phi0 : {-0.5, 0.5})
        for (double theta0 : {-0.5, 0.5})
            for (double shift : {-0.1, 0.1}) {
                const std::vector<double> start{std::atanh(phi0), std::atanh(theta0), mu * (1.0 - phi0) + shift * sd};
                const SimplexResult r = nelder_mead(objective, start, opts);
                if (!r.converged) continue;
                if (!any || r.value < best.value) best = r;
                any = true;
            }
    if (!any) {
        out.estimates = {{"phi", std::numeric_limits<double>::quiet_NaN()},
                         {"theta_ma", std::numeric_limits<double>::quiet_NaN()},
                         {"c", std::numeric_limits<double>::quiet_NaN()},
                         {"sigma_eps", std::numeric_limits<double>::quiet_NaN()}};
        return out;
    }
    const double m = static_cast<double>(x.size() - 1);
    out.estimates = {{"phi", std::tanh(best.x[0])},
                     {"theta_ma", std::tanh(best.x[1])},
                     {"c", best.x[2]},
                     {"sigma_eps", std::sqrt(best.value / m)}};
    out.objective = best.value;
    out.converged = std::isfinite(best.value);
    return out;
}

FitResult fit_arch1(std::span<const double> x) {
    require_length(x, 100, "fit_arch1");
    FitResult out;
    out.kind = FitKind::ARCH1;
    out.estimates = {{"c", std::numeric_limits<double>::quiet_NaN()}, {"phi1", std::numeric_limits<double>::quiet_NaN()}};
    double ms = 0.0;
    for (double v : x) ms += v * v;
    ms /= static_cast<double>(x.size());
    if (!(ms > 0.0)) return out;

    // Negative Gaussian log-likelihood up to constants.
    auto nll = [&](const std::vector<double>& p) {
        const double c = std::exp(p[0]);
        const double phi1 = kArchCap * logistic(p[1]);
        double acc = 0.0;
        for (std::size_t t = 1; t < x.size(); ++t) {
            const double h2 = c + phi1 * x[t - 1] * x[t - 1];
            acc += std::log(h2) + x[t] * x[t] / h2;
        }
        return 0.5 * acc;
    };
    SimplexOptions opts;
    opts.initial_step = 0.5;
    SimplexResult best;
    bool any = false;
    for (double phi0 : {0.1, 0.3, 0.5, 0.7}) {
        const double c0 = ms * (1.0 - phi0);
        const double v0 = std::log(phi0 / kArchCap) - std::log1p(-phi0 / kArchCap);
        const SimplexResult r = nelder_mead(nll, {std::log(c0), v0}, opts);
        if (!r.converged || !std::isfinite(r.value)) continue;
        if (!any || r.value < best.value) best = r;
        any = true;
    }
    if (!any) return out;
    out.estimates = {{"c", std::exp(best.x[0])}, {"phi1", kArchCap * logistic(best.x[1])}};
    out.objective = -best.value;
    out.converged = true;
    return out;
}

FitResult fit_ou(std::span<const double> x, double dt) {
    if (!(dt > 0.0)) throw ValidationError("fit_ou: dt must be > 0");
    const FitResult ar = fit_ar1(x);
    FitResult out;
    out.kind = FitKind::OU;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.estimates = {{"theta", nan}, {"mu", nan}, {"sigma", nan}};
    out.objective = ar.objective;
    if (!ar.converged) return out;
    const double phi = ar.estimates.at("phi");
    if (!(phi > 0.0 && phi < 1.0)) return out;
    const double theta = -std::log(phi) / dt;
    const double mu = ar.estimates.at("c") / (1.0 - phi);
    const double sigma = ar.estimates.at("sigma_eps") * std::sqrt(2.0 * theta / -std::expm1(-2.0 * theta * dt));
    out.estimates = {{"theta", theta}, {"mu", mu}, {"sigma", sigma}};
    out.converged = true;
    return out;
}

FitResult fit(FitKind kind, std::span<const double> x, double dt) {
    switch (kind) {
        case FitKind::AR1: return fit_ar1(x);
        case FitKind::ARMA11: return fit_arma11(x);
        case FitKind::ARCH1: return fit_arch1(x);
        case FitKind::OU: return fit_ou(x, dt);
    }
    throw ValidationError("unknown estimator");
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ValidationError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EstimateReport monte_carlo_report(std::span<const FitResult> fits, const std::map<std::string, double>& true_values) {
    if (fits.empty()) throw ValidationError("no fits to summarise");
    EstimateReport rep;
    rep.kind = fits.front().kind;
    rep.num_sims = static_cast<int>(fits.size());
    for (const auto& f : fits) {
        if (f.kind != rep.kind) throw ValidationError("fits mix different estimators");
        rep.converged.push_back(f.converged);
        if (!f.converged) continue;
        ++rep.num_converged;
        for (const auto& [name, value] : f.estimates) rep.params[name].all_estimates.push_back(value);
    }
    if (rep.num_converged == 0) throw NumericalError("no fit converged");
    for (auto& [name, summary] : rep.params) {
        summary.median = quantile(summary.all_estimates, 0.5);
        for (double p : {0.05, 0.25, 0.75, 0.95}) summary.quantiles[p] = quantile(summary.all_estimates, p);
        if (auto it = true_values.find(name); it != true_values.end()) {
            summary.true_value = it->second;
            summary.has_true_value = true;
        }
    }
    return rep;
}

EstimateReport monte_carlo_report(std::span<const FitResult> fits, const ProcessSpec& true_spec) {
    return monte_carlo_report(fits, parameters(true_spec));
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("ks_distance needs two non-empty samples");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace sgn
