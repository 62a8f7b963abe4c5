#include "sgn/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgn/error.hpp"

namespace sgn {

namespace {

int linear_bin(double unit, int k) {
    // unit is the position in [0, 1]; floor then clamp to the edge classes.
    const double scaled = std::floor(unit * k);
    if (!(scaled >= 0.0)) return 0;
    if (scaled >= k - 1) return k - 1;
    return static_cast<int>(scaled);
}

double compress(double u, double mu) { return std::copysign(std::log1p(mu * std::abs(u)) / std::log1p(mu), u); }

double expand(double y, double mu) { return std::copysign(std::expm1(std::abs(y) * std::log1p(mu)) / mu, y); }

}  // namespace

void Quantizer::validate() const {
    if (num_classes < 2) throw ValidationError("quantizer needs at least 2 classes");
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) throw ValidationError("quantizer range must satisfy lo < hi");
    if (scheme == Scheme::MuLaw && !(mu > 0.0)) throw ValidationError("mu-law strength must be > 0");
}

int Quantizer::quantize(double x) const {
    if (!std::isfinite(x)) throw ValidationError("cannot quantize a non-finite value");
    const double unit = (x - lo) / (hi - lo);
    if (scheme == Scheme::Linear) return linear_bin(unit, num_classes);
    const double u = std::clamp(2.0 * unit - 1.0, -1.0, 1.0);
    return linear_bin(0.5 * (compress(u, mu) + 1.0), num_classes);
}

double Quantizer::dequantize(int cls) const {
    if (cls < 0 || cls >= num_classes)
        throw ValidationError("class " + std::to_string(cls) + " outside [0, " + std::to_string(num_classes) + ")");
    if (scheme == Scheme::Linear) return lo + (cls + 0.5) * (hi - lo) / num_classes;
    // Midpoint of the bin edges in value space.
    const double y0 = -1.0 + cls * 2.0 / num_classes;
    const double y1 = -1.0 + (cls + 1) * 2.0 / num_classes;
    return lo + 0.25 * (expand(y0, mu) + expand(y1, mu) + 2.0) * (hi - lo);
}

Quantizer fit_quantizer(std::span<const double> values, int num_classes, Scheme scheme, double margin_fraction,
                        double mu) {
    if (values.empty()) throw ValidationError("cannot fit a quantizer to an empty series");
    if (num_classes < 2) throw ValidationError("quantizer needs at least 2 classes");
    if (!(margin_fraction >= 0.0)) throw ValidationError("margin fraction must be >= 0");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("series contains a non-finite value");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    Quantizer q;
    q.num_classes = num_classes;
    q.scheme = scheme;
    q.mu = mu;
    const double range = *mx - *mn;
    if (range == 0.0) {
        q.lo = *mn - 1.0;
        q.hi = *mx + 1.0;
    } else {
        q.lo = *mn - margin_fraction * range;
        q.hi = *mx + margin_fraction * range;
    }
    q.validate();
    return q;
}

ClassSeries encode(const Quantizer& q, std::span<const double> values) {
    ClassSeries out;
    out.quantizer = q;
    out.classes.reserve(values.size());
    for (double v : values) out.classes.push_back(q.quantize(v));
    return out;
}

std::vector<double> decode(const Quantizer& q, std::span<const int> classes) {
    std::vector<double> out;
    out.reserve(classes.size());
    for (int c : classes) out.push_back(q.dequantize(c));
    return out;
}

}  // namespace sgn
