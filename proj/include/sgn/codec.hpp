#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgn/processes.hpp"

namespace sgn {

enum class Scheme { Linear, MuLaw };

/// Fitted value <-> class mapping over [lo, hi] with K classes.
struct Quantizer {
    int num_classes = 256;
    double lo = -1.0;
    double hi = 1.0;
    Scheme scheme = Scheme::Linear;
    double mu = 255.0;  ///< companding strength, MuLaw only

    /// Throws ValidationError unless K >= 2, lo < hi (both finite), mu > 0.
    void validate() const;

    int quantize(double x) const;
    double dequantize(int cls) const;
    double bin_width() const { return (hi - lo) / num_classes; }
};

/// Classes in [0, K) with the quantizer that produced them.
struct ClassSeries {
    std::vector<int> classes;
    Quantizer quantizer;

    int num_classes() const { return quantizer.num_classes; }
    std::size_t size() const { return classes.size(); }
};

/// lo/hi = min/max of the series widened by margin_fraction of the range;
/// a zero range is widened by one unit on each side.
Quantizer fit_quantizer(std::span<const double> values, int num_classes = 256, Scheme scheme = Scheme::Linear,
                        double margin_fraction = 0.005, double mu = 255.0);

ClassSeries encode(const Quantizer& q, std::span<const double> values);
std::vector<double> decode(const Quantizer& q, std::span<const int> classes);

}  // namespace sgn
