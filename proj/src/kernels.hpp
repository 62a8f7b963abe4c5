#pragma once

#include <Eigen/Core>

namespace sgn::detail {

/// out.col(t) += w * x.col(t) for every column t.
///
/// Each output element accumulates w(r, k) * x(k, t) for k = 0, 1, ... in
/// order, one multiply and one add per term, whatever the column count or
/// the column's position in the block. Forward results for a position are
/// therefore bit-identical no matter how long the sequence around it is.
inline void accumulate_product(const Eigen::MatrixXd& w, const Eigen::Ref<const Eigen::MatrixXd>& x,
                               Eigen::Ref<Eigen::MatrixXd> out) {
    using Eigen::Index;
    const Index rows = w.rows();
    const Index inner = w.cols();
    const Index cols = x.cols();
    const double* wd = w.data();
    const double* xd = x.data();
    const Index ldx = x.outerStride();
    double* od = out.data();
    const Index ldo = out.outerStride();

    Index t = 0;
    for (; t + 4 <= cols; t += 4) {
        double* __restrict o0 = od + t * ldo;
        double* __restrict o1 = o0 + ldo;
        double* __restrict o2 = o1 + ldo;
        double* __restrict o3 = o2 + ldo;
        const double* xc = xd + t * ldx;
        for (Index k = 0; k < inner; ++k) {
            const double* __restrict wk = wd + k * rows;
            const double x0 = xc[k];
            const double x1 = xc[k + ldx];
            const double x2 = xc[k + 2 * ldx];
            const double x3 = xc[k + 3 * ldx];
            for (Index r = 0; r < rows; ++r) {
                const double wr = wk[r];
                o0[r] += wr * x0;
                o1[r] += wr * x1;
                o2[r] += wr * x2;
                o3[r] += wr * x3;
            }
        }
    }
    for (; t < cols; ++t) {
        double* __restrict o = od + t * ldo;
        const double* xc = xd + t * ldx;
        for (Index k = 0; k < inner; ++k) {
            const double* __restrict wk = wd + k * rows;
            const double xk = xc[k];
            for (Index r = 0; r < rows; ++r) o[r] += wk[r] * xk;
        }
    }
}

}  // namespace sgn::detail
