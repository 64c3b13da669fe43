#include "cgn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cgn/errors.hpp"

namespace cgn::linalg {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kOrthTol = 1.0e-14;

// One-sided Jacobi on a tall matrix (rows >= cols): orthogonalize column
// pairs until every pair passes the relative orthogonality test. A column
// that is exactly zero is never rotated, which keeps the corresponding row
// of the pseudoinverse exactly zero — the cluster-in-a-hyperplane case
// relies on this.
SvdResult svd_tall(const Matrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    Matrix w = m;
    Matrix v = Matrix::identity(cols);

    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if (apq == 0.0 || std::abs(apq) <= kOrthTol * std::sqrt(app * aqq)) continue;
                converged = false;

                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < cols; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
    }
    if (!converged) throw NumericalFailure("svd: Jacobi sweeps did not converge");

    std::vector<double> sigma(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += w(i, j) * w(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    SvdResult out;
    out.sigma.resize(cols);
    out.u = Matrix(rows, cols);
    out.v = Matrix(cols, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = sigma[src];
        for (std::size_t i = 0; i < cols; ++i) out.v(i, j) = v(i, src);
        if (sigma[src] > 0.0) {
            for (std::size_t i = 0; i < rows; ++i) out.u(i, j) = w(i, src) / sigma[src];
        }
    }

    // Zero singular values leave a U column undefined; fill it with a unit
    // vector orthogonal to the columns already present so U stays orthonormal.
    for (std::size_t j = 0; j < cols; ++j) {
        if (out.sigma[j] > 0.0) continue;
        for (std::size_t cand = 0; cand < rows; ++cand) {
            std::vector<double> e(rows, 0.0);
            e[cand] = 1.0;
            for (std::size_t k = 0; k < cols; ++k) {
                if (k == j) continue;
                double proj = 0.0;
                for (std::size_t i = 0; i < rows; ++i) proj += out.u(i, k) * e[i];
                for (std::size_t i = 0; i < rows; ++i) e[i] -= proj * out.u(i, k);
            }
            const double n = norm2(e);
            if (n > 0.5) {
                for (std::size_t i = 0; i < rows; ++i) out.u(i, j) = e[i] / n;
                break;
            }
        }
    }
    return out;
}

} // namespace

SvdResult svd(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw ContractViolation("svd: empty matrix");
    if (!m.all_finite()) throw ContractViolation("svd: non-finite entries");
    if (m.rows() >= m.cols()) return svd_tall(m);
    SvdResult t = svd_tall(m.transposed());
    return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

Matrix pinv(const Matrix& m, double rank_tol) {
    SvdResult d = svd(m);
    if (rank_tol < 0.0)
        rank_tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                   std::numeric_limits<double>::epsilon();
    const double smax = d.sigma.empty() ? 0.0 : d.sigma.front();
    const double cut = rank_tol * smax;

    // m^+ = v diag(1/sigma) u^T over the retained singular values.
    Matrix out(m.cols(), m.rows());
    for (std::size_t k = 0; k < d.sigma.size(); ++k) {
        if (!(d.sigma[k] > cut) || d.sigma[k] == 0.0) continue;
        const double inv = 1.0 / d.sigma[k];
        for (std::size_t i = 0; i < m.cols(); ++i) {
            const double vik = d.v(i, k) * inv;
            if (vik == 0.0) continue;
            for (std::size_t j = 0; j < m.rows(); ++j) out(i, j) += vik * d.u(j, k);
        }
    }
    return out;
}

Matrix weighted_minnorm_ls(const Matrix& dx, const Matrix& dy, std::span<const double> weights,
                           double rank_tol) {
    if (dx.cols() != dy.cols() || dx.cols() != weights.size())
        throw ContractViolation("weighted_minnorm_ls: column counts differ");
    for (double w : weights)
        if (!(w >= 0.0)) throw ContractViolation("weighted_minnorm_ls: negative weight");

    const std::size_t n = dx.rows(), m = dy.rows(), count = dx.cols();
    Matrix xw(n, count), yw(m, count);
    for (std::size_t j = 0; j < count; ++j) {
        for (std::size_t i = 0; i < n; ++i) xw(i, j) = dx(i, j) * weights[j];
        for (std::size_t i = 0; i < m; ++i) yw(i, j) = dy(i, j) * weights[j];
    }
    return yw * pinv(xw, rank_tol);
}

std::vector<double> regularized_solve(const Matrix& a, std::span<const double> residual,
                                      double lambda) {
    if (!(lambda > 0.0)) throw ContractViolation("regularized_solve: lambda must be positive");
    if (a.rows() != residual.size())
        throw ContractViolation("regularized_solve: residual length differs from row count");

    // delta = sum_k v_k * sigma_k / (sigma_k^2 + lambda) * (u_k . residual)
    SvdResult d = svd(a);
    std::vector<double> delta(a.cols(), 0.0);
    for (std::size_t k = 0; k < d.sigma.size(); ++k) {
        const double s = d.sigma[k];
        if (s == 0.0) continue;
        double ur = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) ur += d.u(i, k) * residual[i];
        const double f = s / (s * s + lambda) * ur;
        for (std::size_t i = 0; i < a.cols(); ++i) delta[i] += f * d.v(i, k);
    }
    return delta;
}

} // namespace cgn::linalg
