#include "linalg.hpp"

#include <cmath>

namespace spde::detail {

bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs) {
    const std::size_t n = diag.size();
    thread_local std::vector<double> c;
    c.resize(n);
    double piv = diag[0];
    if (!(std::abs(piv) > 1e-300)) return false;
    c[0] = upper[0] / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = diag[i] - lower[i] * c[i - 1];
        if (!(std::abs(piv) > 1e-300)) return false;
        c[i] = i + 1 < n ? upper[i] / piv : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return true;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

CgResult pcg(const LinearOp& apply, const LinearOp& precondition, std::span<const double> b, std::span<double> x,
             double rel_tol, std::size_t max_iters) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    const double bnorm = std::sqrt(dot(b, b));
    CgResult res;
    if (bnorm == 0.0) {
        for (double& v : x) v = 0.0;
        res.converged = true;
        return res;
    }
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 0; it < max_iters; ++it) {
        res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
        if (res.relative_residual <= rel_tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precondition(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        res.iterations = it + 1;
    }
    res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    res.converged = res.relative_residual <= rel_tol;
    return res;
}

}  // namespace spde::detail
