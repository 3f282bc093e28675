#include "rrstap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rrstap {

namespace {

void check_same_size(const CVec& a, const CVec& b, const char* what) {
    if (a.size() != b.size())
        throw ContractViolation(std::string(what) + ": size mismatch " +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

double max_abs(const CMat& a) {
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a(r, c)));
    return m;
}

}  // namespace

CVec CVec::unit(std::size_t n, std::size_t k) {
    CVec e(n);
    e[k] = 1.0;
    return e;
}

CMat CMat::identity(std::size_t n) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat CMat::eye_top(std::size_t n, std::size_t k) {
    CMat m(n, k);
    for (std::size_t i = 0; i < k && i < n; ++i) m(i, i) = 1.0;
    return m;
}

CVec operator+(const CVec& a, const CVec& b) {
    check_same_size(a, b, "vector add");
    CVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

CVec operator-(const CVec& a, const CVec& b) {
    check_same_size(a, b, "vector sub");
    CVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

CVec operator*(cplx s, const CVec& a) {
    CVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

CMat operator+(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("matrix add: shape mismatch");
    CMat out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) + b(r, c);
    return out;
}

CMat operator-(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("matrix sub: shape mismatch");
    CMat out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - b(r, c);
    return out;
}

CMat operator*(cplx s, const CMat& a) {
    CMat out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = s * a(r, c);
    return out;
}

CVec operator*(const CMat& a, const CVec& x) {
    if (a.cols() != x.size()) throw ContractViolation("matvec: shape mismatch");
    CVec out(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        cplx acc = 0.0;
        const cplx* row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
    return out;
}

CMat operator*(const CMat& a, const CMat& b) {
    if (a.cols() != b.rows()) throw ContractViolation("matmul: shape mismatch");
    CMat out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx ark = a(r, k);
            if (ark == cplx{}) continue;
            const cplx* brow = b.row(k);
            cplx* orow = out.row(r);
            for (std::size_t c = 0; c < b.cols(); ++c) orow[c] += ark * brow[c];
        }
    }
    return out;
}

CMat adjoint(const CMat& a) {
    CMat out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = std::conj(a(r, c));
    return out;
}

CMat outer(const CVec& u, const CVec& v) {
    CMat out(u.size(), v.size());
    for (std::size_t r = 0; r < u.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) out(r, c) = u[r] * std::conj(v[c]);
    return out;
}

cplx dot(const CVec& a, const CVec& b) {
    check_same_size(a, b, "dot");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm(const CVec& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i]);
    return std::sqrt(acc);
}

double fro_norm(const CMat& a) {
    double acc = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) acc += std::norm(a(r, c));
    return std::sqrt(acc);
}

CMat hermitianize(const CMat& a) {
    if (a.rows() != a.cols()) throw ContractViolation("hermitianize: matrix not square");
    CMat out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = 0.5 * (a(r, c) + std::conj(a(c, r)));
    return out;
}

bool all_finite(const CVec& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i].real()) || !std::isfinite(a[i].imag())) return false;
    return true;
}

bool all_finite(const CMat& a) {
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (!std::isfinite(a(r, c).real()) || !std::isfinite(a(r, c).imag())) return false;
    return true;
}

bool is_hermitian(const CMat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double bound = tol * std::max(1.0, max_abs(a));
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = r; c < a.cols(); ++c)
            if (std::abs(a(r, c) - std::conj(a(c, r))) > bound) return false;
    return true;
}

CVec hermitian_solve(const CMat& a, const CVec& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ContractViolation("hermitian_solve: matrix not square");
    if (b.size() != n) throw ContractViolation("hermitian_solve: rhs size mismatch");
    if (!is_hermitian(a)) throw ContractViolation("hermitian_solve: matrix not Hermitian within tolerance");

    // Cholesky A = L L^H.
    CMat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l(j, k));
        if (!(diag > 0.0) || !std::isfinite(diag))
            throw SolveFailure("hermitian_solve: nonpositive pivot " + std::to_string(j) +
                               " (value " + std::to_string(diag) + "); matrix singular or indefinite");
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx acc = a(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * std::conj(l(j, k));
            l(i, j) = acc / ljj;
        }
    }

    auto solve_lower = [&](const CVec& rhs) {
        CVec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc = rhs[i];
            for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * y[k];
            y[i] = acc / l(i, i);
        }
        CVec x(n);
        for (std::size_t ii = n; ii-- > 0;) {
            cplx acc = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) acc -= std::conj(l(k, ii)) * x[k];
            x[ii] = acc / l(ii, ii);
        }
        return x;
    };

    CVec x = solve_lower(b);
    // one refinement pass tightens the residual on ill-conditioned moments
    CVec resid = b - a * x;
    CVec corr = solve_lower(resid);
    return x + corr;
}

Rank1Update rank1_inverse_update(const CMat& p_prev, const CVec& u, const CVec& v, double lambda) {
    const std::size_t n = p_prev.rows();
    if (p_prev.cols() != n) throw ContractViolation("rank1_inverse_update: P not square");
    if (u.size() != n || v.size() != n) throw ContractViolation("rank1_inverse_update: vector size mismatch");
    if (!(lambda > 0.0) || lambda > 1.0)
        throw ContractViolation("rank1_inverse_update: forgetting factor must be in (0,1]");

    const double inv_lambda = 1.0 / lambda;
    CVec pu = p_prev * u;
    // v^H P as a row vector
    CVec row(n);
    for (std::size_t c = 0; c < n; ++c) {
        cplx acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += std::conj(v[r]) * p_prev(r, c);
        row[c] = acc;
    }
    cplx vhpu = 0.0;
    for (std::size_t i = 0; i < n; ++i) vhpu += row[i] * u[i];
    const cplx denom = 1.0 + inv_lambda * vhpu;
    if (std::abs(denom) < 1e-14)
        throw DegenerateUpdate("rank1_inverse_update: denominator magnitude " + std::to_string(std::abs(denom)));

    Rank1Update out;
    out.gain = (inv_lambda / denom) * pu;
    out.next = CMat(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const cplx g = inv_lambda * out.gain[r];
        for (std::size_t c = 0; c < n; ++c) out.next(r, c) = inv_lambda * p_prev(r, c) - g * row[c];
    }
    return out;
}

EigResult hermitian_eig(const CMat& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ContractViolation("hermitian_eig: matrix not square");
    if (!is_hermitian(a)) throw ContractViolation("hermitian_eig: matrix not Hermitian within tolerance");

    CMat b = hermitianize(a);
    CMat v = CMat::identity(n);
    const double scale = std::max(fro_norm(b), 1e-300);

    auto off_norm = [&]() {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = r + 1; c < n; ++c) acc += 2.0 * std::norm(b(r, c));
        return std::sqrt(acc);
    };

    const int max_sweeps = 60;
    const double tol = 1e-14 * scale;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= tol) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = b(p, q);
                const double mag = std::abs(apq);
                if (mag <= tol / (double(n) * double(n))) continue;
                const double app = b(p, p).real();
                const double aqq = b(q, q).real();
                const cplx phase = apq / mag;
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx spq = s * phase;        // J(p,q)
                const cplx sqp = -s / phase;       // J(q,p) = -s e^{-i phi}

                // columns: B <- B J, V <- V J
                for (std::size_t r = 0; r < n; ++r) {
                    const cplx brp = b(r, p), brq = b(r, q);
                    b(r, p) = c * brp + sqp * brq;
                    b(r, q) = spq * brp + c * brq;
                    const cplx vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp + sqp * vrq;
                    v(r, q) = spq * vrp + c * vrq;
                }
                // rows: B <- J^H B
                for (std::size_t col = 0; col < n; ++col) {
                    const cplx bpc = b(p, col), bqc = b(q, col);
                    b(p, col) = c * bpc + std::conj(sqp) * bqc;
                    b(q, col) = std::conj(spq) * bpc + c * bqc;
                }
                b(p, q) = 0.0;
                b(q, p) = 0.0;
            }
        }
    }
    if (sweep == max_sweeps && off_norm() > tol)
        throw EigFailure("hermitian_eig: no convergence after " + std::to_string(max_sweeps) +
                         " sweeps, off-diagonal residual " + std::to_string(off_norm()));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return b(i, i).real() > b(j, j).real(); });

    EigResult out;
    out.values.resize(n);
    out.vectors = CMat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = b(order[k], order[k]).real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

CMat inv_sqrt(const CMat& a) {
    EigResult eig = hermitian_eig(a);
    const std::size_t n = a.rows();
    const double smallest = eig.values.back();
    if (!(smallest > 0.0))
        throw SolveFailure("inv_sqrt: matrix not positive definite, smallest eigenvalue " +
                           std::to_string(smallest));
    CMat s(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += eig.vectors(r, k) * std::conj(eig.vectors(c, k)) / std::sqrt(eig.values[k]);
            s(r, c) = acc;
        }
    }
    return hermitianize(s);
}

CVec pinv_hermitian_solve(const CMat& a, const CVec& b, double rtol) {
    EigResult eig = hermitian_eig(a);
    const std::size_t n = a.rows();
    const double cutoff = rtol * std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
    CVec x(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(eig.values[k]) <= cutoff) continue;
        cplx coeff = 0.0;
        for (std::size_t r = 0; r < n; ++r) coeff += std::conj(eig.vectors(r, k)) * b[r];
        coeff /= eig.values[k];
        for (std::size_t r = 0; r < n; ++r) x[r] += coeff * eig.vectors(r, k);
    }
    return x;
}

}  // namespace rrstap
