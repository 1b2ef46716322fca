#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mems {

// Banded matrix in LAPACK-style band storage with room for pivoting fill:
// entry (i,j) lives at a[kl+ku + i-j + j*ldab], ldab = 2*kl+ku+1.
struct Banded {
    int n = 0, kl = 0, ku = 0;
    std::vector<double> a;

    Banded() = default;
    Banded(int n_, int kl_, int ku_)
        : n(n_), kl(kl_), ku(ku_), a((size_t)(2 * kl_ + ku_ + 1) * n_, 0.0) {}

    int ldab() const { return 2 * kl + ku + 1; }

    double& at(int i, int j) { return a[(size_t)j * ldab() + (kl + ku + i - j)]; }
    double at(int i, int j) const { return a[(size_t)j * ldab() + (kl + ku + i - j)]; }

    bool in_band(int i, int j) const { return i - j <= kl && j - i <= ku; }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(n, 0.0);
        for (int i = 0; i < n; ++i) {
            const int j0 = std::max(0, i - kl), j1 = std::min(n - 1, i + ku);
            double s = 0.0;
            for (int j = j0; j <= j1; ++j) s += at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
};

// LU factorization with partial pivoting confined to the band (gbtrf-style);
// the upper bandwidth of U grows to kl+ku.
struct BandedLU {
    Banded f;                // holds L (unit diagonal implied) and U
    std::vector<int> ipiv;
    bool singular = false;

    explicit BandedLU(Banded m) : f(std::move(m)), ipiv(f.n) {
        const int n = f.n, kl = f.kl, ku = f.ku, kw = kl + ku;
        for (int j = 0; j < n; ++j) {
            const int ilast = std::min(n - 1, j + kl);
            int p = j;
            for (int i = j + 1; i <= ilast; ++i)
                if (std::abs(f.at(i, j)) > std::abs(f.at(p, j))) p = i;
            ipiv[j] = p;
            if (f.at(p, j) == 0.0) { singular = true; continue; }
            if (p != j) {
                const int jlast = std::min(n - 1, j + kw);
                for (int k = j; k <= jlast; ++k) std::swap(f.at(j, k), f.at(p, k));
            }
            const double d = f.at(j, j);
            for (int i = j + 1; i <= ilast; ++i) {
                const double l = f.at(i, j) / d;
                f.at(i, j) = l;
                const int jlast = std::min(n - 1, j + kw);
                for (int k = j + 1; k <= jlast; ++k) f.at(i, k) -= l * f.at(j, k);
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        if (singular)
            throw std::runtime_error("BandedLU: singular matrix");
        const int n = f.n, kl = f.kl, kw = f.kl + f.ku;
        for (int j = 0; j < n; ++j) {
            if (ipiv[j] != j) std::swap(b[j], b[ipiv[j]]);
            const int ilast = std::min(n - 1, j + kl);
            for (int i = j + 1; i <= ilast; ++i) b[i] -= f.at(i, j) * b[j];
        }
        for (int i = n - 1; i >= 0; --i) {
            const int jlast = std::min(n - 1, i + kw);
            double s = b[i];
            for (int j = i + 1; j <= jlast; ++j) s -= f.at(i, j) * b[j];
            b[i] = s / f.at(i, i);
        }
        return b;
    }
};

// Small dense solve with partial pivoting, for bordered Schur complements.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                       std::vector<double> b) {
    const int q = (int)b.size();
    for (int j = 0; j < q; ++j) {
        int p = j;
        for (int i = j + 1; i < q; ++i)
            if (std::abs(A[i][j]) > std::abs(A[p][j])) p = i;
        std::swap(A[j], A[p]);
        std::swap(b[j], b[p]);
        if (A[j][j] == 0.0)
            throw std::runtime_error("dense_solve: singular system");
        for (int i = j + 1; i < q; ++i) {
            const double l = A[i][j] / A[j][j];
            for (int k = j; k < q; ++k) A[i][k] -= l * A[j][k];
            b[i] -= l * b[j];
        }
    }
    for (int i = q - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < q; ++j) s -= A[i][j] * b[j];
        b[i] = s / A[i][i];
    }
    return b;
}

// Block elimination for [[A, B],[C, D]] [x;y] = [fx;fy] with banded A and a
// thin border of width q: x and y returned concatenated.
struct BorderedSolver {
    const BandedLU& lu;
    std::vector<std::vector<double>> X; // A^{-1} B, one column per border column

    BorderedSolver(const BandedLU& lu_, const std::vector<std::vector<double>>& Bcols)
        : lu(lu_) {
        for (const auto& col : Bcols) X.push_back(lu.solve(col));
    }

    // Crows[r] is row r of C (length n), D[r] row of the q x q corner.
    std::vector<double> solve(const std::vector<std::vector<double>>& Crows,
                              const std::vector<std::vector<double>>& D,
                              const std::vector<double>& fx,
                              const std::vector<double>& fy) const {
        const int n = lu.f.n, q = (int)fy.size();
        std::vector<double> w = lu.solve(fx);
        std::vector<std::vector<double>> S(q, std::vector<double>(q));
        std::vector<double> rhs(q);
        for (int r = 0; r < q; ++r) {
            for (int c = 0; c < q; ++c) {
                double s = D[r][c];
                for (int i = 0; i < n; ++i) s -= Crows[r][i] * X[c][i];
                S[r][c] = s;
            }
            double s = fy[r];
            for (int i = 0; i < n; ++i) s -= Crows[r][i] * w[i];
            rhs[r] = s;
        }
        std::vector<double> y = dense_solve(S, rhs);
        std::vector<double> out(n + q);
        for (int i = 0; i < n; ++i) {
            double s = w[i];
            for (int c = 0; c < q; ++c) s -= X[c][i] * y[c];
            out[i] = s;
        }
        for (int c = 0; c < q; ++c) out[n + c] = y[c];
        return out;
    }
};

} // namespace mems
