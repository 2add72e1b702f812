#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace circumnav {

// Dense row-major matrix for the ring-consensus analysis. Sizes here are the
// number of active robots (n <= a few dozen), so plain O(n^3) kernels are fine.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    Matrix operator*(const Matrix& o) const {
        Matrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double v = (*this)(i, k);
                if (v == 0.0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }

    Matrix operator+(const Matrix& o) const {
        Matrix r = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
        return r;
    }

    Matrix operator-(const Matrix& o) const {
        Matrix r = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
        return r;
    }

    Matrix operator*(double s) const {
        Matrix r = *this;
        for (double& v : r.a_) v *= s;
        return r;
    }

    Matrix transpose() const {
        Matrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    std::vector<double> operator*(const std::vector<double>& v) const {
        std::vector<double> r(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    /// Max absolute row sum.
    double inf_norm() const {
        double best = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            if (s > best) best = s;
        }
        return best;
    }

    double min_entry() const {
        double best = a_.empty() ? 0.0 : a_[0];
        for (double v : a_)
            if (v < best) best = v;
        return best;
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

/// Solve A x = b by Gaussian elimination with partial pivoting. A is copied.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0) throw std::runtime_error("solve: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

/// Solve A X = B column by column.
inline Matrix solve(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.rows();
    Matrix x(n, b.cols());
    std::vector<double> col(n);
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
        std::vector<double> sol = solve(a, col);
        for (std::size_t i = 0; i < n; ++i) x(i, j) = sol[i];
    }
    return x;
}

/// Matrix exponential by scaling and squaring with a [6/6] Pade approximant.
/// Plenty for the n <= 12 Laplacian/Metzler matrices this project certifies.
inline Matrix expm(const Matrix& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("expm: matrix must be square");

    int squarings = 0;
    double norm = m.inf_norm();
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    Matrix scaled = m * std::pow(0.5, squarings);

    // Pade [6/6]: c_0 = 1, c_{k} = c_{k-1} * (7-k) / ((13-k) k)
    double c = 1.0;
    Matrix numer = Matrix::identity(n);
    Matrix denom = Matrix::identity(n);
    Matrix power = Matrix::identity(n);
    for (int k = 1; k <= 6; ++k) {
        c *= static_cast<double>(7 - k) / static_cast<double>((13 - k) * k);
        power = power * scaled;
        numer = numer + power * c;
        denom = denom + power * (k % 2 == 0 ? c : -c);
    }

    Matrix result = solve(denom, numer);
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace circumnav
