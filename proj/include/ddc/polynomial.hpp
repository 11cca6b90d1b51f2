#pragma once

// Sparse multivariate polynomials over a fixed number of state variables.
//
// Polynomial<Scalar> stores a map from exponent vectors to non-zero
// coefficients. PolyVec and PolyMatrix are thin containers used for vector
// fields and their Jacobians. Everything here is a value type; operations
// return new objects.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ddc {

/// Highest total degree produced by monomial_basis or multiplication.
inline constexpr int kMaxPolynomialDegree = 8;

class Monomial {
public:
    Monomial() = default;
    explicit Monomial(std::vector<int> exponents) : exps_(std::move(exponents)) {
        for (int e : exps_) {
            if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
        }
    }
    static Monomial constant(int dim) { return Monomial(std::vector<int>(static_cast<std::size_t>(dim), 0)); }
    static Monomial variable(int dim, int index) {
        std::vector<int> e(static_cast<std::size_t>(dim), 0);
        e.at(static_cast<std::size_t>(index)) = 1;
        return Monomial(std::move(e));
    }

    int dim() const { return static_cast<int>(exps_.size()); }
    int degree() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }
    int operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& exponents() const { return exps_; }

    Monomial operator*(const Monomial& other) const {
        if (other.dim() != dim()) throw std::invalid_argument("Monomial: dimension mismatch");
        std::vector<int> e(exps_);
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exps_[i];
        return Monomial(std::move(e));
    }

    template <typename Derived>
    typename Derived::Scalar eval(const Eigen::MatrixBase<Derived>& x) const {
        using S = typename Derived::Scalar;
        S v(1);
        for (int i = 0; i < dim(); ++i) {
            for (int k = 0; k < exps_[static_cast<std::size_t>(i)]; ++k) v *= x(i);
        }
        return v;
    }

    // Graded order: lower total degree first; within a degree, larger leading
    // exponents first (x1^2, x1 x2, x2^2).
    friend bool operator<(const Monomial& a, const Monomial& b) {
        const int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return std::lexicographical_compare(b.exps_.begin(), b.exps_.end(), a.exps_.begin(), a.exps_.end());
    }
    friend bool operator==(const Monomial& a, const Monomial& b) { return a.exps_ == b.exps_; }

private:
    std::vector<int> exps_;
};

template <typename Scalar>
class Polynomial {
public:
    using Terms = std::map<Monomial, Scalar>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    explicit Polynomial(int dim = 1) : dim_(dim) {
        if (dim < 1) throw std::invalid_argument("Polynomial: dimension must be >= 1");
    }

    static Polynomial constant(int dim, Scalar c) {
        Polynomial p(dim);
        p.add_term(Monomial::constant(dim), c);
        return p;
    }
    static Polynomial variable(int dim, int index) {
        Polynomial p(dim);
        p.add_term(Monomial::variable(dim, index), Scalar(1));
        return p;
    }
    static Polynomial monomial(const Monomial& m, Scalar c = Scalar(1)) {
        Polynomial p(m.dim());
        p.add_term(m, c);
        return p;
    }

    int dim() const { return dim_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }
    Scalar coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Scalar(0) : it->second;
    }

    // Adds c * m, pruning the term if the sum is exactly zero.
    void add_term(const Monomial& m, Scalar c) {
        if (m.dim() != dim_) throw std::invalid_argument("Polynomial: monomial dimension mismatch");
        if (c == Scalar(0)) return;
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == Scalar(0)) terms_.erase(it);
        }
    }

    template <typename Derived>
    Scalar eval(const Eigen::MatrixBase<Derived>& x) const {
        if (x.size() != dim_) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
        Scalar v(0);
        for (const auto& [m, c] : terms_) v += c * m.eval(x);
        return v;
    }

    Polynomial derivative(int var) const {
        if (var < 0 || var >= dim_) throw std::out_of_range("Polynomial::derivative: variable index");
        Polynomial d(dim_);
        for (const auto& [m, c] : terms_) {
            const int e = m[var];
            if (e == 0) continue;
            std::vector<int> exps = m.exponents();
            exps[static_cast<std::size_t>(var)] -= 1;
            d.add_term(Monomial(std::move(exps)), c * Scalar(e));
        }
        return d;
    }

    Polynomial& operator+=(const Polynomial& o) {
        check_dim(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        check_dim(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Polynomial& operator*=(Scalar s) {
        if (s == Scalar(0)) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) { return a *= Scalar(-1); }
    friend Polynomial operator*(Polynomial a, Scalar s) { return a *= s; }
    friend Polynomial operator*(Scalar s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        a.check_dim(b);
        if (!a.is_zero() && !b.is_zero() && a.degree() + b.degree() > kMaxPolynomialDegree) {
            throw std::domain_error("Polynomial: product exceeds maximum supported degree");
        }
        Polynomial r(a.dim_);
        for (const auto& [ma, ca] : a.terms_) {
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
        }
        return r;
    }
    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return a.dim_ == b.dim_ && a.terms_ == b.terms_;
    }

private:
    void check_dim(const Polynomial& o) const {
        if (o.dim_ != dim_) throw std::invalid_argument("Polynomial: dimension mismatch");
    }

    int dim_;
    Terms terms_;
};

template <typename Scalar>
class PolyVec {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    PolyVec() = default;
    explicit PolyVec(std::vector<Polynomial<Scalar>> entries) : entries_(std::move(entries)) {
        if (entries_.empty()) throw std::invalid_argument("PolyVec: must have at least one entry");
        for (const auto& p : entries_) {
            if (p.dim() != entries_.front().dim()) throw std::invalid_argument("PolyVec: mixed dimensions");
        }
    }
    static PolyVec zero(int dim, int size) {
        return PolyVec(std::vector<Polynomial<Scalar>>(static_cast<std::size_t>(size), Polynomial<Scalar>(dim)));
    }
    // Linear field x -> A x.
    template <typename Derived>
    static PolyVec linear(const Eigen::MatrixBase<Derived>& A) {
        const int rows = static_cast<int>(A.rows()), cols = static_cast<int>(A.cols());
        std::vector<Polynomial<Scalar>> e;
        for (int i = 0; i < rows; ++i) {
            Polynomial<Scalar> p(cols);
            for (int j = 0; j < cols; ++j) p.add_term(Monomial::variable(cols, j), A(i, j));
            e.push_back(std::move(p));
        }
        return PolyVec(std::move(e));
    }

    int size() const { return static_cast<int>(entries_.size()); }
    int dim() const { return entries_.empty() ? 0 : entries_.front().dim(); }
    const Polynomial<Scalar>& operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
    Polynomial<Scalar>& operator[](int i) { return entries_[static_cast<std::size_t>(i)]; }
    const std::vector<Polynomial<Scalar>>& entries() const { return entries_; }
    int degree() const {
        int d = 0;
        for (const auto& p : entries_) d = std::max(d, p.degree());
        return d;
    }

    template <typename Derived>
    Vector eval(const Eigen::MatrixBase<Derived>& x) const {
        Vector v(size());
        for (int i = 0; i < size(); ++i) v(i) = entries_[static_cast<std::size_t>(i)].eval(x);
        return v;
    }

    friend PolyVec operator+(const PolyVec& a, const PolyVec& b) {
        if (a.size() != b.size()) throw std::invalid_argument("PolyVec: size mismatch");
        std::vector<Polynomial<Scalar>> e;
        for (int i = 0; i < a.size(); ++i) e.push_back(a[i] + b[i]);
        return PolyVec(std::move(e));
    }
    friend PolyVec operator*(Scalar s, const PolyVec& a) {
        std::vector<Polynomial<Scalar>> e;
        for (const auto& p : a.entries_) e.push_back(s * p);
        return PolyVec(std::move(e));
    }
    friend bool operator==(const PolyVec& a, const PolyVec& b) { return a.entries_ == b.entries_; }

private:
    std::vector<Polynomial<Scalar>> entries_;
};

template <typename Scalar>
class PolyMatrix {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    PolyMatrix(int rows, int cols, int dim)
        : rows_(rows), cols_(cols),
          entries_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Polynomial<Scalar>(dim)) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const Polynomial<Scalar>& operator()(int i, int j) const { return entries_[index(i, j)]; }
    Polynomial<Scalar>& operator()(int i, int j) { return entries_[index(i, j)]; }

    template <typename Derived>
    Matrix eval(const Eigen::MatrixBase<Derived>& x) const {
        Matrix m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).eval(x);
        return m;
    }

private:
    std::size_t index(int i, int j) const {
        if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw std::out_of_range("PolyMatrix index");
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j);
    }

    int rows_;
    int cols_;
    std::vector<Polynomial<Scalar>> entries_;
};

/// All monomials of total degree <= degree (1..degree without the constant),
/// in graded order.
template <typename Scalar = double>
PolyVec<Scalar> monomial_basis(int dim, int degree, bool include_constant = true) {
    if (dim < 1) throw std::invalid_argument("monomial_basis: dimension must be >= 1");
    if (degree < 0 || degree > kMaxPolynomialDegree) {
        throw std::invalid_argument("monomial_basis: degree out of supported range");
    }
    std::vector<Monomial> monos;
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    // Enumerate exponent vectors with a bounded odometer, then sort.
    while (true) {
        const int d = std::accumulate(e.begin(), e.end(), 0);
        if (d <= degree && (include_constant || d > 0)) monos.emplace_back(e);
        int i = 0;
        while (i < dim) {
            if (++e[static_cast<std::size_t>(i)] <= degree) break;
            e[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == dim) break;
    }
    std::sort(monos.begin(), monos.end());
    std::vector<Polynomial<Scalar>> entries;
    entries.reserve(monos.size());
    for (const auto& m : monos) entries.push_back(Polynomial<Scalar>::monomial(m));
    if (entries.empty()) throw std::invalid_argument("monomial_basis: empty basis");
    return PolyVec<Scalar>(std::move(entries));
}

template <typename Scalar>
PolyVec<Scalar> gradient(const Polynomial<Scalar>& p) {
    std::vector<Polynomial<Scalar>> g;
    for (int j = 0; j < p.dim(); ++j) g.push_back(p.derivative(j));
    return PolyVec<Scalar>(std::move(g));
}

template <typename Scalar>
PolyMatrix<Scalar> jacobian(const PolyVec<Scalar>& f) {
    PolyMatrix<Scalar> J(f.size(), f.dim(), f.dim());
    for (int i = 0; i < f.size(); ++i)
        for (int j = 0; j < f.dim(); ++j) J(i, j) = f[i].derivative(j);
    return J;
}

template <typename Scalar>
Polynomial<Scalar> divergence(const PolyVec<Scalar>& f) {
    if (f.size() != f.dim()) throw std::invalid_argument("divergence: field must be square");
    Polynomial<Scalar> d(f.dim());
    for (int i = 0; i < f.size(); ++i) d += f[i].derivative(i);
    return d;
}

template <typename Scalar>
Polynomial<Scalar> trace(const PolyMatrix<Scalar>& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("trace: matrix must be square");
    Polynomial<Scalar> t(m(0, 0).dim());
    for (int i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

/// Inner product sum_i a_i * b_i of two polynomial vectors.
template <typename Scalar>
Polynomial<Scalar> dot(const PolyVec<Scalar>& a, const PolyVec<Scalar>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    Polynomial<Scalar> r(a.dim());
    for (int i = 0; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}

/// theta^T b(x) for a k-by-n coefficient matrix theta and basis b of length k.
template <typename Scalar, typename Derived>
PolyVec<Scalar> combine(const Eigen::MatrixBase<Derived>& theta, const PolyVec<Scalar>& basis) {
    if (theta.rows() != basis.size()) throw std::invalid_argument("combine: theta rows must match basis length");
    std::vector<Polynomial<Scalar>> out;
    for (int j = 0; j < theta.cols(); ++j) {
        Polynomial<Scalar> p(basis.dim());
        for (int i = 0; i < basis.size(); ++i) {
            if (theta(i, j) != Scalar(0)) p += theta(i, j) * basis[i];
        }
        out.push_back(std::move(p));
    }
    return PolyVec<Scalar>(std::move(out));
}

/// Sum of squares of all variables, sum_i x_i^2.
template <typename Scalar = double>
Polynomial<Scalar> squared_norm(int dim) {
    Polynomial<Scalar> p(dim);
    for (int i = 0; i < dim; ++i) {
        std::vector<int> e(static_cast<std::size_t>(dim), 0);
        e[static_cast<std::size_t>(i)] = 2;
        p.add_term(Monomial(std::move(e)), Scalar(1));
    }
    return p;
}

using Poly = Polynomial<double>;
using PolyVecd = PolyVec<double>;
using PolyMatrixd = PolyMatrix<double>;

}  // namespace ddc
