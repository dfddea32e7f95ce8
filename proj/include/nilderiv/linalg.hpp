#ifndef NILDERIV_LINALG_HPP
#define NILDERIV_LINALG_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nilderiv/error.hpp"
#include "nilderiv/galois_field.hpp"

namespace nilderiv {

// Exact dense linear algebra over any field-like scalar. Everything here is
// plain Gauss-Jordan elimination over the field itself: pivots only need
// to be nonzero, so there is no pivoting strategy and no tolerance.

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using FqMatrix = Matrix<Fq>;
using FqVector = Vector<Fq>;

template <class Scalar>
struct RowEchelon {
    Matrix<Scalar> reduced;
    std::vector<Eigen::Index> pivots;  // pivot column of each nonzero row

    Eigen::Index rank() const { return static_cast<Eigen::Index>(pivots.size()); }
};

template <class Scalar>
struct LinearSolution {
    Vector<Scalar> particular;
    Matrix<Scalar> nullspace;  // columns form a basis of {v : Av = 0}
};

template <class Derived>
bool is_zero(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (!(a(i, j) == Scalar(0))) return false;
    return true;
}

/// Reduced row echelon form. Only the first `limit_cols` columns are used as
/// pivot candidates (all of them by default), which is how augmented
/// systems keep their right-hand side out of the pivot search.
template <class Derived>
RowEchelon<typename Derived::Scalar> rref(const Eigen::MatrixBase<Derived>& a, Eigen::Index limit_cols = -1) {
    using Scalar = typename Derived::Scalar;
    RowEchelon<Scalar> out{a, {}};
    Matrix<Scalar>& r = out.reduced;
    const Eigen::Index rows = r.rows();
    const Eigen::Index cols = limit_cols < 0 ? r.cols() : limit_cols;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < cols && row < rows; ++col) {
        Eigen::Index pivot = row;
        while (pivot < rows && r(pivot, col) == Scalar(0)) ++pivot;
        if (pivot == rows) continue;
        if (pivot != row) r.row(pivot).swap(r.row(row));
        const Scalar inv = Scalar(1) / r(row, col);
        for (Eigen::Index j = col; j < r.cols(); ++j) r(row, j) = r(row, j) * inv;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (i == row) continue;
            const Scalar factor = r(i, col);
            if (factor == Scalar(0)) continue;
            for (Eigen::Index j = col; j < r.cols(); ++j) r(i, j) = r(i, j) - factor * r(row, j);
        }
        out.pivots.push_back(col);
        ++row;
    }
    return out;
}

template <class Derived>
Eigen::Index rank(const Eigen::MatrixBase<Derived>& a) {
    return rref(a).rank();
}

/// Basis of the right kernel, one vector per free column of the echelon form.
template <class Derived>
Matrix<typename Derived::Scalar> nullspace(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    const auto ech = rref(a);
    const Eigen::Index cols = a.cols();
    std::vector<bool> is_pivot(cols, false);
    for (auto c : ech.pivots) is_pivot[c] = true;
    Matrix<Scalar> basis(cols, cols - ech.rank());
    Eigen::Index k = 0;
    for (Eigen::Index f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        for (Eigen::Index i = 0; i < cols; ++i) basis(i, k) = Scalar(0);
        basis(f, k) = Scalar(1);
        for (Eigen::Index i = 0; i < ech.rank(); ++i) basis(ech.pivots[i], k) = -ech.reduced(i, f);
        ++k;
    }
    return basis;
}

/// Solves Ax = b. The particular solution has every free variable set to
/// zero, so its support lies on the leftmost independent columns of A.
template <class DerivedA, class DerivedB>
std::optional<LinearSolution<typename DerivedA::Scalar>> try_solve(const Eigen::MatrixBase<DerivedA>& a,
                                                                    const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (b.rows() != a.rows() || b.cols() != 1) throw Error(ErrorKind::BadInput, "solve: dimension mismatch");
    Matrix<Scalar> aug(a.rows(), a.cols() + 1);
    aug << a, b;
    const auto ech = rref(aug, a.cols());
    for (Eigen::Index i = ech.rank(); i < aug.rows(); ++i) {
        if (!(ech.reduced(i, a.cols()) == Scalar(0))) return std::nullopt;
    }
    LinearSolution<Scalar> out;
    out.particular = Vector<Scalar>::Constant(a.cols(), Scalar(0));
    for (Eigen::Index i = 0; i < ech.rank(); ++i) out.particular(ech.pivots[i]) = ech.reduced(i, a.cols());
    out.nullspace = nullspace(a);
    return out;
}

template <class DerivedA, class DerivedB>
LinearSolution<typename DerivedA::Scalar> solve(const Eigen::MatrixBase<DerivedA>& a,
                                                const Eigen::MatrixBase<DerivedB>& b) {
    auto sol = try_solve(a, b);
    if (!sol) throw Error(ErrorKind::NoSolution, "linear system is inconsistent");
    return std::move(*sol);
}

template <class Derived>
Matrix<typename Derived::Scalar> inverse(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    if (a.rows() != a.cols()) throw Error(ErrorKind::BadInput, "inverse of a non-square matrix");
    const Eigen::Index n = a.rows();
    Matrix<Scalar> aug(n, 2 * n);
    aug << a, Matrix<Scalar>::Identity(n, n);
    const auto ech = rref(aug, n);
    if (ech.rank() != n) throw Error(ErrorKind::NoSolution, "matrix is singular");
    return ech.reduced.rightCols(n);
}

template <class Derived>
Matrix<typename Derived::Scalar> matrix_power(const Eigen::MatrixBase<Derived>& a, std::uint64_t e) {
    using Scalar = typename Derived::Scalar;
    if (a.rows() != a.cols()) throw Error(ErrorKind::BadInput, "power of a non-square matrix");
    Matrix<Scalar> result = Matrix<Scalar>::Identity(a.rows(), a.cols());
    Matrix<Scalar> base = a;
    while (e) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

/// True iff the column spaces of `a` and `b` coincide.
template <class DerivedA, class DerivedB>
bool same_column_space(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.rows() != b.rows()) return false;
    Matrix<Scalar> both(a.rows(), a.cols() + b.cols());
    both << a, b;
    const auto r = rank(both);
    return rank(a) == r && rank(b) == r;
}

/// True iff every column of `sub` lies in the column space of `a`.
template <class DerivedA, class DerivedB>
bool contains_columns(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& sub) {
    using Scalar = typename DerivedA::Scalar;
    Matrix<Scalar> both(a.rows(), a.cols() + sub.cols());
    both << a, sub;
    return rank(both) == rank(a);
}

/// Binds every entry of an Fq matrix to `field` (turns Eigen's integer
/// literals into proper field elements).
FqMatrix bind(const FqMatrix& a, const GaloisField& field);

}  // namespace nilderiv

#endif  // NILDERIV_LINALG_HPP
