#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mgtn/error.hpp"

namespace mgtn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape &shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string to_string(const Shape &shape) {
    std::string s = "(";
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(shape[k]);
    }
    return s + ")";
}

/**
 * Dense order-N array of doubles.
 *
 * Entries are stored in one contiguous buffer using the Little-Endian
 * convention: the first index varies fastest, so
 * linear(i_1..i_N) = i_1 + I_1 (i_2 + I_2 (i_3 + ...)) with 0-based i_k.
 * An order-2 tensor is therefore a column-major matrix and can be mapped
 * straight onto Eigen.
 *
 * Mode numbers taken by the free functions below (matricize, contract,
 * mode_product, ...) are 1-based; entry indices are 0-based.
 */
class Tensor {
public:
    /// Order-0 tensor holding 0.
    Tensor() : data_(1, 0.0) {}

    explicit Tensor(Shape shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
        check_modes();
    }

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_modes();
        if (data_.size() != shape_size(shape_))
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + to_string(shape_));
    }

    static Tensor scalar(double v) {
        Tensor t;
        t.data_[0] = v;
        return t;
    }

    /// Builds a matrix from a row-major literal, e.g. {{1,2},{3,4}}.
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        Tensor t({r, c});
        std::size_t i = 0;
        for (const auto &row : rows) {
            if (row.size() != c) throw ShapeError("ragged matrix literal");
            std::size_t j = 0;
            for (double v : row) t.data_[i + j++ * r] = v;
            ++i;
        }
        return t;
    }

    static Tensor vector(std::vector<double> v) {
        const std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }

    static Tensor identity(std::size_t n) {
        Tensor t({n, n});
        for (std::size_t i = 0; i < n; ++i) t.data_[i + i * n] = 1.0;
        return t;
    }

    std::size_t order() const { return shape_.size(); }
    const Shape &shape() const { return shape_; }
    /// Size of 0-based mode k.
    std::size_t dim(std::size_t k) const { return shape_.at(k); }
    std::size_t size() const { return data_.size(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double> &values() const { return data_; }

    double &operator[](std::size_t linear) { return data_[linear]; }
    double operator[](std::size_t linear) const { return data_[linear]; }

    std::size_t linear_index(std::span<const std::size_t> idx) const {
        if (idx.size() != shape_.size())
            throw ShapeError("index of order " + std::to_string(idx.size()) + " for tensor of order " +
                             std::to_string(shape_.size()));
        std::size_t lin = 0;
        std::size_t stride = 1;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] >= shape_[k]) throw ShapeError("index out of range on mode " + std::to_string(k + 1));
            lin += idx[k] * stride;
            stride *= shape_[k];
        }
        return lin;
    }

    Shape multi_index(std::size_t linear) const {
        Shape idx(shape_.size());
        for (std::size_t k = 0; k < shape_.size(); ++k) {
            idx[k] = linear % shape_[k];
            linear /= shape_[k];
        }
        return idx;
    }

    double &at(std::span<const std::size_t> idx) { return data_[linear_index(idx)]; }
    double at(std::span<const std::size_t> idx) const { return data_[linear_index(idx)]; }

    template <typename... I>
    double &operator()(I... i) {
        const std::size_t idx[] = {static_cast<std::size_t>(i)...};
        return at(idx);
    }
    template <typename... I>
    double operator()(I... i) const {
        const std::size_t idx[] = {static_cast<std::size_t>(i)...};
        return at(idx);
    }

    /// Same data, new shape with equal element count.
    Tensor reshaped(Shape shape) const {
        if (shape_size(shape) != data_.size())
            throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
        return Tensor(std::move(shape), data_);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    double sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    Tensor &operator+=(const Tensor &o) {
        require_same_shape(o, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Tensor &operator-=(const Tensor &o) {
        require_same_shape(o, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Tensor &operator*=(double s) {
        for (double &v : data_) v *= s;
        return *this;
    }
    /// this += s * o
    Tensor &add_scaled(const Tensor &o, double s) {
        require_same_shape(o, "add_scaled");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
        return *this;
    }

    friend Tensor operator+(Tensor a, const Tensor &b) { return a += b; }
    friend Tensor operator-(Tensor a, const Tensor &b) { return a -= b; }
    friend Tensor operator*(Tensor a, double s) { return a *= s; }
    friend Tensor operator*(double s, Tensor a) { return a *= s; }

    friend bool operator==(const Tensor &a, const Tensor &b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    void check_modes() const {
        for (std::size_t k = 0; k < shape_.size(); ++k)
            if (shape_[k] == 0) throw ShapeError("mode " + std::to_string(k + 1) + " has size 0");
    }
    void require_same_shape(const Tensor &o, const char *op) const {
        if (o.shape_ != shape_)
            throw ShapeError(std::string(op) + ": shape " + to_string(shape_) + " vs " + to_string(o.shape_));
    }

    Shape shape_;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Eigen bridges. Little-Endian order-2 storage is column-major.

using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

inline MatrixMap as_matrix(Tensor &t, std::size_t rows, std::size_t cols) {
    if (rows * cols != t.size()) throw ShapeError("matrix view size mismatch");
    return {t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
inline ConstMatrixMap as_matrix(const Tensor &t, std::size_t rows, std::size_t cols) {
    if (rows * cols != t.size()) throw ShapeError("matrix view size mismatch");
    return {t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
inline MatrixMap as_matrix(Tensor &t) {
    if (t.order() != 2) throw ShapeError("expected an order-2 tensor, got " + to_string(t.shape()));
    return as_matrix(t, t.dim(0), t.dim(1));
}
inline ConstMatrixMap as_matrix(const Tensor &t) {
    if (t.order() != 2) throw ShapeError("expected an order-2 tensor, got " + to_string(t.shape()));
    return as_matrix(t, t.dim(0), t.dim(1));
}

inline Tensor from_matrix(const Eigen::MatrixXd &m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    as_matrix(t) = m;
    return t;
}

// ---------------------------------------------------------------------------
// Elementary algebra

inline Tensor reshape(const Tensor &x, Shape shape) { return x.reshaped(std::move(shape)); }

inline Tensor matmul(const Tensor &a, const Tensor &b) {
    if (a.order() != 2 || b.order() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul of " + to_string(a.shape()) + " and " + to_string(b.shape()));
    Tensor c({a.dim(0), b.dim(1)});
    as_matrix(c).noalias() = as_matrix(a) * as_matrix(b);
    return c;
}

inline Tensor transpose(const Tensor &a) {
    if (a.order() != 2) throw ShapeError("transpose needs an order-2 tensor");
    Tensor t({a.dim(1), a.dim(0)});
    as_matrix(t) = as_matrix(a).transpose();
    return t;
}

inline Tensor hadamard(const Tensor &a, const Tensor &b) {
    if (a.shape() != b.shape()) throw ShapeError("hadamard shape mismatch");
    Tensor c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
    return c;
}

/// Frobenius inner product.
inline double dot(const Tensor &a, const Tensor &b) {
    if (a.size() != b.size()) throw ShapeError("dot size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double max_abs_diff(const Tensor &a, const Tensor &b) {
    if (a.shape() != b.shape())
        throw ShapeError("compare " + to_string(a.shape()) + " with " + to_string(b.shape()));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// ||a - b||_F / ||b||_F (absolute error when b is zero).
inline double relative_error(const Tensor &a, const Tensor &b) {
    const double ref = b.frobenius_norm();
    return (a - b).frobenius_norm() / (ref > 0.0 ? ref : 1.0);
}

/**
 * Left Kronecker product of two tensors of equal order.
 * c[i_n*J_n + j_n, ...] = a[i_1..] * b[j_1..] (0-based), i.e. the index of
 * b runs fastest inside each merged mode.
 */
inline Tensor kronecker(const Tensor &a, const Tensor &b) {
    if (a.order() != b.order())
        throw ShapeError("kronecker needs equal orders, got " + std::to_string(a.order()) + " and " +
                         std::to_string(b.order()));
    const std::size_t n = a.order();
    Shape shape(n);
    for (std::size_t k = 0; k < n; ++k) shape[k] = a.dim(k) * b.dim(k);
    Tensor c(shape);
    if (n == 0) {
        c[0] = a[0] * b[0];
        return c;
    }
    Shape ia(n, 0);
    for (std::size_t la = 0; la < a.size(); ++la) {
        const double av = a[la];
        Shape ib(n, 0);
        for (std::size_t lb = 0; lb < b.size(); ++lb) {
            std::size_t lin = 0, stride = 1;
            for (std::size_t k = 0; k < n; ++k) {
                lin += (ia[k] * b.dim(k) + ib[k]) * stride;
                stride *= shape[k];
            }
            c[lin] = av * b[lb];
            for (std::size_t k = 0; k < n && ++ib[k] == b.dim(k); ++k) ib[k] = 0;
        }
        for (std::size_t k = 0; k < n && ++ia[k] == a.dim(k); ++k) ia[k] = 0;
    }
    return c;
}

/// Reorders modes: result mode k is input mode perm[k] (0-based).
inline Tensor permute(const Tensor &x, const std::vector<std::size_t> &perm) {
    const std::size_t n = x.order();
    if (perm.size() != n) throw ShapeError("permutation length does not match tensor order");
    std::vector<bool> seen(n, false);
    bool identity = true;
    for (std::size_t k = 0; k < n; ++k) {
        if (perm[k] >= n || seen[perm[k]]) throw ShapeError("invalid mode permutation");
        seen[perm[k]] = true;
        identity = identity && perm[k] == k;
    }
    if (identity) return x;

    std::vector<std::size_t> in_stride(n);
    for (std::size_t k = 0, s = 1; k < n; ++k) {
        in_stride[k] = s;
        s *= x.dim(k);
    }
    Shape shape(n);
    std::vector<std::size_t> stride(n);
    for (std::size_t k = 0; k < n; ++k) {
        shape[k] = x.dim(perm[k]);
        stride[k] = in_stride[perm[k]];
    }
    Tensor y(shape);
    Shape idx(n, 0);
    std::size_t src = 0;
    const auto in = x.data();
    auto out = y.data();
    // Innermost mode handled as a strided run.
    const std::size_t run = shape[0], run_stride = stride[0];
    for (std::size_t dst = 0; dst < y.size(); dst += run) {
        for (std::size_t r = 0; r < run; ++r) out[dst + r] = in[src + r * run_stride];
        for (std::size_t k = 1; k < n; ++k) {
            src += stride[k];
            if (++idx[k] < shape[k]) break;
            src -= stride[k] * shape[k];
            idx[k] = 0;
        }
    }
    return y;
}

/// Mode-n matricization, n 1-based: rows index mode n, columns the remaining
/// modes in Little-Endian order.
inline Tensor matricize(const Tensor &x, std::size_t n) {
    if (n < 1 || n > x.order())
        throw ShapeError("matricize: mode " + std::to_string(n) + " out of range for order " +
                         std::to_string(x.order()));
    std::vector<std::size_t> perm;
    perm.push_back(n - 1);
    for (std::size_t k = 0; k < x.order(); ++k)
        if (k != n - 1) perm.push_back(k);
    const std::size_t rows = x.dim(n - 1);
    return permute(x, perm).reshaped({rows, x.size() / rows});
}

/// Inverse of matricize(., n) for a tensor of shape `target`.
inline Tensor tensorize(const Tensor &m, const Shape &target, std::size_t n) {
    if (n < 1 || n > target.size()) throw ShapeError("tensorize: mode out of range");
    if (m.size() != shape_size(target))
        throw ShapeError("tensorize: " + std::to_string(m.size()) + " elements cannot fill " + to_string(target));
    if (m.order() != 2 || m.dim(0) != target[n - 1])
        throw ShapeError("tensorize: matrix " + to_string(m.shape()) + " is not a mode-" + std::to_string(n) +
                         " unfolding of " + to_string(target));
    Shape permuted;
    permuted.push_back(target[n - 1]);
    for (std::size_t k = 0; k < target.size(); ++k)
        if (k != n - 1) permuted.push_back(target[k]);
    // permuted mode 0 is original mode n-1; original mode k<n-1 sits at k+1.
    std::vector<std::size_t> inverse(target.size());
    for (std::size_t k = 0; k < target.size(); ++k) inverse[k] = k < n - 1 ? k + 1 : (k == n - 1 ? 0 : k);
    return permute(m.reshaped(permuted), inverse);
}

/// Plain reshape of a matrix into `target` (Little-Endian), as used to fold
/// a (JI)x(JI) operator into a (J,I,J,I) tensor.
inline Tensor tensorize(const Tensor &m, const Shape &target) { return m.reshaped(target); }

/// Pairs of 1-based (mode of a, mode of b) contracted together.
struct ModeSpec {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    ModeSpec() = default;
    ModeSpec(std::initializer_list<std::pair<std::size_t, std::size_t>> p) : pairs(p) {}
    explicit ModeSpec(std::vector<std::pair<std::size_t, std::size_t>> p) : pairs(std::move(p)) {}
};

/**
 * General contraction over the mode pairs in `spec`.
 *
 * Output modes are the uncontracted modes of a (original order) followed by
 * the uncontracted modes of b (original order). For a single pair this is
 * the usual (m,n)-contraction; several pairs are summed simultaneously.
 * Computed as permute -> matrix product -> reshape.
 */
inline Tensor contract(const Tensor &a, const Tensor &b, const ModeSpec &spec) {
    std::vector<bool> used_a(a.order(), false), used_b(b.order(), false);
    std::vector<std::size_t> con_a, con_b;
    std::size_t k = 1;
    for (auto [ma, mb] : spec.pairs) {
        if (ma < 1 || ma > a.order() || mb < 1 || mb > b.order())
            throw ShapeError("contract: mode pair (" + std::to_string(ma) + "," + std::to_string(mb) +
                             ") out of range");
        if (used_a[ma - 1] || used_b[mb - 1])
            throw ShapeError("contract: mode appears twice in spec (" + std::to_string(ma) + "," +
                             std::to_string(mb) + ")");
        if (a.dim(ma - 1) != b.dim(mb - 1))
            throw ShapeError("contract: dimension mismatch on pair (" + std::to_string(ma) + "," +
                             std::to_string(mb) + "): " + std::to_string(a.dim(ma - 1)) + " vs " +
                             std::to_string(b.dim(mb - 1)));
        used_a[ma - 1] = used_b[mb - 1] = true;
        con_a.push_back(ma - 1);
        con_b.push_back(mb - 1);
        k *= a.dim(ma - 1);
    }
    std::vector<std::size_t> perm_a, perm_b;
    Shape out;
    for (std::size_t m = 0; m < a.order(); ++m)
        if (!used_a[m]) {
            perm_a.push_back(m);
            out.push_back(a.dim(m));
        }
    const std::size_t rows = shape_size(out);
    perm_a.insert(perm_a.end(), con_a.begin(), con_a.end());
    perm_b = con_b;
    for (std::size_t m = 0; m < b.order(); ++m)
        if (!used_b[m]) {
            perm_b.push_back(m);
            out.push_back(b.dim(m));
        }
    const std::size_t cols = b.size() / k;

    const Tensor pa = permute(a, perm_a);
    const Tensor pb = permute(b, perm_b);
    Tensor c(out);
    as_matrix(c, rows, cols).noalias() = as_matrix(pa, rows, k) * as_matrix(pb, k, cols);
    return c;
}

/**
 * Mode-n product keeping mode positions: mode n (1-based, size I) is
 * replaced by the rows of `m` (J x I),
 * y[.., j, ..] = sum_i m(j, i) x[.., i, ..].
 */
inline Tensor mode_product(const Tensor &x, const Tensor &m, std::size_t n) {
    if (n < 1 || n > x.order()) throw ShapeError("mode_product: mode " + std::to_string(n) + " out of range");
    if (m.order() != 2 || m.dim(1) != x.dim(n - 1))
        throw ShapeError("mode_product: matrix " + to_string(m.shape()) + " does not act on mode " +
                         std::to_string(n) + " of size " + std::to_string(x.dim(n - 1)));
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < n - 1; ++k) left *= x.dim(k);
    for (std::size_t k = n; k < x.order(); ++k) right *= x.dim(k);
    const std::size_t in = x.dim(n - 1), outd = m.dim(0);
    Shape shape = x.shape();
    shape[n - 1] = outd;
    Tensor y(shape);
    const auto mm = as_matrix(m);
    if (left == 1) {
        as_matrix(y, outd, right).noalias() = mm * as_matrix(x, in, right);
        return y;
    }
    const auto in_data = x.data();
    auto out_data = y.data();
    for (std::size_t r = 0; r < right; ++r) {
        ConstMatrixMap xs(in_data.data() + r * left * in, static_cast<Eigen::Index>(left),
                          static_cast<Eigen::Index>(in));
        MatrixMap ys(out_data.data() + r * left * outd, static_cast<Eigen::Index>(left),
                     static_cast<Eigen::Index>(outd));
        ys.noalias() = xs * mm.transpose();
    }
    return y;
}

/// Gram-type contraction over every mode except n: returns a (I_n x K_n)
/// matrix with entries sum over other indices a[.., i, ..] * b[.., k, ..].
/// This is matricize(a, n) * matricize(b, n)^T without materialising either.
inline Tensor mode_gram(const Tensor &a, const Tensor &b, std::size_t n) {
    if (a.order() != b.order() || n < 1 || n > a.order()) throw ShapeError("mode_gram: order mismatch");
    for (std::size_t k = 0; k < a.order(); ++k)
        if (k != n - 1 && a.dim(k) != b.dim(k)) throw ShapeError("mode_gram: shape mismatch");
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < n - 1; ++k) left *= a.dim(k);
    for (std::size_t k = n; k < a.order(); ++k) right *= a.dim(k);
    const std::size_t ia = a.dim(n - 1), ib = b.dim(n - 1);
    Tensor g({ia, ib});
    auto gm = as_matrix(g);
    if (left == 1) {
        gm.noalias() = as_matrix(a, ia, right) * as_matrix(b, ib, right).transpose();
        return g;
    }
    for (std::size_t r = 0; r < right; ++r) {
        ConstMatrixMap as(a.data().data() + r * left * ia, static_cast<Eigen::Index>(left),
                          static_cast<Eigen::Index>(ia));
        ConstMatrixMap bs(b.data().data() + r * left * ib, static_cast<Eigen::Index>(left),
                          static_cast<Eigen::Index>(ib));
        gm.noalias() += as.transpose() * bs;
    }
    return g;
}

} // namespace mgtn
