#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "mgtn/random.hpp"
#include "mgtn/tensor.hpp"

namespace mgtn {

using Ranks = std::vector<std::size_t>;

inline std::string to_string_ranks(const Ranks &r) { return to_string(Shape(r)); }

/**
 * Tensor-Train representation of an order-N tensor: cores G_n of shape
 * (R_{n-1}, I_n, R_n) with R_0 = R_N = 1.
 */
struct TTVector {
    std::vector<Tensor> cores;

    std::size_t order() const { return cores.size(); }

    Ranks ranks() const {
        Ranks r;
        if (cores.empty()) return r;
        r.push_back(cores.front().dim(0));
        for (const auto &c : cores) r.push_back(c.dim(2));
        return r;
    }

    Shape mode_sizes() const {
        Shape s;
        for (const auto &c : cores) s.push_back(c.dim(1));
        return s;
    }

    void validate() const {
        if (cores.empty()) throw ShapeError("TT vector needs at least one core");
        for (std::size_t n = 0; n < cores.size(); ++n) {
            if (cores[n].order() != 3)
                throw ShapeError("TT core " + std::to_string(n + 1) + " must have order 3, got " +
                                 to_string(cores[n].shape()));
            if (n > 0 && cores[n].dim(0) != cores[n - 1].dim(2))
                throw ShapeError("TT rank mismatch between cores " + std::to_string(n) + " and " +
                                 std::to_string(n + 1));
        }
        if (cores.front().dim(0) != 1 || cores.back().dim(2) != 1)
            throw ShapeError("TT boundary ranks must be 1, got " + to_string_ranks(ranks()));
    }
};

struct TTSvdOptions {
    /// Rank caps (R_0..R_N); boundary entries must be 1.
    std::optional<Ranks> max_ranks;
    /// Relative accuracy delta in (0,1): each of the N-1 truncations discards
    /// at most delta * ||x||_F / sqrt(N-1) in Frobenius norm.
    std::optional<double> tolerance;
};

struct TTSvdResult {
    TTVector tt;
    /// Frobenius norm discarded at each of the N-1 truncation steps.
    std::vector<double> step_errors;
};

/// Left-to-right sequential SVD (TT-SVD). Without caps or tolerance the
/// decomposition is exact at full ranks.
inline TTSvdResult tt_svd_detailed(const Tensor &x, const TTSvdOptions &opts = {}) {
    const std::size_t n_modes = x.order();
    if (n_modes < 1) throw ShapeError("tt_svd needs a tensor of order >= 1");
    if (opts.max_ranks) {
        const Ranks &r = *opts.max_ranks;
        if (r.size() != n_modes + 1)
            throw ShapeError("rank tuple has " + std::to_string(r.size()) + " entries, expected " +
                             std::to_string(n_modes + 1));
        if (r.front() != 1 || r.back() != 1)
            throw ShapeError("rank tuple " + to_string_ranks(r) + " must start and end with 1");
        for (std::size_t v : r)
            if (v == 0) throw ShapeError("rank tuple entries must be positive");
    }
    if (opts.tolerance && !(*opts.tolerance > 0.0 && *opts.tolerance < 1.0))
        throw ShapeError("tt_svd tolerance must lie in (0,1)");

    const double budget =
        opts.tolerance ? *opts.tolerance * x.frobenius_norm() / std::sqrt(static_cast<double>(std::max<std::size_t>(n_modes - 1, 1))) : 0.0;

    TTSvdResult out;
    Eigen::MatrixXd rest = as_matrix(x, x.dim(0), x.size() / x.dim(0));
    std::size_t r_prev = 1;
    for (std::size_t k = 0; k + 1 < n_modes; ++k) {
        const std::size_t rows = r_prev * x.dim(k);
        const std::size_t cols = static_cast<std::size_t>(rest.size()) / rows;
        const Eigen::MatrixXd unfolding =
            Eigen::Map<const Eigen::MatrixXd>(rest.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        Eigen::BDCSVD<Eigen::MatrixXd> svd(unfolding, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd &sv = svd.singularValues();
        const std::size_t full = static_cast<std::size_t>(sv.size());

        std::size_t r = full;
        if (opts.tolerance) {
            // smallest r with tail energy <= budget^2
            double tail = 0.0;
            r = full;
            while (r > 1 && tail + sv(static_cast<Eigen::Index>(r - 1)) * sv(static_cast<Eigen::Index>(r - 1)) <=
                                budget * budget) {
                tail += sv(static_cast<Eigen::Index>(r - 1)) * sv(static_cast<Eigen::Index>(r - 1));
                --r;
            }
        }
        if (opts.max_ranks) r = std::min(r, (*opts.max_ranks)[k + 1]);
        r = std::max<std::size_t>(r, 1);

        double discarded = 0.0;
        for (std::size_t i = r; i < full; ++i) discarded += sv(static_cast<Eigen::Index>(i)) * sv(static_cast<Eigen::Index>(i));
        out.step_errors.push_back(std::sqrt(discarded));

        Tensor core({r_prev, x.dim(k), r});
        as_matrix(core, rows, r) = svd.matrixU().leftCols(static_cast<Eigen::Index>(r));
        out.tt.cores.push_back(std::move(core));

        rest = sv.head(static_cast<Eigen::Index>(r)).asDiagonal() *
               svd.matrixV().leftCols(static_cast<Eigen::Index>(r)).transpose();
        r_prev = r;
    }
    Tensor last({r_prev, x.dim(n_modes - 1), 1});
    as_matrix(last, r_prev, x.dim(n_modes - 1)) = rest;
    out.tt.cores.push_back(std::move(last));
    return out;
}

inline TTVector tt_svd(const Tensor &x, const TTSvdOptions &opts = {}) { return tt_svd_detailed(x, opts).tt; }

inline TTVector tt_svd(const Tensor &x, const Ranks &max_ranks) {
    return tt_svd(x, TTSvdOptions{max_ranks, std::nullopt});
}

inline TTVector tt_svd(const Tensor &x, double tolerance) {
    return tt_svd(x, TTSvdOptions{std::nullopt, tolerance});
}

/// Contracts the cores left to right over their shared rank modes.
inline Tensor tt_reconstruct(const TTVector &t) {
    t.validate();
    const Shape modes = t.mode_sizes();
    // acc is (I_1 ... I_k) x R_k, column-major.
    Eigen::MatrixXd acc = as_matrix(t.cores[0], modes[0], t.cores[0].dim(2));
    for (std::size_t n = 1; n < t.order(); ++n) {
        const Tensor &c = t.cores[n];
        const std::size_t r0 = c.dim(0), r1 = c.dim(2);
        Eigen::MatrixXd next = acc * as_matrix(c, r0, modes[n] * r1);
        // (prefix, I_n R_n) -> (prefix I_n, R_n) is a pure reshape in column-major order.
        acc = Eigen::Map<Eigen::MatrixXd>(next.data(), next.rows() * static_cast<Eigen::Index>(modes[n]),
                                          static_cast<Eigen::Index>(r1));
    }
    Tensor out(modes);
    std::copy(acc.data(), acc.data() + acc.size(), out.data().begin());
    return out;
}

inline std::size_t tt_param_count(const TTVector &t) {
    std::size_t n = 0;
    for (const auto &c : t.cores) n += c.size();
    return n;
}

// ---------------------------------------------------------------------------

/**
 * Tensor-Train matrix: a linear map R^{prod I_n} -> R^{prod J_n} whose cores
 * have shape (R_{n-1}, I_n, J_n, R_n). Input and output vectors are indexed
 * in Little-Endian order over (I_1..I_N) and (J_1..J_N).
 */
struct TTMatrix {
    std::vector<Tensor> cores;

    std::size_t order() const { return cores.size(); }

    Shape input_modes() const {
        Shape s;
        for (const auto &c : cores) s.push_back(c.dim(1));
        return s;
    }
    Shape output_modes() const {
        Shape s;
        for (const auto &c : cores) s.push_back(c.dim(2));
        return s;
    }
    std::size_t input_size() const { return shape_size(input_modes()); }
    std::size_t output_size() const { return shape_size(output_modes()); }

    Ranks ranks() const {
        Ranks r;
        if (cores.empty()) return r;
        r.push_back(cores.front().dim(0));
        for (const auto &c : cores) r.push_back(c.dim(3));
        return r;
    }

    void validate() const {
        if (cores.empty()) throw ShapeError("TT matrix needs at least one core");
        for (std::size_t n = 0; n < cores.size(); ++n) {
            if (cores[n].order() != 4)
                throw ShapeError("TT matrix core " + std::to_string(n + 1) + " must have order 4");
            if (n > 0 && cores[n].dim(0) != cores[n - 1].dim(3))
                throw ShapeError("TT matrix rank mismatch between cores " + std::to_string(n) + " and " +
                                 std::to_string(n + 1));
        }
        if (cores.front().dim(0) != 1 || cores.back().dim(3) != 1)
            throw ShapeError("TT matrix boundary ranks must be 1, got " + to_string_ranks(ranks()));
    }

    /// Zero-initialised cores for the given factorizations and ranks.
    static TTMatrix zeros(const Shape &in_modes, const Shape &out_modes, const Ranks &ranks) {
        if (in_modes.size() != out_modes.size() || ranks.size() != in_modes.size() + 1)
            throw ShapeError("TT matrix: " + std::to_string(in_modes.size()) + " input modes, " +
                             std::to_string(out_modes.size()) + " output modes and rank tuple " +
                             to_string_ranks(ranks) + " do not agree");
        if (ranks.front() != 1 || ranks.back() != 1)
            throw ShapeError("TT matrix rank tuple " + to_string_ranks(ranks) + " must start and end with 1");
        TTMatrix m;
        for (std::size_t n = 0; n < in_modes.size(); ++n)
            m.cores.emplace_back(Shape{ranks[n], in_modes[n], out_modes[n], ranks[n + 1]});
        return m;
    }

    /// Cores scaled so the reconstructed matrix has Glorot-uniform variance
    /// 2 / (fan_in + fan_out).
    static TTMatrix glorot(const Shape &in_modes, const Shape &out_modes, const Ranks &ranks, Rng &rng) {
        TTMatrix m = zeros(in_modes, out_modes, ranks);
        const double target = 2.0 / static_cast<double>(m.input_size() + m.output_size());
        double paths = 1.0;
        for (std::size_t n = 1; n + 1 < ranks.size(); ++n) paths *= static_cast<double>(ranks[n]);
        const double core_var = std::pow(target / paths, 1.0 / static_cast<double>(in_modes.size()));
        const double bound = std::sqrt(3.0 * core_var);
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto &c : m.cores)
            for (double &v : c.data()) v = dist(rng);
        return m;
    }
};

inline std::size_t tt_param_count(const TTMatrix &m) {
    std::size_t n = 0;
    for (const auto &c : m.cores) n += c.size();
    return n;
}

namespace detail {

/// One core step of the TT matrix-vector sweep. `state` has layout
/// (L, R_{k-1} * I_k, rest); the result has layout (L, J_k * R_k, rest).
inline Tensor tt_sweep_step(const Tensor &state, const Tensor &core, std::size_t left, std::size_t rest) {
    const std::size_t mid = core.dim(0) * core.dim(1);
    const std::size_t outw = core.dim(2) * core.dim(3);
    const auto c = as_matrix(core, mid, outw);
    Tensor next(Shape{left * outw * rest});
    if (left == 1) {
        as_matrix(next, outw, rest).noalias() = c.transpose() * as_matrix(state, mid, rest);
        return next;
    }
    for (std::size_t r = 0; r < rest; ++r) {
        ConstMatrixMap s(state.data().data() + r * left * mid, static_cast<Eigen::Index>(left),
                         static_cast<Eigen::Index>(mid));
        MatrixMap o(next.data().data() + r * left * outw, static_cast<Eigen::Index>(left),
                    static_cast<Eigen::Index>(outw));
        o.noalias() = s * c;
    }
    return next;
}

} // namespace detail

/**
 * Applies the TT matrix to a batch x of shape (prod I, B) (any shape whose
 * leading elements form the input vector and whose trailing size is B).
 * Returns (prod J, B). When `states` is given it receives the B-batched
 * intermediate sweep states, states[k] being the input to core k.
 */
inline Tensor tt_matrix_apply_batch(const TTMatrix &m, const Tensor &x, std::size_t batch,
                                    std::vector<Tensor> *states = nullptr) {
    m.validate();
    const Shape in = m.input_modes(), outm = m.output_modes();
    const std::size_t n_in = shape_size(in);
    if (x.size() != n_in * batch)
        throw ShapeError("TT matrix expects " + std::to_string(n_in) + " inputs per sample (modes " + to_string(in) +
                         "), got tensor " + to_string(x.shape()) + " with batch " + std::to_string(batch));
    Tensor state = x.reshaped({x.size()});
    std::size_t left = 1;
    std::size_t rest = n_in / in[0] * batch;
    if (states) states->clear();
    for (std::size_t k = 0; k < m.order(); ++k) {
        if (states) states->push_back(state);
        state = detail::tt_sweep_step(state, m.cores[k], left, rest);
        left *= outm[k];
        if (k + 1 < m.order()) rest /= in[k + 1];
    }
    return state.reshaped({m.output_size(), batch});
}

/// Gradients of the batched sweep: fills core_grads (same shapes as cores)
/// and returns d/dx with shape (prod I, B).
inline Tensor tt_matrix_backward_batch(const TTMatrix &m, const std::vector<Tensor> &states, const Tensor &grad_out,
                                       std::size_t batch, std::vector<Tensor> &core_grads) {
    const Shape in = m.input_modes(), outm = m.output_modes();
    const std::size_t n = m.order();
    core_grads.assign(n, Tensor());
    // left/rest for each step, recomputed forward.
    std::vector<std::size_t> lefts(n), rests(n);
    {
        std::size_t left = 1, rest = shape_size(in) / in[0] * batch;
        for (std::size_t k = 0; k < n; ++k) {
            lefts[k] = left;
            rests[k] = rest;
            left *= outm[k];
            if (k + 1 < n) rest /= in[k + 1];
        }
    }
    Tensor grad = grad_out.reshaped({grad_out.size()});
    for (std::size_t kk = n; kk-- > 0;) {
        const Tensor &core = m.cores[kk];
        const std::size_t mid = core.dim(0) * core.dim(1), outw = core.dim(2) * core.dim(3);
        const std::size_t left = lefts[kk], rest = rests[kk];
        const Tensor &s = states[kk];
        const auto c = as_matrix(core, mid, outw);
        Tensor gcore(core.shape());
        auto gc = as_matrix(gcore, mid, outw);
        Tensor gprev(Shape{left * mid * rest});
        if (left == 1) {
            const auto sm = as_matrix(s, mid, rest);
            const auto gm = as_matrix(grad, outw, rest);
            gc.noalias() = sm * gm.transpose();
            as_matrix(gprev, mid, rest).noalias() = c * gm;
        } else {
            for (std::size_t r = 0; r < rest; ++r) {
                ConstMatrixMap sm(s.data().data() + r * left * mid, static_cast<Eigen::Index>(left),
                                  static_cast<Eigen::Index>(mid));
                ConstMatrixMap gm(grad.data().data() + r * left * outw, static_cast<Eigen::Index>(left),
                                  static_cast<Eigen::Index>(outw));
                MatrixMap pm(gprev.data().data() + r * left * mid, static_cast<Eigen::Index>(left),
                             static_cast<Eigen::Index>(mid));
                gc.noalias() += sm.transpose() * gm;
                pm.noalias() = gm * c.transpose();
            }
        }
        core_grads[kk] = std::move(gcore);
        grad = std::move(gprev);
    }
    return grad.reshaped({shape_size(in), batch});
}

/// y = M x for x shaped like the input factorization (I_1..I_N);
/// returns a tensor shaped (J_1..J_N).
inline Tensor tt_matrix_apply(const TTMatrix &m, const Tensor &x) {
    m.validate();
    if (x.shape() != m.input_modes())
        throw ShapeError("tt_matrix_apply: input shape " + to_string(x.shape()) + " does not match factorization " +
                         to_string(m.input_modes()));
    return tt_matrix_apply_batch(m, x, 1).reshaped(m.output_modes());
}

/// Dense (prod J) x (prod I) matrix represented by the TT matrix.
inline Tensor tt_matrix_to_dense(const TTMatrix &m) {
    const std::size_t n_in = m.input_size();
    return tt_matrix_apply_batch(m, Tensor::identity(n_in), n_in);
}

/// Splits `units` into `parts` integer factors that are as equal as possible
/// (largest prime factors placed first into the smallest bucket); sorted
/// in descending order, e.g. 27 -> (3,3,3), 92 -> (23,2,2).
inline Shape factorize_near_equal(std::size_t units, std::size_t parts) {
    if (units == 0 || parts == 0) throw ShapeError("factorize_near_equal needs positive arguments");
    std::vector<std::size_t> primes;
    for (std::size_t u = units, p = 2; u > 1;) {
        if (p * p > u) {
            primes.push_back(u);
            break;
        }
        if (u % p == 0) {
            primes.push_back(p);
            u /= p;
        } else {
            ++p;
        }
    }
    std::sort(primes.rbegin(), primes.rend());
    Shape buckets(parts, 1);
    for (std::size_t p : primes) *std::min_element(buckets.begin(), buckets.end()) *= p;
    std::sort(buckets.rbegin(), buckets.rend());
    return buckets;
}

} // namespace mgtn
