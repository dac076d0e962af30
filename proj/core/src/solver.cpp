#include "gics/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "gics/error.hpp"
#include "gics/rng.hpp"

namespace gics {

namespace {

class Operator {
public:
    virtual ~Operator() = default;
    virtual Eigen::Index rows() const = 0;
    virtual Eigen::Index cols() const = 0;
    virtual const Eigen::VectorXd& y() const = 0;
    virtual Eigen::VectorXd adjoint(const Eigen::VectorXd& r) const = 0;
    virtual Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const = 0;
    virtual double weight(Eigen::Index k) const = 0;
    virtual bool nonneg(Eigen::Index k) const = 0;
};

class SystemOperator final : public Operator {
public:
    SystemOperator(const SensingSystem& s, const SolverConfig& c) : s_(s), c_(c), n_(s.n()) {}
    Eigen::Index rows() const override { return s_.rows(); }
    Eigen::Index cols() const override { return s_.cols(); }
    const Eigen::VectorXd& y() const override { return s_.y; }
    Eigen::VectorXd adjoint(const Eigen::VectorXd& r) const override { return s_.adjoint(r); }
    Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const override { return s_.columns(idx); }
    double weight(Eigen::Index k) const override {
        return (c_.hermitian_weights && s_.mode.full() && !diag(k)) ? 2.0 : 1.0;
    }
    bool nonneg(Eigen::Index k) const override { return c_.nonneg_diagonal && diag(k); }

private:
    bool diag(Eigen::Index k) const { return !s_.mode.full() || k / n_ == k % n_; }
    const SensingSystem& s_;
    const SolverConfig& c_;
    Eigen::Index n_;
};

class DenseOperator final : public Operator {
public:
    DenseOperator(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) : A_(A), y_(y) {
        if (A.rows() != y.size()) throw ShapeError("system matrix and y differ in row count");
    }
    Eigen::Index rows() const override { return A_.rows(); }
    Eigen::Index cols() const override { return A_.cols(); }
    const Eigen::VectorXd& y() const override { return y_; }
    Eigen::VectorXd adjoint(const Eigen::VectorXd& r) const override { return A_.transpose() * r; }
    Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const override {
        Eigen::MatrixXd out(A_.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = A_.col(idx[c]);
        return out;
    }
    double weight(Eigen::Index) const override { return 1.0; }
    bool nonneg(Eigen::Index) const override { return false; }

private:
    const Eigen::MatrixXd& A_;
    const Eigen::VectorXd& y_;
};

double lambda_max_of(const Operator& op) {
    const Eigen::VectorXd g = op.adjoint(op.y());
    double m = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double v = op.nonneg(k) ? std::max(g(k), 0.0) : std::abs(g(k));
        m = std::max(m, v / op.weight(k));
    }
    return m;
}

double spectral_norm2(const Eigen::MatrixXd& A) {
    if (A.cols() == 0) return 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.cols()) / std::sqrt(static_cast<double>(A.cols()));
    double est = 0.0;
    for (int it = 0; it < 30; ++it) {
        const Eigen::VectorXd w = A.transpose() * (A * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        est = nw;
        v = w / nw;
    }
    return est;
}

struct Subproblem {
    const Eigen::MatrixXd& A;
    const Eigen::VectorXd& y;
    Eigen::VectorXd thr;  // lambda * w
    std::vector<char> pos;

    double penalty(const Eigen::VectorXd& x) const { return thr.dot(x.cwiseAbs()); }
    Eigen::VectorXd prox(const Eigen::VectorXd& v, double L) const {
        Eigen::VectorXd p(v.size());
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            const double t = thr(k) / L;
            double s = v(k) > t ? v(k) - t : (v(k) < -t ? v(k) + t : 0.0);
            if (pos[static_cast<std::size_t>(k)] && s < 0.0) s = 0.0;
            p(k) = s;
        }
        return p;
    }
};

// Monotone FISTA (Beck & Teboulle) with backtracking and gradient restart.
// A*x is carried along with every iterate, so each step costs one product
// with A and one with A^T.
void mfista(const Subproblem& sp, Eigen::VectorXd& x, double& L, const SolverConfig& cfg, std::vector<double>& trace,
            int& iterations) {
    Eigen::VectorXd Ax = sp.A * x;
    Eigen::VectorXd z = x, Az = Ax;
    double Fx = 0.5 * (Ax - sp.y).squaredNorm() + sp.penalty(x);
    double t = 1.0;
    int rejected = 0;
    Eigen::VectorXd p, Ap, prev, Aprev;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const Eigen::VectorXd rz = Az - sp.y;
        const double fz = 0.5 * rz.squaredNorm();
        const Eigen::VectorXd gz = sp.A.transpose() * rz;
        double fp = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            p = sp.prox(z - gz / L, L);
            Ap.noalias() = sp.A * p;
            fp = 0.5 * (Ap - sp.y).squaredNorm();
            const Eigen::VectorXd d = p - z;
            if (fp <= fz + gz.dot(d) + 0.5 * L * d.squaredNorm() * (1.0 + 1e-12) + 1e-300) break;
            L *= 2.0;
        }
        const double Fp = fp + sp.penalty(p);
        if (!std::isfinite(Fp)) {
            trace.push_back(Fp);
            throw SolverFailure("objective became non-finite", trace);
        }
        ++iterations;
        const double step = (p - z).norm();
        if (Fp <= Fx) {
            prev.swap(x);
            Aprev.swap(Ax);
            x = p;
            Ax = Ap;
            Fx = Fp;
            rejected = 0;
            // Restart momentum when it points against the prox-gradient step.
            if ((z - x).dot(x - prev) > 0.0) {
                z = x;
                Az = Ax;
                t = 1.0;
            } else {
                const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                const double beta = (t - 1.0) / tn;
                z = x + beta * (x - prev);
                Az = Ax + beta * (Ax - Aprev);
                t = tn;
            }
        } else {
            z = x;
            Az = Ax;
            t = 1.0;
            if (++rejected >= 2) {
                trace.push_back(Fx);
                break;
            }
        }
        trace.push_back(Fx);
        if (step <= cfg.tol * std::max(x.norm(), 1e-300)) break;
    }
}

// With the sign pattern of x fixed, the subproblem restricted to the support
// is a plain quadratic. Its minimiser is taken when it keeps every sign;
// otherwise x moves toward it up to the first sign change, that coordinate is
// dropped and the solve repeats. Every accepted move lowers the objective.
void polish(const Subproblem& sp, Eigen::VectorXd& x, std::vector<double>& trace, int max_steps = 50) {
    auto F = [&](const Eigen::VectorXd& v) { return 0.5 * (sp.A * v - sp.y).squaredNorm() + sp.penalty(v); };
    double Fx = F(x);
    for (int step = 0; step < max_steps; ++step) {
        std::vector<Eigen::Index> S;
        for (Eigen::Index k = 0; k < x.size(); ++k)
            if (x(k) != 0.0) S.push_back(k);
        if (S.empty() || static_cast<Eigen::Index>(S.size()) > sp.A.rows()) return;
        const auto m = static_cast<Eigen::Index>(S.size());
        Eigen::MatrixXd As(sp.A.rows(), m);
        Eigen::VectorXd rhs(m), sgn(m), xs0(m);
        for (Eigen::Index c = 0; c < m; ++c) {
            const Eigen::Index k = S[static_cast<std::size_t>(c)];
            As.col(c) = sp.A.col(k);
            xs0(c) = x(k);
            sgn(c) = x(k) > 0.0 ? 1.0 : -1.0;
            rhs(c) = -sp.thr(k) * sgn(c);
        }
        rhs.noalias() += As.transpose() * sp.y;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(As.transpose() * As);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return;
        const Eigen::VectorXd xs = ldlt.solve(rhs);
        if (!xs.allFinite()) return;

        // First sign change along x -> xs.
        double alpha = 1.0;
        Eigen::Index hit = -1;
        for (Eigen::Index c = 0; c < m; ++c) {
            if (xs(c) * sgn(c) > 0.0) continue;
            const double a = xs0(c) / (xs0(c) - xs(c));
            if (a < alpha) {
                alpha = a;
                hit = c;
            }
        }
        Eigen::VectorXd cand = x;
        for (Eigen::Index c = 0; c < m; ++c) {
            const Eigen::Index k = S[static_cast<std::size_t>(c)];
            cand(k) = xs0(c) + alpha * (xs(c) - xs0(c));
            if (c == hit || cand(k) * sgn(c) <= 0.0) cand(k) = 0.0;
        }
        const double Fc = F(cand);
        if (!(Fc <= Fx)) return;
        x = cand;
        Fx = Fc;
        trace.push_back(Fx);
        if (hit < 0) return;
    }
}

SolveResult solve_impl(const Operator& op, const SolverConfig& cfg, Eigen::VectorXd x0) {
    cfg.validate();
    const Eigen::Index N = op.cols();
    if (op.rows() == 0 || N == 0) throw ShapeError("solve_l1: empty system");
    const double lam = cfg.lambda_reg;

    SolveResult res;
    res.lambda = lam;
    Eigen::VectorXd x = x0.size() == N ? x0 : Eigen::VectorXd::Zero(N);
    std::vector<Eigen::Index> ws;
    for (Eigen::Index k = 0; k < N; ++k)
        if (x(k) != 0.0) ws.push_back(k);

    Eigen::MatrixXd Aw = op.columns(ws);
    Eigen::VectorXd xw(static_cast<Eigen::Index>(ws.size()));
    for (std::size_t c = 0; c < ws.size(); ++c) xw(static_cast<Eigen::Index>(c)) = x(ws[c]);
    double L = 0.0;

    auto objective = [&](const Eigen::VectorXd& r) {
        double pen = 0.0;
        for (std::size_t c = 0; c < ws.size(); ++c)
            pen += lam * op.weight(ws[c]) * std::abs(xw(static_cast<Eigen::Index>(c)));
        return 0.5 * r.squaredNorm() + pen;
    };

    const double kkt_tol = std::max(10.0 * cfg.tol, 1e-12) * std::max(lam, 1e-300);
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
        const Eigen::VectorXd r = (ws.empty() ? Eigen::VectorXd(-op.y()) : Eigen::VectorXd(Aw * xw - op.y()));
        if (res.objective_trace.empty()) res.objective_trace.push_back(objective(r));
        const Eigen::VectorXd g = op.adjoint(r);

        std::vector<char> in_ws(static_cast<std::size_t>(N), 0);
        bool support_ok = true;
        for (std::size_t c = 0; c < ws.size(); ++c) {
            const Eigen::Index k = ws[c];
            in_ws[static_cast<std::size_t>(k)] = 1;
            const double xk = xw(static_cast<Eigen::Index>(c));
            const double sub = std::abs(g(k) + lam * op.weight(k) * (xk > 0.0 ? 1.0 : -1.0));
            if (sub > kkt_tol * op.weight(k)) support_ok = false;
        }
        std::vector<std::pair<double, Eigen::Index>> viol;
        for (Eigen::Index k = 0; k < N; ++k) {
            if (in_ws[static_cast<std::size_t>(k)]) continue;
            const double bound = lam * op.weight(k);
            const double v = (op.nonneg(k) ? -g(k) : std::abs(g(k))) - bound;
            if (v > kkt_tol * op.weight(k)) viol.emplace_back(v, k);
        }
        if (viol.empty() && support_ok) {
            res.converged = true;
            break;
        }
        const std::size_t take = std::min(viol.size(), std::max<std::size_t>(100, ws.size()));
        std::partial_sort(viol.begin(), viol.begin() + static_cast<std::ptrdiff_t>(take), viol.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
        std::vector<Eigen::Index> add;
        for (std::size_t c = 0; c < take; ++c) add.push_back(viol[c].second);
        std::sort(add.begin(), add.end());

        const Eigen::MatrixXd Anew = op.columns(add);
        Eigen::MatrixXd Aw2(op.rows(), Aw.cols() + Anew.cols());
        Aw2 << Aw, Anew;
        Aw = std::move(Aw2);
        Eigen::VectorXd xw2(xw.size() + static_cast<Eigen::Index>(add.size()));
        xw2 << xw, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(add.size()));
        xw = std::move(xw2);
        ws.insert(ws.end(), add.begin(), add.end());

        Subproblem sp{Aw, op.y(), Eigen::VectorXd(xw.size()), std::vector<char>(ws.size())};
        for (std::size_t c = 0; c < ws.size(); ++c) {
            sp.thr(static_cast<Eigen::Index>(c)) = lam * op.weight(ws[c]);
            sp.pos[c] = op.nonneg(ws[c]) ? 1 : 0;
        }
        L = std::max(L, 1.05 * spectral_norm2(Aw));
        if (L == 0.0) L = 1.0;
        mfista(sp, xw, L, cfg, res.objective_trace, res.iterations_used);
        polish(sp, xw, res.objective_trace);

        // Drop columns the subproblem set to zero.
        std::vector<Eigen::Index> keep_ws;
        std::vector<Eigen::Index> keep_col;
        for (std::size_t c = 0; c < ws.size(); ++c)
            if (xw(static_cast<Eigen::Index>(c)) != 0.0) {
                keep_ws.push_back(ws[c]);
                keep_col.push_back(static_cast<Eigen::Index>(c));
            }
        Eigen::MatrixXd Ak(op.rows(), static_cast<Eigen::Index>(keep_col.size()));
        Eigen::VectorXd xk(static_cast<Eigen::Index>(keep_col.size()));
        for (std::size_t c = 0; c < keep_col.size(); ++c) {
            Ak.col(static_cast<Eigen::Index>(c)) = Aw.col(keep_col[c]);
            xk(static_cast<Eigen::Index>(c)) = xw(keep_col[c]);
        }
        Aw = std::move(Ak);
        xw = std::move(xk);
        ws = std::move(keep_ws);
    }

    if (cfg.debias && !ws.empty()) {
        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Aw);
        xw = cod.solve(op.y());
    }

    res.x = Eigen::VectorXd::Zero(N);
    for (std::size_t c = 0; c < ws.size(); ++c) res.x(ws[c]) = xw(static_cast<Eigen::Index>(c));
    res.residual = ws.empty() ? op.y().norm() : (Aw * xw - op.y()).norm();
    return res;
}

std::vector<Eigen::Index> split_permutation(Eigen::Index rows, std::uint64_t seed) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(rows));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    return perm;
}

template <class MakeOp, class HeldOut>
LambdaSelection select_impl(Eigen::Index rows, const std::vector<double>& grid, const SolverConfig& cfg,
                            std::uint64_t seed, MakeOp make_train, HeldOut held_out) {
    if (grid.empty()) throw ConfigurationError("select_lambda: empty grid");
    for (double g : grid)
        if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigurationError("select_lambda: grid entries must be finite and non-negative");
    if (rows < 2) throw DataError("select_lambda: need at least 2 rows to hold some out");

    const std::vector<Eigen::Index> perm = split_permutation(rows, seed);
    Eigen::Index ntr = static_cast<Eigen::Index>(std::llround(0.8 * static_cast<double>(rows)));
    ntr = std::clamp<Eigen::Index>(ntr, 1, rows - 1);
    std::vector<Eigen::Index> train(perm.begin(), perm.begin() + ntr);
    std::vector<Eigen::Index> test(perm.begin() + ntr, perm.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    const double frac = static_cast<double>(ntr) / static_cast<double>(rows);

    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });

    LambdaSelection sel;
    sel.held_out.assign(grid.size(), std::numeric_limits<double>::infinity());
    auto train_op = make_train(train);
    Eigen::VectorXd warm;
    bool any = false;
    SolverFailure last("select_lambda: no solve attempted", {});
    for (std::size_t o : order) {
        SolverConfig c = cfg;
        c.lambda_reg = grid[o] * frac;
        c.debias = false;
        try {
            const SolveResult r = solve_impl(*train_op, c, warm);
            warm = r.x;
            sel.held_out[o] = held_out(test, r.x);
            any = true;
        } catch (const SolverFailure& e) {
            last = e;
        }
    }
    if (!any) throw last;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t o : order)
        if (sel.held_out[o] < best) {
            best = sel.held_out[o];
            sel.index = o;
        }
    sel.lambda = grid[sel.index];
    return sel;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(lambda_reg >= 0.0) || !std::isfinite(lambda_reg)) throw ConfigurationError("lambda_reg must be finite and >= 0");
    if (max_iters < 1) throw ConfigurationError("max_iters must be >= 1");
    if (!(tol > 0.0)) throw ConfigurationError("tol must be positive");
    if (max_outer < 1) throw ConfigurationError("max_outer must be >= 1");
}

SolveResult solve_l1(const SensingSystem& system, const SolverConfig& config) {
    return solve_impl(SystemOperator(system, config), config, {});
}

SolveResult solve_l1(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const SolverConfig& config) {
    return solve_impl(DenseOperator(A, y), config, {});
}

double lambda_max(const SensingSystem& system, const SolverConfig& config) {
    return lambda_max_of(SystemOperator(system, config));
}

double lambda_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) { return lambda_max_of(DenseOperator(A, y)); }

LambdaSelection select_lambda(const SensingSystem& system, const std::vector<double>& grid, const SolverConfig& config,
                              std::uint64_t split_seed) {
    SensingSystem train_sys;
    return select_impl(
        system.rows(), grid, config, split_seed,
        [&](const std::vector<Eigen::Index>& train) {
            train_sys = system.select_rows(train);
            return std::make_unique<SystemOperator>(train_sys, config);
        },
        [&](const std::vector<Eigen::Index>& test, const Eigen::VectorXd& x) {
            const SensingSystem t = system.select_rows(test);
            return (t.apply(x) - t.y).norm();
        });
}

LambdaSelection select_lambda(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const std::vector<double>& grid,
                              const SolverConfig& config, std::uint64_t split_seed) {
    Eigen::MatrixXd At;
    Eigen::VectorXd yt;
    return select_impl(
        A.rows(), grid, config, split_seed,
        [&](const std::vector<Eigen::Index>& train) {
            At = A(train, Eigen::all);
            yt = y(train);
            return std::make_unique<DenseOperator>(At, yt);
        },
        [&](const std::vector<Eigen::Index>& test, const Eigen::VectorXd& x) {
            return (A(test, Eigen::all) * x - y(test)).norm();
        });
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double threshold) {
    return v.unaryExpr([threshold](double a) { return a > threshold ? a - threshold : (a < -threshold ? a + threshold : 0.0); });
}

SpectrumEstimate extract_spectrum(const Eigen::VectorXd& x, const HermitianPacking& packing,
                                  DiagonalConvention convention, const Eigen::VectorXd& freq_axis) {
    const Eigen::Index n = packing.n();
    if (freq_axis.size() != n) throw ShapeError("frequency axis length does not match packing");
    Eigen::VectorXd diag(n);
    SpectrumEstimate s;
    if (x.size() == packing.size()) {
        for (Eigen::Index i = 0; i < n; ++i) diag(i) = x(packing.flat(i, i));
        s.hermitian = packing.unpack(x);
    } else if (x.size() == n) {
        diag = x;
    } else {
        throw ShapeError("solution length " + std::to_string(x.size()) + " is neither n nor n^2 for n=" +
                         std::to_string(n));
    }
    diag = diag.cwiseMax(0.0);
    s.freq = freq_axis;
    s.magnitude = unit_peak(convention == DiagonalConvention::ExactIntensity ? Eigen::VectorXd(diag.cwiseSqrt()) : diag);
    return s;
}

}  // namespace gics
