#include "quant/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace quant {

void PrevalenceEstimate::validate(double tol) const {
    double total = 0.0;
    for (double v : values) {
        if (std::isnan(v) || v < -tol) throw DataError("prevalence estimate has a negative or NaN entry");
        total += v;
    }
    if (std::abs(total - 1.0) > tol) throw DataError("prevalence estimate does not sum to 1");
}

double clip_to_unit(double raw) {
    if (std::isnan(raw)) throw std::invalid_argument("clip_to_unit: NaN input");
    return std::min(std::max(raw, 0.0), 1.0);
}

PrevalenceEstimate project_to_simplex(std::vector<double> raw) {
    for (double v : raw)
        if (std::isnan(v)) throw std::invalid_argument("project_to_simplex: NaN entry");
    const std::size_t n = raw.size();
    std::vector<double> sorted(raw);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    std::size_t support = 0;
    for (std::size_t k = 0; k < n; ++k) {
        cumulative += sorted[k];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - candidate > 0.0) {
            tau = candidate;
            support = k + 1;
        }
    }
    (void)support;
    for (double& v : raw) v = std::max(v - tau, 0.0);
    return PrevalenceEstimate{std::move(raw)};
}

PrevalenceEstimate ovr_combine(const std::vector<double>& per_class_estimates) {
    const std::size_t n = per_class_estimates.size();
    double total = 0.0;
    for (double v : per_class_estimates) total += v;
    if (total <= 0.0)
        return PrevalenceEstimate{std::vector<double>(n, 1.0 / static_cast<double>(n))};
    std::vector<double> out(per_class_estimates);
    for (double& v : out) v /= total;
    return PrevalenceEstimate{std::move(out)};
}

namespace {

// projection step reused by the solvers; operates in place
void project_in_place(std::vector<double>& v) {
    auto p = project_to_simplex(v);
    v = std::move(p.values);
}

double quad_objective(const Matrix& q, const std::vector<double>& lin, const std::vector<double>& theta) {
    auto qt = mat_vec(q, theta);
    return dot(theta, qt) + dot(lin, theta);
}

// Dominant eigenvalue magnitude of a symmetric matrix by power iteration.
double spectral_bound(const Matrix& q) {
    const std::size_t n = q.rows();
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        auto w = mat_vec(q, v);
        double norm = std::sqrt(dot(w, w));
        if (norm < 1e-300) return 0.0;
        for (double& x : w) x /= norm;
        lambda = norm;
        v = std::move(w);
    }
    return lambda;
}

// Solves the equality-constrained stationarity system on a support S:
//   2 Q_SS theta_S + nu * 1 = -lin_S,  sum(theta_S) = 1
// Returns false on a (near-)singular system.
bool solve_support_kkt(const Matrix& q, const std::vector<double>& lin,
                       const std::vector<std::size_t>& support, std::vector<double>& theta_out) {
    const std::size_t m = support.size();
    const std::size_t dim = m + 1;
    std::vector<double> a(dim * dim, 0.0);
    std::vector<double> b(dim, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) a[i * dim + j] = 2.0 * q(support[i], support[j]);
        a[i * dim + m] = 1.0;
        b[i] = -lin[support[i]];
    }
    for (std::size_t j = 0; j < m; ++j) a[m * dim + j] = 1.0;
    b[m] = 1.0;

    // Gaussian elimination with partial pivoting
    std::vector<std::size_t> perm(dim);
    std::iota(perm.begin(), perm.end(), 0);
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a[perm[col] * dim + col]);
        for (std::size_t r = col + 1; r < dim; ++r) {
            const double v = std::abs(a[perm[r] * dim + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-12 * scale) return false;
        std::swap(perm[col], perm[pivot]);
        const double diag = a[perm[col] * dim + col];
        for (std::size_t r = col + 1; r < dim; ++r) {
            const double factor = a[perm[r] * dim + col] / diag;
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < dim; ++c) a[perm[r] * dim + c] -= factor * a[perm[col] * dim + c];
            b[perm[r]] -= factor * b[perm[col]];
        }
    }
    std::vector<double> x(dim, 0.0);
    for (std::size_t i = dim; i-- > 0;) {
        double acc = b[perm[i]];
        for (std::size_t c = i + 1; c < dim; ++c) acc -= a[perm[i] * dim + c] * x[c];
        x[i] = acc / a[perm[i] * dim + i];
    }
    theta_out.assign(q.rows(), 0.0);
    for (std::size_t i = 0; i < m; ++i) theta_out[support[i]] = x[i];
    return true;
}

bool feasible_clip(std::vector<double>& theta) {
    double total = 0.0;
    for (double& v : theta) {
        if (v < -1e-9) return false;
        v = std::max(v, 0.0);
        total += v;
    }
    if (total <= 0.0) return false;
    for (double& v : theta) v /= total;
    return true;
}

} // namespace

SimplexSolution minimize_quadratic_on_simplex(const Matrix& q, const std::vector<double>& lin,
                                              double tol, std::size_t max_iter) {
    const std::size_t n = lin.size();
    if (q.rows() != n || q.cols() != n)
        throw std::invalid_argument("minimize_quadratic_on_simplex: shape mismatch");
    for (double v : q.data())
        if (std::isnan(v)) throw DataError("simplex solver: NaN in quadratic term");
    for (double v : lin)
        if (std::isnan(v)) throw DataError("simplex solver: NaN in linear term");

    SimplexSolution out;
    out.theta.assign(n, 1.0 / static_cast<double>(n));
    if (n == 1) {
        out.theta[0] = 1.0;
        return out;
    }

    // Flat objective: identical design columns make Q and lin constant.
    double qmin = q(0, 0), qmax = q(0, 0);
    for (double v : q.data()) {
        qmin = std::min(qmin, v);
        qmax = std::max(qmax, v);
    }
    double lmin = lin[0], lmax = lin[0];
    for (double v : lin) {
        lmin = std::min(lmin, v);
        lmax = std::max(lmax, v);
    }
    const double qscale = std::max(std::abs(qmin), std::abs(qmax));
    const double lscale = std::max(std::abs(lmin), std::abs(lmax));
    if (qmax - qmin <= 1e-14 * (1.0 + qscale) && lmax - lmin <= 1e-14 * (1.0 + lscale)) {
        out.degenerate = true;
        return out;
    }

    const double lambda = spectral_bound(q);
    const double step = lambda > 1e-300 ? 1.0 / (2.0 * lambda) : 1.0 / (1.0 + lscale);

    std::vector<double> theta = out.theta;
    bool converged = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
        auto grad = mat_vec(q, theta);
        for (std::size_t j = 0; j < n; ++j) grad[j] = 2.0 * grad[j] + lin[j];
        std::vector<double> next(n);
        for (std::size_t j = 0; j < n; ++j) next[j] = theta[j] - step * grad[j];
        project_in_place(next);
        const double change = l1_distance(theta, next);
        theta = std::move(next);
        if (change < tol) {
            converged = true;
            break;
        }
    }

    double best_val = quad_objective(q, lin, theta);
    std::vector<double> best = theta;

    // Active-set polish: enumerate supports for small problems, otherwise try
    // the support identified by the projected gradient plus the full support.
    std::vector<std::vector<std::size_t>> supports;
    if (n <= 12) {
        for (std::size_t mask = 1; mask < (std::size_t(1) << n); ++mask) {
            std::vector<std::size_t> s;
            for (std::size_t j = 0; j < n; ++j)
                if (mask & (std::size_t(1) << j)) s.push_back(j);
            supports.push_back(std::move(s));
        }
    } else {
        std::vector<std::size_t> s;
        for (std::size_t j = 0; j < n; ++j)
            if (theta[j] > 1e-10) s.push_back(j);
        if (!s.empty()) supports.push_back(s);
        std::vector<std::size_t> full(n);
        std::iota(full.begin(), full.end(), 0);
        supports.push_back(std::move(full));
    }
    for (const auto& s : supports) {
        std::vector<double> cand;
        if (!solve_support_kkt(q, lin, s, cand)) continue;
        if (!feasible_clip(cand)) continue;
        const double val = quad_objective(q, lin, cand);
        if (val < best_val - 1e-15 * (1.0 + std::abs(best_val))) {
            best_val = val;
            best = cand;
            converged = true;
        }
    }

    out.theta = std::move(best);
    out.converged = converged;
    return out;
}

SimplexSolution solve_simplex_least_squares(const MatchSystem& system) {
    if (system.design.rows() != system.target.size())
        throw std::invalid_argument("solve_simplex_least_squares: design/target shape mismatch");
    for (double v : system.design.data())
        if (std::isnan(v)) throw DataError("solve_simplex_least_squares: NaN in design");
    for (double v : system.target)
        if (std::isnan(v)) throw DataError("solve_simplex_least_squares: NaN in target");
    const Matrix q = gram(system.design);
    auto atb = mat_tvec(system.design, system.target);
    std::vector<double> lin(atb.size());
    for (std::size_t j = 0; j < atb.size(); ++j) lin[j] = -2.0 * atb[j];
    return minimize_quadratic_on_simplex(q, lin);
}

double topsoe_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("topsoe_distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = p[i] + q[i];
        if (p[i] > 0.0) acc += p[i] * std::log(2.0 * p[i] / m);
        if (q[i] > 0.0) acc += q[i] * std::log(2.0 * q[i] / m);
    }
    return acc;
}

double hellinger_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("hellinger_distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

namespace {

double mixture_distance(double alpha, std::span<const double> hp, std::span<const double> hn,
                        std::span<const double> ht, MixDistance distance) {
    std::vector<double> mix(hp.size());
    for (std::size_t i = 0; i < hp.size(); ++i) mix[i] = alpha * hp[i] + (1.0 - alpha) * hn[i];
    switch (distance) {
        case MixDistance::Topsoe: return topsoe_distance(mix, ht);
        case MixDistance::L1: return l1_distance(mix, ht);
    }
    return 0.0;
}

} // namespace

double mixture_search_binary(std::span<const double> hist_pos, std::span<const double> hist_neg,
                             std::span<const double> hist_test, MixDistance distance) {
    if (hist_pos.size() != hist_neg.size() || hist_pos.size() != hist_test.size())
        throw std::invalid_argument("mixture_search_binary: histogram length mismatch");
    auto value = [&](double alpha) {
        return mixture_distance(alpha, hist_pos, hist_neg, hist_test, distance);
    };

    if (distance == MixDistance::Topsoe) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 64; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (value(m1) <= value(m2)) hi = m2;
            else lo = m1;
        }
        const double mid = (lo + hi) / 2.0;
        // keep the exact endpoints competitive
        double best = mid, best_val = value(mid);
        for (double cand : {0.0, 1.0}) {
            const double v = value(cand);
            if (v < best_val) {
                best_val = v;
                best = cand;
            }
        }
        return best;
    }

    // L1: exact scan over a 1001-point grid, refined once around the optimum
    double best = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
        const double alpha = static_cast<double>(i) / 1000.0;
        const double v = value(alpha);
        if (v < best_val) {
            best_val = v;
            best = alpha;
        }
    }
    const double lo = std::max(0.0, best - 1e-3);
    const double hi = std::min(1.0, best + 1e-3);
    for (int i = 0; i <= 1000; ++i) {
        const double alpha = lo + (hi - lo) * static_cast<double>(i) / 1000.0;
        const double v = value(alpha);
        if (v < best_val) {
            best_val = v;
            best = alpha;
        }
    }
    return best;
}

namespace {

double hellinger_objective(const HellingerSystem& sys, const std::vector<double>& theta) {
    double total = 0.0;
    for (std::size_t f = 0; f < sys.designs.size(); ++f) {
        auto mix = mat_vec(sys.designs[f], theta);
        for (double& v : mix) v = std::max(v, 0.0);
        total += hellinger_distance(mix, sys.targets[f]);
    }
    return total;
}

std::vector<double> hellinger_gradient(const HellingerSystem& sys, const std::vector<double>& theta) {
    const std::size_t n = theta.size();
    std::vector<double> grad(n, 0.0);
    for (std::size_t f = 0; f < sys.designs.size(); ++f) {
        const Matrix& a = sys.designs[f];
        const auto& t = sys.targets[f];
        auto mix = mat_vec(a, theta);
        double s = 0.0;
        std::vector<double> dm(mix.size(), 0.0);
        for (std::size_t i = 0; i < mix.size(); ++i) {
            const double m = std::max(mix[i], 1e-300);
            const double d = std::sqrt(m) - std::sqrt(t[i]);
            s += d * d;
            dm[i] = 1.0 - std::sqrt(t[i] / m);
        }
        const double h = std::sqrt(std::max(s, 1e-24));
        for (std::size_t i = 0; i < mix.size(); ++i) {
            const double w = dm[i] / (2.0 * h);
            for (std::size_t j = 0; j < n; ++j) grad[j] += w * a(i, j);
        }
    }
    return grad;
}

// enumerate the lattice {m / resolution : sum m = resolution} recursively
void lattice_scan(const HellingerSystem& sys, std::vector<double>& point, std::size_t index,
                  int remaining, int resolution, double& best_val, std::vector<double>& best) {
    const std::size_t n = point.size();
    if (index + 1 == n) {
        point[index] = static_cast<double>(remaining) / resolution;
        const double v = hellinger_objective(sys, point);
        if (v < best_val) {
            best_val = v;
            best = point;
        }
        return;
    }
    for (int m = 0; m <= remaining; ++m) {
        point[index] = static_cast<double>(m) / resolution;
        lattice_scan(sys, point, index + 1, remaining - m, resolution, best_val, best);
    }
}

} // namespace

SimplexSolution minimize_hellinger_mixture(const HellingerSystem& system, double tol) {
    if (system.designs.empty() || system.designs.size() != system.targets.size())
        throw std::invalid_argument("minimize_hellinger_mixture: empty or mismatched system");
    const std::size_t n = system.designs.front().cols();

    std::vector<std::vector<double>> starts;
    starts.emplace_back(n, 1.0 / static_cast<double>(n));

    // least-squares warm start on the stacked system
    std::size_t total_rows = 0;
    for (const auto& d : system.designs) total_rows += d.rows();
    MatchSystem stacked;
    stacked.design = Matrix(total_rows, n);
    stacked.target.resize(total_rows);
    std::size_t row = 0;
    for (std::size_t f = 0; f < system.designs.size(); ++f) {
        const Matrix& a = system.designs[f];
        for (std::size_t i = 0; i < a.rows(); ++i, ++row) {
            for (std::size_t j = 0; j < n; ++j) stacked.design(row, j) = a(i, j);
            stacked.target[row] = system.targets[f][i];
        }
    }
    starts.push_back(solve_simplex_least_squares(stacked).theta);

    if (n <= 3) {
        std::vector<double> lattice_best;
        double lattice_val = std::numeric_limits<double>::infinity();
        std::vector<double> point(n, 0.0);
        lattice_scan(system, point, 0, 100, 100, lattice_val, lattice_best);
        starts.push_back(std::move(lattice_best));
    }

    std::vector<double> best;
    double best_val = std::numeric_limits<double>::infinity();
    for (auto theta : starts) {
        double val = hellinger_objective(system, theta);
        for (int it = 0; it < 5000; ++it) {
            if (val < 1e-18) break;
            auto grad = hellinger_gradient(system, theta);
            double step = 1.0;
            bool moved = false;
            for (int h = 0; h < 40; ++h) {
                std::vector<double> cand(n);
                for (std::size_t j = 0; j < n; ++j) cand[j] = theta[j] - step * grad[j];
                project_in_place(cand);
                const double cv = hellinger_objective(system, cand);
                if (cv < val - 1e-15) {
                    const double change = l1_distance(theta, cand);
                    theta = std::move(cand);
                    val = cv;
                    moved = change >= tol * 1e-3;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (val < best_val) {
            best_val = val;
            best = std::move(theta);
        }
    }

    SimplexSolution out;
    out.theta = std::move(best);
    out.converged = true;
    return out;
}

} // namespace quant
