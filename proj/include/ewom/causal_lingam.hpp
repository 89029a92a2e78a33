#pragma once

// ICA-based LiNGAM estimation.
//
// Observed variables follow x = B x + e with B permutable to strictly lower
// triangular form and mutually independent non-Gaussian disturbances e, so
// x = A e with A = (I - B)^-1. ICA recovers W_ica = P D W where W = I - B, up
// to an unknown row permutation P and row scaling D. Since W has a unit, hence
// zero-free, diagonal, the right P is the one whose permuted W_ica has no
// (near-)zero diagonal entries; dividing each row by its diagonal removes D,
// and B = I - W. A causal order is any permutation that makes B lower
// triangular.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ewom/assignment.hpp"
#include "ewom/error.hpp"
#include "ewom/observation.hpp"
#include "ewom/random.hpp"

namespace ewom {

/// Variables in rows, observations in columns.
struct DataMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> names;
    Eigen::VectorXd means;
    bool centered = false;

    Eigen::Index variables() const noexcept { return X.rows(); }
    Eigen::Index samples() const noexcept { return X.cols(); }
};

enum class Nonlinearity { tanh, cube };

struct IcaConfig {
    double tol = 1e-4;
    int max_iter = 1000;
    Nonlinearity nonlinearity = Nonlinearity::tanh;
    std::uint64_t seed = 0;
    /// Halve the fixed-point step once half of max_iter has been used.
    bool stabilize = true;
};

struct UnmixingEstimate {
    Eigen::MatrixXd W_ica;      // unmixing in the coordinates of the centered data
    Eigen::MatrixXd whitening;  // K with cov(K x) = I
    Eigen::MatrixXd rotation;   // orthogonal part, W_ica = rotation * K
    int iterations = 0;
    double residual = 0.0;
};

struct PermutedUnmixing {
    Eigen::MatrixXd DW;
    std::vector<int> row_of;  // DW.row(i) == W_ica.row(row_of[i])
    double cost = 0.0;        // sum_i 1 / |DW(i, i)|
};

struct NormalizedUnmixing {
    Eigen::MatrixXd W;
    Eigen::VectorXd D_hat;
};

struct CausalOrder {
    std::vector<int> order;  // order[0] is the most exogenous variable
    double residual = 0.0;   // squared mass left above the diagonal
};

struct LingamConfig {
    IcaConfig ica;
    /// Entries of B with magnitude below this are zeroed after estimation; 0 disables.
    double prune_threshold = 0.0;
};

struct CausalModel {
    std::vector<std::string> names;
    Eigen::MatrixXd B;  // B(i, j): strength of x_j -> x_i
    Eigen::MatrixXd W;  // I - B before pruning, unit diagonal
    std::vector<int> order;
    std::vector<int> P_hat;
    Eigen::VectorXd D_hat;
    Eigen::VectorXd means;
    Eigen::MatrixXd e_residuals;  // (I - B) x on centered data
    int ica_iterations = 0;
    double ica_residual = 0.0;
    double permutation_cost = 0.0;
    double order_residual = 0.0;

    Eigen::Index index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<Eigen::Index>(i);
        return -1;
    }
};

enum class Direction { cause_to_target, target_to_cause, none };

struct TargetEffect {
    std::string variable;
    double strength = 0.0;
    Direction direction = Direction::none;
};

struct TargetEffects {
    std::string target;
    std::vector<TargetEffect> entries;
};

struct AssumptionReport {
    std::vector<std::string> names;
    std::vector<double> excess_kurtosis;
    double gaussian_band = 0.0;
    std::size_t samples = 0;
    bool gaussian_warning = false;
    bool low_confidence = false;
    bool confounders_testable = false;
};

// Exhaustive permutation search is used up to this many variables.
inline constexpr int kExhaustiveLimit = 8;
inline constexpr double kZeroDiagonal = 1e-12;

// ---------------------------------------------------------------------------

inline DataMatrix center(const Eigen::MatrixXd& raw, std::vector<std::string> names = {}) {
    const Eigen::Index d = raw.rows();
    if (raw.cols() == 0) throw ContractError("data has no observations");
    if (names.empty())
        for (Eigen::Index i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
    if (static_cast<Eigen::Index>(names.size()) != d) throw ContractError("variable name count does not match data");
    if (!raw.allFinite()) throw ContractError("data contains non-finite entries");
    DataMatrix dm;
    dm.means = raw.rowwise().mean();
    dm.X = raw.colwise() - dm.means;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double scale = std::max(1.0, raw.row(i).cwiseAbs().maxCoeff());
        if (dm.X.row(i).cwiseAbs().maxCoeff() <= 1e-12 * scale)
            throw ContractError("variable '" + names[static_cast<std::size_t>(i)] + "' has zero variance");
    }
    dm.names = std::move(names);
    dm.centered = true;
    return dm;
}

namespace detail {

/// (M M^T)^{-1/2} M
inline Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M * M.transpose());
    const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * M;
}

}  // namespace detail

/// Symmetric fixed-point FastICA on whitened data.
inline UnmixingEstimate fast_ica(const DataMatrix& data, const IcaConfig& cfg = {}) {
    if (!data.centered) throw ContractError("fast_ica expects centered data");
    const Eigen::Index d = data.variables(), n = data.samples();
    if (d < 2) throw ContractError("fast_ica needs at least 2 variables");
    if (n <= d)
        throw ContractError("need more observations than variables (n=" + std::to_string(n) +
                            ", d=" + std::to_string(d) + ")");
    if (!(cfg.tol > 0.0) || cfg.max_iter <= 0) throw ContractError("fast_ica needs tol > 0 and max_iter > 0");

    const Eigen::MatrixXd cov = data.X * data.X.transpose() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd& lambda = es.eigenvalues();
    if (!(lambda.minCoeff() > 1e-12 * lambda.maxCoeff()))
        throw NumericalError("data covariance has effective rank < " + std::to_string(d));
    UnmixingEstimate est;
    est.whitening = lambda.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    const Eigen::MatrixXd Z = est.whitening * data.X;

    rnd::Engine rng(cfg.seed);
    Eigen::MatrixXd W(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) W(i, j) = rnd::standard_normal(rng);
    W = detail::symmetric_decorrelation(W);

    const double inv_n = 1.0 / static_cast<double>(n);
    auto distance = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return ((a * b.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    };
    // Step size for the damped Newton update; 1 is the plain fixed-point step.
    double mu = 1.0;
    double lim = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < cfg.max_iter) {
        const Eigen::MatrixXd Y = W * Z;
        Eigen::MatrixXd G(d, n);
        Eigen::VectorXd dg(d);
        if (cfg.nonlinearity == Nonlinearity::tanh) {
            G = Y.array().tanh().matrix();
            dg = (1.0 - G.array().square()).matrix().rowwise().mean();
        } else {
            G = Y.array().cube().matrix();
            dg = (3.0 * Y.array().square()).matrix().rowwise().mean();
        }
        Eigen::MatrixXd W1;
        if (mu == 1.0) {
            W1 = G * Z.transpose() * inv_n - dg.asDiagonal() * W;
        } else {
            const Eigen::VectorXd beta = (Y.array() * G.array()).matrix().rowwise().mean();
            const Eigen::VectorXd step = (beta - dg).cwiseInverse();
            Eigen::MatrixXd M = G * Y.transpose() * inv_n;
            M.diagonal() -= beta;
            W1 = W + mu * step.asDiagonal() * M * W;
        }
        W1 = detail::symmetric_decorrelation(W1);
        lim = distance(W1, W);
        W = std::move(W1);
        ++it;
        if (!W.allFinite()) throw NumericalError("fast_ica diverged");
        if (lim < cfg.tol) break;
        if (cfg.stabilize && mu == 1.0 && it > cfg.max_iter / 2) mu = 0.5;
    }
    est.iterations = it;
    est.residual = lim;
    if (!(lim < cfg.tol)) throw ConvergenceError("fast_ica did not converge", it, lim);
    est.rotation = W;
    est.W_ica = W * est.whitening;
    return est;
}

namespace detail {

inline bool next_order(std::vector<int>& p) { return std::next_permutation(p.begin(), p.end()); }

}  // namespace detail

/// Row permutation of W_ica minimizing sum_i 1/|W(i,i)|.
inline PermutedUnmixing resolve_permutation(const Eigen::MatrixXd& W_ica) {
    const Eigen::Index d = W_ica.rows();
    if (W_ica.cols() != d || d == 0) throw ContractError("unmixing matrix must be square");
    const Eigen::MatrixXd mag = W_ica.cwiseAbs();
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<int> best;
    double best_cost = inf;
    if (d <= kExhaustiveLimit) {
        std::vector<int> p(static_cast<std::size_t>(d));
        std::iota(p.begin(), p.end(), 0);
        do {
            double c = 0.0;
            for (Eigen::Index i = 0; i < d && c < best_cost; ++i) {
                const double m = mag(p[static_cast<std::size_t>(i)], i);
                c = m < kZeroDiagonal ? inf : c + 1.0 / m;
            }
            if (c < best_cost) {
                best_cost = c;
                best = p;
            }
        } while (detail::next_order(p));
    } else {
        // cost(r, c): placing row r at diagonal position c
        Eigen::MatrixXd cost(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c) cost(r, c) = mag(r, c) < kZeroDiagonal ? 1e15 : 1.0 / mag(r, c);
        const auto col_of_row = min_cost_assignment(cost);
        best.assign(static_cast<std::size_t>(d), 0);
        best_cost = 0.0;
        for (Eigen::Index r = 0; r < d; ++r) {
            const int c = col_of_row[static_cast<std::size_t>(r)];
            best[static_cast<std::size_t>(c)] = static_cast<int>(r);
            best_cost = mag(r, c) < kZeroDiagonal ? inf : best_cost + 1.0 / mag(r, c);
        }
    }
    if (!std::isfinite(best_cost))
        throw NumericalError("every row permutation leaves a zero on the diagonal of the unmixing matrix");

    PermutedUnmixing out;
    out.DW.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) out.DW.row(i) = W_ica.row(best[static_cast<std::size_t>(i)]);
    out.row_of = std::move(best);
    out.cost = best_cost;
    return out;
}

/// Divides each row by its diagonal entry; the divisors are the recovered scaling.
inline NormalizedUnmixing normalize_diagonal(const Eigen::MatrixXd& DW) {
    const Eigen::Index d = DW.rows();
    if (DW.cols() != d) throw ContractError("matrix must be square");
    NormalizedUnmixing out;
    out.D_hat = DW.diagonal();
    out.W = DW;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double s = out.D_hat(i);
        if (s == 0.0 || !std::isfinite(s)) throw NumericalError("zero diagonal entry in row " + std::to_string(i));
        out.W.row(i) /= s;
        out.W(i, i) = 1.0;
    }
    return out;
}

inline Eigen::MatrixXd connection_matrix(const Eigen::MatrixXd& W) {
    Eigen::MatrixXd B = -W;
    B.diagonal().setZero();
    return B;
}

namespace detail {

inline double upper_mass(const Eigen::MatrixXd& B, const std::vector<int>& p, double stop_above) {
    double r = 0.0;
    const std::size_t d = p.size();
    for (std::size_t i = 0; i < d && r <= stop_above; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = B(p[i], p[j]);
            r += v * v;
        }
    return r;
}

}  // namespace detail

/// Permutation minimizing the squared mass of B above the diagonal after reordering.
/// Exhaustive up to kExhaustiveLimit variables, greedy beyond (not guaranteed optimal).
inline CausalOrder causal_order(const Eigen::MatrixXd& B) {
    const Eigen::Index d = B.rows();
    if (B.cols() != d) throw ContractError("connection matrix must be square");
    CausalOrder out;
    std::vector<int> p(static_cast<std::size_t>(d));
    std::iota(p.begin(), p.end(), 0);
    if (d <= kExhaustiveLimit) {
        double best = std::numeric_limits<double>::infinity();
        do {
            const double r = detail::upper_mass(B, p, best);
            if (r < best) {
                best = r;
                out.order = p;
                if (r == 0.0) break;
            }
        } while (detail::next_order(p));
        out.residual = best;
        return out;
    }
    // Greedy: repeatedly emit the variable with least incoming mass from the rest.
    std::vector<int> remaining = p;
    while (!remaining.empty()) {
        std::size_t pick = 0;
        double pick_mass = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < remaining.size(); ++a) {
            double m = 0.0;
            for (std::size_t b = 0; b < remaining.size(); ++b)
                if (a != b) m += B(remaining[a], remaining[b]) * B(remaining[a], remaining[b]);
            if (m < pick_mass) {
                pick_mass = m;
                pick = a;
            }
        }
        out.order.push_back(remaining[pick]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    out.residual = detail::upper_mass(B, out.order, std::numeric_limits<double>::infinity());
    return out;
}

inline CausalModel fit(const DataMatrix& data, const LingamConfig& cfg = {}) {
    const auto est = fast_ica(data, cfg.ica);
    const auto perm = resolve_permutation(est.W_ica);
    const auto norm = normalize_diagonal(perm.DW);

    CausalModel m;
    m.names = data.names;
    m.W = norm.W;
    m.B = connection_matrix(norm.W);
    if (cfg.prune_threshold > 0.0)
        m.B = m.B.unaryExpr([t = cfg.prune_threshold](double v) { return std::abs(v) < t ? 0.0 : v; });
    const auto ord = causal_order(m.B);
    m.order = ord.order;
    m.order_residual = ord.residual;
    m.P_hat = perm.row_of;
    m.D_hat = norm.D_hat;
    m.means = data.means;
    const Eigen::Index d = data.variables();
    m.e_residuals = (Eigen::MatrixXd::Identity(d, d) - m.B) * data.X;
    m.ica_iterations = est.iterations;
    m.ica_residual = est.residual;
    m.permutation_cost = perm.cost;
    return m;
}

/// Fits on an establishment table; each column is one variable.
inline CausalModel fit(const ObservationMatrix& obs, const LingamConfig& cfg = {}) {
    return fit(center(obs.values.transpose(), obs.columns), cfg);
}

/// Strength of each other variable on `target`, with the direction implied by the causal order.
/// No direction is asserted when both B(target, x) and B(x, target) are within `threshold` of 0.
inline TargetEffects target_effects(const CausalModel& model, const std::string& target, double threshold = 0.0) {
    const Eigen::Index t = model.index_of(target);
    if (t < 0) throw ContractError("unknown target variable '" + target + "'");
    std::vector<std::size_t> position(model.order.size());
    for (std::size_t k = 0; k < model.order.size(); ++k) position[static_cast<std::size_t>(model.order[k])] = k;

    TargetEffects out;
    out.target = target;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(model.names.size()); ++i) {
        if (i == t) continue;
        TargetEffect e;
        e.variable = model.names[static_cast<std::size_t>(i)];
        e.strength = model.B(t, i);
        if (std::abs(model.B(t, i)) > threshold || std::abs(model.B(i, t)) > threshold)
            e.direction = position[static_cast<std::size_t>(i)] < position[static_cast<std::size_t>(t)]
                              ? Direction::cause_to_target
                              : Direction::target_to_cause;
        out.entries.push_back(std::move(e));
    }
    return out;
}

inline std::string direction_label(const TargetEffect& e, const std::string& target) {
    switch (e.direction) {
        case Direction::cause_to_target: return e.variable + " -> " + target;
        case Direction::target_to_cause: return target + " -> " + e.variable;
        case Direction::none: break;
    }
    return "none";
}

// ---------------------------------------------------------------------------
// Assumption diagnostics

struct AssumptionConfig {
    /// Smallest half-width of the band around Gaussian excess kurtosis (0).
    double min_band = 0.1;
    /// The band widens to z standard errors of the sample excess kurtosis under normality, sqrt(24/n).
    double z = 3.0;
    std::size_t low_confidence_below = 20;
};

inline double excess_kurtosis(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    const double n = static_cast<double>(x.size());
    const Eigen::RowVectorXd c = x.array() - x.mean();
    const double m2 = c.array().square().sum() / n;
    const double m4 = c.array().square().square().sum() / n;
    return m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
}

/// Per-variable excess kurtosis; warns when every variable is indistinguishable from Gaussian.
/// The no-hidden-confounder assumption cannot be checked from the data and is reported as such.
inline AssumptionReport check_assumptions(const ObservationMatrix& obs, const AssumptionConfig& cfg = {}) {
    AssumptionReport r;
    r.names = obs.columns;
    r.samples = obs.rows();
    r.low_confidence = r.samples < cfg.low_confidence_below;
    r.gaussian_band =
        r.samples > 0 ? std::max(cfg.min_band, cfg.z * std::sqrt(24.0 / static_cast<double>(r.samples))) : cfg.min_band;
    bool all_gaussian = obs.values.cols() > 0 && r.samples > 0;
    for (Eigen::Index j = 0; j < obs.values.cols(); ++j) {
        const double k = r.samples > 0 ? excess_kurtosis(obs.values.col(j).transpose()) : 0.0;
        r.excess_kurtosis.push_back(k);
        if (std::abs(k) > r.gaussian_band) all_gaussian = false;
    }
    r.gaussian_warning = all_gaussian;
    return r;
}

inline std::string format_assumption_report(const AssumptionReport& r) {
    std::ostringstream os;
    os << "samples: " << r.samples << (r.low_confidence ? " (low confidence: fewer than 20)" : "") << '\n';
    os << "gaussian band: |excess kurtosis| <= " << r.gaussian_band << '\n';
    for (std::size_t i = 0; i < r.names.size(); ++i)
        os << "excess_kurtosis " << r.names[i] << ": " << r.excess_kurtosis[i] << '\n';
    if (r.gaussian_warning)
        os << "WARNING: all variables look Gaussian; causal directions are not identifiable\n";
    os << "unobserved confounders: not testable from observational data\n";
    return os.str();
}

}  // namespace ewom
