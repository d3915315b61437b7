#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace qdpair::fit {

struct FitResult {
    std::map<std::string, double> params;
    std::map<std::string, double> std_errors;
    double r_squared = 0.0;
    double reduced_chi2 = 0.0;
    double ssr = 0.0;
    int n_points = 0;
    int n_params = 0;
    bool converged = false;
    std::vector<std::string> flags;

    double at(const std::string& name) const { return params.at(name); }
    double error_of(const std::string& name) const { return std_errors.at(name); }
    bool has_flag(const std::string& f) const {
        for (const auto& s : flags)
            if (s == f) return true;
        return false;
    }
};

namespace detail {

struct ResidualFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic,
           ValuesAtCompileTime = Eigen::Dynamic };

    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;
    int n_in = 0, n_out = 0;

    int inputs() const { return n_in; }
    int values() const { return n_out; }
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
        fvec = fn(x);
        return 0;
    }
};

inline Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x) {
    const Eigen::VectorXd f0 = fn(x);
    Eigen::MatrixXd j(f0.size(), x.size());
    for (int k = 0; k < x.size(); ++k) {
        const double h = std::sqrt(1e-12) * std::max(std::abs(x(k)), 1e-8);
        Eigen::VectorXd xp = x;
        xp(k) += h;
        j.col(k) = (fn(xp) - f0) / h;
    }
    return j;
}

}  // namespace detail

/// Deterministic multi-start least squares: runs Levenberg-Marquardt from
/// every starting vector and keeps the lowest sum of squared residuals.
/// `residuals(params)` returns the (optionally weighted) residual vector.
struct LeastSquaresDriver {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> starts;
    int max_evaluations = 4000;

    FitResult run(const Eigen::VectorXd& data_for_r2) const {
        Eigen::VectorXd best_x;
        double best_ssr = std::numeric_limits<double>::infinity();
        bool any_ok = false;
        for (const auto& s : starts) {
            detail::ResidualFunctor f;
            f.fn = residuals;
            f.n_in = static_cast<int>(s.size());
            f.n_out = static_cast<int>(residuals(s).size());
            Eigen::NumericalDiff<detail::ResidualFunctor> nd(f);
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::ResidualFunctor>>
                lm(nd);
            lm.parameters.maxfev = max_evaluations;
            Eigen::VectorXd x = s;
            const auto status = lm.minimize(x);
            if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
                continue;
            const double ssr = residuals(x).squaredNorm();
            if (std::isfinite(ssr) && ssr < best_ssr) {
                best_ssr = ssr;
                best_x = x;
                any_ok = true;
            }
        }

        FitResult out;
        out.n_params = static_cast<int>(names.size());
        if (!any_ok) {
            out.converged = false;
            out.flags.push_back("non-convergent");
            return out;
        }

        const Eigen::VectorXd res = residuals(best_x);
        out.n_points = static_cast<int>(res.size());
        out.ssr = best_ssr;
        const int dof = std::max(out.n_points - out.n_params, 1);
        out.reduced_chi2 = best_ssr / dof;

        const double mean = data_for_r2.size() > 0 ? data_for_r2.mean() : 0.0;
        const double ss_tot =
            (data_for_r2.array() - mean).matrix().squaredNorm();
        out.r_squared = ss_tot > 0.0 ? 1.0 - best_ssr / ss_tot : 0.0;

        // parameter covariance from the Jacobian at the optimum
        const Eigen::MatrixXd j = detail::numeric_jacobian(residuals, best_x);
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::MatrixXd cov =
            jtj.completeOrthogonalDecomposition().pseudoInverse() *
            out.reduced_chi2;
        for (size_t k = 0; k < names.size(); ++k) {
            out.params[names[k]] = best_x(static_cast<int>(k));
            const double var = cov(static_cast<int>(k), static_cast<int>(k));
            out.std_errors[names[k]] = var > 0.0 ? std::sqrt(var) : 0.0;
        }
        out.converged = true;
        return out;
    }
};

/// Convenience for pointwise models y = m(params, x).
inline FitResult fit_pointwise(
    const Eigen::VectorXd& x, const Eigen::VectorXd& y,
    const std::function<double(const Eigen::VectorXd&, double)>& model,
    const std::vector<std::string>& names,
    const std::vector<Eigen::VectorXd>& starts) {
    LeastSquaresDriver d;
    d.names = names;
    d.starts = starts;
    d.residuals = [x, y, model](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(x.size());
        for (int k = 0; k < x.size(); ++k) r(k) = model(p, x(k)) - y(k);
        return r;
    };
    return d.run(y);
}

}  // namespace qdpair::fit
