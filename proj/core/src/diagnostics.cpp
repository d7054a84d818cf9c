#include "foam/diagnostics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "foam/errors.hpp"
#include "foam/rng.hpp"

namespace foam {

std::string to_jsonl(const StepRecord& rec) {
    nlohmann::json j;
    j["schema"] = 1;
    j["step"] = rec.step;
    j["loss"] = rec.loss;
    j["grad_norm"] = rec.grad_norm;
    j["lr_t"] = rec.lr_t;
    j["delta_norm_ratio"] =
        rec.delta_norm_ratio ? nlohmann::json(*rec.delta_norm_ratio) : nlohmann::json();
    j["delta_energy_ratio"] =
        rec.delta_energy_ratio ? nlohmann::json(*rec.delta_energy_ratio) : nlohmann::json();
    j["cos_to_adam"] =
        rec.cos_to_adam ? nlohmann::json(*rec.cos_to_adam) : nlohmann::json();
    return j.dump();
}

ResidualRatios residual_ratios(const Matrix& g, const FoldSpec& spec) {
    const double g_norm = frobenius_norm(g);
    if (g_norm == 0.0) throw DomainError("residual_ratios: zero gradient");
    const double r_norm = frobenius_norm(residual(g, spec));
    ResidualRatios out;
    out.norm_ratio = r_norm / g_norm;
    out.energy_ratio = out.norm_ratio * out.norm_ratio;
    return out;
}

double power_iteration(const Matrix& a, int iters, std::uint64_t seed) {
    if (a.rows() != a.cols()) throw ShapeError("power_iteration: square matrix required");
    SplitMix64 rng(seed);
    Matrix x(a.rows(), 1);
    for (double& v : x.data()) v = rng.next_gaussian();
    double estimate = 0.0;
    for (int it = 0; it < iters; ++it) {
        Matrix y = dense_matmul(a, x);
        const double norm = frobenius_norm(y);
        if (norm == 0.0) return 0.0;
        estimate = norm / frobenius_norm(x);
        for (double& v : y.data()) v /= norm;
        x = std::move(y);
    }
    return estimate;
}

bool ProjectorReport::all_passed() const {
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

std::string ProjectorReport::describe() const {
    std::ostringstream os;
    os << "projector l=" << spec.level << " n=" << spec.input_cols << ":";
    for (const auto& c : checks) {
        os << "\n  [" << (c.passed ? "ok" : "FAIL") << "] " << c.name
           << " observed=" << c.observed << " expected=" << c.expected;
    }
    return os.str();
}

ProjectorReport verify_projector(const FoldSpec& spec, double tolerance) {
    ProjectorReport report;
    report.spec = spec;
    const Matrix p = projector(spec);
    const std::size_t n = spec.input_cols;

    auto push = [&](std::string name, double observed, double expected, double tol) {
        report.checks.push_back(
            {std::move(name), std::fabs(observed - expected) <= tol, observed, expected});
    };

    push("symmetry_max_abs", max_abs_diff(p, transpose(p)), 0.0, 0.0);
    push("idempotency_max_abs", max_abs_diff(dense_matmul(p, p), p), 0.0, tolerance);

    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += p(i, i);
    push("trace", trace, static_cast<double>(spec.folded_cols), tolerance);

    // independent dense eigensolve
    Eigen::MatrixXd pe(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) pe(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j)) = p(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(pe);
    const auto& eigenvalues = solver.eigenvalues();
    double worst_dist = 0.0;
    std::size_t unit_count = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const double lambda = eigenvalues(i);
        worst_dist = std::max(worst_dist,
                              std::min(std::fabs(lambda), std::fabs(lambda - 1.0)));
        if (lambda > 0.5) ++unit_count;
    }
    push("eigenvalues_dist_to_01", worst_dist, 0.0, tolerance);
    push("unit_eigenvalue_count", static_cast<double>(unit_count),
         static_cast<double>(spec.folded_cols), 0.0);

    push("spectral_radius_P", power_iteration(p), 1.0, tolerance);
    if (spec.level >= 1 && spec.folded_cols < n) {
        Matrix complement = scale_add(identity(n), 1.0, p, -1.0);
        push("spectral_radius_I_minus_P", power_iteration(complement), 1.0, tolerance);
    }
    return report;
}

bool PropsReport::all_passed() const {
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

namespace {

Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.next_gaussian();
    return m;
}

std::string format_obs(double observed, double bound) {
    std::ostringstream os;
    os << "observed " << observed << ", bound " << bound;
    return os.str();
}

}  // namespace

PropsReport run_property_suite(const PropsOptions& opts) {
    PropsReport report;
    SplitMix64 rng(opts.seed);

    // Projector algebra on the full level/width grid.
    for (int level : opts.levels) {
        for (std::size_t n : opts.widths) {
            const auto spec = FoldSpec::make(level, n);
            auto proj = verify_projector(spec, opts.projector_tolerance);
            std::ostringstream name;
            name << "projector l=" << level << " n=" << n;
            report.checks.push_back({name.str(), proj.all_passed(),
                                     proj.all_passed() ? "all checks ok" : proj.describe()});
        }
    }

    // Blocked kernels against the dense operators.
    {
        double worst_fold = 0.0, worst_unfold = 0.0;
        for (int trial = 0; trial < opts.oracle_trials; ++trial) {
            const std::size_t m = 1 + rng.next_below(opts.oracle_max_dim);
            const std::size_t n = 1 + rng.next_below(opts.oracle_max_dim);
            const int level = static_cast<int>(rng.next_below(4));
            const auto spec = FoldSpec::make(level, n);
            const Matrix g = random_matrix(rng, m, n);
            worst_fold = std::max(
                worst_fold,
                max_abs_diff(fold(g, spec), dense_matmul(g, build_dense_fold(spec))));
            const Matrix c = random_matrix(rng, m, spec.folded_cols);
            worst_unfold = std::max(
                worst_unfold,
                max_abs_diff(unfold(c, spec), dense_matmul(c, build_dense_unfold(spec))));
        }
        report.checks.push_back({"fold matches dense operator", worst_fold <= 1e-12,
                                 format_obs(worst_fold, 1e-12)});
        report.checks.push_back({"unfold matches dense operator", worst_unfold == 0.0,
                                 format_obs(worst_unfold, 0.0)});
    }

    // Orthogonal-split properties of the residual.
    {
        double worst_pyth = 0.0, worst_ortho = 0.0, worst_recon = 0.0;
        int bound_violations = 0;
        for (int draw = 0; draw < opts.split_draws; ++draw) {
            const std::size_t m = 1 + rng.next_below(16);
            const std::size_t n = 2 + rng.next_below(31);
            const int level = 1 + static_cast<int>(rng.next_below(3));
            const auto spec = FoldSpec::make(level, n);
            const Matrix g = random_matrix(rng, m, n);
            const Matrix coarse = unfold(fold(g, spec), spec);
            const Matrix res = residual(g, spec);

            const double g2 = dot(g, g);
            const double split = dot(coarse, coarse) + dot(res, res);
            worst_pyth = std::max(worst_pyth, std::fabs(split - g2) / g2);
            worst_ortho = std::max(worst_ortho, std::fabs(dot(res, coarse)) / g2);
            worst_recon = std::max(
                worst_recon,
                max_abs_diff(elementwise(coarse, res, BinaryOp::add), g));
            if (frobenius_norm(res) > frobenius_norm(g)) ++bound_violations;
        }
        report.checks.push_back({"energy split (Pythagoras)", worst_pyth <= 1e-9,
                                 format_obs(worst_pyth, 1e-9)});
        report.checks.push_back({"residual orthogonal to coarse part",
                                 worst_ortho <= 1e-9, format_obs(worst_ortho, 1e-9)});
        report.checks.push_back({"coarse + residual reconstructs input",
                                 worst_recon <= 1e-12, format_obs(worst_recon, 1e-12)});
        report.checks.push_back(
            {"residual norm bounded by gradient norm", bound_violations == 0,
             std::to_string(bound_violations) + " violations over " +
                 std::to_string(opts.split_draws) + " draws"});
    }

    // Residual-energy concentration for iid Gaussian matrices.
    for (int level : {1, 2, 3}) {
        const auto spec = FoldSpec::make(level, opts.mc_dim);
        double sum = 0.0;
        for (int s = 0; s < opts.mc_samples; ++s) {
            const Matrix g = random_matrix(rng, opts.mc_dim, opts.mc_dim);
            sum += residual_ratios(g, spec).energy_ratio;
        }
        const double mean = sum / opts.mc_samples;
        const double expected = 1.0 - 1.0 / static_cast<double>(std::size_t{1} << level);
        std::ostringstream name;
        name << "residual energy concentration l=" << level;
        std::ostringstream detail;
        detail << "mean " << mean << ", expected " << expected << " +- "
               << opts.mc_tolerance;
        report.checks.push_back(
            {name.str(), std::fabs(mean - expected) <= opts.mc_tolerance, detail.str()});
    }

    return report;
}

}  // namespace foam
