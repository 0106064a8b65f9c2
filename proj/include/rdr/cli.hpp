#pragma once

#include <CLI11.hpp>
#include <cstdlib>
#include <future>
#include <iostream>

#include "rdr/checks.hpp"

namespace rdr {

namespace cli {

inline std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv("RDR_OUT_DIR")) return env;
    return ".";
}

struct GenerateConfig {
    std::string kind;
    std::string output;
    Index n = 256, m = 64, k_true = 8, s = 10, dim = 2;
    std::uint64_t seed = 1;
    double noise_sigma = 0.0; // 0: off
    double fraction = 0.125;
    bool poisson = false;
    double theta_deg = 60.0;
    double offset = 1.0;
};

inline int run_generate(const GenerateConfig& cfg) {
    ProblemInstance inst = [&] {
        if (cfg.kind == "sparse-affine")
            return gen_sparse_affine(cfg.n, cfg.m, cfg.k_true, cfg.s, cfg.seed,
                                     cfg.noise_sigma > 0.0
                                         ? std::optional<double>(cfg.noise_sigma)
                                         : std::nullopt);
        if (cfg.kind == "sparse-fourier")
            return gen_sparse_fourier(cfg.n, cfg.fraction, cfg.k_true, cfg.s, cfg.seed,
                                      cfg.poisson);
        if (cfg.kind == "lines-at-angle")
            return gen_geometry(GeometryKind::LinesAtAngle,
                                cfg.theta_deg * std::numbers::pi / 180.0, cfg.dim);
        if (cfg.kind == "parallel-lines")
            return gen_geometry(GeometryKind::ParallelLines, cfg.offset, cfg.dim);
        if (cfg.kind == "orthogonal-axes")
            return gen_geometry(GeometryKind::OrthogonalAxes, 0.0, cfg.dim);
        throw InvalidParams("generate: unknown kind '" + cfg.kind + "'");
    }();
    save_instance(inst, cfg.output);
    std::cout << "wrote " << cfg.output << " (" << inst.name
              << ", n=" << inst.dim() << ", consistent=" << (inst.consistent ? "yes" : "no")
              << ")\n";
    return 0;
}

struct SolveConfig {
    std::string instance_path;
    std::string op_kind = "tlambda"; // tlambda | raar
    double lambda = 0.45;
    double beta = 0.65;
    double tol = 1e-10;
    long max_iter = 100000;
    int warmup = 10;
    std::uint64_t seed = 0; // x0 seed
    std::string out_dir = default_out_dir().string();
};

struct RunOutput {
    std::string op_name;
    IterationTrace trace;
    std::optional<double> fitted_rate;
    double final_gap = std::numeric_limits<double>::quiet_NaN();
};

inline OperatorSpec make_operator(const ProblemInstance& inst, const std::string& kind,
                                  double lambda, double beta) {
    if (kind == "tlambda") return OperatorSpec::t_lambda(inst.A, inst.B, lambda);
    if (kind == "raar") return OperatorSpec::raar(inst.A, inst.B, beta);
    throw InvalidParams("operator must be tlambda or raar");
}

inline RunOutput execute_run(const ProblemInstance& inst, const OperatorSpec& op,
                             const std::string& op_name, const Point& x0,
                             const StoppingRule& rule, int warmup) {
    Monitors mon;
    mon.dist_to_solution = solution_distance_oracle(inst);
    RunOutput out{op_name, run(op, x0, rule, mon, warmup), std::nullopt, 0.0};
    out.final_gap = out.trace.records.empty() || !out.trace.records.back().gap
                        ? std::numeric_limits<double>::quiet_NaN()
                        : *out.trace.records.back().gap;
    try {
        out.fitted_rate = estimate_rate(out.trace).factor;
    } catch (const InsufficientData&) {
    }
    return out;
}

inline json run_metadata(const ProblemInstance& inst, const std::string& instance_path,
                         const RunOutput& r, const json& op_params, const StoppingRule& rule,
                         int warmup, std::uint64_t seed) {
    return {{"schema", "v1"},
            {"instance_path", instance_path},
            {"instance_params", inst.params},
            {"operator", op_params},
            {"stopping", {{"tol", rule.tol}, {"max_iter", rule.max_iter}}},
            {"warmup", warmup},
            {"warmup_excluded_from_trace", true},
            {"x0_seed", seed},
            {"x0_distribution", "standard gaussian"},
            {"stop_reason", to_string(r.trace.stop_reason)},
            {"iterations", r.trace.iterations()},
            {"wall_seconds", r.trace.wall_seconds},
            {"final_change", r.trace.final_change()},
            {"final_gap", r.final_gap},
            {"fitted_rate", r.fitted_rate ? json(*r.fitted_rate) : json(nullptr)}};
}

inline Point initial_point(const ProblemInstance& inst, std::uint64_t seed) {
    return inst.complex_ambient() ? gaussian_cplx_point(inst.dim(), seed)
                                  : gaussian_point(inst.dim(), seed);
}

inline void write_run_files(const std::filesystem::path& out_dir, const std::string& stem,
                            const RunOutput& r, const json& meta) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    save_trace_csv(r.trace, out_dir / (stem + ".csv"));
    detail::write_atomic(out_dir / (stem + ".meta.json"), meta.dump(2) + "\n");
}

inline int run_solve(const SolveConfig& cfg) {
    ProblemInstance inst = load_instance(cfg.instance_path);
    auto op = make_operator(inst, cfg.op_kind, cfg.lambda, cfg.beta);
    StoppingRule rule{.tol = cfg.tol, .max_iter = cfg.max_iter};
    Point x0 = initial_point(inst, cfg.seed);
    RunOutput r = execute_run(inst, op, cfg.op_kind, x0, rule, cfg.warmup);

    json op_params = cfg.op_kind == "tlambda"
                         ? json{{"kind", "t_lambda"}, {"lambda", cfg.lambda}}
                         : json{{"kind", "raar"}, {"beta", cfg.beta}};
    const std::string stem =
        std::filesystem::path(cfg.instance_path).stem().string() + "_" + cfg.op_kind;
    write_run_files(cfg.out_dir, stem, r,
                    run_metadata(inst, cfg.instance_path, r, op_params, rule, cfg.warmup,
                                 cfg.seed));

    std::cout << "operator " << r.trace.operator_desc << '\n'
              << "stop_reason " << to_string(r.trace.stop_reason) << '\n'
              << "iterations " << r.trace.iterations() << '\n'
              << "final_change " << r.trace.final_change() << '\n'
              << "final_gap " << r.final_gap << '\n'
              << "fitted_rate "
              << (r.fitted_rate ? std::to_string(*r.fitted_rate) : std::string("n/a")) << '\n'
              << "trace " << (std::filesystem::path(cfg.out_dir) / (stem + ".csv")).string()
              << '\n';
    return 0;
}

struct CompareConfig {
    std::string instance_path;
    std::string profile = "consistent"; // sets default lambda/beta
    std::optional<double> lambda;
    std::optional<double> beta;
    double tol = 1e-10;
    long max_iter = 100000;
    int warmup = 10;
    std::uint64_t seed = 0;
    std::string out_dir = default_out_dir().string();
};

inline const char* kPlotStub = R"(#!/usr/bin/env python3
"""Plot the paired trace CSVs produced by `rdr compare`."""
import csv, sys
import matplotlib.pyplot as plt

def load(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    k = [int(r["k"]) for r in rows]
    change = [float(r["change"]) for r in rows]
    gap = [float(r["gap"]) for r in rows if r["gap"]]
    return k, change, gap

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for path in sys.argv[1:]:
    k, change, gap = load(path)
    axes[0].semilogy(k, change, label=path)
    axes[1].semilogy(range(1, len(gap) + 1), gap, label=path)
axes[0].set_xlabel("k"); axes[0].set_ylabel("iterate change")
axes[1].set_xlabel("k"); axes[1].set_ylabel("gap at shadow")
axes[0].legend(); axes[1].legend()
plt.tight_layout()
plt.savefig("compare.png", dpi=150)
print("wrote compare.png")
)";

inline int run_compare(const CompareConfig& cfg) {
    ProblemInstance inst = load_instance(cfg.instance_path);
    double lambda = 0.45, beta = 0.65;
    if (cfg.profile == "inconsistent") {
        lambda = 0.40;
        beta = 0.60;
    } else if (cfg.profile != "consistent") {
        throw InvalidParams("compare: profile must be consistent or inconsistent");
    }
    if (cfg.lambda) lambda = *cfg.lambda;
    if (cfg.beta) beta = *cfg.beta;

    StoppingRule rule{.tol = cfg.tol, .max_iter = cfg.max_iter};
    Point x0 = initial_point(inst, cfg.seed);

    auto tl = OperatorSpec::t_lambda(inst.A, inst.B, lambda);
    auto ra = OperatorSpec::raar(inst.A, inst.B, beta);
    auto fut_tl = std::async(std::launch::async, [&] {
        return execute_run(inst, tl, "tlambda", x0, rule, cfg.warmup);
    });
    auto fut_ra = std::async(std::launch::async, [&] {
        return execute_run(inst, ra, "raar", x0, rule, cfg.warmup);
    });
    RunOutput rt = fut_tl.get();
    RunOutput rr = fut_ra.get();

    namespace fs = std::filesystem;
    const std::string stem = fs::path(cfg.instance_path).stem().string();
    json meta_common = {{"lambda", lambda}, {"beta", beta}};
    write_run_files(cfg.out_dir, stem + "_tlambda", rt,
                    run_metadata(inst, cfg.instance_path, rt,
                                 {{"kind", "t_lambda"}, {"lambda", lambda}}, rule,
                                 cfg.warmup, cfg.seed));
    write_run_files(cfg.out_dir, stem + "_raar", rr,
                    run_metadata(inst, cfg.instance_path, rr,
                                 {{"kind", "raar"}, {"beta", beta}}, rule, cfg.warmup,
                                 cfg.seed));

    auto row = [](const RunOutput& r) {
        std::ostringstream os;
        os << r.op_name << ',' << r.trace.iterations() << ','
           << to_string(r.trace.stop_reason) << ',' << r.trace.wall_seconds << ','
           << r.trace.final_change() << ',' << r.final_gap << ','
           << (r.fitted_rate ? std::to_string(*r.fitted_rate) : std::string());
        return os.str();
    };
    std::string summary =
        "operator,iterations,stop_reason,wall_seconds,final_change,final_gap,fitted_rate\n" +
        row(rt) + "\n" + row(rr) + "\n";
    detail::write_atomic(fs::path(cfg.out_dir) / (stem + "_summary.csv"), summary);
    detail::write_atomic(fs::path(cfg.out_dir) / "plot_compare.py", kPlotStub);

    std::cout << "instance " << cfg.instance_path << " (consistent="
              << (inst.consistent ? "yes" : "no") << ")\n"
              << "t_lambda(lambda=" << lambda << ") vs raar(beta=" << beta << ")\n"
              << summary;
    return 0;
}

struct AnalyzeConfig {
    double theta = 0.5;
    double lambda = 1.0;
    double eps = 0.0;
    double alpha = 0.5;
    double delta = 1.0;
    std::string instance_path; // optional: measured section
    std::uint64_t seed = 0;
};

inline int run_analyze(const AnalyzeConfig& cfg) {
    auto report = ConstantsReport::compute(cfg.eps, cfg.alpha, cfg.lambda, cfg.theta,
                                           cfg.delta);
    std::cout << report.to_kv_text();

    if (!cfg.instance_path.empty()) {
        ProblemInstance inst = load_instance(cfg.instance_path);
        std::cout << "instance = " << inst.name << '\n';
        try {
            const double theta_bar = friedrichs_cosine(inst.A, inst.B);
            std::cout << "measured_theta = " << theta_bar << '\n';

            SetSpec inter = affine_intersection(inst.A, inst.B);
            Point center = project(inter, Point::zeros(inst.dim()));
            auto op = OperatorSpec::t_lambda(inst.A, inst.B, cfg.lambda);
            auto oracle = [&inter](const Point& x) { return distance(inter, x); };
            auto est = estimate_kappa(op, oracle, {center, 0.1}, 1000, cfg.seed);
            std::cout << "kappa_hat = " << est.kappa << '\n';

            Monitors mon;
            mon.dist_to_solution = oracle;
            auto trace = run(op, center + gaussian_point(inst.dim(), cfg.seed),
                             {.tol = 1e-12, .max_iter = 20000}, mon, 0);
            auto rate = estimate_rate_from_values(trace.solution_distances());
            std::cout << "fitted_rate = " << rate.factor << '\n';

            auto pred = predicted_rate(feasibility_profile(cfg.eps, cfg.lambda),
                                       kappa_from_theta(std::min(theta_bar, 1.0 - 1e-12),
                                                        cfg.lambda));
            std::cout << "predicted_rate_measured_theta = "
                      << (pred.rate ? std::to_string(*pred.rate) : std::string("invalid"))
                      << '\n';
        } catch (const NotAffine&) {
            std::cout << "measured_theta = not computed (nonconvex pair)\n";
        } catch (const DegenerateNormals&) {
            std::cout << "measured_theta = not computed (degenerate normals)\n";
        }
    }
    return 0;
}

inline int run_verify() {
    auto results = run_all_checks();
    bool ok = true;
    long passed = 0, failed = 0;
    for (const auto& r : results) {
        std::cout << (r.ok() ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.passed
                  << " passed, " << r.failed << " failed";
        if (!r.ok()) std::cout << " (" << r.detail << ")";
        std::cout << '\n';
        ok = ok && r.ok();
        passed += r.passed;
        failed += r.failed;
    }
    std::cout << "total: " << passed << " passed, " << failed << " failed\n";
    return ok ? 0 : 1;
}

} // namespace cli

/// Entry point shared by the binary and the CLI tests.
inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"relaxed Douglas-Rachford feasibility toolkit"};
    app.require_subcommand(1);

    cli::GenerateConfig gen_cfg;
    auto* gen = app.add_subcommand("generate", "write a problem instance file");
    gen->add_option("--kind", gen_cfg.kind,
                    "sparse-affine | sparse-fourier | lines-at-angle | parallel-lines | "
                    "orthogonal-axes")
        ->required();
    gen->add_option("-o,--output", gen_cfg.output, "instance file to write")->required();
    gen->add_option("--n", gen_cfg.n, "ambient dimension");
    gen->add_option("--m", gen_cfg.m, "rows of M (sparse-affine)");
    gen->add_option("--k", gen_cfg.k_true, "true sparsity of the planted signal");
    gen->add_option("--s", gen_cfg.s, "sparsity bound of the constraint set");
    gen->add_option("--seed", gen_cfg.seed, "generator seed");
    gen->add_option("--noise", gen_cfg.noise_sigma, "gaussian noise sigma on b (sparse-affine)");
    gen->add_option("--fraction", gen_cfg.fraction, "sampled fraction (sparse-fourier)");
    gen->add_flag("--poisson", gen_cfg.poisson, "poisson noise on measurements (sparse-fourier)");
    gen->add_option("--theta-deg", gen_cfg.theta_deg, "angle in degrees (lines-at-angle)");
    gen->add_option("--offset", gen_cfg.offset, "offset (parallel-lines)");
    gen->add_option("--dim", gen_cfg.dim, "ambient dimension of geometry instances");

    cli::SolveConfig solve_cfg;
    auto* solve = app.add_subcommand("solve", "run one operator and write the trace");
    solve->add_option("--instance", solve_cfg.instance_path, "instance file")->required();
    solve->add_option("--operator", solve_cfg.op_kind, "tlambda | raar");
    solve->add_option("--lambda", solve_cfg.lambda, "relaxation parameter of t_lambda");
    solve->add_option("--beta", solve_cfg.beta, "relaxation parameter of raar");
    solve->add_option("--tol", solve_cfg.tol, "stop when the change drops below this");
    solve->add_option("--max-iter", solve_cfg.max_iter, "iteration cap");
    solve->add_option("--warmup", solve_cfg.warmup, "DR warm-up iterations")
        ->check(CLI::Range(0, 100));
    solve->add_option("--seed", solve_cfg.seed, "seed of the random starting point");
    solve->add_option("--out-dir", solve_cfg.out_dir, "output directory");

    cli::CompareConfig cmp_cfg;
    auto* cmp = app.add_subcommand("compare", "run t_lambda and raar on the same start");
    cmp->add_option("--instance", cmp_cfg.instance_path, "instance file")->required();
    cmp->add_option("--profile", cmp_cfg.profile,
                    "consistent (lambda=.45, beta=.65) or inconsistent (.40/.60)");
    double cmp_lambda, cmp_beta;
    auto* lam_opt = cmp->add_option("--lambda", cmp_lambda, "override lambda");
    auto* beta_opt = cmp->add_option("--beta", cmp_beta, "override beta");
    cmp->add_option("--tol", cmp_cfg.tol, "stopping tolerance");
    cmp->add_option("--max-iter", cmp_cfg.max_iter, "iteration cap");
    cmp->add_option("--warmup", cmp_cfg.warmup, "DR warm-up iterations")
        ->check(CLI::Range(0, 100));
    cmp->add_option("--seed", cmp_cfg.seed, "seed of the random starting point");
    cmp->add_option("--out-dir", cmp_cfg.out_dir, "output directory");

    cli::AnalyzeConfig an_cfg;
    auto* an = app.add_subcommand("analyze", "print the derived convergence constants");
    an->add_option("--theta", an_cfg.theta, "transversality constant");
    an->add_option("--lambda", an_cfg.lambda, "relaxation parameter");
    an->add_option("--eps", an_cfg.eps, "regularity violation of the sets");
    an->add_option("--alpha", an_cfg.alpha, "averaging constant of the inputs");
    an->add_option("--delta", an_cfg.delta, "regularity radius");
    an->add_option("--instance", an_cfg.instance_path,
                   "also measure theta/kappa/rate on this instance");
    an->add_option("--seed", an_cfg.seed, "sampling seed for the measured section");

    auto* ver = app.add_subcommand("verify", "run the self-contained property suites");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cli::run_generate(gen_cfg);
        if (solve->parsed()) return cli::run_solve(solve_cfg);
        if (cmp->parsed()) {
            if (*lam_opt) cmp_cfg.lambda = cmp_lambda;
            if (*beta_opt) cmp_cfg.beta = cmp_beta;
            return cli::run_compare(cmp_cfg);
        }
        if (an->parsed()) return cli::run_analyze(an_cfg);
        if (ver->parsed()) return cli::run_verify();
    } catch (const FileError& e) {
        std::cerr << "file error: " << e.what() << '\n';
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 3;
    } catch (const VersionMismatch& e) {
        std::cerr << "version mismatch: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

} // namespace rdr
