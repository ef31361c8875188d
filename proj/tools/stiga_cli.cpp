#include "stiga/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kUsageError = 2;

int run_command(const std::string& config_path, const std::optional<int>& degree, const std::optional<int>& levels,
                const std::optional<double>& theta, const std::optional<std::string>& solver,
                const std::optional<std::string>& out, bool deterministic, bool quiet)
{
    stiga::CaseConfig cfg;
    try {
        cfg = stiga::load_config(config_path);
        if (degree) cfg.degree = *degree;
        if (levels) cfg.levels = *levels;
        if (theta) cfg.theta = *theta;
        if (solver) cfg.solver.method = *solver == "gmres" ? stiga::SolverMethod::gmres : stiga::SolverMethod::direct;
        if (out) cfg.output = *out;
        cfg.deterministic = cfg.deterministic || deterministic;
        cfg.threads = stiga::thread_count_from_env();
        stiga::validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "stiga: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        const auto report = stiga::run_case(cfg, quiet ? nullptr : &std::cerr);
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
        if (cfg.output.empty() || cfg.output == "-") {
            stiga::write_csv(report, std::cout, cfg.deterministic);
        } else {
            stiga::emit_csv(report, cfg.output, cfg.deterministic);
        }
    } catch (const std::exception& e) {
        std::cerr << "stiga: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int verify_command(std::uint64_t seed, bool inject)
{
    stiga::VerifyOptions opts;
    opts.seed = seed;
    opts.inject_theta_fault = inject;
    bool ok = true;
    try {
        for (const auto& r : stiga::run_verify(opts)) {
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
            ok = ok && r.passed;
        }
    } catch (const std::exception& e) {
        std::cerr << "stiga: verify aborted: " << e.what() << '\n';
        return 1;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Space-time isogeometric solver for the heat equation on fixed and moving domains"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a convergence study and write CSV");
    std::string config_path;
    std::optional<int> degree, levels;
    std::optional<double> theta;
    std::optional<std::string> solver, out;
    bool deterministic = false, quiet = false;
    run->add_option("--config", config_path, "JSON case configuration")->required()->check(CLI::ExistingFile);
    run->add_option("--degree", degree, "spline degree p")->check(CLI::Range(1, stiga::kMaxDegree));
    run->add_option("--levels", levels, "number of refinement levels")->check(CLI::PositiveNumber);
    run->add_option("--theta", theta, "stabilization parameter")->check(CLI::PositiveNumber);
    run->add_option("--solver", solver, "linear solver")->check(CLI::IsMember({"direct", "gmres"}));
    run->add_option("--out", out, "CSV output path ('-' for stdout)");
    run->add_flag("--deterministic", deterministic, "serial assembly and zero timings");
    run->add_flag("-q,--quiet", quiet, "no per-level progress on stderr");

    app.add_subcommand("list-cases", "print the built-in case ids");

    auto* verify = app.add_subcommand("verify", "run the built-in invariant suite");
    std::uint64_t seed = stiga::VerifyOptions{}.seed;
    bool inject = false;
    verify->add_option("--seed", seed, "random seed");
    verify->add_flag("--inject-theta-fault", inject, "perturb theta by 1% on one side of the coercivity identity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    if (*run) return run_command(config_path, degree, levels, theta, solver, out, deterministic, quiet);
    if (app.got_subcommand("list-cases")) {
        for (const auto& id : stiga::builtin_case_ids()) std::cout << id << '\n';
        return 0;
    }
    return verify_command(seed, inject);
}
