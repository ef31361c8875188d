#pragma once

#include "stiga/postproc.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stiga {

/// A geometry as read from a config file.
struct GeometrySpec {
    std::vector<std::vector<double>> knots;  // one knot vector per direction
    std::vector<int> degrees;                // one degree per direction
    Eigen::MatrixXd control_points;          // one column per control point
    std::optional<std::vector<double>> weights;
};

GeometryMap build_geometry(const GeometrySpec& spec);

/// Geometry, exact solution and bilinear form of one experiment.
struct CaseDefinition {
    std::string id;
    std::string description;
    GeometryMap geometry;
    ManufacturedCase solution;
    FormVariant variant;
};

/// u = prod_i sin(pi x_i) sin(pi t) with f = d_t u - Laplace_x u.
ManufacturedCase sine_product_case(int spatial_dim, bool homogeneous_boundary);

/// Ids of the built-in cases, in catalog order.
std::vector<std::string> builtin_case_ids();
/// Throws std::invalid_argument for unknown ids.
CaseDefinition builtin_case(const std::string& id);

enum class SolverMethod { automatic, direct, gmres };

struct SolverConfig {
    SolverMethod method = SolverMethod::automatic;
    double tol = 1e-10;
    int restart = 50;
    int max_iter = 5000;
    /// automatic switches to GMRES above this many free dofs.
    std::size_t direct_limit = 200000;
};

struct CaseConfig {
    std::string case_id = "fixed-1d";
    std::optional<GeometrySpec> geometry;  // required for "custom"
    std::optional<FormVariant> form;       // required for "custom"
    int degree = 1;
    int levels = 4;  // refinement levels 0 .. levels-1
    double theta = 0.1;
    int quad_order = 0;  // 0 selects p + 1 per direction
    SolverConfig solver;
    std::string output;
    bool deterministic = false;
    int threads = 1;
};

/// Parses the JSON config text; throws std::invalid_argument with a
/// diagnostic on malformed input.
CaseConfig parse_config(const std::string& text);
CaseConfig load_config(const std::filesystem::path& path);
void validate(const CaseConfig& config);

/// Resolves the case named by the config (built-in or custom).
CaseDefinition resolve_case(const CaseConfig& config);

/// Solution space of degree p on level `level`: the geometry breakpoints
/// with simple interior knots, refined uniformly `level` times.
DiscreteSpace solution_space(const GeometryMap& geom, int degree, int level);

/// Space, mesh and scheme parameters of one refinement level.
struct LevelSetup {
    DiscreteSpace space;
    PhysicalMesh mesh;
    SchemeParams params;
};

/// Builds level `level` of `def` at degree p. The inverse constant is
/// estimated on this level for moving cases.
LevelSetup setup_level(const CaseDefinition& def, int degree, int level, double theta, int quad_order = 0);

/// Runs the h-refinement study. Progress lines go to `log` when given.
ConvergenceReport run_case(const CaseConfig& config, std::ostream* log = nullptr);

inline constexpr const char* kCsvHeader =
    "level,dofs,h,error_l2,rate_l2,error_energy,rate_energy,solver,iters,residual,time_s";

/// CSV with kCsvHeader; `deterministic` writes time_s as 0.
void write_csv(const ConvergenceReport& report, std::ostream& out, bool deterministic);
void emit_csv(const ConvergenceReport& report, const std::filesystem::path& path, bool deterministic);

/// Reads the number of worker threads from STIGA_NUM_THREADS (default 1).
int thread_count_from_env();

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 20240611;
    /// Multiplies theta by 1.01 on the norm side of the coercivity identity.
    bool inject_theta_fault = false;
};

/// max over `samples` random free vectors of
/// |v^T K v - v^T N v - (theta h / 2) v^T G v| / v^T N v on a fixed-domain case,
/// with theta multiplied by `norm_theta_factor` on the norm side only.
double coercivity_identity_defect(const CaseDefinition& def, int degree, int level, int samples, std::uint64_t seed,
                                  double norm_theta_factor = 1.0);

/// Built-in invariant suite behind the `verify` subcommand.
std::vector<CheckResult> run_verify(const VerifyOptions& options = {});

}  // namespace stiga
