#pragma once

#include <array>
#include <optional>
#include <string>

#include "hexapod/core_math.hpp"
#include "hexapod/geometry.hpp"
#include "hexapod/kinematics.hpp"

namespace hexapod {

class TerrainModel;

using Vec7 = Eigen::Matrix<double, 7, 1>;

/// Optimizer variables (a, b, c, d, e, lambda1, lambda2) with
/// a = dz, b = sin(alpha), c = cos(beta), d = cos(alpha), e = sin(beta).
namespace comp {
enum Index { A = 0, B, C, D, E, L1, L2 };
}

struct CompensationSolution {
    double dz = 0.0;     ///< mm
    double alpha = 0.0;  ///< rotation about body y, rad
    double beta = 0.0;   ///< rotation about body x, rad
    int iterations = 0;
    bool converged = false;
    double cost = 0.0;  ///< mm^2
    Vec7 vars = (Vec7() << 0, 0, 1, 1, 0, 0, 0).finished();
};

struct CompensationParams {
    double weight = 1e-5;
    double tol = 0.01;
    int max_iters = 10000;
    /// Preconditioning of the height variable: its step is multiplied by height_scale^2.
    /// 1 reproduces the unscaled iteration, which barely moves dz in millimetre units.
    double height_scale = 100.0;
};

/// Shoulder points with terrain heights frozen for one gradient evaluation.
struct ShoulderSamples {
    std::array<Vec3, kLegCount> body{};  ///< (x_j, y_j, z_j) body frame
    std::array<double, kLegCount> heights{};
    double base_z = 0.0;  ///< z of the gait-only transform
    double start_z = 0.0;  ///< SP_z
};

/// Global shoulder positions after applying the trial reorientation on top of the gait transform.
std::array<Vec3, kLegCount> shoulder_points_global(const Transform4& gait, double dz, double alpha, double beta,
                                                   const RobotGeometry& geom);
std::array<Vec3, kLegCount> shoulder_points_global(const BodyChainState& state, double dz, double alpha, double beta,
                                                   const RobotGeometry& geom);

/// Same, but from raw optimizer variables (b, c, d, e need not be on the unit circle).
std::array<Vec3, kLegCount> shoulder_points_global(const Transform4& gait, const Vec7& vars,
                                                   const RobotGeometry& geom);

/// Samples the terrain under the trial footprints of `vars`.
ShoulderSamples sample_shoulders(const Transform4& gait, const Vec7& vars, const TerrainModel& terrain,
                                 const RobotGeometry& geom);

/// Per-point height error of the trial pose.
std::array<double, kLegCount> height_errors(const Vec7& vars, const ShoulderSamples& samples);

/// Quadratic height cost f (constraint terms excluded).
double height_cost(const Vec7& vars, const ShoulderSamples& samples);

/// Lagrangian L = f + lambda1 (c^2 + e^2 - 1) + lambda2 (b^2 + d^2 - 1).
double lagrangian(const Vec7& vars, const ShoulderSamples& samples);

/// Analytic gradient of the Lagrangian with the terrain samples held fixed.
Vec7 lagrangian_gradient(const Vec7& vars, const ShoulderSamples& samples);

/// Steepest descent with warm start. Never throws on non-convergence; the result is flagged.
CompensationSolution compensate(const BodyChainState& state, const TerrainModel& terrain, const RobotGeometry& geom,
                                const CompensationParams& params = {},
                                const std::optional<CompensationSolution>& warm_start = std::nullopt);
CompensationSolution compensate(const Transform4& gait, const TerrainModel& terrain, const RobotGeometry& geom,
                                const CompensationParams& params = {},
                                const std::optional<CompensationSolution>& warm_start = std::nullopt);

/// translation(0,0,dz) * rotation(Y, alpha) * rotation(X, beta). Throws on an unconverged solution.
Transform4 build_q_ter(const CompensationSolution& sol);

/// Height only, keeps the body horizontal.
Transform4 build_q_ter_horizontal(const CompensationSolution& sol);

enum class CompensationMode { Full, HorizontalBody, Off };

CompensationMode parse_compensation_mode(const std::string& name);
std::string to_string(CompensationMode mode);

/// Tick-by-tick driver: warm starts from the previous solve and falls back to the last
/// converged solution when a solve fails.
class TerrainCompensator {
public:
    TerrainCompensator(CompensationMode mode, CompensationParams params);

    /// Solves for the gait transform of this tick and returns Q_ter.
    Transform4 update(const Transform4& gait, const TerrainModel& terrain, const RobotGeometry& geom);

    CompensationMode mode() const { return mode_; }
    const std::optional<CompensationSolution>& last_solve() const { return last_solve_; }
    const CompensationSolution& active() const { return active_; }
    bool last_fell_back() const { return fell_back_; }

private:
    CompensationMode mode_;
    CompensationParams params_;
    CompensationSolution active_;
    std::optional<CompensationSolution> last_solve_;
    bool fell_back_ = false;
};

}  // namespace hexapod
