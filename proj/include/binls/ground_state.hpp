#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binls/model.hpp"
#include "binls/thresholds.hpp"

namespace binls {

enum class SolveStatus { Converged, Vanishing, MaxIters, UnboundedBelow };
const char* to_string(SolveStatus s);

struct SolveConfig {
    double step_init = 1.0;
    double armijo_c = 1e-4;
    double step_shrink = 0.5;
    double grad_tol = 1e-6;
    int max_iters = 20000;
    double vanish_energy_eps = 1e-5;
    double vanish_coupling_eps = 1e-6;
    std::uint64_t seed = 0;
    // Spectral (1+|xi|^4)^{-1} preconditioner on the projected gradient.
    bool precondition = false;
    void validate() const;
};

struct SolveReport {
    SolveStatus status = SolveStatus::MaxIters;
    double energy = 0.0;  // m(rho) candidate
    double lambda = 0.0;
    double mass_u = 0.0;
    double mass_v = 0.0;
    double pohozaev_residual = 0.0;
    double el_residual = 0.0;
    int iterations = 0;
    std::vector<double> energy_history;
    StatePair final_state;
};

enum class CoercivityClass { Coercive, CriticalCapExceeded, Supercritical };
const char* to_string(CoercivityClass c);

enum class InitStrategy { CoupledGaussian, ModulatedPacket, RandomBandlimited };
const char* to_string(InitStrategy s);
InitStrategy parse_strategy(const std::string& name);  // throws on unknown name

// Joint rescale of both components onto the mass sphere; preserves the
// mass split between u and v. Throws on a zero pair.
StatePair project_to_sphere(const StatePair& p, double rho);

CoercivityClass coercivity_guard(const SystemParams& params, const ThresholdSet& th);

StatePair initial_state(const GridSpec& grid, const SystemParams& params,
                        InitStrategy strategy, std::uint64_t seed);

// Projected gradient descent on I over the mass sphere with Armijo
// backtracking. Terminates Vanishing when the energy sits at the auxiliary
// level m^J and the coupling has emptied out (the torus signature of the
// vanishing alternative), Converged when the projected gradient is small.
SolveReport minimize_from(const SystemParams& params, const SolveConfig& config,
                          StatePair start);
SolveReport minimize_ground_state(const SystemParams& params, const GridSpec& grid,
                                  const SolveConfig& config, InitStrategy strategy);

// Best-of-restarts (3 strategies x 2 seeds), reduced by minimum energy with
// ties broken toward the lower restart index.
SolveReport best_of_restarts(const SystemParams& params, const GridSpec& grid,
                             const SolveConfig& config, int jobs = 1);

struct ScanRow {
    double rho = 0.0;
    SolveStatus status = SolveStatus::MaxIters;
    double energy = 0.0;
    double mj = 0.0;
    double lambda = 0.0;
    double mass_u = 0.0;
    double mass_v = 0.0;
    double pohozaev_residual = 0.0;
    double el_residual = 0.0;
    int iterations = 0;
};

// m(theta rho) < theta^2 m(rho) check emitted for row pairs with
// rho_large = 1.5 rho_small when both converged.
struct SubadditivityCheck {
    double rho_small = 0.0;
    double rho_large = 0.0;
    double energy_small = 0.0;
    double energy_large = 0.0;
    bool holds = false;
};

struct ScanResult {
    std::vector<ScanRow> rows;  // sorted by rho ascending
    std::vector<SubadditivityCheck> checks;
};

ScanResult dichotomy_scan(const SystemParams& params_template,
                          std::vector<double> rho_list, const GridSpec& grid,
                          const SolveConfig& config, int jobs = 1);

}  // namespace binls
