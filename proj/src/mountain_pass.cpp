#include "binls/mountain_pass.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "binls/ground_state.hpp"
#include "binls/log.hpp"
#include "binls/profiles.hpp"

namespace binls {

namespace {

double r_gamma(const SystemParams& params) { return params.r() * params.gamma_r(); }

void require_supercritical(const SystemParams& params) {
    if (!(r_gamma(params) > 2.0))
        throw std::domain_error("mountain pass geometry requires r > r_bar");
}

// Coefficient of the t^{r gamma} term in h.
double coupling_coefficient(const SystemParams& params, const ThresholdSet& th) {
    return th.d1 * params.beta *
           std::pow(params.rho, params.r() * (1.0 - params.gamma_r()));
}

}  // namespace

double geometry_h(double t, const SystemParams& params, const ThresholdSet& th) {
    require_supercritical(params);
    if (t < 0.0) throw std::domain_error("geometry_h: t must be nonnegative");
    return 0.5 * t * t - 0.5 * th.d2 * params.rho * t -
           coupling_coefficient(params, th) * std::pow(t, r_gamma(params));
}

GeometryReport bracket_roots_h(const SystemParams& params, const ThresholdSet& th) {
    require_supercritical(params);
    const double rg = r_gamma(params);
    const double a = coupling_coefficient(params, th);

    GeometryReport rep;
    rep.t_bar = std::pow(1.0 / (2.0 * a * (rg - 1.0)), 1.0 / (rg - 2.0));
    rep.h_max = geometry_h(rep.t_bar, params, th);
    rep.feasible = rep.h_max > 0.0;
    if (!rep.feasible) return rep;

    auto bisect = [&](double lo, double hi, bool rising) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const bool positive = geometry_h(mid, params, th) > 0.0;
            if (positive == rising)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    // h < 0 just above zero and below t_bar's barrier; walk out to bracket.
    double lo = rep.t_bar;
    while (geometry_h(lo, params, th) > 0.0) lo *= 0.5;
    rep.R0 = bisect(lo, rep.t_bar, true);
    double hi = rep.t_bar;
    while (geometry_h(hi, params, th) > 0.0) hi *= 2.0;
    rep.R1 = bisect(rep.t_bar, hi, false);
    return rep;
}

namespace {

StatePair profile_pair(const SystemParams& params, const GridSpec& grid,
                       SaddleProfile profile) {
    RealField u;
    if (profile == SaddleProfile::GnExtremal)
        u = gn_constant_estimate(grid.dimension, params.r(), grid).extremal;
    else
        u = gaussian_profile(grid, grid.box_length / 8.0);
    StatePair p{u, u};
    const double c = std::sqrt(params.r2 / params.r1);
    for (double& s : p.v.samples) s *= c;
    return project_to_sphere(p, params.rho);
}

}  // namespace

std::pair<StatePair, StatePair> build_endpoints(const SystemParams& params,
                                                const GridSpec& grid,
                                                const GeometryReport& geometry) {
    if (!geometry.feasible)
        throw EndpointError("build_endpoints: infeasible geometry (no barrier)");
    const StatePair base = profile_pair(params, grid, SaddleProfile::CoupledGaussian);
    const EnergyTerms t = energy_terms(base, params);

    auto scan = [&](double direction) -> double {
        const double target_sq =
            direction < 0.0 ? geometry.R0 * geometry.R0 : geometry.R1 * geometry.R1;
        double s = 0.0;
        for (int i = 0; i < 400; ++i) {
            s += 0.05 * direction;
            const double bending = std::exp(4.0 * s) * t.bih;
            const double energy = psi_value(t, params, s);
            const bool inside = direction < 0.0 ? bending < target_sq : bending > target_sq;
            if (inside && energy < 0.0) return s;
        }
        std::ostringstream msg;
        msg << "build_endpoints: sweep exhausted (direction " << direction
            << ", bending " << std::exp(4.0 * s) * t.bih << ", energy "
            << psi_value(t, params, s) << ")";
        throw EndpointError(msg.str());
    };
    const double s0 = scan(-1.0);
    const double s1 = scan(+1.0);

    StatePair inner_pt = dilate_pair(base, s0);
    StatePair outer_pt = dilate_pair(base, s1);
    // Verify directly on the dilated states, not just through the closed form.
    const auto check = [&](const StatePair& q, bool below) {
        const double bending = laplacian_norm_sq(q.u) + laplacian_norm_sq(q.v);
        const double energy = energy_I(q, params);
        const double edge = below ? geometry.R0 * geometry.R0 : geometry.R1 * geometry.R1;
        const bool ok = below ? (bending < edge) : (bending > edge);
        if (!ok || !(energy < 0.0)) {
            std::ostringstream msg;
            msg << "build_endpoints: verification failed (bending " << bending
                << ", energy " << energy << ", edge " << edge << ")";
            throw EndpointError(msg.str());
        }
    };
    check(inner_pt, true);
    check(outer_pt, false);
    return {std::move(inner_pt), std::move(outer_pt)};
}

PathCritical dilation_path_critical(const StatePair& p, const SystemParams& params,
                                    double s_lo, double s_hi) {
    if (!(s_lo < s_hi)) throw std::invalid_argument("dilation_path_critical: bad interval");
    const EnergyTerms t = energy_terms(p, params);

    // Locate the down-crossing of dpsi/ds around the interior maximum of psi.
    const int samples = 800;
    double best_s = s_lo, best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        const double s = s_lo + (s_hi - s_lo) * i / samples;
        const double v = psi_value(t, params, s);
        if (v > best_val) {
            best_val = v;
            best_s = s;
        }
    }
    if (psi_value(t, params, s_lo) >= best_val || psi_value(t, params, s_hi) >= best_val)
        throw std::domain_error("dilation_path_critical: maximum not interior");

    const double ds = (s_hi - s_lo) / samples;
    double lo = best_s - ds, hi = best_s + ds;
    if (!(psi_derivative(t, params, lo) > 0.0) || !(psi_derivative(t, params, hi) < 0.0))
        throw std::domain_error("dilation_path_critical: no sign change of P");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (psi_derivative(t, params, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    PathCritical out;
    out.s_star = 0.5 * (lo + hi);
    out.value = psi_value(t, params, out.s_star);
    return out;
}

namespace {

// ---- Bordered Newton-Krylov polish -----------------------------------------
// Solves (grad I + lambda p, (|p|^2 - rho^2)/2) = 0 for (p, lambda) with
// matrix-free GMRES on the bordered Jacobian
//   [ Hess I + lambda    p ] [w ]   [ -g ]
//   [      <p, .>        0 ] [dl] = [ -c ],
// right-preconditioned by (kappa + |xi|^4)^{-1} on the field block.

struct Bordered {
    StatePair field;
    double scalar = 0.0;
};

Bordered operator+(const Bordered& a, const Bordered& b) {
    Bordered out{axpy(1.0, a.field, b.field), a.scalar + b.scalar};
    return out;
}

Bordered scale_b(const Bordered& a, double c) {
    return Bordered{scaled(a.field, c), a.scalar * c};
}

double dot_b(const Bordered& a, const Bordered& b) {
    return inner(a.field, b.field) + a.scalar * b.scalar;
}

double norm_b(const Bordered& a) { return std::sqrt(dot_b(a, a)); }

// Restarted GMRES; returns the final relative residual.
template <typename Apply, typename Precond>
double gmres(const Apply& apply, const Precond& precond, const Bordered& rhs,
             Bordered& x, int restart, int max_iters, double rtol) {
    const double bnorm = norm_b(rhs);
    if (bnorm == 0.0) return 0.0;
    int total = 0;
    double rel = 1.0;
    while (total < max_iters && rel > rtol) {
        Bordered r = rhs;
        if (norm_b(x) > 0.0) {
            Bordered ax = apply(precond(x));
            r = rhs + scale_b(ax, -1.0);
        }
        const double beta = norm_b(r);
        rel = beta / bnorm;
        if (rel <= rtol) break;

        const int m = restart;
        std::vector<Bordered> basis;
        basis.push_back(scale_b(r, 1.0 / beta));
        std::vector<std::vector<double>> hess(m + 1, std::vector<double>(m, 0.0));
        std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
        g[0] = beta;
        int k = 0;
        for (; k < m && total < max_iters; ++k, ++total) {
            Bordered w = apply(precond(basis[k]));
            for (int j = 0; j <= k; ++j) {
                hess[j][k] = dot_b(w, basis[j]);
                w = w + scale_b(basis[j], -hess[j][k]);
            }
            hess[k + 1][k] = norm_b(w);
            if (hess[k + 1][k] > 1e-300)
                basis.push_back(scale_b(w, 1.0 / hess[k + 1][k]));
            for (int j = 0; j < k; ++j) {
                const double t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            const double denom =
                std::hypot(hess[k][k], hess[k + 1][k]);
            if (denom == 0.0) { ++k; break; }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            rel = std::abs(g[k + 1]) / bnorm;
            if (rel <= rtol) { ++k; break; }
            if (static_cast<std::size_t>(k + 2) > basis.size()) break;  // breakdown
        }
        // back substitution
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= hess[i][j] * y[j];
            y[i] = hess[i][i] != 0.0 ? s / hess[i][i] : 0.0;
        }
        Bordered update{StatePair{RealField(rhs.field.grid()), RealField(rhs.field.grid())},
                        0.0};
        for (int i = 0; i < k; ++i) update = update + scale_b(basis[i], y[i]);
        x = x + update;
    }
    return rel;
}

bool newton_polish(StatePair& p, double& lambda, const SystemParams& params,
                   double tol_abs, int max_newton) {
    const double rho_sq = params.mass_target();
    auto residual = [&](const StatePair& q, double lam) {
        StatePair g = l2_gradient_I(q, params);
        g = axpy(lam, q, g);
        return Bordered{std::move(g), 0.5 * (total_mass(q) - rho_sq)};
    };

    Bordered F = residual(p, lambda);
    double fnorm = norm_b(F);
    for (int it = 0; it < max_newton; ++it) {
        if (fnorm <= tol_abs) return true;
        const double kappa = 1.0 + std::abs(lambda);
        auto apply = [&](const Bordered& w) {
            StatePair hw = hessian_I_apply(p, w.field, params);
            hw = axpy(lambda, w.field, hw);
            hw = axpy(w.scalar, p, hw);
            return Bordered{std::move(hw), inner(p, w.field)};
        };
        auto precond = [&](const Bordered& w) {
            return Bordered{StatePair{apply_gn_resolvent(w.field.u, kappa, 1.0),
                                      apply_gn_resolvent(w.field.v, kappa, 1.0)},
                            w.scalar / kappa};
        };
        Bordered rhs = scale_b(F, -1.0);
        Bordered y{StatePair{RealField(p.grid()), RealField(p.grid())}, 0.0};
        const double grel = gmres(apply, precond, rhs, y, 80, 240, 1e-4);
        Bordered dx = precond(y);
        log::debug("newton it %d fnorm %.6g gmres_rel %.3g", it, fnorm, grel);

        bool stepped = false;
        for (double eta = 1.0; eta >= 1.0 / 1024.0; eta *= 0.5) {
            StatePair trial = axpy(eta, dx.field, p);
            const double trial_lambda = lambda + eta * dx.scalar;
            Bordered Ft = residual(trial, trial_lambda);
            const double fn = norm_b(Ft);
            if (fn < fnorm) {
                p = std::move(trial);
                lambda = trial_lambda;
                F = std::move(Ft);
                fnorm = fn;
                stepped = true;
                break;
            }
        }
        if (!stepped) {
            log::debug("newton stalled at fnorm %.6g (tol %.3g)", fnorm, tol_abs);
            return fnorm <= tol_abs;
        }
    }
    log::debug("newton out of iterations at fnorm %.6g", fnorm);
    return fnorm <= tol_abs;
}

}  // namespace

SaddleReport saddle_search(const SystemParams& params, const GridSpec& grid,
                           const SaddleConfig& config, const ThresholdSet& th) {
    params.validate();
    grid.validate();
    const double smallness = params.beta * std::pow(params.rho, params.r() - 2.0);
    const double c_min = std::min(c_star_value(th), c_lower_star_value(th));
    if (!(smallness < c_min))
        throw std::domain_error("saddle_search: beta rho^{r-2} must be below min{c*, c_*}");

    SaddleReport rep;
    StatePair p = profile_pair(params, grid, config.profile);
    // Adapt the Gaussian seed's width until the path-critical dilation is
    // near zero. The fiber maximization applies exact dilations that shrink
    // the effective box by e^{s}; seeding at the barrier's own scale keeps the
    // working box at its full size (and the Pohozaev defect at the
    // tail-truncation floor instead of O(1) wrap-around).
    if (config.profile == SaddleProfile::CoupledGaussian) {
        double width = grid.box_length / 8.0;
        for (int k = 0; k < 6; ++k) {
            const PathCritical probe = dilation_path_critical(p, params, -6.0, 6.0);
            if (std::abs(probe.s_star) <= 0.02) break;
            width *= std::exp(-probe.s_star);
            if (width < 2.5 * grid.spacing() || width > grid.box_length) {
                rep.failure = "saddle_search: barrier scale unresolvable on this grid";
                rep.state = std::move(p);
                return rep;
            }
            RealField u = gaussian_profile(grid, width);
            StatePair seeded{u, u};
            const double c = std::sqrt(params.r2 / params.r1);
            for (double& s : seeded.v.samples) s *= c;
            p = project_to_sphere(seeded, params.rho);
        }
    }
    double s_cum = 0.0;
    double tau = config.step_init;
    int next_newton = 12;

    const double lambda_floor = 0.25 * th.d2 * th.d2;

    int outer = 0;
    for (; outer < config.max_outer; ++outer) {
        // (a) fiber maximization: jump to the critical dilation of the path.
        PathCritical pc;
        try {
            pc = dilation_path_critical(p, params, -6.0, 6.0);
        } catch (const std::domain_error& e) {
            rep.failure = e.what();
            break;
        }
        p = dilate_pair(p, pc.s_star);
        s_cum += pc.s_star;
        if (std::abs(s_cum) > 4.0) {
            rep.failure = "saddle_search: profile escaped along the dilation fiber";
            break;
        }

        const EnergyTerms t = energy_terms(p, params);
        const double energy = 0.5 * t.bih - 0.5 * t.grad - params.beta * t.coupling;
        const double scale = 1.0 + t.bih;

        StatePair grad = l2_gradient_I(p, params);
        const double m = total_mass(p);
        const double lam = -inner(grad, p) / m;
        StatePair gt = axpy(lam, p, grad);
        const double el = std::sqrt(inner(gt, gt));
        const double pval = psi_derivative(t, params, 0.0);  // = P(p)

        if (el <= config.el_tol * scale && std::abs(pval) <= config.p_tol * scale) {
            rep.accepted = true;
            break;
        }

        // Newton polish once the alternation has entered the saddle's basin;
        // retried on a doubling schedule if it fails early.
        if (outer >= next_newton && el <= 0.5 * scale) {
            next_newton *= 2;
            StatePair q = p;
            double lam = -inner(l2_gradient_I(q, params), q) / total_mass(q);
            const double tol_abs = 0.3 * std::min(config.el_tol, config.p_tol) * scale;
            if (newton_polish(q, lam, params, tol_abs, 40)) {
                q = project_to_sphere(q, params.rho);
                StatePair gq = l2_gradient_I(q, params);
                const double lamq = -inner(gq, q) / total_mass(q);
                StatePair gtq = axpy(lamq, q, gq);
                const double elq = std::sqrt(inner(gtq, gtq));
                const double pq = pohozaev_P(q, params);
                const double bq = laplacian_norm_sq(q.u) + laplacian_norm_sq(q.v);
                const double scaleq = 1.0 + bq;
                log::debug("newton verify: el %.6g (tol %.3g) P %.6g (tol %.3g) lam %.6g",
                           elq, config.el_tol * scaleq, pq, config.p_tol * scaleq, lamq);
                if (elq <= config.el_tol * scaleq && std::abs(pq) <= config.p_tol * scaleq) {
                    p = std::move(q);
                    rep.accepted = true;
                    break;
                }
            }
        }

        // (b) constrained descent orthogonal to the dilation direction.
        for (int k = 0; k < config.descent_steps; ++k) {
            StatePair g2 = l2_gradient_I(p, params);
            const double mm = total_mass(p);
            const double lam2 = -inner(g2, p) / mm;
            StatePair gtan = axpy(lam2, p, g2);

            StatePair zeta{dilation_generator(p.u), dilation_generator(p.v)};
            const double zp = inner(zeta, p) / mm;
            zeta = axpy(-zp, p, zeta);
            const double zz = inner(zeta, zeta);
            if (zz > 0.0) {
                const double c = inner(gtan, zeta) / zz;
                gtan = axpy(-c, zeta, gtan);
            }

            StatePair dir{apply_inverse_fourth_order(gtan.u),
                          apply_inverse_fourth_order(gtan.v)};
            const double dp = inner(dir, p) / mm;
            dir = axpy(-dp, p, dir);
            if (zz > 0.0) {
                const double c = inner(dir, zeta) / zz;
                dir = axpy(-c, zeta, dir);
            }
            double descent = inner(gtan, dir);
            if (!(descent > 0.0)) {
                dir = gtan;
                descent = inner(gtan, gtan);
                if (!(descent > 0.0)) break;
            }

            const double e_now = energy_I(p, params);
            bool accepted_step = false;
            double step = tau;
            while (step >= 1e-14 * config.step_init) {
                StatePair trial = project_to_sphere(axpy(-step, dir, p), params.rho);
                const double et = energy_I(trial, params);
                if (et <= e_now - 1e-4 * step * descent) {
                    p = std::move(trial);
                    tau = std::min(step / 0.5, 1e2 * config.step_init);
                    accepted_step = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted_step) break;
        }
        (void)energy;
    }
    if (!rep.accepted && rep.failure.empty())
        rep.failure = "saddle_search: residual tolerances not reached";

    rep.iterations = outer;
    rep.s_star = s_cum;
    rep.level = energy_I(p, params);
    rep.lambda = multiplier_estimate(p, params);
    rep.pohozaev_residual = pohozaev_P(p, params);
    rep.el_residual = euler_lagrange_residual(p, params, rep.lambda);
    rep.bending = laplacian_norm_sq(p.u) + laplacian_norm_sq(p.v);
    rep.coupling = coupling_integral(p, params);
    rep.lambda_bound_ok = rep.lambda > lambda_floor;

    if (rep.accepted) {
        if (!(rep.level > 0.0)) {
            rep.accepted = false;
            rep.failure = "saddle_search: nonpositive level";
        } else if (!(rep.coupling > 0.0)) {
            rep.accepted = false;
            rep.failure = "saddle_search: trivial component (zero coupling)";
        } else if (!rep.lambda_bound_ok) {
            // Contradicts the compactness lemma under the smallness condition.
            rep.accepted = false;
            rep.failure = "saddle_search: lambda bound violated (red-flag inconsistency)";
            log::error("saddle_search: lambda %.12g below max{a1^2,a2^2}/4 = %.12g",
                       rep.lambda, lambda_floor);
        }
    }
    rep.state = std::move(p);
    return rep;
}

}  // namespace binls
