#pragma once

// Filippov solutions through crossing regions of Sigma = {h = 0}, the
// crossing-hypothesis validators, Poincare maps and periodic-orbit
// certificates.
//
// The integrated system is x' = eps * Z(t, x, eps), with Z the branch field
// of the active region. Sliding is never simulated: reaching Sigma where the
// two fields do not both push across is reported as SlidingEncountered.

#include "nsavg/averaging.hpp"
#include "nsavg/degree.hpp"
#include "nsavg/ode.hpp"
#include "nsavg/regularize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nsavg {

struct IntegratorControls {
    ode::Controls ode;
    double event_tol_factor = 1e-12;     // event time localized to event_tol_factor * T
    double transversality_tol = 1e-12;
    double manifold_factor = 1e-12;      // |h| below manifold_factor (1 + |t| + |x|) is on Sigma
};

enum class CrossingDirection { minus_to_plus, plus_to_minus };

struct CrossingEvent {
    double t_star = 0.0;
    Vector x_star;
    double transversality = 0.0;  // <grad h, X~> <grad h, Y~>
    CrossingDirection direction = CrossingDirection::minus_to_plus;
};

class Trajectory {
public:
    struct Piece {
        ode::DenseStep step;
        double t_end;
    };

    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<CrossingEvent> events;
    std::vector<Piece> pieces;
    double eps = 0.0;
    std::optional<double> delta;

    [[nodiscard]] Vector final_state() const { return x.back(); }
    /// State at time s from the dense output.
    [[nodiscard]] Vector state_at(double s) const;
};

/// <grad h, X~> <grad h, Y~> in extended (tau, x) space, X~ = (1, eps X), Y~ = (1, eps Y).
double crossing_indicator(const PiecewiseSystem& sys, double t, const Vector& x, double eps);

Trajectory integrate(const PiecewiseSystem& sys, const Vector& z, double eps, double t0, double t1,
                     const IntegratorControls& controls = {});

/// Integrates the continuous phi-regularized system x' = eps Z_delta(t, x, eps).
Trajectory integrate_regularized(const PiecewiseSystem& sys, const Vector& z, double eps, double delta, double t0,
                                 double t1, const IntegratorControls& controls = {});

/// P(z) = x(T, z, eps).
Vector poincare(const PiecewiseSystem& sys, const Vector& z, double eps, const IntegratorControls& controls = {});
Vector poincare_regularized(const PiecewiseSystem& sys, const Vector& z, double eps, double delta,
                            const IntegratorControls& controls = {});

struct ExpansionRow {
    double eps;
    double error;  // |(P_delta(z) - z) / eps - f_delta(z)|_inf
};

/// Requires every eps > 0 (strictly); eps_list should be decreasing.
std::vector<ExpansionRow> check_poincare_expansion(const PiecewiseSystem& sys, const Vector& z,
                                                   const std::vector<double>& eps_list, double delta,
                                                   const IntegratorControls& controls = {},
                                                   const QuadratureSpec& spec = {});

// -- crossing hypotheses ---------------------------------------------------

enum class HypothesisMode { ii, ii_prime };

struct Witness {
    double t;
    Vector x;
    double margin;
};

struct HypothesisReport {
    HypothesisMode mode = HypothesisMode::ii;
    std::string grid;
    double min_margin = 0.0;
    std::vector<Witness> witnesses;  // worst points first
    int sigma_points = 0;
    int degenerate_points = 0;
    bool pass = false;
};

struct HypothesisOptions {
    int time_lines = 64;             // time samples for the x-direction root search
    double margin_tol = 1e-9;        // (ii): pass iff min |d_t h| > margin_tol
    double degeneracy_tol = 1e-6;    // (ii'): |d_t h| below this is a degenerate point
    int max_witnesses = 5;
};

/// Sufficient check for (ii): min |d_t h| over sampled Sigma in [0, T] x box.
HypothesisReport validate_hypothesis_ii(const PiecewiseSystem& sys, const Box& box, int grid,
                                        const HypothesisOptions& opts = {});

/// (ii'): at degenerate Sigma points checks
///   d_t h <d_x h, F1> + eps (<d_x h, F1>^2 - <d_x h, F2>^2) / 2 >= eps xi_floor.
HypothesisReport validate_hypothesis_ii_prime(const PiecewiseSystem& sys, const Box& box, int grid, double eps,
                                              double xi_floor = 1e-6, const HypothesisOptions& opts = {});

/// Left-hand side of the (ii') inequality at one point.
double ii_prime_lhs(const PiecewiseSystem& sys, double t, const Vector& x, double eps);

// -- periodic orbits -------------------------------------------------------

enum class CertifyMode { two_sided, positive_only };

struct CycleCertificate {
    Vector a;
    int degree = 0;
    double eps = 0.0;
    Vector z_eps;
    double fixed_point_residual = 0.0;
    double distance = 0.0;  // |z_eps - a|
    int iterations = 0;
};

struct ShootingOptions {
    int max_iterations = 50;
    double residual_tol = 1e-12;   // target |P(z) - z|
    double accept_tol = 1e-10;     // stagnation below this still certifies
    int max_halvings = 20;
    IntegratorControls integrator;
};

/// Newton on z -> P(z) - z seeded at the averaged zero; refuses zeros of degree 0.
CycleCertificate find_periodic(const PiecewiseSystem& sys, const ZeroCandidate& zero, double eps, CertifyMode mode,
                               const ShootingOptions& opts = {});

inline const std::vector<double> kDefaultEpsSweep{1e-1, 1e-2, 1e-3};

/// Certificates along the sweep; two_sided mode also runs -eps after each eps.
std::vector<CycleCertificate> certify_sweep(const PiecewiseSystem& sys, const ZeroCandidate& zero,
                                            const std::vector<double>& eps_list, CertifyMode mode,
                                            const ShootingOptions& opts = {});

/// Strict decrease of |z_eps - a| along certificates of one sign of eps.
bool distances_decreasing(const std::vector<CycleCertificate>& certs, double eps_sign);

// -- end-to-end ------------------------------------------------------------

struct PipelineOptions {
    CertifyMode mode = CertifyMode::two_sided;
    std::vector<double> eps_sweep = kDefaultEpsSweep;
    int scan_grid = 16;
    int hypothesis_grid = 9;
    double xi_floor = 1e-6;
    QuadratureSpec quadrature;
    ZeroSearchOptions zeros;
    ShootingOptions shooting;
};

struct CertifiedZero {
    ZeroCandidate zero;
    std::optional<DegreeResult> degree;
    std::vector<CycleCertificate> certificates;
    std::string failure;
};

enum class PipelineStatus { ok, hypothesis_violation, numerical_failure };

struct PipelineReport {
    HypothesisReport hypothesis;
    std::vector<Vector> seeds;
    std::vector<CertifiedZero> zeros;
    PipelineStatus status = PipelineStatus::ok;
    std::string message;
};

/// Validate hypothesis -> scan and refine zeros of f -> degree -> certificates.
PipelineReport run_pipeline(const PiecewiseSystem& sys, const PipelineOptions& opts = {});

}  // namespace nsavg
