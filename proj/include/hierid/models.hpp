#pragma once

#include <array>
#include <span>
#include <utility>

#include "hierid/ode.hpp"

namespace hierid {

// ---------------------------------------------------------------------------
// Parameter structs
// ---------------------------------------------------------------------------

struct FribergParams {
    double k_prol;  // 1/day
    double k_tr;    // 1/day
    double k_circ;  // 1/day
    double gamma;   // dimensionless feedback exponent
    double N0;      // 1e9 cells/mL baseline circulating neutrophils
    double EC50;    // ng/mL
    double Emax;    // dimensionless, in [0, 1]

    void validate() const;
};

struct ZalypsisPkParams {
    double k_fp, k_pf, k_sl1p, k_psl1, k_sl2f, k_psl2, k_fsl2, k_cl;  // 1/day each

    void validate() const;
};

struct TivParams {
    double beta;    // mL/copies/day
    double p;       // copies/cell/day
    double delta;   // 1/day
    double c;       // 1/day
    double d_T;     // 1/day
    double lambda;  // cells/mL/day
    double T0;      // cells/mL
    double V0;      // copies/mL
    double I0;      // cells/mL

    void validate() const;
};

struct ExpGrowthParams {
    double a;   // 1/time
    double b;   // 1/time
    double x0;  // population units

    void validate() const;
};

// ---------------------------------------------------------------------------
// Right-hand sides and derived quantities
// ---------------------------------------------------------------------------

// Neutrophil transit system; state = [P, T1, T2, T3, N].  drug_effect is the
// fraction of proliferation blocked, already clamped to [0, 1] upstream.
void friberg_rhs(std::span<const double> state, const FribergParams& params, double drug_effect,
                 std::span<double> dydt);

// Equilibrium initial conditions: N(0)=N0, T_i(0)=k_circ*N0/k_tr,
// P(0)=k_circ*N0/k_prol.
std::array<double, 5> friberg_initial_state(const FribergParams& params);

// Four-compartment PK; state = [Cp, Cf, Csl1, Csl2].  Dosing enters through
// dose events, not the RHS.  `literal` reproduces the published equations
// verbatim; the default restores mass balance (see zalypsis_pk_corrections in
// the run manifest).
void zalypsis_pk_rhs(std::span<const double> state, const ZalypsisPkParams& params, bool literal,
                     std::span<double> dydt);

// Emax drug effect: Emax*Cp/(EC50+Cp).
double emax_effect(double Cp, double Emax, double EC50);

// Target cell / infected cell / virus system; state = [T, I, V].
void tiv_rhs(std::span<const double> state, const TivParams& params, std::span<double> dydt);

// Steady-state-derived quantities: lambda = T0*d_T and I0 = c*V0/p.
std::pair<double, double> tiv_derived_inits(double T0, double V0, double p, double c, double d_T);

// Closed-form solution x0*exp((a+b)*t); no integrator involved.
double expgrowth_solution(const ExpGrowthParams& params, double t);

// ---------------------------------------------------------------------------
// Model classes (parameter layout + observation map over the RHS functions)
// ---------------------------------------------------------------------------

// PK system alone; observes Cp.  Parameters: k_fp, k_pf, k_sl1p, k_psl1,
// k_sl2f, k_psl2, k_fsl2, k_cl.
class ZalypsisPkModel final : public Model {
public:
    explicit ZalypsisPkModel(bool literal = false) : literal_(literal) {}
    std::string_view name() const override { return "zalypsis_pk"; }
    std::size_t state_dim() const override { return 4; }
    const std::vector<std::string>& param_names() const override;
    void rhs(double t, std::span<const double> y, std::span<const double> params,
             std::span<double> dydt) const override;
    std::vector<double> initial_state(std::span<const double> params) const override;
    double observe(double t, std::span<const double> y) const override { return y[0]; }

private:
    bool literal_;
};

// Coupled PK + neutrophil system; state = [Cp, Cf, Csl1, Csl2, P, T1, T2, T3, N],
// observes N.  Parameters: k_prol, k_tr, k_circ, gamma, N0, EC50, Emax, then
// the eight PK rates.  Doses default into Cp (index 0).
class FribergZalypsisModel final : public Model {
public:
    explicit FribergZalypsisModel(bool pk_literal = false) : pk_literal_(pk_literal) {}
    std::string_view name() const override { return "friberg"; }
    std::size_t state_dim() const override { return 9; }
    const std::vector<std::string>& param_names() const override;
    void rhs(double t, std::span<const double> y, std::span<const double> params,
             std::span<double> dydt) const override;
    std::vector<double> initial_state(std::span<const double> params) const override;
    double observe(double t, std::span<const double> y) const override { return y[8]; }

private:
    bool pk_literal_;
};

// Viral dynamics; state = [T, I, V], observes log10(V).  Parameters: beta, p,
// delta, T0, V0, d_T, c; lambda and I0 are derived from them at t=0.
class TivModel final : public Model {
public:
    std::string_view name() const override { return "tiv"; }
    std::size_t state_dim() const override { return 3; }
    const std::vector<std::string>& param_names() const override;
    void rhs(double t, std::span<const double> y, std::span<const double> params,
             std::span<double> dydt) const override;
    std::vector<double> initial_state(std::span<const double> params) const override;
    double observe(double t, std::span<const double> y) const override;

    static TivParams unpack(std::span<const double> params);
};

}  // namespace hierid
