#include "hierid/models.hpp"

#include <algorithm>
#include <cmath>

#include "hierid/errors.hpp"

namespace hierid {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw_input(what);
}

}  // namespace

void FribergParams::validate() const {
    require(k_prol > 0 && k_tr > 0 && k_circ > 0, "FribergParams: rates must be positive");
    require(N0 > 0, "FribergParams: N0 must be positive");
    require(EC50 > 0, "FribergParams: EC50 must be positive");
    require(Emax >= 0 && Emax <= 1, "FribergParams: Emax must lie in [0, 1]");
    require(gamma > 0, "FribergParams: gamma must be positive");
}

void ZalypsisPkParams::validate() const {
    for (double k : {k_fp, k_pf, k_sl1p, k_psl1, k_sl2f, k_psl2, k_fsl2, k_cl})
        require(k >= 0, "ZalypsisPkParams: rates must be non-negative");
}

void TivParams::validate() const {
    for (double v : {beta, p, delta, c, d_T, lambda, T0, V0, I0})
        require(v > 0, "TivParams: all parameters must be strictly positive");
}

void ExpGrowthParams::validate() const {
    require(a >= 0 && b >= 0, "ExpGrowthParams: rates must be non-negative");
    require(x0 > 0, "ExpGrowthParams: x0 must be positive");
}

void friberg_rhs(std::span<const double> state, const FribergParams& params, double drug_effect,
                 std::span<double> dydt) {
    const double P = state[0], T1 = state[1], T2 = state[2], T3 = state[3], N = state[4];
    if (!(N > 0)) throw_input("friberg_rhs: feedback ratio undefined for N <= 0");
    const double feedback = std::pow(params.N0 / N, params.gamma);
    dydt[0] = ((1.0 - drug_effect) * feedback - 1.0) * params.k_prol * P;
    dydt[1] = params.k_prol * P - params.k_tr * T1;
    dydt[2] = params.k_tr * T1 - params.k_tr * T2;
    dydt[3] = params.k_tr * T2 - params.k_tr * T3;
    dydt[4] = params.k_tr * T3 - params.k_circ * N;
}

std::array<double, 5> friberg_initial_state(const FribergParams& params) {
    params.validate();
    const double transit = params.k_circ * params.N0 / params.k_tr;
    const double prolif = params.k_circ * params.N0 / params.k_prol;
    return {prolif, transit, transit, transit, params.N0};
}

void zalypsis_pk_rhs(std::span<const double> state, const ZalypsisPkParams& k, bool literal,
                     std::span<double> dydt) {
    const double Cp = state[0], Cf = state[1], Csl1 = state[2], Csl2 = state[3];
    if (literal) {
        // The equations exactly as published, including the juxtaposed product
        // in the Cf line and the missing return flows.
        dydt[0] = k.k_fp * Cf + k.k_sl1p * Csl1 - (k.k_pf + k.k_psl1 + k.k_cl) * Cp;
        dydt[1] = k.k_pf * Cp * k.k_sl2f * Csl2 - (k.k_fp + k.k_fsl2) * Cf;
        dydt[2] = k.k_psl1 * Cp - k.k_sl1p * Csl1;
        dydt[3] = k.k_psl2 * Cp - k.k_sl2f * Csl2;
        return;
    }
    // Corrected compartmental form: k_ij moves mass from i to j, and total
    // drug mass is conserved when k_cl = 0.
    dydt[0] = k.k_fp * Cf + k.k_sl1p * Csl1 - (k.k_pf + k.k_psl1 + k.k_psl2 + k.k_cl) * Cp;
    dydt[1] = k.k_pf * Cp + k.k_sl2f * Csl2 - (k.k_fp + k.k_fsl2) * Cf;
    dydt[2] = k.k_psl1 * Cp - k.k_sl1p * Csl1;
    dydt[3] = k.k_psl2 * Cp + k.k_fsl2 * Cf - k.k_sl2f * Csl2;
}

double emax_effect(double Cp, double Emax, double EC50) {
    if (!(EC50 > 0)) throw_input("emax_effect: EC50 must be positive");
    if (Cp <= 0) return 0.0;  // clamp numerical undershoot of Cp
    return Emax * Cp / (EC50 + Cp);
}

void tiv_rhs(std::span<const double> state, const TivParams& params, std::span<double> dydt) {
    const double T = state[0], I = state[1], V = state[2];
    dydt[0] = params.lambda - params.beta * V * T - params.d_T * T;
    dydt[1] = params.beta * V * T - params.delta * I;
    dydt[2] = params.p * I - params.c * V;
}

std::pair<double, double> tiv_derived_inits(double T0, double V0, double p, double c, double d_T) {
    require(T0 > 0 && p > 0 && c > 0 && d_T > 0, "tiv_derived_inits: inputs must be positive");
    require(V0 >= 0, "tiv_derived_inits: V0 must be non-negative");
    return {T0 * d_T, c * V0 / p};
}

double expgrowth_solution(const ExpGrowthParams& params, double t) {
    return params.x0 * std::exp((params.a + params.b) * t);
}

// ---------------------------------------------------------------------------
// ZalypsisPkModel
// ---------------------------------------------------------------------------

const std::vector<std::string>& ZalypsisPkModel::param_names() const {
    static const std::vector<std::string> names = {"k_fp",   "k_pf",   "k_sl1p", "k_psl1",
                                                   "k_sl2f", "k_psl2", "k_fsl2", "k_cl"};
    return names;
}

namespace {

ZalypsisPkParams unpack_pk(std::span<const double> p) {
    return {p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]};
}

}  // namespace

void ZalypsisPkModel::rhs(double, std::span<const double> y, std::span<const double> params,
                          std::span<double> dydt) const {
    zalypsis_pk_rhs(y, unpack_pk(params), literal_, dydt);
}

std::vector<double> ZalypsisPkModel::initial_state(std::span<const double>) const {
    return {0.0, 0.0, 0.0, 0.0};
}

// ---------------------------------------------------------------------------
// FribergZalypsisModel
// ---------------------------------------------------------------------------

const std::vector<std::string>& FribergZalypsisModel::param_names() const {
    static const std::vector<std::string> names = {
        "k_prol", "k_tr",   "k_circ", "gamma",  "N0",     "EC50",   "Emax",  "k_fp",
        "k_pf",   "k_sl1p", "k_psl1", "k_sl2f", "k_psl2", "k_fsl2", "k_cl"};
    return names;
}

void FribergZalypsisModel::rhs(double, std::span<const double> y, std::span<const double> params,
                               std::span<double> dydt) const {
    const FribergParams fp{params[0], params[1], params[2], params[3],
                           params[4], params[5], params[6]};
    const ZalypsisPkParams pk{params[7],  params[8],  params[9],  params[10],
                              params[11], params[12], params[13], params[14]};
    zalypsis_pk_rhs(y.subspan(0, 4), pk, pk_literal_, dydt.subspan(0, 4));
    double effect = emax_effect(std::max(y[0], 0.0), fp.Emax, fp.EC50);
    effect = std::clamp(effect, 0.0, 1.0);
    friberg_rhs(y.subspan(4, 5), fp, effect, dydt.subspan(4, 5));
}

std::vector<double> FribergZalypsisModel::initial_state(std::span<const double> params) const {
    const FribergParams fp{params[0], params[1], params[2], params[3],
                           params[4], params[5], params[6]};
    const auto eq = friberg_initial_state(fp);
    return {0.0, 0.0, 0.0, 0.0, eq[0], eq[1], eq[2], eq[3], eq[4]};
}

// ---------------------------------------------------------------------------
// TivModel
// ---------------------------------------------------------------------------

const std::vector<std::string>& TivModel::param_names() const {
    static const std::vector<std::string> names = {"beta", "p", "delta", "T0", "V0", "d_T", "c"};
    return names;
}

TivParams TivModel::unpack(std::span<const double> params) {
    TivParams tp{};
    tp.beta = params[0];
    tp.p = params[1];
    tp.delta = params[2];
    tp.T0 = params[3];
    tp.V0 = params[4];
    tp.d_T = params[5];
    tp.c = params[6];
    const auto [lambda, I0] = tiv_derived_inits(tp.T0, tp.V0, tp.p, tp.c, tp.d_T);
    tp.lambda = lambda;
    tp.I0 = I0;
    return tp;
}

void TivModel::rhs(double, std::span<const double> y, std::span<const double> params,
                   std::span<double> dydt) const {
    tiv_rhs(y, unpack(params), dydt);
}

std::vector<double> TivModel::initial_state(std::span<const double> params) const {
    const TivParams tp = unpack(params);
    return {tp.T0, tp.I0, tp.V0};
}

double TivModel::observe(double, std::span<const double> y) const {
    // Viral load reported on the log10 scale; floor keeps the map defined when
    // V decays below double resolution at extinction.
    return std::log10(std::max(y[2], 1e-300));
}

}  // namespace hierid
