#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyclestab/bignum.hpp"
#include "cyclestab/control.hpp"
#include "cyclestab/maps.hpp"
#include "cyclestab/matrix.hpp"

namespace cyclestab {

// J_T * ... * J_1 over the cycle points.
SmallMatrix cycle_jacobian(const MapDef& map, const std::vector<State>& cycle);
SmallMatrix cycle_jacobian(const std::vector<SmallMatrix>& factors);

// J * r(J)^T with r evaluated by Horner.
SmallMatrix controlled_jacobian_closed_form(const SmallMatrix& J, const ControlPolynomial& theta, int T);

// F'(eta_T) * ... * F'(eta_1), each F'(eta_i) = sum theta_j D f^((j-1)T+1)(eta_i) by the chain rule.
// factors[i] is the map Jacobian at eta_(i+1); T = factors.size().
SmallMatrix controlled_jacobian_direct(const std::vector<SmallMatrix>& factors, const ControlPolynomial& theta);
SmallMatrix controlled_jacobian_direct(const MapDef& map, const ControlPolynomial& theta,
                                       const std::vector<State>& cycle);

// Eigenvalues; for m = 2 the larger-modulus real root comes first, complex roots as (+im, -im).
std::vector<ComplexPair> multipliers(const SmallMatrix& J);

enum class Verdict { Stable, Marginal, Unstable };
std::string verdict_name(Verdict v);

inline constexpr double kVerdictMargin = 1e-10;

struct StabilityReport {
    int period = 1;
    int precision = 0;
    ControlPolynomial theta;
    SmallMatrix cycle_jacobian;
    SmallMatrix controlled_jacobian;
    std::vector<ComplexPair> open_loop;         // mu_j
    std::vector<ComplexPair> controlled;        // eigenvalues of the closed form
    std::vector<ComplexPair> stability_values;  // mu_j r(mu_j)^T
    std::vector<BigDec> controlled_moduli;
    Verdict verdict = Verdict::Unstable;
    BigDec lemma1_residual;     // |closed - direct|_max
    BigDec coherence_residual;  // multiset distance between controlled and stability_values
    BigDec coherence_tolerance;
    bool coherent = false;

    bool open_loop_unstable() const;  // some |mu_j| >= 1
};

// Works internally at 2P + 20 digits and rounds the reported values to P.
StabilityReport stability_verdict(const MapDef& map, const std::vector<State>& cycle, const ControlPolynomial& theta,
                                  int T);

// Randomized Lemma 1 check on synthetic cycles: 2x2 factors with entries in [-2, 2],
// T in 1..4, normalized theta with N in 1..4. Runs at the current precision.
struct Lemma1Trial {
    std::vector<SmallMatrix> factors;
    ControlPolynomial theta;
    BigDec residual;
};

struct Lemma1Summary {
    std::vector<Lemma1Trial> trials;
    BigDec max_residual;
    BigDec tolerance;  // 10^(20 - P)
    bool passed = false;
};

Lemma1Summary verify_lemma1(int trials, std::uint64_t seed);

}  // namespace cyclestab
