#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cyclestab/bignum.hpp"
#include "cyclestab/control.hpp"
#include "cyclestab/maps.hpp"

namespace cyclestab {

enum class Scheme {
    Combination,  // sum theta_j f^((j-1)T+1)(x)
    PreAveraged,  // f(theta_1 x + sum theta_j f^((j-1)T)(x))
    TwoTerm,      // theta_1 f(x) + theta_2 f^(T+1)(x)
    ScalarTheta,  // f(theta/(1+theta) x + 1/(1+theta) f^(T)(x))
    Adaptive,     // theta(x) = -prod f'(f^(k)(x)), 1-D only
    AdaptiveAbs,  // same with |theta(x)|
};

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

// Map applications performed by the controlled steps.
struct EvaluationCounter {
    std::uint64_t evaluations = 0;
};

State controlled_step_combination(const MapDef& map, const ControlPolynomial& theta, int T, const State& s,
                                  EvaluationCounter* counter = nullptr);
State controlled_step_preaveraged(const MapDef& map, const ControlPolynomial& theta, int T, const State& s,
                                  EvaluationCounter* counter = nullptr);
State controlled_step_scalar_theta(const MapDef& map, const BigDec& theta, int T, const State& s,
                                   EvaluationCounter* counter = nullptr);
State adaptive_scalar_step(const MapDef& map, int T, const State& s, bool use_abs = false,
                           EvaluationCounter* counter = nullptr);

struct SearchConfig {
    MapDef map;
    int period = 1;
    Scheme scheme = Scheme::ScalarTheta;
    ControlPolynomial theta;  // Combination, PreAveraged, TwoTerm
    BigDec scalar_theta;      // ScalarTheta
    std::vector<State> initial_states;
    int max_sweeps = 250;
    int warmup = 3;  // circular plain repeats after the first T plain steps
    bool stop_on_first = true;
    int workers = 1;
    std::optional<BigDec> epsilon;  // defaults to epsilon() at the current precision

    void validate() const;
    // Control polynomial describing the scheme (scalar theta becomes [theta/(1+theta), 1/(1+theta)]).
    ControlPolynomial effective_theta() const;
};

struct CycleRecord {
    std::string map;
    int period = 1;
    int minimal_period = 1;
    Scheme scheme = Scheme::ScalarTheta;
    ControlPolynomial theta;
    std::optional<BigDec> scalar_theta;
    int initial_index = 0;
    int sweep = 0;  // 0-based controlled sweep at detection
    int step = 0;   // step inside the sweep, 1..T
    int precision = 250;
    std::vector<State> points;  // eta_1..eta_T, eta_{j+1} = f(eta_j)
    BigDec residual;            // max_j |f(eta_j) - eta_{j+1}| (cyclic)
    BigDec cycle_residual;      // |f^T(eta_1) - eta_1|
    BigDec noise_floor;         // max_j |F(eta_j) at P - F(eta_j) at 2P+20|
    BigDec tolerance;           // 10^3 max(EPSILON, noise_floor)
    bool verified = false;
    std::vector<BigDec> sweep_distances;  // last sweep-end states before the cycle window, distance to the cycle
};

enum class Outcome { Found, NotFound, Escaped, Singular, Stopped };
std::string outcome_name(Outcome o);

struct StateResult {
    int index = 0;
    State initial;
    Outcome outcome = Outcome::NotFound;
    std::optional<CycleRecord> record;
    std::string message;
    std::uint64_t evaluations = 0;
    int sweeps = 0;
    std::vector<double> sweep_log;  // log10 of |s - s_{-T}| at each sweep end
};

struct SearchResult {
    std::vector<StateResult> states;

    std::vector<CycleRecord> records() const;
    bool found() const;
    bool only_divergence() const;
};

SearchResult run_search(const SearchConfig& cfg);

// Open-loop checks on a candidate cycle.
BigDec stepwise_residual(const MapDef& map, const std::vector<State>& points);
BigDec cycle_residual(const MapDef& map, const std::vector<State>& points);
int minimal_period(const std::vector<State>& points, const BigDec& tol);
BigDec state_distance(const State& a, const State& b);

struct DoublingResult {
    bool found = false;
    int k = -1;
    BigDec theta;
    std::vector<CycleRecord> records;
    std::vector<std::pair<BigDec, SearchResult>> attempts;
};

DoublingResult theta_doubling_search(const MapDef& map, int T, const BigDec& theta0, int k_max,
                                     const SearchConfig& inner);

}  // namespace cyclestab
