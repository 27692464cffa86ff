#include "cyclestab/engine.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <thread>

#include "cyclestab/errors.hpp"

namespace cyclestab {

namespace {

State apply(const MapDef& map, const State& s, EvaluationCounter* c) {
    if (c) ++c->evaluations;
    return map.step(s);
}

State apply_n(const MapDef& map, State s, long n, EvaluationCounter* c) {
    for (long i = 0; i < n; ++i) s = apply(map, s, c);
    return s;
}

// a*x + b*y componentwise
State blend(const BigDec& a, const State& x, const BigDec& b, const State& y) {
    State out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
    return out;
}

void accumulate(State& acc, const BigDec& w, const State& y) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] + w * y[i];
}

State scaled(const BigDec& w, const State& y) {
    State out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = w * y[i];
    return out;
}

BigDec adaptive_theta(const MapDef& map, int T, const std::vector<State>& orbit, bool use_abs) {
    BigDec prod(1);
    for (int k = 0; k < T; ++k) prod = prod * map.jacobian(orbit[static_cast<std::size_t>(k)])(0, 0);
    BigDec theta = -prod;
    return use_abs ? abs(theta) : theta;
}

double log10_of(const BigDec& v) {
    if (v.is_zero()) return -9999.0;
    std::string c = v.coefficient().get_str(10).substr(0, 15);
    double lead = std::log10(std::stod(c)) - static_cast<double>(c.size() - 1);
    return std::round((static_cast<double>(v.adjusted()) + lead) * 1000.0) / 1000.0;
}

// One controlled step for a fixed configuration, with precomputed weights.
class Stepper {
  public:
    explicit Stepper(const SearchConfig& cfg) : cfg_(cfg) {
        if (cfg.scheme == Scheme::ScalarTheta) {
            BigDec t1 = cfg.scalar_theta + BigDec(1);
            c_ = cfg.scalar_theta / t1;
            d_ = BigDec(1) / t1;
        }
    }

    State operator()(const State& s, EvaluationCounter* cnt) const {
        const MapDef& m = cfg_.map;
        switch (cfg_.scheme) {
            case Scheme::Combination:
            case Scheme::TwoTerm: return controlled_step_combination(m, cfg_.theta, cfg_.period, s, cnt);
            case Scheme::PreAveraged: return controlled_step_preaveraged(m, cfg_.theta, cfg_.period, s, cnt);
            case Scheme::ScalarTheta: {
                State g = apply_n(m, s, cfg_.period, cnt);
                return apply(m, blend(c_, s, d_, g), cnt);
            }
            case Scheme::Adaptive: return adaptive_scalar_step(m, cfg_.period, s, false, cnt);
            case Scheme::AdaptiveAbs: return adaptive_scalar_step(m, cfg_.period, s, true, cnt);
        }
        return s;
    }

  private:
    const SearchConfig& cfg_;
    BigDec c_, d_;
};

class Runner {
  public:
    Runner(const SearchConfig& cfg, const Stepper& stepper, int index, const BigDec& eps)
        : cfg_(cfg), stepper_(stepper), eps_(eps), T_(cfg.period), buf_(static_cast<std::size_t>(cfg.period + 1)) {
        res_.index = index;
        res_.initial = cfg.initial_states[static_cast<std::size_t>(index)];
    }

    StateResult& result() { return res_; }
    bool active() const { return active_; }

    void warmup() {
        guarded([&] {
            buf_[0] = res_.initial;
            g_ = 0;
            for (int i = 0; i < T_; ++i) push(apply(cfg_.map, newest(), &counter_));
            for (int r = 0; r < cfg_.warmup; ++r)
                for (int i = 0; i <= T_; ++i) push(apply(cfg_.map, newest(), &counter_));
        });
    }

    // Returns true when this sweep detected a cycle.
    bool sweep(int r) {
        bool hit = false;
        guarded([&] {
            BigDec last;
            for (int k = 0; k <= T_; ++k) {
                State s = stepper_(newest(), &counter_);
                push(std::move(s));
                if (k == 0) continue;
                const State& now = newest();
                const State& back = at(g_ - T_);
                bool close = true;
                BigDec worst(0);
                for (std::size_t i = 0; i < now.size(); ++i) {
                    BigDec d = abs(now[i] - back[i]);
                    if (!(d < eps_)) close = false;
                    if (d > worst) worst = d;
                }
                last = worst;
                if (close) {
                    found(r, k);
                    hit = true;
                    return;
                }
            }
            res_.sweep_log.push_back(log10_of(last));
            sweep_ends_.emplace_back(g_, newest());
            if (sweep_ends_.size() > 4) sweep_ends_.pop_front();
        });
        res_.sweeps = r + 1;
        res_.evaluations = counter_.evaluations;
        return hit;
    }

    void finish(Outcome o, const std::string& msg) {
        if (!active_) return;
        active_ = false;
        res_.outcome = o;
        res_.message = msg;
        res_.evaluations = counter_.evaluations;
    }

  private:
    template <class F>
    void guarded(F&& f) {
        if (!active_) return;
        try {
            f();
        } catch (const DivergenceError& e) {
            finish(Outcome::Escaped, std::string(e.what()) + " at " + e.state());
        } catch (const SingularWeightError& e) {
            finish(Outcome::Singular, e.what());
        } catch (const ArithmeticError& e) {
            finish(Outcome::Escaped, e.what());
        }
    }

    const State& newest() const { return buf_[static_cast<std::size_t>(g_ % (T_ + 1))]; }
    const State& at(long long idx) const { return buf_[static_cast<std::size_t>(idx % (T_ + 1))]; }
    void push(State s) {
        ++g_;
        buf_[static_cast<std::size_t>(g_ % (T_ + 1))] = std::move(s);
    }

    void found(int r, int k) {
        CycleRecord rec;
        rec.map = cfg_.map.name();
        rec.period = T_;
        rec.scheme = cfg_.scheme;
        rec.theta = cfg_.effective_theta();
        if (cfg_.scheme == Scheme::ScalarTheta) rec.scalar_theta = cfg_.scalar_theta;
        rec.initial_index = res_.index;
        rec.sweep = r;
        rec.step = k;
        rec.precision = precision();
        rec.points.push_back(newest());
        for (int j = 2; j <= T_; ++j) rec.points.push_back(at(g_ - T_ + j - 1));
        if (cfg_.scheme == Scheme::Adaptive || cfg_.scheme == Scheme::AdaptiveAbs) {
            BigDec th = adaptive_theta(cfg_.map, T_, rec.points, cfg_.scheme == Scheme::AdaptiveAbs);
            rec.scalar_theta = th;
            rec.theta = ControlPolynomial::unchecked({th / (th + BigDec(1)), BigDec(1) / (th + BigDec(1))});
        }
        const BigDec base = eps_ * BigDec(1000);
        rec.residual = stepwise_residual(cfg_.map, rec.points);
        rec.cycle_residual = cycle_residual(cfg_.map, rec.points);
        rec.noise_floor = noise_floor(rec.points);
        rec.tolerance = BigDec(1000) * (rec.noise_floor > eps_ ? rec.noise_floor : eps_);
        rec.minimal_period = minimal_period(rec.points, base);
        rec.verified = rec.residual < rec.tolerance;
        for (const auto& [at_index, e] : sweep_ends_) {
            if (at_index > g_ - T_) continue;
            BigDec best;
            bool first = true;
            for (const auto& p : rec.points) {
                BigDec d = state_distance(e, p);
                if (first || d < best) best = d;
                first = false;
            }
            rec.sweep_distances.push_back(best);
        }
        res_.record = std::move(rec);
        active_ = false;
        res_.outcome = Outcome::Found;
        res_.message = res_.record->verified ? "cycle found" : "cycle detected but open-loop verification failed";
    }

    // Rounding noise of the controlled step at the cycle points: the points are F-iterates at
    // precision P, so their open-loop residual cannot be smaller than this.
    BigDec noise_floor(const std::vector<State>& points) const {
        const int P = precision();
        BigDec worst(0);
        // eta_1 -> eta_2 closes the window and is not an F-step
        for (std::size_t j = points.size() > 1 ? 1 : 0; j < points.size(); ++j) {
            State hi;
            {
                PrecisionGuard g(2 * P + 20);
                hi = stepper_(points[j], nullptr);
            }
            const State& lo = points[(j + 1) % points.size()];
            for (std::size_t i = 0; i < hi.size(); ++i) {
                BigDec d = round_to(abs(sub(hi[i], lo[i], 2 * P + 20)), P);
                if (d > worst) worst = d;
            }
        }
        return worst;
    }

    const SearchConfig& cfg_;
    const Stepper& stepper_;
    const BigDec& eps_;
    int T_;
    std::vector<State> buf_;
    long long g_ = 0;
    std::deque<std::pair<long long, State>> sweep_ends_;
    EvaluationCounter counter_;
    StateResult res_;
    bool active_ = true;
};

template <class F>
void parallel_for(const std::vector<std::size_t>& items, int workers, F f) {
    if (workers <= 1 || items.size() <= 1) {
        for (auto i : items) f(i);
        return;
    }
    const int P = precision();
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    auto n = std::min<std::size_t>(static_cast<std::size_t>(workers), items.size());
    for (std::size_t w = 0; w < n; ++w) {
        pool.emplace_back([&, P] {
            PrecisionGuard g(P);
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= items.size()) break;
                f(items[i]);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Combination: return "combination";
        case Scheme::PreAveraged: return "pre-averaged";
        case Scheme::TwoTerm: return "two-term";
        case Scheme::ScalarTheta: return "scalar-theta";
        case Scheme::Adaptive: return "adaptive";
        case Scheme::AdaptiveAbs: return "adaptive-abs";
    }
    return "?";
}

Scheme parse_scheme(const std::string& name) {
    for (Scheme s : {Scheme::Combination, Scheme::PreAveraged, Scheme::TwoTerm, Scheme::ScalarTheta, Scheme::Adaptive,
                     Scheme::AdaptiveAbs})
        if (scheme_name(s) == name) return s;
    throw ValidationError("unknown scheme '" + name + "'");
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Found: return "found";
        case Outcome::NotFound: return "not-found";
        case Outcome::Escaped: return "escaped";
        case Outcome::Singular: return "singular-weight";
        case Outcome::Stopped: return "stopped";
    }
    return "?";
}

State controlled_step_combination(const MapDef& map, const ControlPolynomial& theta, int T, const State& s,
                                  EvaluationCounter* counter) {
    if (T < 1) throw ValidationError("period must be positive");
    State y = apply(map, s, counter);
    State acc = scaled(theta[0], y);
    for (std::size_t j = 1; j < theta.size(); ++j) {
        y = apply_n(map, y, T, counter);
        accumulate(acc, theta[j], y);
    }
    return acc;
}

State controlled_step_preaveraged(const MapDef& map, const ControlPolynomial& theta, int T, const State& s,
                                  EvaluationCounter* counter) {
    if (T < 1) throw ValidationError("period must be positive");
    State acc = scaled(theta[0], s);
    State z = s;
    for (std::size_t j = 1; j < theta.size(); ++j) {
        z = apply_n(map, z, T, counter);
        accumulate(acc, theta[j], z);
    }
    return apply(map, acc, counter);
}

State controlled_step_scalar_theta(const MapDef& map, const BigDec& theta, int T, const State& s,
                                   EvaluationCounter* counter) {
    if (T < 1) throw ValidationError("period must be positive");
    BigDec t1 = theta + BigDec(1);
    if (t1.is_zero()) throw ValidationError("theta = -1 is not allowed");
    State g = apply_n(map, s, T, counter);
    return apply(map, blend(theta / t1, s, BigDec(1) / t1, g), counter);
}

State adaptive_scalar_step(const MapDef& map, int T, const State& s, bool use_abs, EvaluationCounter* counter) {
    if (map.dimension() != 1) throw ValidationError("the adaptive scheme needs a one-dimensional map");
    if (T < 1) throw ValidationError("period must be positive");
    std::vector<State> orbit{s};
    for (int k = 0; k <= T; ++k) orbit.push_back(apply(map, orbit.back(), counter));
    BigDec theta = adaptive_theta(map, T, orbit, use_abs);
    BigDec t1 = theta + BigDec(1);
    if (abs(t1) < pow10(-(precision() / 2)))
        throw SingularWeightError("|1 + theta(x)| vanishes at x = " + s[0].to_short_string(20));
    return blend(theta / t1, orbit[1], BigDec(1) / t1, orbit[static_cast<std::size_t>(T + 1)]);
}

void SearchConfig::validate() const {
    if (period < 1) throw ValidationError("period T must be at least 1");
    if (max_sweeps < 1) throw ValidationError("max sweeps must be at least 1");
    if (warmup < 0) throw ValidationError("warmup must be non-negative");
    if (workers < 1) throw ValidationError("workers must be at least 1");
    if (initial_states.empty()) throw ValidationError("no initial states");
    for (const auto& s : initial_states)
        if (static_cast<int>(s.size()) != map.dimension())
            throw ValidationError("initial state dimension does not match map '" + map.name() + "'");
    switch (scheme) {
        case Scheme::TwoTerm:
            if (theta.size() != 2) throw ValidationError("two-term scheme needs exactly two coefficients");
            break;
        case Scheme::ScalarTheta:
            if ((scalar_theta + BigDec(1)).is_zero()) throw ValidationError("theta = -1 is not allowed");
            break;
        case Scheme::Adaptive:
        case Scheme::AdaptiveAbs:
            if (map.dimension() != 1) throw ValidationError("the adaptive scheme needs a one-dimensional map");
            break;
        default: break;
    }
}

ControlPolynomial SearchConfig::effective_theta() const {
    switch (scheme) {
        case Scheme::ScalarTheta: return ControlPolynomial::from_scalar_theta(scalar_theta);
        case Scheme::Adaptive:
        case Scheme::AdaptiveAbs: return ControlPolynomial();
        default: return theta;
    }
}

std::vector<CycleRecord> SearchResult::records() const {
    std::vector<CycleRecord> out;
    for (const auto& s : states)
        if (s.record) out.push_back(*s.record);
    return out;
}

bool SearchResult::found() const {
    for (const auto& s : states)
        if (s.record && s.record->verified) return true;
    return false;
}

bool SearchResult::only_divergence() const {
    if (states.empty()) return false;
    for (const auto& s : states)
        if (s.outcome != Outcome::Escaped && s.outcome != Outcome::Singular) return false;
    return true;
}

SearchResult run_search(const SearchConfig& cfg) {
    cfg.validate();
    const BigDec eps = cfg.epsilon ? *cfg.epsilon : epsilon();
    Stepper stepper(cfg);
    std::vector<Runner> runners;
    runners.reserve(cfg.initial_states.size());
    for (std::size_t i = 0; i < cfg.initial_states.size(); ++i)
        runners.emplace_back(cfg, stepper, static_cast<int>(i), eps);

    std::vector<std::size_t> all(runners.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    parallel_for(all, cfg.workers, [&](std::size_t i) { runners[i].warmup(); });

    bool stopped = false;
    for (int r = 0; r < cfg.max_sweeps; ++r) {
        std::vector<std::size_t> live;
        for (std::size_t i = 0; i < runners.size(); ++i)
            if (runners[i].active()) live.push_back(i);
        if (live.empty()) break;
        std::vector<char> hit(runners.size(), 0);
        parallel_for(live, cfg.workers, [&](std::size_t i) { hit[i] = runners[i].sweep(r) ? 1 : 0; });
        bool any = false;
        for (char h : hit) any = any || h;
        if (cfg.stop_on_first && any) {
            stopped = true;
            break;
        }
    }
    SearchResult out;
    for (auto& rn : runners) {
        if (stopped) {
            rn.finish(Outcome::Stopped, "search stopped after another initial state found a cycle");
        } else {
            rn.finish(Outcome::NotFound, "no cycle within " + std::to_string(cfg.max_sweeps) + " sweeps");
        }
        out.states.push_back(std::move(rn.result()));
    }
    return out;
}

BigDec state_distance(const State& a, const State& b) {
    BigDec worst(0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        BigDec d = abs(a[i] - b[i]);
        if (d > worst) worst = d;
    }
    return worst;
}

BigDec stepwise_residual(const MapDef& map, const std::vector<State>& points) {
    BigDec worst(0);
    for (std::size_t j = 0; j < points.size(); ++j) {
        BigDec d = state_distance(map.step(points[j]), points[(j + 1) % points.size()]);
        if (d > worst) worst = d;
    }
    return worst;
}

BigDec cycle_residual(const MapDef& map, const std::vector<State>& points) {
    if (points.empty()) throw ValidationError("empty cycle");
    return state_distance(iterate(map, points[0], static_cast<long>(points.size())), points[0]);
}

int minimal_period(const std::vector<State>& points, const BigDec& tol) {
    const int T = static_cast<int>(points.size());
    for (int d = 1; d < T; ++d) {
        if (T % d) continue;
        bool same = true;
        for (int j = 0; j < T && same; ++j)
            if (!(state_distance(points[static_cast<std::size_t>((j + d) % T)], points[static_cast<std::size_t>(j)]) < tol))
                same = false;
        if (same) return d;
    }
    return T;
}

DoublingResult theta_doubling_search(const MapDef& map, int T, const BigDec& theta0, int k_max,
                                     const SearchConfig& inner) {
    if (!(theta0 > BigDec(0))) throw PreconditionError("theta0 must be positive");
    if (k_max < 0) throw ValidationError("k_max must be non-negative");
    DoublingResult out;
    BigDec theta = theta0;
    for (int k = 0; k <= k_max; ++k) {
        SearchConfig cfg = inner;
        cfg.map = map;
        cfg.period = T;
        if (cfg.initial_states.empty()) cfg.initial_states = map.initial_grid();
        if (cfg.scheme == Scheme::ScalarTheta) {
            cfg.scalar_theta = theta;
        } else if (cfg.scheme == Scheme::Adaptive || cfg.scheme == Scheme::AdaptiveAbs) {
            throw ValidationError("theta doubling does not apply to the adaptive scheme");
        } else {
            cfg.theta = ControlPolynomial::from_scalar_theta(theta);
        }
        SearchResult r = run_search(cfg);
        bool ok = r.found();
        out.attempts.emplace_back(theta, r);
        if (ok) {
            out.found = true;
            out.k = k;
            out.theta = theta;
            for (auto& rec : r.records())
                if (rec.verified) out.records.push_back(rec);
            return out;
        }
        theta = theta * BigDec(2);
    }
    return out;
}

}  // namespace cyclestab
