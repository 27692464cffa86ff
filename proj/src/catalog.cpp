// Benchmark maps. Operation order follows the reference decimal code so that
// rounded results agree digit for digit; parameters are binary64 values.
#include <cmath>

#include "cyclestab/errors.hpp"
#include "cyclestab/maps.hpp"

namespace cyclestab {

namespace {

BigDec F(double d) { return BigDec::from_double(d); }

BigDec sgn(const BigDec& u) { return u.is_negative() ? BigDec(-1) : BigDec(1); }

std::vector<State> take(std::vector<State> all, int count) {
    if (count > static_cast<int>(all.size()))
        throw ValidationError("this map defines only " + std::to_string(all.size()) + " initial states");
    all.resize(static_cast<std::size_t>(count));
    return all;
}

GridFn fixed_grid(std::vector<std::pair<double, double>> pts) {
    return [pts](const std::vector<BigDec>&, int count) {
        std::vector<State> out;
        for (auto [x, y] : pts) out.push_back({F(x), F(y)});
        return take(out, count);
    };
}

// Scalar maps: the reference starts from x0 and stores f(x0) as the state.
template <class Kernel>
GridFn scalar_grid(std::vector<double> x0) {
    return [x0](const std::vector<BigDec>& p, int count) {
        Kernel k;
        std::vector<State> out;
        for (double x : x0) out.push_back(k.step(p, {F(x)}));
        return take(out, count);
    };
}

class Logistic : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec& h = p[0];
        return {h * s[0] * (1 - s[0])};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        return SmallMatrix(p[0] * (1 - 2 * s[0]));
    }
};

class Triangular : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        return {p[0] * (1 - abs(2 * s[0] - 1))};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        return SmallMatrix(-2 * p[0] * sgn(2 * s[0] - 1));
    }
};

class Burgers : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &x = s[0], &y = s[1];
        return {a * x - pow_int(y, 2), b * y + x * y};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &x = s[0], &y = s[1];
        return SmallMatrix(a, -2 * y, y, b + x);
    }
};

class Tinkerbell : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &c = p[2], &d = p[3], &x = s[0], &y = s[1];
        return {pow_int(x, 2) - pow_int(y, 2) + a * x + b * y, 2 * x * y + c * x + d * y};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &c = p[2], &d = p[3], &x = s[0], &y = s[1];
        return SmallMatrix(2 * x + a, b - 2 * y, 2 * y + c, 2 * x + d);
    }
};

class Gingerbredman : public MapKernel {
  public:
    State step(const std::vector<BigDec>&, const State& s) const override {
        return {1 + abs(s[0]) - s[1], s[0]};
    }
    SmallMatrix jacobian(const std::vector<BigDec>&, const State& s) const override {
        return SmallMatrix(sgn(s[0]), BigDec(-1), BigDec(1), BigDec(0));
    }
};

class PreyPredator : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &c = p[2], &x = s[0], &y = s[1];
        return {x * exp(a * (1 - x) - b * y), x * (1 - exp(-c * y))};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &c = p[2], &x = s[0], &y = s[1];
        BigDec g = exp(a * (1 - x) - b * y);
        BigDec h = exp(-c * y);
        return SmallMatrix(g * (1 - a * x), -b * x * g, 1 - h, c * x * h);
    }
};

class DelayedLogistic : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        return {p[0] * s[0] * (1 - s[1]), s[0]};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &h = p[0], &x = s[0], &y = s[1];
        return SmallMatrix(h * (1 - y), -h * x, BigDec(1), BigDec(0));
    }
};

class Henon : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &x = s[0], &y = s[1];
        return {1 + a * pow_int(x, 2) + y, b * x};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &x = s[0];
        return SmallMatrix(2 * a * x, BigDec(1), b, BigDec(0));
    }
};

class ElhadjSprott : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &x = s[0], &y = s[1];
        return {1 + a * sin(x) + b * y, x};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        return SmallMatrix(p[0] * cos(s[0]), p[1], BigDec(1), BigDec(0));
    }
};

class Ikeda : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &u = p[0], &a = p[1], &b = p[2], &x = s[0], &y = s[1];
        BigDec tau = a - b / (1 + pow_int(x, 2) + pow_int(y, 2));
        BigDec c = cos(tau), sn = sin(tau);
        return {1 + u * (x * c - y * sn), u * (x * sn + y * c)};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &u = p[0], &a = p[1], &b = p[2], &x = s[0], &y = s[1];
        BigDec q = 1 + x * x + y * y;
        BigDec tau = a - b / q;
        BigDec c = cos(tau), sn = sin(tau);
        BigDec tx = 2 * b * x / (q * q), ty = 2 * b * y / (q * q);
        BigDec X = x * c - y * sn, Y = x * sn + y * c;
        return SmallMatrix(u * (c - Y * tx), u * (-sn - Y * ty), u * (sn + X * tx), u * (c + X * ty));
    }
};

class Lozi : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &x = s[0], &y = s[1];
        return {1 + a * abs(x) + b * y, x};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        return SmallMatrix(p[0] * sgn(s[0]), p[1], BigDec(1), BigDec(0));
    }
};

class Holmes : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &a = p[0], &b = p[1], &x = s[0], &y = s[1];
        return {y, a * x + b * y - pow_int(y, 3)};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec& y = s[1];
        return SmallMatrix(BigDec(0), BigDec(1), p[0], p[1] - 3 * y * y);
    }
};

class Multihorseshoe : public MapKernel {
  public:
    State step(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &ak = p[0], &bk = p[1], &x = s[0], &y = s[1];
        const BigDec c2 = F(0.2), c8 = F(0.8);
        return {x * exp(ak - c8 * x - c2 * y), y * (c2 * x + c8 * y) * exp(bk - c2 * x - c8 * y)};
    }
    SmallMatrix jacobian(const std::vector<BigDec>& p, const State& s) const override {
        const BigDec &ak = p[0], &bk = p[1], &x = s[0], &y = s[1];
        const BigDec c2 = F(0.2), c8 = F(0.8);
        BigDec e1 = exp(ak - c8 * x - c2 * y);
        BigDec e2 = exp(bk - c2 * x - c8 * y);
        BigDec L = c2 * x + c8 * y;
        return SmallMatrix(e1 * (1 - c8 * x), -c2 * x * e1, y * e2 * (c2 - c2 * L), e2 * (L + c8 * y - c8 * y * L));
    }
};

template <class K>
std::shared_ptr<const MapKernel> kernel() {
    return std::make_shared<K>();
}

std::vector<Preset> presets(std::initializer_list<std::pair<int, double>> rows, int grid) {
    std::vector<Preset> out;
    for (auto [t, th] : rows) out.push_back(Preset{t, F(th), grid, 250, true});
    return out;
}

std::vector<MapDef> build_catalog() {
    std::vector<MapDef> maps;
    maps.emplace_back("logistic", 1, std::vector<std::string>{"h"}, std::vector<BigDec>{F(3.99)}, kernel<Logistic>(),
                      scalar_grid<Logistic>({0.5, 0.1}), presets({{101, 2e24}}, 2), 0,
                      Box{{F(0.0)}, {F(1.0)}});
    maps.emplace_back("triangular", 1, std::vector<std::string>{"h"}, std::vector<BigDec>{F(0.99)},
                      kernel<Triangular>(), scalar_grid<Triangular>({0.5, 0.1}), presets({{101, 64e28}}, 2), 0,
                      Box{{F(0.0)}, {F(1.0)}});
    maps.emplace_back("burgers", 2, std::vector<std::string>{"a", "b"}, std::vector<BigDec>{F(0.75), F(1.75)},
                      kernel<Burgers>(), fixed_grid({{-1.7, 0.2}, {-0.5, 0.5}}),
                      presets({{28, 680}, {50, 10000}, {101, 16e7}}, 2), 2);
    maps.emplace_back("tinkerbell", 2, std::vector<std::string>{"a", "b", "c", "d"},
                      std::vector<BigDec>{F(0.9), F(-0.6), F(2.0), F(0.5)}, kernel<Tinkerbell>(),
                      fixed_grid({{0.0, -0.3}, {-0.5, -0.5}}), presets({{28, 100}, {50, 2000}, {101, 8e8}}, 2), 2);
    maps.emplace_back(
        "gingerbredman", 2, std::vector<std::string>{}, std::vector<BigDec>{}, kernel<Gingerbredman>(),
        [](const std::vector<BigDec>&, int count) {
            std::vector<State> out;
            for (int j = 0; j < count; ++j) {
                double v = -2.09 + 1.5 * (j + 1) / 12.0;
                out.push_back({F(v), F(v)});
            }
            return out;
        },
        presets({{28, 30}, {50, 100}, {101, 4e5}}, 2), 2);
    {
        auto p = presets({{28, 350}, {50, 19500}, {101, 1e8}}, 15);
        p[2].grid_size = 2;
        maps.emplace_back(
            "prey-predator", 2, std::vector<std::string>{"a", "b", "c"}, std::vector<BigDec>{F(3.0), F(5.0), F(5.0)},
            kernel<PreyPredator>(),
            [](const std::vector<BigDec>&, int count) {
                std::vector<State> out;
                for (int j = 0; j < count; ++j) out.push_back({F(0.02 + (j + 13) / 19.0), F(0.1 + (j + 13) / 11.0)});
                return out;
            },
            p, 2);
    }
    maps.emplace_back("delayed-logistic", 2, std::vector<std::string>{"h"}, std::vector<BigDec>{F(2.27)},
                      kernel<DelayedLogistic>(), fixed_grid({{0.1, 0.1}, {0.05, 0.025}}), presets({{101, 1e5}}, 2),
                      0);
    maps.emplace_back(
        "henon", 2, std::vector<std::string>{"a", "b"}, std::vector<BigDec>{F(-1.400000001), F(0.30000002)},
        kernel<Henon>(),
        [](const std::vector<BigDec>&, int count) {
            std::vector<State> out;
            for (int j = 0; j < count; ++j) {
                BigDec x = F(-1.0 + j / 9.0);
                out.push_back({x, F(0.3) * x});
            }
            return out;
        },
        presets({{28, 15000}, {50, 100000}, {101, 1e16}, {1001, 5e174}}, 11), 2);
    {
        auto p = presets({{101, 1e28}}, 2);
        p.push_back(Preset{1001, BigDec::from_string("1.5e317"), 2, 355, false});
        maps.emplace_back("elhadj-sprott", 2, std::vector<std::string>{"a", "b"}, std::vector<BigDec>{F(-4.0), F(0.9)},
                          kernel<ElhadjSprott>(), fixed_grid({{10.0, 10.0}, {0.0, 0.0}}), p, 0);
    }
    maps.emplace_back("lozi", 2, std::vector<std::string>{"a", "b"}, std::vector<BigDec>{F(-1.7), F(0.5)},
                      kernel<Lozi>(), fixed_grid({{0.5, 0.0}, {-0.5, -0.5}}),
                      presets({{28, 4000}, {50, 9.9e7}, {101, 64e16}, {601, 2e120}, {1001, 1e203}}, 2), 2);
    maps.emplace_back("ikeda", 2, std::vector<std::string>{"u", "a", "b"}, std::vector<BigDec>{F(0.9), F(0.4), F(6.0)},
                      kernel<Ikeda>(), fixed_grid({{0.1, -1.0}, {1.0, 0.0}}),
                      presets({{28, 9000}, {50, 1.7e7}, {101, 1e22}, {1001, 3.8e225}}, 2), 2);
    maps.emplace_back("holmes", 2, std::vector<std::string>{"a", "b"}, std::vector<BigDec>{F(-0.2), F(2.77)},
                      kernel<Holmes>(), fixed_grid({{0.1, 0.1}, {-0.1, 0.1}}), presets({{101, 2e28}}, 2), 0);
    maps.emplace_back("multihorseshoe", 2, std::vector<std::string>{"ak", "bk"}, std::vector<BigDec>{F(3.0), F(3.0)},
                      kernel<Multihorseshoe>(), fixed_grid({{3.0, 6.0}}), presets({{1001, 1.5e187}}, 1), 0);
    return maps;
}

}  // namespace

MapRegistry MapRegistry::with_catalog() {
    MapRegistry r;
    for (auto& m : build_catalog()) r.add(std::move(m));
    return r;
}

const MapRegistry& catalog() {
    static const MapRegistry reg = MapRegistry::with_catalog();
    return reg;
}

}  // namespace cyclestab
