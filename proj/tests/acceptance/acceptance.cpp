// One pass/fail line per criterion. Usage: acceptance [criterion...]
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <unistd.h>

#include "cyclestab/analysis.hpp"
#include "cyclestab/control.hpp"
#include "cyclestab/engine.hpp"
#include "cyclestab/io.hpp"

using namespace cyclestab;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = CYCLESTAB_SOURCE_DIR;

BigDec D(const char* s) { return BigDec::from_string(s); }

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void fail(const std::string& why) {
        if (pass) detail.str("");
        pass = false;
        detail << why << "; ";
    }
    void note(const std::string& what) {
        if (pass) detail << what << "; ";
    }
};

struct Golden {
    int index = 0, sweep = 0;
    std::string x, y;
};

std::map<std::string, std::vector<Golden>> load_goldens() {
    std::ifstream in(kSource / "tests" / "data" / "appendix_goldens.txt");
    std::map<std::string, std::vector<Golden>> out;
    std::string name, y;
    int T;
    Golden g;
    while (in >> name >> T >> g.index >> g.sweep >> g.x >> y) {
        g.y = y == "-" ? "" : y;
        out[name + "-T" + std::to_string(T)].push_back(g);
    }
    return out;
}

// Leading significant digits on which two decimals agree.
int agreeing_digits(const BigDec& a, const BigDec& b) {
    if (a == b) return precision();
    BigDec d = abs(a - b);
    if (a.is_zero()) return 0;
    return static_cast<int>(std::max<std::int64_t>(0, a.adjusted() - d.adjusted()));
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cyclestab-acceptance-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunSummary run_tier(const std::string& manifest, const fs::path& out) {
    RunOverrides ov;
    ov.output_dir = out;
    return run_manifest(load_manifest(kSource / "manifests" / manifest, ov));
}

// Golden check of every report in a tier. For 1-D maps the reference prints the lagged
// coordinate as x, so x must appear as eta_T and y as eta_1.
void check_goldens(const RunSummary& s, Check& o) {
    auto goldens = load_goldens();
    PrecisionGuard g(kDefaultPrecision);
    for (const auto& r : s.reports)
        for (const Golden& gd : goldens.at(r.label)) {
            const CycleResult* hit = nullptr;
            for (const auto& c : r.cycles)
                if (c.record.initial_index == gd.index) hit = &c;
            std::string tag = r.label + " state " + std::to_string(gd.index);
            if (!hit) {
                o.fail(tag + ": no cycle (status " + r.status + ")");
                continue;
            }
            const CycleRecord& rec = hit->record;
            const bool one_d = rec.points[0].size() == 1;
            BigDec x = one_d ? rec.points.back()[0] : rec.points[0][0];
            BigDec y = one_d ? rec.points[0][0] : rec.points[0][1];
            int dx = agreeing_digits(D(gd.x.c_str()), x);
            int dy = gd.y.empty() ? precision() : agreeing_digits(D(gd.y.c_str()), y);
            std::string line = tag + " sweep " + std::to_string(rec.sweep) + " x=" + x.to_short_string(18) +
                               " digits " + std::to_string(std::min(dx, dy));
            if (!rec.verified) o.fail(tag + ": cycle not verified");
            if (rec.sweep != gd.sweep)
                o.fail(tag + ": detected at sweep " + std::to_string(rec.sweep) + ", expected " +
                       std::to_string(gd.sweep));
            if (std::min(dx, dy) < 100) o.fail(line + " (< 100)");
            o.note(line);
        }
}

void criterion_golden(const std::string& manifest, Check& o) {
    TempDir tmp(manifest);
    check_goldens(run_tier(manifest, tmp.path), o);
}

void criterion3(Check& o) {
    int n = 0;
    for (const char* manifest : {"fast-tier.json", "slow-tier.json"}) {
        TempDir tmp(manifest);
        RunSummary s = run_tier(manifest, tmp.path);
        for (const auto& r : s.reports)
            for (const auto& c : r.cycles) {
                ++n;
                const StabilityReport& rep = c.report;
                BigDec worst(0);
                for (const auto& m : rep.controlled_moduli) worst = std::max(worst, m);
                if (rep.verdict != Verdict::Stable)
                    o.fail(r.label + ": verdict " + verdict_name(rep.verdict) + ", max |lambda| " + worst.to_short_string(6));
                if (!rep.open_loop_unstable()) o.fail(r.label + ": open-loop cycle is not unstable");
                if (!rep.coherent) o.fail(r.label + ": eigenvalues incoherent with mu r(mu)^T");
            }
    }
    if (n == 0) o.fail("no cycles found");
    o.note(std::to_string(n) + " cycles stable under control and open-loop unstable");
}

void criterion4(Check& o) {
    PrecisionGuard g(50);
    Lemma1Summary s = verify_lemma1(50, 1);
    if (!s.passed) o.fail("max residual " + s.max_residual.to_short_string(3));
    o.note("50 trials at P=50, max residual " + s.max_residual.to_short_string(3) + " < " +
           s.tolerance.to_short_string(3));
}

void criterion5(Check& o) {
    PrecisionGuard g(kDefaultPrecision);
    const int P = precision();
    BigDec one(1), tol5 = pow10(5 - P), tol10 = pow10(10 - P);
    // (a)
    BigDec mu = D("1.99");
    ControlPolynomial a = from_exact_multipliers({-mu});
    BigDec d1 = abs(a[0] - mu / (1 + mu)), d2 = abs(a[1] - one / (1 + mu));
    if (std::max(d1, d2) > pow10(-P)) o.fail("(a) differs by " + std::max(d1, d2).to_short_string(3));
    o.note("(a) max deviation " + std::max(d1, d2).to_short_string(3));
    // (b)
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ur(0.05, 5.0), up(0.01, 3.13);
    BigDec worst(0);
    for (int k = 0; k < 20; ++k) {
        BigDec rho = BigDec::from_double(ur(rng)), phi = BigDec::from_double(up(rng));
        ControlPolynomial c = from_complex_pair(rho, phi);
        worst = std::max({worst, evaluate_r(c, polar(rho, phi)).modulus(), evaluate_r(c, polar(rho, -phi)).modulus(),
                          abs(evaluate_r(c, one).re - 1)});
    }
    if (worst >= tol5) o.fail("(b) residual " + worst.to_short_string(3));
    o.note("(b) 20 pairs, max residual " + worst.to_short_string(3));
    // (c)
    auto sweep = [&](const std::string& name, const ControlPolynomial& c, const BigDec& lo, const BigDec& hi) {
        BigDec peak(0);
        for (int k = 0; k < 1000; ++k) {
            BigDec m = lo + (hi - lo) * BigDec(k) / BigDec(999);
            peak = std::max(peak, stability_value(c, m, 1).modulus());
        }
        if (peak > one + tol10) o.fail("(c) " + name + " peaks at " + peak.to_short_string(12));
        if (abs(evaluate_r(c, one).re - 1) >= tol5) o.fail("(c) " + name + " has r(1) != 1");
    };
    for (int n : {3, 5, 7}) {
        ChebyshevControl c = chebyshev_symmetric(n);
        sweep("symmetric N=" + std::to_string(n), c.theta, -c.mu_star_bound, c.mu_star_bound);
    }
    for (int n : {2, 3, 4}) {
        ChebyshevControl c = chebyshev_one_sided(n);
        sweep("one-sided N=" + std::to_string(n), c.theta, -c.mu_star_bound, one);
    }
    o.note("(c) Chebyshev polynomials bounded by 1 on their intervals");
}

// Strict |mu r(mu)^T| < |mu|^(1+T) for convex theta and mu in the unit disk.
void criterion6(Check& o) {
    PrecisionGuard g(50);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> uw(0.0, 1.0), ur(0.0, 1.0), ua(-3.14159, 3.14159);
    std::uniform_int_distribution<int> un(1, 4);
    int checked = 0, violations = 0;
    std::string example;
    for (int t = 0; t < 20; ++t) {
        std::vector<BigDec> w;
        BigDec sum(0);
        int N = un(rng);
        for (int j = 0; j < N; ++j) {
            w.push_back(BigDec::from_double(uw(rng)) + D("0.001"));
            sum += w.back();
        }
        for (auto& x : w) x = x / sum;
        ControlPolynomial th = ControlPolynomial::unchecked(w);
        for (int k = 0; k < 100; ++k) {
            ComplexPair mu = polar(BigDec::from_double(std::sqrt(ur(rng))), BigDec::from_double(ua(rng)));
            for (int T : {1, 2, 5}) {
                ++checked;
                BigDec lhs = stability_value(th, mu, T).modulus();
                BigDec rhs = pow_int(mu.modulus(), 1 + T);
                if (!(lhs < rhs)) {
                    if (violations++ == 0)
                        example = "theta=[" + th[0].to_short_string(4) + ",...] mu=" + mu.to_string() +
                                  " T=" + std::to_string(T) + ": " + lhs.to_short_string(4) + " >= " +
                                  rhs.to_short_string(4);
                }
            }
        }
    }
    if (violations)
        o.fail(std::to_string(violations) + " of " + std::to_string(checked) + " cases violate the bound, e.g. " +
               example);
    o.note(std::to_string(checked) + " cases");
}

void criterion7(Check& o) {
    PrecisionGuard g(kDefaultPrecision);
    const int P = precision();
    MapDef m = catalog().find("logistic").with_parameters({{"h", D("3.99")}});
    ControlPolynomial th({D("1.99") / D("2.99"), BigDec(1) / D("2.99")});
    BigDec fixed = 1 - BigDec(1) / D("3.99"), tol = pow10(5 - P);
    State x{D("0.3")};
    std::vector<BigDec> err{abs(x[0] - fixed)};
    while (err.back() >= tol && err.size() <= 100) {
        x = controlled_step_combination(m, th, 1, x);
        err.push_back(abs(x[0] - fixed));
    }
    const int steps = static_cast<int>(err.size()) - 1;
    if (err.back() >= tol) {
        o.fail("no convergence within 100 steps");
        return;
    }
    if (steps < 4) {
        o.fail("too few steps for the ratio test");
        return;
    }
    std::vector<BigDec> q;
    for (int k = steps - 2; k <= steps; ++k) q.push_back(err[k] / err[k - 1]);
    std::string ratios = q[0].to_short_string(3) + ", " + q[1].to_short_string(3) + ", " + q[2].to_short_string(3);
    if (!(q[0] > q[1] && q[1] > q[2])) o.fail("final ratios not decreasing: " + ratios);
    o.note("converged in " + std::to_string(steps) + " steps, final ratios " + ratios);
}

void criterion8(Check& o) {
    TempDir a("det-a"), b("det-b");
    RunSummary sa = run_tier("fast-tier.json", a.path);
    RunSummary sb = run_tier("fast-tier.json", b.path);
    int files = 0;
    for (const auto& e : fs::directory_iterator(a.path)) {
        fs::path other = b.path / e.path().filename();
        ++files;
        if (!fs::exists(other) || read_text_file(e.path()) != read_text_file(other))
            o.fail(e.path().filename().string() + " differs");
    }
    for (const auto& e : fs::directory_iterator(b.path))
        if (!fs::exists(a.path / e.path().filename())) o.fail(e.path().filename().string() + " only in second run");
    if (files == 0) o.fail("no result files");
    o.note(std::to_string(files) + " files byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"fast-tier golden reproduction", [](Check& o) { criterion_golden("fast-tier.json", o); }},
        {"slow-tier golden reproduction", [](Check& o) { criterion_golden("slow-tier.json", o); }},
        {"controlled cycles stable, open-loop unstable", criterion3},
        {"closed form equals direct product", criterion4},
        {"control constructor properties", criterion5},
        {"contraction on the unit disk", criterion6},
        {"fixed-point stabilization", criterion7},
        {"deterministic result files", criterion8},
    };
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty())
        for (std::size_t i = 1; i <= criteria.size(); ++i) which.push_back(static_cast<int>(i));
    int failed = 0;
    for (int k : which) {
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::cout << "criterion " << k << ": FAIL unknown criterion\n";
            ++failed;
            continue;
        }
        Check o;
        try {
            criteria[k - 1].second(o);
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::string detail = o.detail.str();
        if (detail.size() >= 2) detail.resize(detail.size() - 2);
        std::cout << "criterion " << k << " (" << criteria[k - 1].first << "): " << (o.pass ? "PASS" : "FAIL") << " "
                  << detail << std::endl;
        if (!o.pass) ++failed;
    }
    return failed ? 1 : 0;
}
