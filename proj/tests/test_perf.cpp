#include <gtest/gtest.h>

#include <limits>

#include "fixtures.hpp"

using namespace mcp;

namespace {

PerfModel random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> a(1, 5000), s(0, 0.5);
    switch (rng() % 4) {
    case 0: return PerfModel::serial(a(rng));
    case 1: return PerfModel::perfect(a(rng));
    case 2: return PerfModel::amdahl(a(rng), s(rng));
    default: {
        std::vector<std::pair<int, double>> pts;
        double t = a(rng);
        for (int p = 1; p <= 64; p *= 2) {
            pts.emplace_back(p, t);
            t *= std::uniform_real_distribution<double>(0.5, 1.0)(rng);  // no superlinear speedup
        }
        return PerfModel::table(pts);
    }
    }
}

struct Split {
    int p1, p2;
    double period;
};

// Independent enumeration: collect every split, then filter by the three keys in turn.
Split brute_force_split(const PerfModel& pr, const PerfModel& aux, int procs) {
    std::vector<Split> all;
    for (int p1 = procs - 1; p1 >= 1; --p1) {
        all.push_back({p1, procs - p1, std::max(eval_time(pr, p1), eval_time(aux, procs - p1))});
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : all) best = std::min(best, s.period);
    std::vector<Split> tied;
    for (const auto& s : all) {
        if (s.period == best) tied.push_back(s);
    }
    auto imb = [&](const Split& s) {
        double x = eval_time(pr, s.p1), y = eval_time(aux, s.p2);
        return std::abs(x - y) / std::max(x, y);
    };
    double best_imb = std::numeric_limits<double>::infinity();
    for (const auto& s : tied) best_imb = std::min(best_imb, imb(s));
    Split out{0, procs + 1, 0};
    for (const auto& s : tied) {
        if (imb(s) == best_imb && s.p2 < out.p2) out = s;
    }
    return out;
}

EnergyModel em3() {
    EnergyModel em;
    em.p_static = 1;
    em.p_dyn = 3;
    em.alpha = 3;
    em.f_levels = {0.5, 0.75, 1.0};
    return em;
}

EsAllocation interleaved(double t_pr, double t_aux, int p1 = 1, int p2 = 1) {
    EsAllocation a;
    a.p1 = p1;
    a.p2 = p2;
    a.t_pr = t_pr;
    a.t_aux = t_aux;
    a.period = std::max(t_pr, t_aux);
    a.mode = ExecMode::Interleaved;
    return a;
}

}  // namespace

TEST(EvalTime, Laws) {
    EXPECT_DOUBLE_EQ(eval_time(PerfModel::perfect(1000), 20), 50);
    EXPECT_DOUBLE_EQ(eval_time(PerfModel::serial(40), 64), 40);
    EXPECT_DOUBLE_EQ(eval_time(PerfModel::serial(40, 2.5), 1), 100);
    EXPECT_DOUBLE_EQ(eval_time(PerfModel::amdahl(100, 0.1), 1), 100);
    EXPECT_NEAR(eval_time(PerfModel::amdahl(100, 0.1), 1'000'000), 10, 10 * 1e-4);
    EXPECT_THROW(eval_time(PerfModel::serial(1), 0), std::invalid_argument);
}

TEST(EvalTime, TableInterpolatesInInverseP) {
    auto t = PerfModel::table({{1, 100}, {2, 60}, {4, 40}});
    EXPECT_NEAR(eval_time(t, 3), 46.666666666667, 1e-9);
    EXPECT_DOUBLE_EQ(eval_time(t, 2), 60);
    auto hi = eval_time_checked(t, 8);
    EXPECT_DOUBLE_EQ(hi.time, 40);
    EXPECT_TRUE(hi.clamped);
    EXPECT_FALSE(eval_time_checked(t, 4).clamped);
    // two points of a perfectly scaling code reproduce it exactly
    auto lin = PerfModel::table({{1, 1000}, {64, 1000.0 / 64}});
    for (int p = 1; p <= 64; ++p) EXPECT_NEAR(eval_time(lin, p), 1000.0 / p, 1e-9);
}

TEST(EvalTime, Validation) {
    EXPECT_THROW(PerfModel::serial(0), std::invalid_argument);
    EXPECT_THROW(PerfModel::amdahl(1, 1.5), std::invalid_argument);
    EXPECT_THROW(PerfModel::perfect(1, -1), std::invalid_argument);
    EXPECT_THROW(PerfModel::table({}), std::invalid_argument);
    EXPECT_THROW(PerfModel::table({{1, 10}, {2, 20}}), std::invalid_argument);
    EXPECT_THROW(PerfModel::table({{1, 10}, {1, 5}}), std::invalid_argument);
    EXPECT_THROW(PerfModel::table({{0, 10}}), std::invalid_argument);
}

TEST(EvalTime, PositiveAndNonincreasing) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        auto pm = random_model(rng);
        double prev = eval_time(pm, 1);
        for (int p = 2; p <= 128; ++p) {
            double t = eval_time(pm, p);
            EXPECT_GT(t, 0);
            EXPECT_LE(t, prev * (1 + 1e-12));
            prev = t;
        }
    }
}

TEST(EsModel, Time) {
    EXPECT_DOUBLE_EQ(es_time(100, 5), 105);
    EXPECT_DOUBLE_EQ(es_time(0, 0), 0);
    EXPECT_DOUBLE_EQ(es_time(50, 50), 100);
    EXPECT_THROW(es_time(-1, 0), std::invalid_argument);
}

TEST(EsModel, EfficiencyExamples) {
    auto pr = PerfModel::perfect(1000);
    auto zero = [](int) { return 0.0; };
    for (int p = 1; p <= 64; ++p) {
        auto e = es_efficiency(pr, zero, p);
        EXPECT_DOUBLE_EQ(e.exact, 1);
        EXPECT_DOUBLE_EQ(e.approx, 1);
        EXPECT_DOUBLE_EQ(e.eps_pr, 1);
    }
    auto same = [&](int p) { return eval_time(pr, p); };
    EXPECT_DOUBLE_EQ(es_efficiency(pr, same, 8).approx, 0.5);
    auto hundred = [&](int p) { return 100 * eval_time(pr, p); };
    auto e = es_efficiency(pr, hundred, 16);
    EXPECT_LE(e.approx, 0.01 * e.eps_pr);
}

TEST(EsModel, EfficiencyProperties) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> a(1, 100);
    for (int i = 0; i < 300; ++i) {
        auto pr = random_model(rng);
        const double aux_scale = eval_time(pr, 1) / (10 + a(rng));
        PerfModel aux = rng() % 2 ? PerfModel::serial(aux_scale) : PerfModel::amdahl(aux_scale, 0.3);
        const double bound = eval_time(aux, 1) / eval_time(pr, 1);
        double prev = 2;
        for (int p = 1; p <= 64; ++p) {
            auto e = es_efficiency(pr, aux, p);
            EXPECT_GT(e.exact, 0);
            EXPECT_LE(e.exact, 1 + 1e-12);
            EXPECT_LE(std::abs(e.exact - e.approx) / e.exact, bound + 1e-12);
            EXPECT_LE(e.exact, prev + 1e-12);
            prev = e.exact;
        }
    }
}

TEST(Split, Examples) {
    auto s = optimal_split(PerfModel::perfect(1000), PerfModel::serial(50), 21);
    EXPECT_EQ(s.p1, 20);
    EXPECT_EQ(s.p2, 1);
    EXPECT_DOUBLE_EQ(s.period, 50);
    EXPECT_DOUBLE_EQ(s.imbalance, 0);
    auto sym = optimal_split(PerfModel::perfect(100), PerfModel::perfect(100), 10);
    EXPECT_EQ(sym.p1, 5);
    EXPECT_EQ(sym.p2, 5);
    EXPECT_DOUBLE_EQ(sym.period, 20);
    auto tiny = optimal_split(PerfModel::perfect(1000), PerfModel::serial(1e-9), 16);
    EXPECT_EQ(tiny.p1, 15);
    EXPECT_DOUBLE_EQ(tiny.period, 1000.0 / 15);
    EXPECT_THROW(optimal_split(PerfModel::serial(1), PerfModel::serial(1), 1), std::invalid_argument);
}

TEST(Split, MatchesExhaustiveOracle) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 100; ++i) {
        auto pr = random_model(rng), aux = random_model(rng);
        for (int p = 2; p <= 64; ++p) {
            auto s = optimal_split(pr, aux, p);
            auto o = brute_force_split(pr, aux, p);
            ASSERT_EQ(s.p1, o.p1) << "case " << i << " P=" << p;
            ASSERT_EQ(s.p2, o.p2);
            ASSERT_EQ(s.period, o.period);
        }
    }
}

TEST(Mode, Examples) {
    auto pr = PerfModel::perfect(1000);
    EXPECT_EQ(choose_mode(pr, [&](int p) { return 1e-3 * eval_time(pr, p); }, 32, {0.01}).mode,
              ExecMode::Sequential);
    auto c = choose_mode(pr, PerfModel::serial(50), 21);
    EXPECT_EQ(c.mode, ExecMode::Interleaved);
    EXPECT_DOUBLE_EQ(c.per_job, 50);
    EXPECT_NEAR(c.sequential_per_job, 1000.0 / 21 + 50, 1e-12);
    auto one = choose_mode(pr, PerfModel::serial(50), 1);
    EXPECT_EQ(one.mode, ExecMode::Sequential);
    EXPECT_FALSE(one.split);
}

TEST(Mode, NeverWorseThanAlternative) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 300; ++i) {
        auto pr = random_model(rng), aux = random_model(rng);
        for (int p = 1; p <= 64; p += 3) {
            auto c = choose_mode(pr, aux, p, {0.01});
            const double seq = eval_time(pr, p) + eval_time(aux, p);
            const double inter = p >= 2 ? brute_force_split(pr, aux, p).period : seq;
            EXPECT_DOUBLE_EQ(c.per_job, std::min(seq, inter));
            EXPECT_EQ(c.mode == ExecMode::Interleaved, inter < seq);
        }
    }
}

TEST(Energy, Examples) {
    auto em = em3();
    EXPECT_DOUBLE_EQ(energy_of(100, 1, 1.0, em), 400);
    EXPECT_DOUBLE_EQ(energy_of(100, 1, 0.5, em), 275);
    EXPECT_DOUBLE_EQ(energy_of(0, 4, 0.75, em), 0);
    EXPECT_DOUBLE_EQ(energy_of(100, 3, 1.0, em), 1200);
    EXPECT_THROW(energy_of(100, 1, 0.6, em), std::invalid_argument);
}

TEST(Energy, MonotoneAboveStationaryPoint) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 5);
    for (int i = 0; i < 200; ++i) {
        EnergyModel em;
        em.p_static = u(rng);
        em.p_dyn = u(rng);
        em.alpha = 1.5 + u(rng) / 2;
        const double fstar = std::pow(em.p_static / (em.p_dyn * (em.alpha - 1)), 1 / em.alpha);
        em.f_levels.clear();
        for (int k = 1; k <= 20; ++k) em.f_levels.push_back(k / 20.0);
        double prev_e = -1, prev_p = -1;
        for (double f : em.f_levels) {
            EXPECT_GE(em.power(f), prev_p);
            prev_p = em.power(f);
            if (f < fstar) continue;
            double e = energy_of(100, 2, f, em);
            EXPECT_GT(e, prev_e);
            prev_e = e;
        }
    }
}

TEST(Energy, InterleaveExamples) {
    auto em = em3();
    auto balanced = energy_optimize_interleave(interleaved(50, 50), em);
    EXPECT_EQ(balanced.f_pr, 1);
    EXPECT_EQ(balanced.f_aux, 1);
    auto fa = energy_optimize_interleave(interleaved(50, 25), em);
    EXPECT_EQ(fa.f_pr, 1);
    EXPECT_EQ(fa.f_aux, 0.5);
    EXPECT_DOUBLE_EQ(fa.period, 50);
    // 30 / 0.75 = 40 <= 50 but 30 / 0.5 = 60 > 50
    auto mid = energy_optimize_interleave(interleaved(50, 30), em);
    EXPECT_EQ(mid.f_aux, 0.75);
    // 45 / 0.75 = 60 > 50: every lower level violates the bound
    auto none = energy_optimize_interleave(interleaved(50, 45), em);
    EXPECT_EQ(none.f_aux, 1);
    auto slack = energy_optimize_interleave(interleaved(50, 45), em, 0.2);
    EXPECT_EQ(slack.f_aux, 0.75);
    auto seq = interleaved(50, 25);
    seq.mode = ExecMode::Sequential;
    EXPECT_THROW(energy_optimize_interleave(seq, em), std::invalid_argument);
}

TEST(Energy, InterleaveMatchesGridEnumeration) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> t(1, 100), slack(0, 0.5);
    const std::vector<double> levels{0.4, 0.5, 0.6, 0.75, 0.9, 1.0};
    for (int i = 0; i < 500; ++i) {
        EnergyModel em;
        em.p_static = t(rng) / 50;
        em.p_dyn = t(rng) / 20;
        em.alpha = 2 + static_cast<double>(rng() % 3) / 2;
        em.f_levels = levels;
        const int p1 = 1 + static_cast<int>(rng() % 20), p2 = 1 + static_cast<int>(rng() % 4);
        auto a = interleaved(t(rng), t(rng), p1, p2);
        const double tol = rng() % 2 ? slack(rng) : 0.0;
        auto got = energy_optimize_interleave(a, em, tol);

        double best = std::numeric_limits<double>::infinity(), bf = 0, ba = 0;
        for (double fp : levels)
            for (double fa : levels) {
                if (std::max(a.t_pr / fp, a.t_aux / fa) > a.period * (1 + tol) * (1 + 1e-12)) continue;
                double e = p1 * (em.p_static + em.p_dyn * std::pow(fp, em.alpha)) * a.t_pr / fp +
                           p2 * (em.p_static + em.p_dyn * std::pow(fa, em.alpha)) * a.t_aux / fa;
                if (e < best * (1 - 1e-12)) {
                    best = e;
                    bf = fp;
                    ba = fa;
                }
            }
        EXPECT_NEAR(got.energy_per_period, best, best * 1e-9);
        EXPECT_EQ(got.f_pr, bf);
        EXPECT_EQ(got.f_aux, ba);
    }
}

TEST(Io, PerfFile) {
    auto perf = parse_perf_file("perf a serial a=3\nperf b perfect a=10 n=2\nperf c amdahl a=5 s=0.5\n"
                                "perf d table (1,100);(2,60);(4,40)\n");
    EXPECT_DOUBLE_EQ(eval_time(perf.at("a"), 7), 3);
    EXPECT_DOUBLE_EQ(eval_time(perf.at("b"), 4), 5);
    EXPECT_DOUBLE_EQ(eval_time(perf.at("c"), 2), 3.75);
    EXPECT_NEAR(eval_time(perf.at("d"), 3), 46.666666666667, 1e-9);
    for (const char* bad : {"perf a serial\n", "perf a serial a=1\nperf a serial a=2\n", "perf a magic a=1\n",
                            "perf a table (1,10);(2,20)\n", "perf a amdahl a=1\n", "nope a serial a=1\n",
                            "perf a serial a=0\n", "perf a table 1,10\n"}) {
        EXPECT_THROW(parse_perf_file(bad), ParseError) << bad;
    }
}

TEST(Io, MachineFile) {
    auto m = parse_machine_file(fixtures::data("cluster.cfg"));
    EXPECT_EQ(m.total_cores(), 64);
    EXPECT_DOUBLE_EQ(m.lambda_core, 1e-6);
    EXPECT_EQ(m.energy.f_levels, (std::vector<double>{0.5, 0.75, 1}));
    EXPECT_DOUBLE_EQ(m.multiplier_of_core(31), 1);
    EXPECT_DOUBLE_EQ(m.multiplier_of_core(32), 3);
    EXPECT_EQ(m.cores_by_reliability().front(), 0);
    for (const char* bad : {"nodes=0\n", "lambda_core=-1\n", "f_levels=0.5\n", "reliability=3-9:2\nnodes=2\n",
                            "nodes=1\nnodes=2\n", "colour=red\n"}) {
        EXPECT_THROW(parse_machine_file(bad), ParseError) << bad;
    }
}

TEST(Io, ReliabilityOrdersCores) {
    MachineModel m = fixtures::machine(4);
    m.nodes = 2;
    m.cores_per_node = 2;
    m.reliability = {{0, 0, 2.0}};
    EXPECT_EQ(m.cores_by_reliability(), (std::vector<int>{2, 3, 0, 1}));
}
