#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace mcp;

namespace {

ParseError parse_error(const std::string& text) {
    try {
        parse_model(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no error for:\n" << text;
    return ParseError(ParseError::Kind::Syntax, 0, 0, "");
}

}  // namespace

TEST(Parse, MinimalModel) {
    auto m = parse_model("submodel smc dt=1d total=30d dx=10um extent=1mm\n");
    EXPECT_EQ(m.name, "model");
    ASSERT_EQ(m.submodels.size(), 1u);
    EXPECT_TRUE(m.couplings.empty());
    EXPECT_DOUBLE_EQ(m.submodels[0].dt, 86400.0);
    EXPECT_DOUBLE_EQ(m.submodels[0].t_total, 30 * 86400.0);
    EXPECT_DOUBLE_EQ(m.submodels[0].dx, 1e-5);
    EXPECT_DOUBLE_EQ(m.submodels[0].x_total, 1e-3);
}

TEST(Parse, Isr3d) {
    auto m = fixtures::isr3d();
    EXPECT_EQ(m.name, "isr3d");
    EXPECT_EQ(m.submodels.size(), 3u);
    EXPECT_EQ(m.couplings.size(), 5u);
    EXPECT_EQ(m.couplings[0], (Coupling{"smc", "bf", CouplingKind::PerCycle, 0}));
    EXPECT_EQ(m.couplings[4].kind, CouplingKind::Init);
}

TEST(Parse, OptionalFields) {
    auto m = parse_model(R"(
# comment line
model demo   # trailing comment
submodel a dt=1ms total=1s dx=1um extent=1mm multiplicity=4 role=replica perf=fast
submodel b dt=1us total=1ms dx=1mm extent=1m multiplicity=dynamic role=micro
couple b -> a kind=final bytes=2048
pattern RC-static
)");
    EXPECT_EQ(m.submodels[0].multiplicity, Multiplicity::fixed(4));
    EXPECT_EQ(m.submodels[0].role_hint, RoleHint::Replica);
    EXPECT_EQ(m.submodels[0].perf, "fast");
    EXPECT_TRUE(m.submodels[1].multiplicity.is_dynamic());
    EXPECT_EQ(m.couplings[0].payload_bytes, 2048u);
    EXPECT_EQ(m.pattern_hint, PatternHint::RCStatic);
}

TEST(Parse, ForwardReferencesResolve) {
    auto m = parse_model("couple a -> b kind=per_cycle\nsubmodel a dt=1s total=2s dx=1m extent=2m\n"
                         "submodel b dt=1s total=2s dx=1m extent=2m\n");
    EXPECT_EQ(m.couplings.size(), 1u);
}

TEST(ParseErrors, DuplicateId) {
    auto e = parse_error("submodel a dt=1s total=2s dx=1m extent=2m\nsubmodel a dt=1s total=2s dx=1m extent=2m\n");
    EXPECT_EQ(e.kind(), ParseError::Kind::DuplicateId);
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 10);
}

TEST(ParseErrors, UnknownEndpoint) {
    auto e = parse_error("submodel a dt=1s total=2s dx=1m extent=2m\ncouple a -> zz kind=init\n");
    EXPECT_EQ(e.kind(), ParseError::Kind::UnknownEndpoint);
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 13);
}

TEST(ParseErrors, NonpositiveScale) {
    auto e = parse_error("submodel a dt=0s total=2s dx=1m extent=2m\n");
    EXPECT_EQ(e.kind(), ParseError::Kind::NonpositiveScale);
    EXPECT_EQ(e.column(), 15);
}

TEST(ParseErrors, Syntax) {
    struct Case {
        const char* text;
        int line, column;
    };
    for (const auto& c : {
             Case{"frobnicate\n", 1, 1},
             Case{"submodel a dt=1 total=2s dx=1m extent=2m\n", 1, 15},
             Case{"submodel a dt=1s total=2s dx=1m extent=2m\ncouple a => a kind=init\n", 2, 10},
             Case{"submodel a dt=1s total=2s dx=1m extent=2m colour=red\n", 1, 43},
             Case{"submodel a dt=1s total=2s dx=1m\n", 1, 32},
             Case{"submodel a dt=1s total=2s dx=1m extent=2m\ncouple a -> a kind=sometimes\n", 2, 20},
             Case{"model a b\n", 1, 9},
             Case{"# only a comment\n", 2, 1},
         }) {
        auto e = parse_error(c.text);
        EXPECT_EQ(e.kind(), ParseError::Kind::Syntax) << c.text;
        EXPECT_EQ(e.line(), c.line) << c.text;
        EXPECT_EQ(e.column(), c.column) << c.text;
    }
}

TEST(ParseErrors, MessageCarriesPosition) {
    auto e = parse_error("submodel a dt=1s total=2s dx=1m extent=2m\nsubmodel a dt=1s total=2s dx=1m extent=2m\n");
    EXPECT_EQ(std::string(e.what()).rfind("line 2:10: ", 0), 0u);
}

TEST(SourceMap, LinesOfDeclarations) {
    auto p = parse_model_source("\nmodel x\nsubmodel a dt=1s total=2s dx=1m extent=2m\n\ncouple a -> a kind=init\n");
    EXPECT_EQ(p.lines.model_line, 2);
    EXPECT_EQ(p.lines.submodel_lines, std::vector<int>{3});
    EXPECT_EQ(p.lines.coupling_lines, std::vector<int>{5});
    auto d = validate_model(p.model);
    ASSERT_FALSE(d.empty());
    EXPECT_EQ(p.lines.line_of(d.front()), 5);
}

TEST(RoundTrip, RenderThenParseIsIdentity) {
    std::mt19937_64 rng(2024);
    const RoleHint roles[] = {RoleHint::Primary, RoleHint::Auxiliary, RoleHint::Macro, RoleHint::Micro,
                              RoleHint::Replica, RoleHint::Master, RoleHint::None};
    for (int i = 0; i < 1000; ++i) {
        auto m = fixtures::random_valid_model(rng);
        for (auto& s : m.submodels) {
            if (rng() % 3 == 0) s.role_hint = roles[rng() % 7];
            if (rng() % 3 == 0) s.perf = "p" + std::to_string(rng() % 5);
            s.dt *= 1.0 / 3.0;  // not a short decimal
        }
        if (rng() % 2) m.pattern_hint = PatternHint::Auto;
        EXPECT_EQ(parse_model(render_model(m)), m) << render_model(m);
    }
}

TEST(RoundTrip, ExampleFiles) {
    for (const char* f : {"isr3d.mmd", "suspension_es.mmd", "suspension_hmc.mmd", "ensemble.mmd", "pr_aux.mmd"}) {
        auto m = parse_model(fixtures::data(f));
        EXPECT_EQ(parse_model(render_model(m)), m) << f;
    }
}
