#include <catch2/catch_amalgamated.hpp>

#include <matchkit/onesided.hpp>
#include <matchkit/twosided.hpp>

#include "test_helpers.hpp"

using namespace matchkit;

namespace {

MechanismTable four_table(const FourAgentMechanism& f, const std::string& name) {
    return MechanismTable::from_function(Instance::two_sided(2), name,
                                         [f](const Profile& p) { return evaluate_four(f, p); });
}

}  // namespace

TEST_CASE("run_royalty on the cyclic profile") {
    Instance inst = Instance::two_sided(3);
    Profile p = fixtures::cyclic3();
    MechanismTable f = uniform_royalty_table(inst, Regime::MatchedByDefault, 1,
                                             FourAgentMechanism::matched_by_default(), "mbd");
    // royals (m1,w1): neither tops the other, so m1 takes w3 and w1 takes m3
    CHECK(f(p) == fixtures::pairs(inst, {{0, 5}, {3, 2}, {1, 4}}));
}

TEST_CASE("two couples go straight to the terminal rule") {
    Instance inst = Instance::two_sided(2);
    for (const auto& terminal :
         {FourAgentMechanism::matched_by_default(), FourAgentMechanism::quota(4),
          FourAgentMechanism::unmatched_by_default()}) {
        MechanismTable royalty =
            uniform_royalty_table(inst, Regime::MatchedByDefault, 1, terminal, "t");
        CHECK(royalty.same_table(four_table(terminal, "direct")));
    }
}

TEST_CASE("royals who top-rank each other marry under either regime") {
    Instance inst = Instance::two_sided(3);
    // m1 and w1 top each other; everyone else prefers their own couple too
    Profile p(inst, {{3, 4, 5}, {4, 3, 5}, {5, 3, 4}, {0, 1, 2}, {1, 0, 2}, {2, 0, 1}});
    for (Regime reg : {Regime::MatchedByDefault, Regime::UnmatchedByDefault}) {
        MechanismTable f = uniform_royalty_table(inst, reg, 1,
                                                 FourAgentMechanism::matched_by_default(), "mbd");
        CHECK(f(p)(0) == 3);
    }
}

TEST_CASE("royalty domain gaps are reported with the submatching") {
    Instance inst = Instance::two_sided(3);
    RoyaltyMechanism broken{
        inst,
        SuccessionOrder{[](const Submatching&) -> std::optional<RoyalStep> { return std::nullopt; },
                        "empty"},
        TerminalCondition{
            [](const Submatching&) -> std::optional<FourAgentAssignment> { return std::nullopt; },
            "empty"},
        "broken"};
    CHECK_THROWS_AS(run_royalty(broken, fixtures::cyclic3()), DomainGapError);
    CHECK_THROWS_AS(validate_royalty_domain(broken), DomainGapError);

    // succession order defined, terminal missing: the gap is the married state
    RoyaltyMechanism half{
        inst,
        SuccessionOrder{[](const Submatching&) -> std::optional<RoyalStep> {
                            return RoyalStep{0, 3, Regime::MatchedByDefault};
                        },
                        "couple 1"},
        TerminalCondition{
            [](const Submatching&) -> std::optional<FourAgentAssignment> { return std::nullopt; },
            "empty"},
        "half"};
    try {
        validate_royalty_domain(half);
        FAIL("expected DomainGapError");
    } catch (const DomainGapError& e) {
        CHECK(e.submatching_key == "(m1,w1)");
    }
}

TEST_CASE("neutral royalty spec validation") {
    CHECK_THROWS_AS(NeutralRoyaltySpec::node(3, 5, Regime::MatchedByDefault,
                                             NeutralRoyaltySpec::base(
                                                 FourAgentMechanism::matched_by_default()),
                                             {}, {}),
                    Error);
    // n=4 requires every symmetric and asymmetric branch
    CHECK_THROWS_WITH(
        NeutralRoyaltySpec::node(
            4, 1, Regime::MatchedByDefault,
            NeutralRoyaltySpec::uniform(3, Regime::MatchedByDefault, 1,
                                        FourAgentMechanism::matched_by_default()),
            {}, {}),
        Catch::Matchers::ContainsSubstring("missing symmetric cross"));
    // spec size must match the instance
    auto spec3 = NeutralRoyaltySpec::uniform(3, Regime::MatchedByDefault, 1,
                                             FourAgentMechanism::matched_by_default());
    CHECK_THROWS_AS(build_neutral_royalty(Instance::two_sided(4), spec3), Error);
}

TEST_CASE("neutral royalty mechanisms are weakly gender-neutral at n=3") {
    Instance inst = Instance::two_sided(3);
    Symmetry sigma = Symmetry::canonical(inst);
    auto catalog = catalog_valid_four();
    std::vector<MechanismTable> sample;
    sample.push_back(uniform_royalty_table(inst, Regime::MatchedByDefault, 1,
                                           FourAgentMechanism::matched_by_default(), "mbd"));
    sample.push_back(uniform_royalty_table(inst, Regime::UnmatchedByDefault, 2,
                                           FourAgentMechanism::quota(4), "quota4"));
    sample.push_back(uniform_royalty_table(inst, Regime::MatchedByDefault, 3, catalog[7], "c7"));
    for (const auto& f : sample) {
        AxiomReport rep = check_weak_gn(f, sigma);
        CHECK(rep.holds);
        CHECK(rep.profiles_checked == 46656);
    }
}

TEST_CASE("on symmetric profiles the outcome is symmetric") {
    Instance inst = Instance::two_sided(3);
    Symmetry sigma = Symmetry::canonical(inst);
    MechanismTable f = uniform_royalty_table(inst, Regime::MatchedByDefault, 1,
                                             FourAgentMechanism::matched_by_default(), "mbd");
    ProfileSpace men_space(Instance::one_sided(3));
    int count = 0;
    // symmetric profiles are exactly the lifts of one-sided profiles
    for (uint64_t idx = 0; idx < men_space.total(); ++idx) {
        Profile q = men_space.decode(idx);
        std::vector<std::vector<AgentId>> rks(6);
        for (AgentId j = 0; j < 3; ++j)
            for (AgentId e : q.ranking(j)) {
                rks[j].push_back(e + 3);
                rks[j + 3].push_back(e);
            }
        Profile lifted(inst, rks);
        REQUIRE(is_symmetric(sigma, lifted));
        CHECK(reflect_matching(sigma, f(lifted)) == f(lifted));
        ++count;
    }
    CHECK(count == 216);
}

TEST_CASE("a four-couple neutral royalty mechanism builds and runs") {
    Instance inst = Instance::two_sided(4);
    auto spec = NeutralRoyaltySpec::uniform(4, Regime::MatchedByDefault, 1,
                                            FourAgentMechanism::matched_by_default());
    RoyaltyMechanism mech = build_neutral_royalty(inst, spec, "all_D_n4");
    MechanismTable f = royalty_table(mech);

    // mutual-top couples marry all the way down
    std::vector<std::vector<AgentId>> diag(8);
    for (AgentId j = 0; j < 4; ++j) {
        for (AgentId e = 0; e < 4; ++e) {
            diag[j].push_back(((j + e) % 4) + 4);
            diag[j + 4].push_back((j + e) % 4);
        }
    }
    Profile p(inst, diag);
    Matching mu = f(p);
    for (AgentId j = 0; j < 4; ++j) CHECK(mu(j) == j + 4);

    // reflecting the spec through sigma changes nothing observable
    AxiomReport rep = check_weak_gn(f, Symmetry::canonical(inst), CheckMode::Sample(400, 99));
    CHECK(rep.holds);
    CHECK(rep.profiles_checked == 400);
}

TEST_CASE("induced one-sided mechanisms of the two-couple terminals") {
    Instance inst = Instance::two_sided(2);
    Symmetry sigma = Symmetry::canonical(inst);
    auto induced_of = [&](const FourAgentMechanism& fm) {
        return induced_one_sided(four_table(fm, fm.to_string()), sigma);
    };
    // the royal defaults collapse to couple 1 dictating; the quota rules give
    // the two unanimity defaults
    CHECK(induced_of(FourAgentMechanism::matched_by_default())
              .same_table(two_agent_table(TwoAgentRule::dictatorship(0))));
    CHECK(induced_of(FourAgentMechanism::unmatched_by_default())
              .same_table(two_agent_table(TwoAgentRule::dictatorship(0))));
    CHECK(induced_of(FourAgentMechanism::quota(1))
              .same_table(two_agent_table(TwoAgentRule::unanimity(false))));
    CHECK(induced_of(FourAgentMechanism::quota(4))
              .same_table(two_agent_table(TwoAgentRule::unanimity(true))));
    FourAgentMechanism case_b{{0b1101, 0b0111, 0b1010}};
    CHECK(induced_of(case_b.canonical())
              .same_table(two_agent_table(TwoAgentRule::dictatorship(1))));
}

TEST_CASE("induced mechanism of the all-D royalty is the serial dictatorship") {
    Instance inst = Instance::two_sided(3);
    MechanismTable f = uniform_royalty_table(inst, Regime::MatchedByDefault, 1,
                                             FourAgentMechanism::matched_by_default(), "mbd");
    MechanismTable g = induced_one_sided(f, Symmetry::canonical(inst));
    CHECK(g.same_table(sd_table(Instance::one_sided(3), {0, 1, 2})));
}

TEST_CASE("induced mechanisms inherit efficiency and group strategy-proofness") {
    Instance inst = Instance::two_sided(3);
    Symmetry sigma = Symmetry::canonical(inst);
    auto catalog = catalog_valid_four();
    for (size_t t : {size_t(0), size_t(9), size_t(25)}) {
        MechanismTable f = uniform_royalty_table(inst, Regime::UnmatchedByDefault, 2,
                                                 catalog[t], "cat" + std::to_string(t));
        MechanismTable g = induced_one_sided(f, sigma);
        CHECK(check_efficiency(g).holds);
        CHECK(check_group_sp(g, Coalitions::All).holds);
    }
}

TEST_CASE("induced mechanism rejects sources that break the reflection identity") {
    Instance inst = Instance::two_sided(2);
    MechanismTable men_sd = MechanismTable::from_function(inst, "men-sd", [](const Profile& p) {
        std::vector<char> alive(4, 1);
        AgentId w1 = p.favorite(0, alive);
        alive[w1] = 0;
        AgentId w2 = p.favorite(1, alive);
        return matching_from_pairs(p.instance(), {{0, w1}, {1, w2}});
    });
    CHECK_THROWS_WITH(induced_one_sided(men_sd, Symmetry::canonical(inst)),
                      Catch::Matchers::ContainsSubstring("not weakly gender-neutral"));
}

TEST_CASE("two-sided serial dictatorship") {
    Profile p = fixtures::cyclic3();
    Instance inst = p.instance();
    SECTION("men picking first reach the men-optimal matching") {
        CHECK(run_sd_two_sided({0, 1, 2, 3, 4, 5}, p) ==
              fixtures::pairs(inst, {{0, 5}, {1, 3}, {2, 4}}));
    }
    SECTION("a single couple is forced") {
        Instance one = Instance::two_sided(1);
        Profile q(one, {{1}, {0}});
        CHECK(run_sd_two_sided({0, 1}, q) == fixtures::pairs(one, {{0, 1}}));
        CHECK(run_sd_two_sided({1, 0}, q) == fixtures::pairs(one, {{0, 1}}));
    }
    SECTION("the order must cover all agents exactly once") {
        CHECK_THROWS_AS(run_sd_two_sided({0, 1, 2}, p), Error);
        CHECK_THROWS_AS(run_sd_two_sided({0, 0, 2, 3, 4, 5}, p), Error);
    }
}

TEST_CASE("stable matchings") {
    SECTION("the cyclic profile has exactly the two optimal stable matchings") {
        Profile p = fixtures::cyclic3();
        Instance inst = p.instance();
        auto stable = stable_matchings(p);
        Matching m_opt = fixtures::pairs(inst, {{0, 5}, {1, 3}, {2, 4}});
        Matching w_opt = fixtures::pairs(inst, {{0, 4}, {1, 5}, {2, 3}});
        REQUIRE(stable.size() == 2);
        CHECK(((stable[0] == m_opt && stable[1] == w_opt) ||
               (stable[0] == w_opt && stable[1] == m_opt)));
        Symmetry sigma = Symmetry::canonical(inst);
        CHECK(reflect_matching(sigma, m_opt) != m_opt);
        CHECK(reflect_matching(sigma, w_opt) != w_opt);
    }
    SECTION("mutual tops force the unique stable matching") {
        Instance inst = Instance::two_sided(3);
        Profile p(inst, {{3, 4, 5}, {4, 3, 5}, {5, 3, 4}, {0, 1, 2}, {1, 0, 2}, {2, 0, 1}});
        auto stable = stable_matchings(p);
        REQUIRE(stable.size() == 1);
        CHECK(stable[0] == fixtures::pairs(inst, {{0, 3}, {1, 4}, {2, 5}}));
    }
    SECTION("one couple") {
        Instance inst = Instance::two_sided(1);
        Profile p(inst, {{1}, {0}});
        CHECK(stable_matchings(p).size() == 1);
    }
}

TEST_CASE("the index-comparison mechanism") {
    Instance inst = Instance::two_sided(3);
    MechanismTable f = index_comparison_table(inst);

    SECTION("mutual-top couples marry in order") {
        Profile p(inst, {{3, 4, 5}, {4, 3, 5}, {5, 3, 4}, {0, 1, 2}, {1, 0, 2}, {2, 0, 1}});
        CHECK(f(p) == fixtures::pairs(inst, {{0, 3}, {1, 4}, {2, 5}}));
    }
    SECTION("weakly gender-neutral over all profiles") {
        CHECK(check_weak_gn(f, Symmetry::canonical(inst)).holds);
    }
    SECTION("but not gender-neutral: a dictatorship continuation exists") {
        AxiomReport rep = check_gn(f);
        CHECK_FALSE(rep.holds);
        REQUIRE(rep.witness.has_value());
        CHECK(revalidate(rep, f));
    }
    SECTION("at four couples the women-dictatorship continuation is explicit") {
        Instance inst4 = Instance::two_sided(4);
        MechanismTable f4 = index_comparison_table(inst4);
        // after m1 -> w3 and w1 -> m2, the remaining {m3,m4,w2,w4} are matched
        // by the women in index order
        auto g = continuation_submechanism(
            f4, {2, 3, 5, 7}, {{6, 4, 5, 7}, {4, 5, 6, 7}, {1, 0, 2, 3}, {0, 1, 2, 3}});
        REQUIRE(g.has_value());
        Instance sub = g->instance();
        MechanismTable women_sd = MechanismTable::from_function(
            sub, "women-sd", [](const Profile& p) {
                std::vector<char> alive(4, 1);
                AgentId m1 = p.favorite(2, alive);
                alive[m1] = 0;
                AgentId m2 = p.favorite(3, alive);
                return matching_from_pairs(p.instance(), {{2, m1}, {3, m2}});
            });
        CHECK(g->same_table(women_sd));
        for (const auto& sp : detail::all_side_symmetries(sub))
            CHECK_FALSE(check_weak_gn(*g, sp).holds);
    }
}

TEST_CASE("the continuation scan separates the two royal regimes at n=3") {
    Instance inst = Instance::two_sided(3);
    SECTION("matched-by-default royal steps leave no asymmetric continuation") {
        // Either royal can force the marriage, so fixing the other royal's
        // ranking outside a candidate set always lets some member ranking
        // break the set's internal matching: no continuation survives that
        // could single out one side.
        for (int first : {1, 2, 3}) {
            MechanismTable f = uniform_royalty_table(
                inst, Regime::MatchedByDefault, first,
                FourAgentMechanism::matched_by_default(), "mbd");
            CHECK(check_gn(f).holds);
        }
    }
    SECTION("unmatched-by-default royal steps concede a dictatorship continuation") {
        // When the royal left outside the set declines the marriage, the
        // member royal cannot force it and simply dictates among the set's
        // partners; that continuation treats the sides asymmetrically.
        MechanismTable f = uniform_royalty_table(inst, Regime::UnmatchedByDefault, 3,
                                                 FourAgentMechanism::quota(1), "quota1");
        AxiomReport rep = check_gn(f);
        CHECK_FALSE(rep.holds);
        REQUIRE(rep.witness.has_value());
        CHECK(revalidate(rep, f));
        auto g = continuation_submechanism(f, rep.witness->subset,
                                           rep.witness->outsider_rankings);
        REQUIRE(g.has_value());
        // the member royal (m3) picks, the other man takes the leftover
        MechanismTable royal_dictates = MechanismTable::from_function(
            g->instance(), "royal-dictates", [](const Profile& p) {
                std::vector<char> alive(4, 1);
                AgentId pick = p.favorite(1, alive);
                return matching_from_pairs(p.instance(),
                                           {{1, pick}, {0, pick == 2 ? 3 : 2}});
            });
        CHECK(g->same_table(royal_dictates));
    }
}

TEST_CASE("no royalty mechanism is stable, while a stable selector is") {
    Instance inst = Instance::two_sided(3);
    SECTION("every sampled neutral royalty mechanism admits a blocking pair somewhere") {
        for (int r = 1; r <= 3; ++r)
            for (Regime reg : {Regime::MatchedByDefault, Regime::UnmatchedByDefault}) {
                MechanismTable f = uniform_royalty_table(
                    inst, reg, r, FourAgentMechanism::matched_by_default(), "mbd");
                AxiomReport rep = check_stability(f);
                CHECK_FALSE(rep.holds);
                REQUIRE(rep.witness.has_value());
                CHECK(revalidate(rep, f));
            }
    }
    SECTION("returning the first stable matching everywhere is stable") {
        MechanismTable f = MechanismTable::from_function(
            inst, "stable-selector",
            [](const Profile& p) { return stable_matchings(p).front(); });
        CHECK(check_stability(f).holds);
    }
    SECTION("the matched-by-default rule at n=2: the scan decides, witnesses replay") {
        Instance two = Instance::two_sided(2);
        MechanismTable f = MechanismTable::from_function(
            two, "mbd", [](const Profile& p) {
                return evaluate_four(FourAgentMechanism::matched_by_default(), p);
            });
        AxiomReport rep = check_stability(f);
        if (!rep.holds) {
            REQUIRE(rep.witness.has_value());
            CHECK(revalidate(rep, f));
        }
        CHECK(rep.profiles_checked == 16);
    }
}
