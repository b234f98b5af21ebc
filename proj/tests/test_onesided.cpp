#include <catch2/catch_amalgamated.hpp>

#include <matchkit/onesided.hpp>

#include <set>

#include "test_helpers.hpp"

using namespace matchkit;

namespace {

// All fixed-first-dictator picking orders at n=3: the only reachable state
// with a real choice is "first dictator stayed single", where either remaining
// agent may act second.
std::vector<MechanismTable> all_sd3() {
    std::vector<MechanismTable> out;
    Instance inst = Instance::one_sided(3);
    for (AgentId first = 0; first < 3; ++first) {
        for (AgentId second : {0, 1}) {
            std::vector<AgentId> others;
            for (AgentId a = 0; a < 3; ++a)
                if (a != first) others.push_back(a);
            std::vector<AgentId> order{first, others[second], others[1 - second]};
            out.push_back(sd_table(inst, order));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("run_sd basics") {
    Instance inst = Instance::one_sided(3);
    SequentialDictatorship sd{PickingOrder::fixed({0, 1, 2})};

    SECTION("dictator takes their top choice") {
        Profile p(inst, {{1, 2, 0}, {0, 1, 2}, {0, 1, 2}});
        CHECK(run_sd(sd, p) == fixtures::pairs(inst, {{0, 1}}));
    }
    SECTION("unanimous singles stay single under every order") {
        Profile p(inst, {{0, 1, 2}, {1, 0, 2}, {2, 0, 1}});
        std::vector<AgentId> order{0, 1, 2};
        do {
            SequentialDictatorship s{PickingOrder::fixed(order)};
            CHECK(run_sd(s, p) == fixtures::pairs(inst, {}));
        } while (std::next_permutation(order.begin(), order.end()));
    }
    SECTION("the counterexample profile: agent 1 grabs 2, agent 3 left single") {
        // 1: 2,3,1 / 2: 3,1,2 / 3: 1,2,3
        Profile p(inst, {{1, 2, 0}, {2, 0, 1}, {0, 1, 2}});
        CHECK(run_sd(sd, p) == fixtures::pairs(inst, {{0, 1}}));
    }
    SECTION("two-sided profiles are rejected") {
        CHECK_THROWS_AS(run_sd(sd, fixtures::cyclic3()), Error);
    }
}

TEST_CASE("run_sd reports picking-order domain gaps") {
    Instance inst = Instance::one_sided(3);
    // table only defines the first pick
    Submatching empty = Submatching::empty(inst);
    SequentialDictatorship sd{PickingOrder::from_table(inst, {{empty, 0}})};
    Profile p(inst, {{0, 1, 2}, {1, 0, 2}, {1, 0, 2}});  // 0 goes single, gap next
    try {
        run_sd(sd, p);
        FAIL("expected DomainGapError");
    } catch (const DomainGapError& e) {
        CHECK(e.submatching_key == "(1)");
    }
}

TEST_CASE("sequential dictatorships are efficient and group strategy-proof at n=3") {
    for (const auto& f : all_sd3()) {
        CHECK(check_efficiency(f).holds);
        CHECK(check_group_sp(f, Coalitions::UpToTwo).holds);
        CHECK(check_group_sp(f, Coalitions::All).holds);
    }
}

TEST_CASE("two-agent rules") {
    Instance inst = Instance::one_sided(2);
    Profile both_want(inst, {{1, 0}, {0, 1}});
    Profile disagree(inst, {{1, 0}, {1, 0}});  // 1 wants 2, 2 wants single
    Matching paired = fixtures::pairs(inst, {{0, 1}});
    Matching single = fixtures::pairs(inst, {});

    SECTION("unanimous agreement wins under every rule") {
        for (auto rule : {TwoAgentRule::dictatorship(0), TwoAgentRule::dictatorship(1),
                          TwoAgentRule::unanimity(true), TwoAgentRule::unanimity(false)})
            CHECK(run_two_agent(rule, both_want) == paired);
    }
    SECTION("disagreement resolved by the dictator") {
        CHECK(run_two_agent(TwoAgentRule::dictatorship(0), disagree) == paired);
        CHECK(run_two_agent(TwoAgentRule::dictatorship(1), disagree) == single);
    }
    SECTION("disagreement keeps the unanimity default") {
        CHECK(run_two_agent(TwoAgentRule::unanimity(false), disagree) == single);
        CHECK(run_two_agent(TwoAgentRule::unanimity(true), disagree) == paired);
    }
    SECTION("wrong instance size") {
        Profile p3(Instance::one_sided(3), {{0, 1, 2}, {1, 0, 2}, {2, 0, 1}});
        CHECK_THROWS_AS(run_two_agent(TwoAgentRule::dictatorship(0), p3), Error);
    }
}

TEST_CASE("the full two-agent mechanism space leaves exactly the four rules") {
    Instance inst = Instance::one_sided(2);
    ProfileSpace space(inst);
    MatchingSpace ms(inst);
    REQUIRE(space.total() == 4);
    REQUIRE(ms.size() == 2);

    std::vector<std::vector<int32_t>> survivors;
    for (uint32_t code = 0; code < 16; ++code) {
        std::vector<int32_t> outcomes(4);
        for (int i = 0; i < 4; ++i) outcomes[i] = (code >> i) & 1;
        MechanismTable f = MechanismTable::from_outcomes(inst, "t" + std::to_string(code),
                                                         outcomes);
        if (check_efficiency(f).holds && check_group_sp(f, Coalitions::All).holds)
            survivors.push_back(outcomes);
    }
    REQUIRE(survivors.size() == 4);

    auto outcomes_of = [&](const MechanismTable& t) {
        std::vector<int32_t> o;
        for (uint64_t i = 0; i < 4; ++i) o.push_back(t.outcome_index(i));
        return o;
    };
    std::set<std::vector<int32_t>> named;
    for (auto rule : {TwoAgentRule::dictatorship(0), TwoAgentRule::dictatorship(1),
                      TwoAgentRule::unanimity(true), TwoAgentRule::unanimity(false)}) {
        auto o = outcomes_of(two_agent_table(rule));
        CHECK(std::find(survivors.begin(), survivors.end(), o) != survivors.end());
        named.insert(o);
    }
    // set equality: the four rules are pairwise distinct and cover the survivors
    CHECK(named.size() == 4);
    CHECK(named == std::set<std::vector<int32_t>>(survivors.begin(), survivors.end()));
}

TEST_CASE("restricting a serial dictatorship drops the agent from the order") {
    SECTION("remove the last dictator of 1,2,3,4") {
        MechanismTable f = sd_table(Instance::one_sided(4), {0, 1, 2, 3});
        std::vector<AgentId> labels;
        MechanismTable g = restrict_mechanism(f, {3}, &labels);
        CHECK(labels == std::vector<AgentId>{0, 1, 2});
        CHECK(g.same_table(sd_table(Instance::one_sided(3), {0, 1, 2})));
    }
    SECTION("remove the first dictator of 1,2,3") {
        MechanismTable f = sd_table(Instance::one_sided(3), {0, 1, 2});
        std::vector<AgentId> labels;
        MechanismTable g = restrict_mechanism(f, {0}, &labels);
        CHECK(labels == std::vector<AgentId>{1, 2});
        CHECK(g.same_table(sd_table(Instance::one_sided(2), {0, 1})));
    }
    SECTION("remove the pair {2,3} from 1,2,3,4") {
        MechanismTable f = sd_table(Instance::one_sided(4), {0, 1, 2, 3});
        std::vector<AgentId> labels;
        MechanismTable g = restrict_mechanism(f, {1, 2}, &labels);
        CHECK(labels == std::vector<AgentId>{0, 3});
        CHECK(g.same_table(sd_table(Instance::one_sided(2), {0, 1})));
    }
    SECTION("every single and pair removal from a fixed SD yields an SD") {
        MechanismTable f = sd_table(Instance::one_sided(4), {0, 1, 2, 3});
        for (AgentId j = 0; j < 4; ++j) {
            std::vector<AgentId> rest;
            for (AgentId a = 0; a < 4; ++a)
                if (a != j) rest.push_back(a);
            MechanismTable g = restrict_mechanism(f, {j});
            // expected order: surviving agents in original dictator order,
            // renamed to the compact ids
            std::vector<AgentId> expect_order;
            for (AgentId a : {0, 1, 2, 3})
                if (a != j)
                    expect_order.push_back(static_cast<AgentId>(
                        std::find(rest.begin(), rest.end(), a) - rest.begin()));
            CHECK(g.same_table(sd_table(Instance::one_sided(3), expect_order)));
        }
        for (AgentId j = 0; j < 4; ++j)
            for (AgentId k = j + 1; k < 4; ++k) {
                MechanismTable g = restrict_mechanism(f, {j, k});
                CHECK(g.same_table(sd_table(Instance::one_sided(2), {0, 1})));
            }
    }
}

TEST_CASE("restriction reports ill-defined cases") {
    // A mechanism that peeks at agent 3's tail ranking: extensions that only
    // differ below 3's top disagree, so the restriction cannot exist.
    Instance inst = Instance::one_sided(3);
    MechanismTable f = MechanismTable::from_function(inst, "peeking", [inst](const Profile& p) {
        if (p.prefers(2, 0, 1)) return matching_from_pairs(inst, {{0, 1}});
        return matching_from_pairs(inst, {});
    });
    CHECK_THROWS_AS(restrict_mechanism(f, {2}), RestrictionWitness);
}

TEST_CASE("no sequential dictatorship is individually rational") {
    for (const auto& f : all_sd3()) {
        AxiomReport rep = check_ir(f);
        CHECK_FALSE(rep.holds);
        REQUIRE(rep.witness.has_value());
        CHECK(revalidate(rep, f));
    }
}
