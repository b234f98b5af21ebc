#pragma once

// JSON wire formats: profiles (1-based partner lists, descending preference),
// matchings, axiom reports, allocation matrices, picking orders and
// submatching-keyed royalty decision trees. Parsers reject malformed input
// with position-precise messages.

#include "axioms.hpp"
#include "core.hpp"
#include "onesided.hpp"
#include "random.hpp"
#include "twosided.hpp"

#include <json.hpp>

namespace matchkit {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Profiles
//
//   {"kind":"two_sided","n":3,"men":[[3,2,1],...],"women":[[3,2,1],...]}
//   {"kind":"one_sided","n":3,"agents":[[2,3,1],...]}
//
// Inner lists hold 1-based partner indices in descending preference; in the
// one-sided format an agent's own index means "stay single".

namespace jsondetail {

inline std::vector<AgentId> parse_ranking_list(const Json& list, const std::string& where,
                                               int n, int id_offset) {
    if (!list.is_array())
        throw ParseError(where + ": expected a list of partner indices");
    if (static_cast<int>(list.size()) != n)
        throw ParseError(where + ": expected " + std::to_string(n) + " entries, got " +
                         std::to_string(list.size()));
    std::vector<AgentId> out;
    std::vector<char> seen(n, 0);
    for (size_t k = 0; k < list.size(); ++k) {
        const std::string at = where + "[" + std::to_string(k) + "]";
        if (!list[k].is_number_integer()) throw ParseError(at + ": expected an integer");
        int v = list[k].get<int>();
        if (v < 1 || v > n)
            throw ParseError(at + ": value " + std::to_string(v) + " out of range [1," +
                             std::to_string(n) + "]");
        if (seen[v - 1])
            throw ParseError(at + ": not a permutation, value " + std::to_string(v) +
                             " repeated");
        seen[v - 1] = 1;
        out.push_back(v - 1 + id_offset);
    }
    return out;
}

}  // namespace jsondetail

inline Profile parse_profile_json(const Json& j) {
    if (!j.is_object()) throw ParseError("profile: expected a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ParseError("profile.kind: expected \"two_sided\" or \"one_sided\"");
    std::string kind = j["kind"].get<std::string>();
    if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<int>() < 1)
        throw ParseError("profile.n: expected a positive integer");
    int n = j["n"].get<int>();

    if (kind == "two_sided") {
        for (const char* side : {"men", "women"}) {
            if (!j.contains(side) || !j[side].is_array() ||
                static_cast<int>(j[side].size()) != n)
                throw ParseError(std::string("profile.") + side + ": expected " +
                                 std::to_string(n) + " ranking lists");
        }
        Instance inst = Instance::two_sided(n);
        std::vector<std::vector<AgentId>> rankings(2 * n);
        for (int i = 0; i < n; ++i) {
            rankings[i] = jsondetail::parse_ranking_list(
                j["men"][i], "men[" + std::to_string(i) + "]", n, n);
            rankings[n + i] = jsondetail::parse_ranking_list(
                j["women"][i], "women[" + std::to_string(i) + "]", n, 0);
        }
        return Profile(inst, std::move(rankings));
    }
    if (kind == "one_sided") {
        if (!j.contains("agents") || !j["agents"].is_array() ||
            static_cast<int>(j["agents"].size()) != n)
            throw ParseError("profile.agents: expected " + std::to_string(n) +
                             " ranking lists");
        Instance inst = Instance::one_sided(n);
        std::vector<std::vector<AgentId>> rankings(n);
        for (int i = 0; i < n; ++i)
            rankings[i] = jsondetail::parse_ranking_list(
                j["agents"][i], "agents[" + std::to_string(i) + "]", n, 0);
        return Profile(inst, std::move(rankings));
    }
    throw ParseError("profile.kind: unknown kind \"" + kind + "\"");
}

inline Profile parse_profile_text(const std::string& text) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("profile: invalid JSON");
    return parse_profile_json(j);
}

inline Json profile_to_json(const Profile& p) {
    const Instance& inst = p.instance();
    Json j;
    j["n"] = inst.n;
    if (inst.two_sided()) {
        j["kind"] = "two_sided";
        Json men = Json::array(), women = Json::array();
        for (AgentId a = 0; a < inst.n; ++a) {
            Json r = Json::array();
            for (AgentId q : p.ranking(a)) r.push_back(q - inst.n + 1);
            men.push_back(r);
        }
        for (AgentId a = inst.n; a < 2 * inst.n; ++a) {
            Json r = Json::array();
            for (AgentId q : p.ranking(a)) r.push_back(q + 1);
            women.push_back(r);
        }
        j["men"] = men;
        j["women"] = women;
    } else {
        j["kind"] = "one_sided";
        Json agents = Json::array();
        for (AgentId a = 0; a < inst.n; ++a) {
            Json r = Json::array();
            for (AgentId q : p.ranking(a)) r.push_back(q + 1);
            agents.push_back(r);
        }
        j["agents"] = agents;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Matchings and matrices

inline Json matching_to_json(const Instance& inst, const Matching& mu) {
    Json pairs = Json::array();
    for (auto [a, b] : mu.pairs())
        pairs.push_back(Json::array({inst.agent_name(a), inst.agent_name(b)}));
    Json singles = Json::array();
    for (AgentId s : mu.singles()) singles.push_back(inst.agent_name(s));
    Json map = Json::object();
    for (AgentId a = 0; a < inst.agent_count(); ++a)
        map[inst.agent_name(a)] = inst.agent_name(mu(a));
    Json j;
    j["pairs"] = pairs;
    if (!inst.two_sided()) j["singles"] = singles;
    j["map"] = map;
    return j;
}

inline Json matrix_to_json(const Instance& inst, const RationalMatrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.n; ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.n; ++j) row.push_back(m.at(i, j).to_string());
        rows.push_back(row);
    }
    Json j;
    j["n"] = m.n;
    j["rows"] = rows;
    Json men = Json::array(), women = Json::array();
    for (int i = 0; i < m.n; ++i) {
        men.push_back(inst.agent_name(i));
        women.push_back(inst.agent_name(inst.n + i));
    }
    j["row_agents"] = men;
    j["column_agents"] = women;
    return j;
}

inline RationalMatrix parse_matrix_json(const Json& j) {
    if (!j.contains("n") || !j.contains("rows")) throw ParseError("matrix: need n and rows");
    int n = j["n"].get<int>();
    RationalMatrix m = RationalMatrix::zero(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            m.at(i, k) = Rat::parse(j["rows"][i][k].get<std::string>());
    return m;
}

// ---------------------------------------------------------------------------
// Axiom reports

inline Json witness_to_json(const Witness& wit, const MechanismTable& f) {
    const Instance& inst = f.instance();
    Json j;
    if (wit.profile_index) {
        j["profile_index"] = *wit.profile_index;
        j["profile"] = profile_to_json(f.space().decode(*wit.profile_index));
    }
    if (!wit.coalition.empty()) {
        Json c = Json::array();
        for (AgentId a : wit.coalition) c.push_back(inst.agent_name(a));
        j["coalition"] = c;
        Json mis = Json::array();
        for (const auto& r : wit.misreport) {
            Json row = Json::array();
            for (AgentId q : r) row.push_back(inst.agent_name(q));
            mis.push_back(row);
        }
        j["misreport"] = mis;
    }
    if (wit.outcome_before)
        j["outcome"] = matching_to_json(inst, f.matchings().at(*wit.outcome_before));
    if (wit.outcome_after)
        j["outcome_after_deviation"] =
            matching_to_json(inst, f.matchings().at(*wit.outcome_after));
    if (wit.dominating)
        j["dominating"] = matching_to_json(inst, f.matchings().at(*wit.dominating));
    if (wit.blocking_pair)
        j["blocking_pair"] = Json::array({inst.agent_name(wit.blocking_pair->first),
                                          inst.agent_name(wit.blocking_pair->second)});
    if (wit.agent) j["agent"] = inst.agent_name(*wit.agent);
    if (!wit.subset.empty()) {
        Json s = Json::array();
        for (AgentId a : wit.subset) s.push_back(inst.agent_name(a));
        j["continuation_set"] = s;
        Json o = Json::array();
        for (const auto& r : wit.outsider_rankings) {
            Json row = Json::array();
            for (AgentId q : r) row.push_back(inst.agent_name(q));
            o.push_back(row);
        }
        j["outsider_rankings"] = o;
    }
    if (!wit.note.empty()) j["note"] = wit.note;
    return j;
}

inline Json report_to_json(const AxiomReport& rep, const MechanismTable& f) {
    Json j;
    j["axiom"] = rep.axiom;
    j["verdict"] = rep.holds ? "holds" : "fails";
    j["mode"] = rep.mode;
    j["profiles_checked"] = rep.profiles_checked;
    if (!rep.details.empty()) j["details"] = rep.details;
    if (rep.witness) j["witness"] = witness_to_json(*rep.witness, f);
    return j;
}

// ---------------------------------------------------------------------------
// Picking orders
//
//   {"type":"fixed","order":[1,2,3]}
//   {"type":"table","entries":[{"submatching":{"pairs":[[1,2]],"singles":[3]},
//                               "picker":3}, ...]}

inline Submatching parse_submatching_json(const Json& j, const Instance& inst,
                                          const std::string& where) {
    Submatching nu = Submatching::empty(inst);
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    if (j.contains("pairs"))
        for (size_t k = 0; k < j["pairs"].size(); ++k) {
            const Json& pr = j["pairs"][k];
            if (!pr.is_array() || pr.size() != 2)
                throw ParseError(where + ".pairs[" + std::to_string(k) + "]: expected a pair");
            auto name_of = [&](const Json& v) -> std::optional<AgentId> {
                if (v.is_number_integer()) {
                    int x = v.get<int>();
                    if (x >= 1 && x <= inst.agent_count() && !inst.two_sided()) return x - 1;
                    return std::nullopt;
                }
                if (v.is_string()) return inst.agent_by_name(v.get<std::string>());
                return std::nullopt;
            };
            auto a = name_of(pr[0]), b = name_of(pr[1]);
            if (!a || !b)
                throw ParseError(where + ".pairs[" + std::to_string(k) + "]: unknown agent");
            nu.add_pair(*a, *b);
        }
    if (j.contains("singles"))
        for (size_t k = 0; k < j["singles"].size(); ++k) {
            const Json& v = j["singles"][k];
            std::optional<AgentId> a;
            if (v.is_number_integer() && !inst.two_sided()) {
                int x = v.get<int>();
                if (x >= 1 && x <= inst.n) a = x - 1;
            } else if (v.is_string()) {
                a = inst.agent_by_name(v.get<std::string>());
            }
            if (!a)
                throw ParseError(where + ".singles[" + std::to_string(k) + "]: unknown agent");
            nu.add_single(*a);
        }
    return nu;
}

inline PickingOrder parse_picking_order_json(const Json& j, const Instance& inst) {
    if (!j.is_object() || !j.contains("type"))
        throw ParseError("picking order: expected an object with a type");
    std::string type = j["type"].get<std::string>();
    if (type == "fixed") {
        if (!j.contains("order") || !j["order"].is_array())
            throw ParseError("picking order: fixed type needs an order list");
        std::vector<AgentId> order;
        for (size_t k = 0; k < j["order"].size(); ++k) {
            int v = j["order"][k].get<int>();
            if (v < 1 || v > inst.agent_count())
                throw ParseError("picking order.order[" + std::to_string(k) +
                                 "]: agent out of range");
            order.push_back(v - 1);
        }
        return PickingOrder::fixed(order);
    }
    if (type == "table") {
        if (!j.contains("entries") || !j["entries"].is_array())
            throw ParseError("picking order: table type needs entries");
        std::vector<std::pair<Submatching, AgentId>> entries;
        for (size_t k = 0; k < j["entries"].size(); ++k) {
            const Json& e = j["entries"][k];
            const std::string where = "picking order.entries[" + std::to_string(k) + "]";
            if (!e.contains("submatching") || !e.contains("picker"))
                throw ParseError(where + ": need submatching and picker");
            Submatching nu = parse_submatching_json(e["submatching"], inst, where);
            int v = e["picker"].get<int>();
            if (v < 1 || v > inst.agent_count()) throw ParseError(where + ".picker: out of range");
            entries.emplace_back(nu, v - 1);
        }
        return PickingOrder::from_table(inst, std::move(entries));
    }
    throw ParseError("picking order: unknown type \"" + type + "\"");
}

// ---------------------------------------------------------------------------
// Four-agent mechanisms and royalty decision trees

inline Json four_agent_to_json(const FourAgentMechanism& f) {
    static const char* names[4] = {"m1", "m2", "w1", "w2"};
    Json gens = Json::array();
    for (uint8_t g : f.generators) {
        Json s = Json::array();
        for (int b = 0; b < 4; ++b)
            if (g & (1u << b)) s.push_back(names[b]);
        gens.push_back(s);
    }
    return Json{{"generators", gens}};
}

inline FourAgentMechanism parse_four_agent_json(const Json& j) {
    if (!j.is_object() || !j.contains("generators"))
        throw ParseError("four-agent mechanism: need generators");
    FourAgentMechanism f;
    for (size_t k = 0; k < j["generators"].size(); ++k) {
        uint8_t mask = 0;
        for (const Json& v : j["generators"][k]) {
            std::string s = v.get<std::string>();
            if (s == "m1")
                mask |= 1;
            else if (s == "m2")
                mask |= 2;
            else if (s == "w1")
                mask |= 4;
            else if (s == "w2")
                mask |= 8;
            else
                throw ParseError("four-agent mechanism.generators[" + std::to_string(k) +
                                 "]: unknown agent \"" + s + "\"");
        }
        if (mask == 0)
            throw ParseError("four-agent mechanism.generators[" + std::to_string(k) +
                             "]: empty generator");
        f.generators.push_back(mask);
    }
    return f.canonical();
}

/// Serializes a royalty mechanism extensionally over its reachable
/// submatchings: one royal entry per live state, one terminal entry per
/// four-agent state, keyed by the canonical submatching text.
inline Json royalty_to_json(const RoyaltyMechanism& r) {
    const Instance& inst = r.inst;
    Json order = Json::object(), terminal = Json::object();
    std::set<std::vector<AgentId>> seen;
    std::vector<Submatching> frontier{Submatching::empty(inst)};
    while (!frontier.empty()) {
        Submatching nu = frontier.back();
        frontier.pop_back();
        if (!seen.insert(nu.state).second) continue;
        int remaining = nu.remaining_count();
        if (remaining == 2 || remaining == 0) continue;
        if (remaining == 4) {
            auto assign = r.terminal.rule(nu);
            if (!assign) throw DomainGapError("terminal condition undefined", nu.key(inst));
            Json t = four_agent_to_json(assign->mech);
            Json slots = Json::array();
            for (AgentId a : assign->slot) slots.push_back(inst.agent_name(a));
            t["slots"] = slots;
            terminal[nu.key(inst)] = t;
            continue;
        }
        auto step = r.order.step(nu);
        if (!step) throw DomainGapError("succession order undefined", nu.key(inst));
        order[nu.key(inst)] = Json{{"royals", Json::array({inst.agent_name(step->man),
                                                           inst.agent_name(step->woman)})},
                                   {"regime", std::string(1, regime_letter(step->regime))}};
        Submatching married = nu;
        married.add_pair(step->man, step->woman);
        frontier.push_back(married);
        for (AgentId ww = inst.n; ww < 2 * inst.n; ++ww) {
            if (nu.assigned(ww) || ww == step->woman) continue;
            for (AgentId mm = 0; mm < inst.n; ++mm) {
                if (nu.assigned(mm) || mm == step->man) continue;
                Submatching child = nu;
                child.add_pair(step->man, ww);
                child.add_pair(step->woman, mm);
                frontier.push_back(child);
            }
        }
    }
    Json j;
    j["kind"] = "royalty";
    j["n"] = inst.n;
    j["name"] = r.name;
    j["order"] = order;
    j["terminal"] = terminal;
    return j;
}

inline RoyaltyMechanism parse_royalty_json(const Json& j) {
    if (!j.is_object() || j.value("kind", "") != std::string("royalty"))
        throw ParseError("royalty mechanism: expected kind \"royalty\"");
    int n = j.value("n", 0);
    if (n < 1) throw ParseError("royalty mechanism: bad n");
    Instance inst = Instance::two_sided(n);

    auto order_map = std::make_shared<std::map<std::string, RoyalStep>>();
    for (auto it = j["order"].begin(); it != j["order"].end(); ++it) {
        const Json& e = it.value();
        auto m = inst.agent_by_name(e["royals"][0].get<std::string>());
        auto w = inst.agent_by_name(e["royals"][1].get<std::string>());
        std::string reg = e["regime"].get<std::string>();
        if (!m || !w || (reg != "D" && reg != "U"))
            throw ParseError("royalty order[" + it.key() + "]: bad entry");
        (*order_map)[it.key()] =
            RoyalStep{*m, *w, reg == "D" ? Regime::MatchedByDefault : Regime::UnmatchedByDefault};
    }
    auto term_map = std::make_shared<std::map<std::string, FourAgentAssignment>>();
    for (auto it = j["terminal"].begin(); it != j["terminal"].end(); ++it) {
        const Json& e = it.value();
        FourAgentAssignment assign;
        assign.mech = parse_four_agent_json(e);
        if (!e.contains("slots") || e["slots"].size() != 4)
            throw ParseError("royalty terminal[" + it.key() + "]: need 4 slots");
        for (int k = 0; k < 4; ++k) {
            auto a = inst.agent_by_name(e["slots"][k].get<std::string>());
            if (!a) throw ParseError("royalty terminal[" + it.key() + "]: unknown agent");
            assign.slot[k] = *a;
        }
        (*term_map)[it.key()] = assign;
    }

    RoyaltyMechanism r{
        inst,
        SuccessionOrder{[inst, order_map](const Submatching& nu) -> std::optional<RoyalStep> {
                            auto it = order_map->find(nu.key(inst));
                            if (it == order_map->end()) return std::nullopt;
                            return it->second;
                        },
                        "json table"},
        TerminalCondition{
            [inst, term_map](const Submatching& nu) -> std::optional<FourAgentAssignment> {
                auto it = term_map->find(nu.key(inst));
                if (it == term_map->end()) return std::nullopt;
                return it->second;
            },
            "json table"},
        j.value("name", "royalty")};
    return r;
}

}  // namespace matchkit
