#pragma once

// One-sided (roommate-style) mechanisms: sequential dictatorships driven by a
// picking order, the two-agent dictatorship/unanimity rules, and the
// restriction of a mechanism to a subpopulation obtained by parking the
// removed agents at the extremes of everyone's rankings.

#include "axioms.hpp"
#include "core.hpp"

#include <map>

namespace matchkit {

// ---------------------------------------------------------------------------
// Picking orders and sequential dictatorships

/// Maps proper submatchings to the next dictator. Domain totality over the
/// reachable states is not validated up front; run_sd raises a DomainGapError
/// on the first reachable gap instead.
class PickingOrder {
public:
    using Fn = std::function<std::optional<AgentId>(const Submatching&)>;

    static PickingOrder fixed(std::vector<AgentId> order) {
        std::string desc = "fixed:[";
        for (size_t i = 0; i < order.size(); ++i)
            desc += (i ? "," : "") + std::to_string(order[i] + 1);
        desc += "]";
        return PickingOrder(
            [order](const Submatching& nu) -> std::optional<AgentId> {
                for (AgentId a : order)
                    if (!nu.assigned(a)) return a;
                return std::nullopt;
            },
            desc);
    }

    /// Explicit decision table keyed by submatching; the serializable form.
    static PickingOrder from_table(const Instance& inst,
                                   std::vector<std::pair<Submatching, AgentId>> entries) {
        auto table = std::make_shared<std::map<std::vector<AgentId>, AgentId>>();
        for (auto& [nu, who] : entries) (*table)[nu.state] = who;
        return PickingOrder(
            [table](const Submatching& nu) -> std::optional<AgentId> {
                auto it = table->find(nu.state);
                if (it == table->end()) return std::nullopt;
                return it->second;
            },
            "table:" + std::to_string(entries.size()) + " entries");
    }

    static PickingOrder from_function(Fn fn, std::string desc) {
        return PickingOrder(std::move(fn), std::move(desc));
    }

    std::optional<AgentId> operator()(const Submatching& nu) const { return pick_(nu); }
    const std::string& description() const { return desc_; }

private:
    PickingOrder(Fn fn, std::string desc) : pick_(std::move(fn)), desc_(std::move(desc)) {}
    Fn pick_;
    std::string desc_;
};

struct SequentialDictatorship {
    PickingOrder order;
};

/// Dictators named by the picking order successively take their favorite
/// remaining option, themselves included. A lone leftover agent is matched to
/// itself without consulting the order (the outcome is forced).
inline Matching run_sd(const SequentialDictatorship& sd, const Profile& p) {
    const Instance& inst = p.instance();
    if (inst.two_sided()) throw Error("run_sd expects a one-sided profile");
    Submatching nu = Submatching::empty(inst);
    std::vector<char> alive(inst.agent_count(), 1);
    while (!nu.total()) {
        if (nu.remaining_count() == 1) {
            for (AgentId a = 0; a < inst.agent_count(); ++a)
                if (!nu.assigned(a)) nu.add_single(a);
            break;
        }
        auto pick = sd.order(nu);
        if (!pick) throw DomainGapError("picking order undefined", nu.key(inst));
        AgentId i = *pick;
        if (nu.assigned(i))
            throw DomainGapError("picking order names an already matched agent " +
                                     inst.agent_name(i),
                                 nu.key(inst));
        AgentId choice = p.favorite(i, alive);
        if (choice == i)
            nu.add_single(i);
        else
            nu.add_pair(i, choice);
        alive[i] = 0;
        alive[choice] = 0;
    }
    return nu.to_matching(inst);
}

inline MechanismTable sd_table(const Instance& inst, std::vector<AgentId> order) {
    SequentialDictatorship sd{PickingOrder::fixed(order)};
    return MechanismTable::from_function(
        inst, "sd:" + PickingOrder::fixed(order).description(),
        [sd](const Profile& p) { return run_sd(sd, p); });
}

// ---------------------------------------------------------------------------
// Two agents

/// With two agents there are two matchings; the group strategy-proof and
/// efficient rules are the two dictatorships and the two unanimity rules.
struct TwoAgentRule {
    enum class Type { Dictator, Unanimity };
    Type type;
    AgentId dictator = 0;     // Dictator only
    bool default_paired = false;  // Unanimity only

    static TwoAgentRule dictatorship(AgentId k) { return {Type::Dictator, k, false}; }
    static TwoAgentRule unanimity(bool default_paired) {
        return {Type::Unanimity, 0, default_paired};
    }

    std::string name() const {
        if (type == Type::Dictator) return "dictator:" + std::to_string(dictator + 1);
        return default_paired ? "unanimity:paired" : "unanimity:single";
    }
};

inline Matching run_two_agent(const TwoAgentRule& rule, const Profile& p) {
    const Instance& inst = p.instance();
    if (inst.two_sided() || inst.n != 2)
        throw Error("two-agent rules need the one-sided instance with n = 2");
    Matching paired = matching_from_pairs(inst, {{0, 1}});
    Matching single = matching_from_pairs(inst, {});
    if (rule.type == TwoAgentRule::Type::Dictator)
        return p.top(rule.dictator) == rule.dictator ? single : paired;
    bool both_want_paired = p.top(0) == 1 && p.top(1) == 0;
    bool both_want_single = p.top(0) == 0 && p.top(1) == 1;
    if (rule.default_paired) return both_want_single ? single : paired;
    return both_want_paired ? paired : single;
}

inline MechanismTable two_agent_table(const TwoAgentRule& rule) {
    Instance inst = Instance::one_sided(2);
    return MechanismTable::from_function(
        inst, rule.name(), [rule](const Profile& p) { return run_two_agent(rule, p); });
}

// ---------------------------------------------------------------------------
// Submechanism restriction
//
// f^{-j}: evaluate f on extensions where j top-ranks itself and everyone else
// bottom-ranks j; f^{-j,k}: j and k top-rank each other and everyone else
// parks both at the bottom. All admissible extensions must produce the same
// restricted outcome; a disagreement is reported with the two extensions.

namespace detail {

// every way to order `tail` appended after `head` (used to scan extensions)
inline void append_all_orders(std::vector<std::vector<AgentId>>& out,
                              const std::vector<AgentId>& head, std::vector<AgentId> tail) {
    std::sort(tail.begin(), tail.end());
    do {
        auto full = head;
        full.insert(full.end(), tail.begin(), tail.end());
        out.push_back(full);
    } while (std::next_permutation(tail.begin(), tail.end()));
}

}  // namespace detail

struct RestrictionWitness : Error {
    RestrictionWitness(const std::string& msg) : Error(msg) {}
};

/// The restriction of a one-sided mechanism to N minus one or two agents.
/// Returned table lives on the compacted instance; `labels` receives the
/// surviving original agents in ascending order.
inline MechanismTable restrict_mechanism(const MechanismTable& f,
                                         const std::vector<AgentId>& removed,
                                         std::vector<AgentId>* labels = nullptr) {
    const Instance& inst = f.instance();
    if (inst.two_sided()) throw Error("restriction is defined for one-sided mechanisms");
    if (removed.size() != 1 && removed.size() != 2)
        throw Error("restriction removes one agent or one pair");
    for (AgentId j : removed)
        if (j < 0 || j >= inst.agent_count()) throw Error("removed agent out of range");
    if (removed.size() == 2 && removed[0] == removed[1])
        throw Error("removed pair must be two distinct agents");
    f.materialize();

    std::vector<AgentId> kept;
    for (AgentId a = 0; a < inst.agent_count(); ++a)
        if (std::find(removed.begin(), removed.end(), a) == removed.end()) kept.push_back(a);
    if (labels) *labels = kept;
    Instance sub = Instance::one_sided(static_cast<int>(kept.size()));
    ProfileSpace sub_space(sub);
    MatchingSpace sub_ms(sub);

    std::vector<int32_t> outcomes(sub_space.total());
    for (uint64_t si = 0; si < sub_space.total(); ++si) {
        Profile sp = sub_space.decode(si);

        // admissible extensions per agent
        std::vector<std::vector<std::vector<AgentId>>> options(inst.agent_count());
        for (size_t ki = 0; ki < kept.size(); ++ki) {
            // kept agents append the removed ones at the bottom, in any order
            std::vector<AgentId> head;
            for (AgentId q : sp.ranking(static_cast<AgentId>(ki))) head.push_back(kept[q]);
            detail::append_all_orders(options[kept[ki]], head, removed);
        }
        for (size_t ri = 0; ri < removed.size(); ++ri) {
            // removed agents top-rank themselves (alone) or each other (pair)
            AgentId j = removed[ri];
            AgentId first = removed.size() == 1 ? j : removed[1 - ri];
            std::vector<AgentId> rest;
            for (AgentId a = 0; a < inst.agent_count(); ++a)
                if (a != first) rest.push_back(a);
            detail::append_all_orders(options[j], {first}, rest);
        }

        // scan the product of extensions, demanding agreement on kept agents
        std::optional<std::vector<AgentId>> agreed;
        std::optional<Profile> first_ext;
        std::vector<size_t> pick(inst.agent_count(), 0);
        while (true) {
            std::vector<std::vector<AgentId>> rankings(inst.agent_count());
            for (AgentId a = 0; a < inst.agent_count(); ++a) rankings[a] = options[a][pick[a]];
            Profile ext(inst, rankings);
            Matching mu = f(ext);
            std::vector<AgentId> restricted(kept.size());
            for (size_t ki = 0; ki < kept.size(); ++ki) {
                AgentId pa = mu(kept[ki]);
                auto it = std::find(kept.begin(), kept.end(), pa);
                if (it == kept.end()) {
                    // a kept agent matched with a removed one: outcome does not
                    // restrict, report as a well-definedness violation
                    throw RestrictionWitness(
                        "restriction not well defined: at extension of sub-profile " +
                        std::to_string(si) + ", agent " + inst.agent_name(kept[ki]) +
                        " is matched with removed agent " + inst.agent_name(pa));
                }
                restricted[ki] = static_cast<AgentId>(it - kept.begin());
            }
            if (!agreed) {
                agreed = restricted;
                first_ext = ext;
            } else if (*agreed != restricted) {
                throw RestrictionWitness(
                    "restriction not well defined: two extensions of sub-profile " +
                    std::to_string(si) + " disagree (outcomes " +
                    matching_to_string(sub, Matching{*agreed}) + " vs " +
                    matching_to_string(sub, Matching{restricted}) + ")");
            }
            size_t pos = inst.agent_count();
            while (pos > 0) {
                if (++pick[pos - 1] < options[pos - 1].size()) break;
                pick[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) break;
        }
        outcomes[si] = sub_ms.index_of(Matching{*agreed});
    }

    std::string nm = f.name() + "|minus";
    for (AgentId j : removed) nm += ":" + inst.agent_name(j);
    return MechanismTable::from_outcomes(sub, nm, std::move(outcomes));
}

}  // namespace matchkit
