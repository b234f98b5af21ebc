#pragma once

// Two-sided mechanisms. Royalty mechanisms run in rounds: a designated
// man-woman pair ("royals") is matched-by-default (either can force the
// match) or unmatched-by-default (both must agree); unmatched royals take
// their top remaining partners. With four agents left a catalog mechanism
// finishes the job; with two left the match is forced.
//
// Neutral royalty mechanisms are built recursively: the royal pair is a
// symmetric couple, the continuation after a symmetric step is again neutral,
// and the continuation after an asymmetric step is chosen freely for one
// orientation and mirrored through the symmetry for the other.

#include "axioms.hpp"
#include "core.hpp"
#include "fouragent.hpp"

#include <map>
#include <memory>
#include <set>

namespace matchkit {

enum class Regime { MatchedByDefault, UnmatchedByDefault };

inline char regime_letter(Regime r) { return r == Regime::MatchedByDefault ? 'D' : 'U'; }

struct RoyalStep {
    AgentId man;
    AgentId woman;
    Regime regime;
};

/// A catalog mechanism placed onto four concrete agents. slot[0..3] hold the
/// agents playing the abstract m1, m2, w1, w2; the "diagonal" outcome pairs
/// slot0-slot2 and slot1-slot3.
struct FourAgentAssignment {
    FourAgentMechanism mech;
    std::array<AgentId, 4> slot;

    std::vector<std::pair<AgentId, AgentId>> evaluate(const Profile& p) const {
        uint8_t s = 0;
        const std::array<AgentId, 4> nu_partner{slot[2], slot[3], slot[0], slot[1]};
        const std::array<AgentId, 4> mu_partner{slot[3], slot[2], slot[1], slot[0]};
        for (int x = 0; x < 4; ++x)
            if (p.rank_of(slot[x], nu_partner[x]) < p.rank_of(slot[x], mu_partner[x]))
                s |= static_cast<uint8_t>(1u << x);
        if (mech.selects_diagonal(s)) return {{slot[0], slot[2]}, {slot[1], slot[3]}};
        return {{slot[0], slot[3]}, {slot[1], slot[2]}};
    }
};

struct SuccessionOrder {
    std::function<std::optional<RoyalStep>(const Submatching&)> step;
    std::string description;
};

struct TerminalCondition {
    std::function<std::optional<FourAgentAssignment>(const Submatching&)> rule;
    std::string description;
};

struct RoyaltyMechanism {
    Instance inst;
    SuccessionOrder order;
    TerminalCondition terminal;
    std::string name;
};

/// The royalty algorithm. Recurses while more than four agents remain; at
/// four the terminal condition applies, at two the match is forced.
inline Matching run_royalty(const RoyaltyMechanism& r, const Profile& p) {
    const Instance& inst = p.instance();
    if (!inst.two_sided()) throw Error("run_royalty expects a two-sided profile");
    if (inst != r.inst) throw Error("run_royalty: instance mismatch");
    Submatching nu = Submatching::empty(inst);
    std::vector<char> alive(inst.agent_count(), 1);

    auto claim = [&](AgentId a, AgentId b) {
        nu.add_pair(a, b);
        alive[a] = 0;
        alive[b] = 0;
    };

    while (nu.remaining_count() > 4) {
        auto step = r.order.step(nu);
        if (!step) throw DomainGapError("succession order undefined", nu.key(inst));
        AgentId m = step->man, w = step->woman;
        if (!inst.is_man(m) || !inst.is_woman(w) || !alive[m] || !alive[w])
            throw DomainGapError("succession order names an invalid royal pair (" +
                                     inst.agent_name(m) + "," + inst.agent_name(w) + ")",
                                 nu.key(inst));
        bool m_tops_w = p.favorite(m, alive) == w;
        bool w_tops_m = p.favorite(w, alive) == m;
        bool married = step->regime == Regime::MatchedByDefault ? (m_tops_w || w_tops_m)
                                                                : (m_tops_w && w_tops_m);
        if (married) {
            claim(m, w);
        } else {
            AgentId mw = p.favorite(m, alive, w);
            AgentId wm = p.favorite(w, alive, m);
            claim(m, mw);
            claim(w, wm);
        }
    }

    if (nu.remaining_count() == 4) {
        auto assign = r.terminal.rule(nu);
        if (!assign) throw DomainGapError("terminal condition undefined", nu.key(inst));
        for (AgentId a : assign->slot)
            if (a < 0 || a >= inst.agent_count() || !alive[a])
                throw DomainGapError("terminal assignment names matched agent " +
                                         inst.agent_name(a),
                                     nu.key(inst));
        if (!inst.is_man(assign->slot[0]) || !inst.is_man(assign->slot[1]) ||
            !inst.is_woman(assign->slot[2]) || !inst.is_woman(assign->slot[3]))
            throw DomainGapError("terminal assignment must place two men and two women",
                                 nu.key(inst));
        for (auto [a, b] : assign->evaluate(p)) claim(a, b);
    } else if (nu.remaining_count() == 2) {
        AgentId m = -1, w = -1;
        for (AgentId a = 0; a < inst.agent_count(); ++a)
            if (alive[a]) (inst.is_man(a) ? m : w) = a;
        claim(m, w);
    }
    return nu.to_matching(inst);
}

/// Walks every submatching the algorithm can reach and checks the succession
/// order and terminal condition are defined there.
inline void validate_royalty_domain(const RoyaltyMechanism& r) {
    const Instance& inst = r.inst;
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
            continue;
        }
        auto step = r.order.step(nu);
        if (!step) throw DomainGapError("succession order undefined", nu.key(inst));
        AgentId m = step->man, w = step->woman;
        if (nu.assigned(m) || nu.assigned(w))
            throw DomainGapError("succession order names a matched royal", nu.key(inst));
        {
            Submatching child = nu;
            child.add_pair(m, w);
            frontier.push_back(child);
        }
        for (AgentId ww = inst.n; ww < 2 * inst.n; ++ww) {
            if (nu.assigned(ww) || ww == w) continue;
            for (AgentId mm = 0; mm < inst.n; ++mm) {
                if (nu.assigned(mm) || mm == m) continue;
                Submatching child = nu;
                child.add_pair(m, ww);
                child.add_pair(w, mm);
                frontier.push_back(child);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Neutral royalty specs

/// Recursive description of a neutral royalty mechanism over "couples":
/// ordered slot pairs whose first elements all lie on one side. The level's
/// symmetry swaps the two slots of every couple; branch continuations for one
/// orientation are mirrored automatically for the other.
class NeutralRoyaltySpec {
public:
    /// Two couples left: a catalog mechanism.
    static NeutralRoyaltySpec base(FourAgentMechanism terminal) {
        NeutralRoyaltySpec s;
        s.couples_ = 2;
        s.terminal_ = std::move(terminal);
        return s;
    }

    /// A round: royal couple index (1-based), regime, continuation after the
    /// royals marry (n-1 couples), continuations after a symmetric cross step
    /// keyed by the chosen couple (n-2 couples), and free continuations for
    /// asymmetric steps keyed by (k,l), k<l (n-2 couples). For three couples
    /// the deeper states are forced and both maps must be empty.
    static NeutralRoyaltySpec node(int couples, int royal, Regime regime,
                                   NeutralRoyaltySpec married,
                                   std::map<int, NeutralRoyaltySpec> symmetric_cross,
                                   std::map<std::pair<int, int>, NeutralRoyaltySpec> branches) {
        if (couples < 3) throw Error("royal rounds need at least three couples");
        if (royal < 1 || royal > couples) throw Error("royal couple index out of range");
        if (married.couples() != couples - 1)
            throw Error("married continuation must cover one couple fewer");
        NeutralRoyaltySpec s;
        s.couples_ = couples;
        s.royal_ = royal;
        s.regime_ = regime;
        s.married_ = std::make_shared<NeutralRoyaltySpec>(std::move(married));
        if (couples == 3) {
            if (!symmetric_cross.empty() || !branches.empty())
                throw Error("with three couples the cross continuations are forced");
        } else {
            for (int k = 1; k <= couples; ++k) {
                if (k == royal) continue;
                auto it = symmetric_cross.find(k);
                if (it == symmetric_cross.end())
                    throw Error("missing symmetric cross continuation for couple " +
                                std::to_string(k));
                if (it->second.couples() != couples - 2)
                    throw Error("symmetric cross continuation must cover two couples fewer");
                for (int l = k + 1; l <= couples; ++l) {
                    if (l == royal) continue;
                    auto bt = branches.find({k, l});
                    if (bt == branches.end())
                        throw Error("missing branch continuation for (" + std::to_string(k) +
                                    "," + std::to_string(l) + ")");
                    if (bt->second.couples() != couples - 2)
                        throw Error("branch continuation must cover two couples fewer");
                }
            }
        }
        s.symmetric_cross_ =
            std::make_shared<std::map<int, NeutralRoyaltySpec>>(std::move(symmetric_cross));
        s.branches_ = std::make_shared<std::map<std::pair<int, int>, NeutralRoyaltySpec>>(
            std::move(branches));
        return s;
    }

    /// The uniform-regime spec: the given couple reigns first, couple 1 (in
    /// each remaining level) afterwards, every terminal drawn from the same
    /// catalog entry.
    static NeutralRoyaltySpec uniform(int couples, Regime regime, int first_royal,
                                      FourAgentMechanism terminal) {
        if (couples < 2) throw Error("royalty mechanisms need at least two couples");
        if (couples == 2) return base(terminal);
        NeutralRoyaltySpec married = uniform(couples - 1, regime, 1, terminal);
        std::map<int, NeutralRoyaltySpec> sym;
        std::map<std::pair<int, int>, NeutralRoyaltySpec> branches;
        if (couples > 3) {
            for (int k = 1; k <= couples; ++k) {
                if (k == first_royal) continue;
                sym.emplace(k, uniform(couples - 2, regime, 1, terminal));
                for (int l = k + 1; l <= couples; ++l)
                    if (l != first_royal)
                        branches.emplace(std::make_pair(k, l),
                                         uniform(couples - 2, regime, 1, terminal));
            }
        }
        return node(couples, first_royal, regime, std::move(married), std::move(sym),
                    std::move(branches));
    }

    int couples() const { return couples_; }
    bool is_base() const { return couples_ == 2; }
    int royal() const { return royal_; }
    Regime regime() const { return regime_; }
    const FourAgentMechanism& terminal() const { return *terminal_; }
    const NeutralRoyaltySpec& married() const { return *married_; }
    const NeutralRoyaltySpec& symmetric_cross(int k) const { return symmetric_cross_->at(k); }
    const NeutralRoyaltySpec& branch(int k, int l) const { return branches_->at({k, l}); }

private:
    int couples_ = 2;
    int royal_ = 1;
    Regime regime_ = Regime::MatchedByDefault;
    std::optional<FourAgentMechanism> terminal_;
    std::shared_ptr<NeutralRoyaltySpec> married_;
    std::shared_ptr<std::map<int, NeutralRoyaltySpec>> symmetric_cross_;
    std::shared_ptr<std::map<std::pair<int, int>, NeutralRoyaltySpec>> branches_;
};

namespace detail {

// Couple slots at one recursion level. All `a` slots lie on one side.
struct SpecCtx {
    std::vector<std::pair<AgentId, AgentId>> couples;
};

// Replays the submatching against the spec tree, tracking which concrete
// agents play each abstract couple. Returns the active node and its context,
// or nullopt when the state is forced (two or zero agents remain).
inline std::optional<std::pair<const NeutralRoyaltySpec*, SpecCtx>> walk_spec(
    const NeutralRoyaltySpec& root, const Instance& inst, const Submatching& nu,
    SpecCtx ctx) {
    const NeutralRoyaltySpec* node = &root;
    Submatching left = nu;
    auto consumed = [&](AgentId a, AgentId b) {
        left.state[a] = Submatching::kUnassigned;
        left.state[b] = Submatching::kUnassigned;
    };
    while (true) {
        if (node->is_base()) {
            if (left.assigned_count() != 0)
                throw DomainGapError("submatching not reachable by this spec", nu.key(inst));
            return std::make_pair(node, ctx);
        }
        const int r = node->royal();
        auto [ra, rb] = ctx.couples[r - 1];
        if (!left.assigned(ra) && !left.assigned(rb)) {
            if (left.assigned_count() != 0)
                throw DomainGapError("submatching not reachable by this spec", nu.key(inst));
            return std::make_pair(node, ctx);
        }
        if (left.state[ra] == rb) {
            consumed(ra, rb);
            SpecCtx next;
            for (int i = 0; i < node->couples(); ++i)
                if (i != r - 1) next.couples.push_back(ctx.couples[i]);
            node = &node->married();
            ctx = std::move(next);
            continue;
        }
        AgentId x = left.state[ra], y = left.state[rb];
        if (x == Submatching::kUnassigned || y == Submatching::kUnassigned)
            throw DomainGapError("submatching not reachable by this spec", nu.key(inst));
        int k = -1, l = -1;
        for (int i = 0; i < node->couples(); ++i) {
            if (ctx.couples[i].second == x) l = i + 1;
            if (ctx.couples[i].first == y) k = i + 1;
        }
        if (k < 1 || l < 1 || k == r || l == r)
            throw DomainGapError("submatching not reachable by this spec", nu.key(inst));
        consumed(ra, x);
        consumed(rb, y);

        if (node->couples() == 3) {
            // two agents remain; every further move is forced
            if (left.assigned_count() != 0)
                throw DomainGapError("submatching not reachable by this spec", nu.key(inst));
            return std::nullopt;
        }
        SpecCtx next;
        if (k == l) {
            for (int i = 0; i < node->couples(); ++i)
                if (i != r - 1 && i != k - 1) next.couples.push_back(ctx.couples[i]);
            node = &node->symmetric_cross(k);
        } else if (k < l) {
            for (int i = 0; i < node->couples(); ++i)
                if (i != r - 1 && i != k - 1 && i != l - 1) next.couples.push_back(ctx.couples[i]);
            next.couples.emplace_back(ctx.couples[l - 1].first, ctx.couples[k - 1].second);
            node = &node->branch(k, l);
        } else {
            // mirrored embedding of the (l,k) branch: swap every couple's slots
            for (int i = 0; i < node->couples(); ++i)
                if (i != r - 1 && i != k - 1 && i != l - 1)
                    next.couples.emplace_back(ctx.couples[i].second, ctx.couples[i].first);
            next.couples.emplace_back(ctx.couples[k - 1].second, ctx.couples[l - 1].first);
            node = &node->branch(l, k);
        }
        ctx = std::move(next);
    }
}

inline RoyalStep royal_step_of(const Instance& inst, const NeutralRoyaltySpec& node,
                               const SpecCtx& ctx) {
    auto [a, b] = ctx.couples[node.royal() - 1];
    RoyalStep step;
    step.man = inst.is_man(a) ? a : b;
    step.woman = inst.is_man(a) ? b : a;
    step.regime = node.regime();
    return step;
}

}  // namespace detail

/// Materializes the succession order and terminal condition of a neutral
/// royalty spec on the canonical couples of the instance.
inline RoyaltyMechanism build_neutral_royalty(const Instance& inst,
                                              const NeutralRoyaltySpec& spec,
                                              std::string name = "") {
    if (!inst.two_sided()) throw Error("royalty mechanisms are two-sided");
    if (spec.couples() != inst.n) throw Error("spec covers " + std::to_string(spec.couples()) +
                                              " couples but the instance has " +
                                              std::to_string(inst.n));
    auto root = std::make_shared<NeutralRoyaltySpec>(spec);
    detail::SpecCtx top;
    for (int i = 0; i < inst.n; ++i) top.couples.emplace_back(i, i + inst.n);

    SuccessionOrder order{
        [root, inst, top](const Submatching& nu) -> std::optional<RoyalStep> {
            auto at = detail::walk_spec(*root, inst, nu, top);
            if (!at || at->first->is_base()) return std::nullopt;
            return detail::royal_step_of(inst, *at->first, at->second);
        },
        "neutral spec"};
    TerminalCondition terminal{
        [root, inst, top](const Submatching& nu) -> std::optional<FourAgentAssignment> {
            auto at = detail::walk_spec(*root, inst, nu, top);
            if (!at || !at->first->is_base()) return std::nullopt;
            const auto& cs = at->second.couples;
            FourAgentAssignment assign;
            assign.mech = at->first->terminal();
            // abstract m1,m2 take the couples' first slots; if those lie on
            // the women's side the diagonal/crossed outcomes are unaffected,
            // but run_royalty expects man slots first
            std::array<AgentId, 4> slot{cs[0].first, cs[1].first, cs[0].second, cs[1].second};
            if (!inst.is_man(slot[0])) slot = {cs[0].second, cs[1].second, cs[0].first, cs[1].first};
            assign.slot = slot;
            return assign;
        },
        "neutral spec terminal"};

    RoyaltyMechanism mech{inst, std::move(order), std::move(terminal),
                          name.empty() ? "neutral-royalty" : std::move(name)};
    validate_royalty_domain(mech);
    return mech;
}

inline MechanismTable royalty_table(const RoyaltyMechanism& r) {
    return MechanismTable::from_function(r.inst, r.name,
                                         [r](const Profile& p) { return run_royalty(r, p); });
}

/// Shorthand for the uniform-regime neutral royalty table ("all_D:first=1").
inline MechanismTable uniform_royalty_table(const Instance& inst, Regime regime, int first_royal,
                                            const FourAgentMechanism& terminal,
                                            const std::string& terminal_name) {
    auto spec = NeutralRoyaltySpec::uniform(inst.n, regime, first_royal, terminal);
    std::string name = std::string("all_") + regime_letter(regime) +
                       ":first=" + std::to_string(first_royal) + ":terminal=" + terminal_name;
    return royalty_table(build_neutral_royalty(inst, spec, name));
}

// ---------------------------------------------------------------------------
// Induced one-sided mechanism

/// Restricts a weakly gender-neutral two-sided mechanism to symmetric
/// profiles and reads it as a one-sided mechanism over couples: couple j
/// single when m_j marries sigma(m_j), couple j matched with couple i when
/// the couples swap partners.
inline MechanismTable induced_one_sided(const MechanismTable& f, const Symmetry& sigma) {
    const Instance& inst = f.instance();
    if (!inst.two_sided()) throw Error("induced mechanism needs a two-sided source");
    AxiomReport wgn = check_weak_gn(f, sigma);
    if (!wgn.holds)
        throw Error("mechanism is not weakly gender-neutral (witness profile " +
                    std::to_string(*wgn.witness->profile_index) + ")");

    const int n = inst.n;
    Instance one = Instance::one_sided(n);
    ProfileSpace one_space(one);
    MatchingSpace one_ms(one);
    std::vector<int32_t> outcomes(one_space.total());
    for (uint64_t idx = 0; idx < one_space.total(); ++idx) {
        Profile q = one_space.decode(idx);
        // lift to the symmetric two-sided profile
        std::vector<std::vector<AgentId>> rks(inst.agent_count());
        for (AgentId j = 0; j < n; ++j) {
            for (AgentId e : q.ranking(j)) {
                rks[j].push_back(sigma(e));  // man j ranks the women by couple
                rks[sigma(j)].push_back(e);  // his mirror ranks the men alike
            }
        }
        Profile lifted(inst, std::move(rks));
        Matching mu = f(lifted);
        std::vector<AgentId> partner(n);
        for (AgentId j = 0; j < n; ++j) {
            AgentId w = mu(j);
            AgentId i = sigma(w);  // couple index of j's wife
            if (mu(sigma(j)) != i)
                throw Error("induced readout inconsistent at one-sided profile " +
                            std::to_string(idx) + ": couple " + std::to_string(j + 1) +
                            " does not swap symmetrically");
            partner[j] = i;
        }
        Matching g{partner};
        validate_matching(one, g);
        outcomes[idx] = one_ms.index_of(g);
    }
    return MechanismTable::from_outcomes(one, f.name() + "|induced", std::move(outcomes));
}

// ---------------------------------------------------------------------------
// Two-sided serial dictatorship and stability tools

/// Agents act in the given order over all 2n agents; already-matched agents
/// are skipped, actors take their favorite remaining partner.
inline Matching run_sd_two_sided(const std::vector<AgentId>& order, const Profile& p) {
    const Instance& inst = p.instance();
    if (!inst.two_sided()) throw Error("run_sd_two_sided expects a two-sided profile");
    if (static_cast<int>(order.size()) != inst.agent_count())
        throw Error("picking order must list all agents");
    std::vector<char> seen(inst.agent_count(), 0);
    for (AgentId a : order) {
        if (a < 0 || a >= inst.agent_count() || seen[a])
            throw Error("picking order must be a permutation of all agents");
        seen[a] = 1;
    }
    Submatching nu = Submatching::empty(inst);
    std::vector<char> alive(inst.agent_count(), 1);
    for (AgentId a : order) {
        if (nu.assigned(a)) continue;
        AgentId b = p.favorite(a, alive, a);
        nu.add_pair(a, b);
        alive[a] = 0;
        alive[b] = 0;
    }
    return nu.to_matching(inst);
}

/// Brute-force stable set: all matchings without a blocking pair.
inline std::vector<Matching> stable_matchings(const Profile& p) {
    if (!p.instance().two_sided()) throw Error("stability is two-sided");
    std::vector<Matching> out;
    for (const Matching& mu : enumerate_matchings(p.instance()))
        if (!find_blocking_pair(p, mu)) out.push_back(mu);
    return out;
}

// ---------------------------------------------------------------------------
// The running example mechanism: royal couples in index order choose their
// tops; once a couple's choices split, the side whose catch has the lower
// index dictates the rest. Weakly gender-neutral, but its one-sided-
// dictatorship continuations are not.

inline Matching index_comparison_mechanism(const Profile& p) {
    const Instance& inst = p.instance();
    if (!inst.two_sided()) throw Error("index_comparison_mechanism is two-sided");
    const int n = inst.n;
    Submatching nu = Submatching::empty(inst);
    std::vector<char> alive(inst.agent_count(), 1);
    auto claim = [&](AgentId a, AgentId b) {
        nu.add_pair(a, b);
        alive[a] = 0;
        alive[b] = 0;
    };
    auto side_sd = [&](bool men_dictate) {
        for (AgentId d = men_dictate ? 0 : n; d < (men_dictate ? n : 2 * n); ++d) {
            if (!alive[d]) continue;
            claim(d, p.favorite(d, alive, d));
        }
    };

    while (nu.remaining_count() > 2) {
        AgentId c = -1;
        for (AgentId i = 0; i < n; ++i)
            if (alive[i] && alive[i + n]) {
                c = i;
                break;
            }
        AgentId m = c, w = c + n;
        AgentId fm = p.favorite(m, alive);
        AgentId fw = p.favorite(w, alive);
        if (fm == w && fw == m) {
            claim(m, w);
            continue;
        }
        AgentId mw, wm;
        if (fm == w || fw == m) {  // conflict: exactly one wants the other
            mw = p.favorite(m, alive, w);
            wm = p.favorite(w, alive, m);
        } else {
            mw = fm;
            wm = fw;
        }
        claim(m, mw);
        claim(w, wm);
        int j = mw - n, l = wm;
        if (j == l) continue;  // symmetric catch, move to the next couple
        side_sd(j < l);
        break;
    }
    if (nu.remaining_count() == 2) {
        AgentId m = -1, w = -1;
        for (AgentId a = 0; a < inst.agent_count(); ++a)
            if (alive[a]) (inst.is_man(a) ? m : w) = a;
        claim(m, w);
    }
    return nu.to_matching(inst);
}

inline MechanismTable index_comparison_table(const Instance& inst) {
    return MechanismTable::from_function(inst, "index-comparison",
                                         [](const Profile& p) {
                                             return index_comparison_mechanism(p);
                                         });
}

}  // namespace matchkit
