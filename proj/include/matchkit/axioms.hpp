#pragma once

// The verification engine: extensional mechanism tables over the canonical
// profile index, plus checkers for efficiency, (group) strategy-proofness,
// weak and full gender-neutrality, individual rationality and stability.
// Every failing verdict carries a witness that can be re-validated in
// isolation via revalidate().

#include "core.hpp"

#include <atomic>
#include <cstdint>
#include <memory>

namespace matchkit {

// ---------------------------------------------------------------------------
// MechanismTable

/// A mechanism as a (possibly lazily evaluated) map from canonical profile
/// index to matching. Small profile spaces are materialized into a dense
/// outcome table for the exhaustive scans.
class MechanismTable {
public:
    static constexpr uint64_t kMaterializeLimit = 1u << 21;

    MechanismTable(Instance inst, std::string name,
                   std::function<Matching(const Profile&)> eval)
        : inst_(inst),
          name_(std::move(name)),
          eval_(std::move(eval)),
          space_(std::make_shared<ProfileSpace>(inst)),
          matchings_(std::make_shared<MatchingSpace>(inst)),
          outcomes_(std::make_shared<std::vector<int32_t>>()) {}

    static MechanismTable from_function(Instance inst, std::string name,
                                        std::function<Matching(const Profile&)> eval) {
        return MechanismTable(inst, std::move(name), std::move(eval));
    }

    static MechanismTable from_outcomes(Instance inst, std::string name,
                                        std::vector<int32_t> outcomes) {
        MechanismTable t(inst, std::move(name), nullptr);
        if (outcomes.size() != t.space_->total())
            throw Error("outcome table has wrong size");
        for (int32_t o : outcomes)
            if (o < 0 || o >= t.matchings_->size())
                throw Error("outcome table entry out of range");
        *t.outcomes_ = std::move(outcomes);
        return t;
    }

    const Instance& instance() const { return inst_; }
    const std::string& name() const { return name_; }
    const ProfileSpace& space() const { return *space_; }
    const MatchingSpace& matchings() const { return *matchings_; }
    uint64_t profile_count() const { return space_->total(); }

    bool materialized() const { return !outcomes_->empty(); }

    /// Evaluate and cache every outcome; required by the exhaustive scans.
    void materialize() const {
        if (materialized()) return;
        if (!eval_) throw Error("mechanism table has no evaluator");
        if (space_->total() > kMaterializeLimit)
            throw Error("profile space of " + name_ + " too large to materialize");
        std::vector<int32_t> out(space_->total());
        for (uint64_t i = 0; i < space_->total(); ++i) {
            Matching mu = eval_(space_->decode(i));
            validate_matching(inst_, mu);
            out[i] = matchings_->index_of(mu);
        }
        *outcomes_ = std::move(out);
    }

    int32_t outcome_index(uint64_t profile_index) const {
        if (!materialized()) materialize();
        return (*outcomes_)[profile_index];
    }
    const Matching& outcome(uint64_t profile_index) const {
        return matchings_->at(outcome_index(profile_index));
    }

    /// Direct evaluation; uses the cache when present.
    Matching operator()(const Profile& p) const {
        if (materialized()) return matchings_->at((*outcomes_)[space_->index_of(p)]);
        if (!eval_) throw Error("mechanism table has no evaluator");
        Matching mu = eval_(p);
        validate_matching(inst_, mu);
        return mu;
    }

    bool same_table(const MechanismTable& o) const {
        if (inst_ != o.inst_) return false;
        materialize();
        o.materialize();
        return *outcomes_ == *o.outcomes_;
    }

private:
    Instance inst_;
    std::string name_;
    std::function<Matching(const Profile&)> eval_;
    std::shared_ptr<ProfileSpace> space_;
    std::shared_ptr<MatchingSpace> matchings_;
    std::shared_ptr<std::vector<int32_t>> outcomes_;
};

// ---------------------------------------------------------------------------
// Reports

struct Witness {
    std::optional<uint64_t> profile_index;
    std::vector<AgentId> coalition;                    // deviating agents (gsp)
    std::vector<std::vector<AgentId>> misreport;       // their claimed rankings
    std::optional<int32_t> outcome_before, outcome_after, dominating;
    std::optional<std::pair<AgentId, AgentId>> blocking_pair;
    std::optional<AgentId> agent;                      // ir: the harmed agent
    std::vector<AgentId> sigma_map;                    // symmetry used (weak_gn)
    // gender-neutrality: the continuation that admits no symmetry
    std::vector<AgentId> subset;
    std::vector<std::vector<AgentId>> outsider_rankings;
    std::vector<int32_t> continuation_outcomes;
    std::string note;
};

struct AxiomReport {
    std::string axiom;
    bool holds = true;
    std::optional<Witness> witness;
    uint64_t profiles_checked = 0;
    std::string mode;
    std::string details;
};

struct CheckMode {
    bool exhaustive = true;
    uint64_t samples = 0;
    uint64_t seed = 0;

    static CheckMode Exhaustive() { return CheckMode{}; }
    static CheckMode Sample(uint64_t k, uint64_t seed) { return CheckMode{false, k, seed}; }

    std::string to_string() const {
        if (exhaustive) return "exhaustive";
        return "sample:" + std::to_string(samples) + ":" + std::to_string(seed);
    }
};

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Profile indices to scan: ascending for exhaustive mode, a deterministic
/// seeded sequence for sampled mode.
inline std::vector<uint64_t> scan_indices(uint64_t total, const CheckMode& mode) {
    std::vector<uint64_t> out;
    if (mode.exhaustive) {
        out.resize(total);
        for (uint64_t i = 0; i < total; ++i) out[i] = i;
    } else {
        out.reserve(mode.samples);
        uint64_t state = mode.seed;
        for (uint64_t i = 0; i < mode.samples; ++i) out.push_back(splitmix64(state) % total);
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Efficiency

inline AxiomReport check_efficiency(const MechanismTable& f,
                                    CheckMode mode = CheckMode::Exhaustive(),
                                    int jobs = 1) {
    AxiomReport rep{"efficiency", true, std::nullopt, 0, mode.to_string(), ""};
    const auto& space = f.space();
    const auto& ms = f.matchings();
    if (space.total() <= MechanismTable::kMaterializeLimit) f.materialize();
    auto indices = detail::scan_indices(space.total(), mode);
    rep.profiles_checked = indices.size();

    std::atomic<uint64_t> best{UINT64_MAX};
    std::vector<std::optional<Witness>> found(std::max(jobs, 1));
    parallel_ranges(indices.size(), jobs, [&](int w, uint64_t b, uint64_t e) {
        for (uint64_t k = b; k < e; ++k) {
            if (k >= best.load(std::memory_order_relaxed)) break;
            uint64_t idx = indices[k];
            Profile p = space.decode(idx);
            int32_t out = f.materialized() ? f.outcome_index(idx) : ms.index_of(f(p));
            for (int32_t m = 0; m < ms.size(); ++m) {
                if (pareto_dominates(p, ms.at(m), ms.at(out))) {
                    Witness wit;
                    wit.profile_index = idx;
                    wit.outcome_before = out;
                    wit.dominating = m;
                    found[w] = wit;
                    uint64_t cur = best.load();
                    while (k < cur && !best.compare_exchange_weak(cur, k)) {
                    }
                    return;
                }
            }
        }
    });
    for (auto& wopt : found)
        if (wopt && (!rep.witness || *wopt->profile_index < *rep.witness->profile_index)) {
            rep.witness = wopt;
            rep.holds = false;
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Group strategy-proofness

enum class Coalitions { One = 1, UpToTwo = 2, All = 1 << 20 };

namespace detail {

inline std::vector<std::vector<AgentId>> combinations(int total, int size) {
    std::vector<std::vector<AgentId>> out;
    std::vector<AgentId> cur;
    std::function<void(int)> rec = [&](int start) {
        if (static_cast<int>(cur.size()) == size) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i <= total - (size - static_cast<int>(cur.size())); ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

// Lex-first profitable joint misreport by `coalition` at truth index `idx`,
// judged with true ranks. Returns the deviated profile index.
inline std::optional<uint64_t> find_misreport(const MechanismTable& f, uint64_t idx,
                                              const Profile& truth,
                                              const std::vector<AgentId>& coalition) {
    const auto& space = f.space();
    const auto& ms = f.matchings();
    auto outcome_at = [&](uint64_t q) {
        return f.materialized() ? f.outcome_index(q) : ms.index_of(f(space.decode(q)));
    };
    const int32_t out0 = outcome_at(idx);
    const Matching& mu0 = ms.at(out0);
    const uint64_t P = space.perm_count();
    const size_t s = coalition.size();
    std::vector<uint64_t> digit(s, 0), truth_digit(s);
    for (size_t i = 0; i < s; ++i) truth_digit[i] = space.digit(idx, coalition[i]);
    while (true) {
        bool all_true = true;
        for (size_t i = 0; i < s; ++i) all_true &= (digit[i] == truth_digit[i]);
        if (!all_true) {
            uint64_t q = idx;
            for (size_t i = 0; i < s; ++i) q = space.with_digit(q, coalition[i], digit[i]);
            int32_t out1 = outcome_at(q);
            if (out1 != out0) {
                const Matching& mu1 = ms.at(out1);
                bool weak = true, strict = false;
                for (AgentId a : coalition) {
                    int r1 = truth.rank_of(a, mu1(a)), r0 = truth.rank_of(a, mu0(a));
                    if (r1 > r0) {
                        weak = false;
                        break;
                    }
                    if (r1 < r0) strict = true;
                }
                if (weak && strict) return q;
            }
        }
        size_t pos = s;
        while (pos > 0) {
            if (++digit[pos - 1] < P) break;
            digit[pos - 1] = 0;
            --pos;
        }
        if (pos == 0) return std::nullopt;
    }
}

// Mask of outcome indices reachable by joint misreports of `coalition` with
// the complement's rankings fixed as in `idx`. Precomputed per outsider key
// by one pass over the table; only worthwhile for large coalitions.
struct OutcomeMasks {
    std::vector<AgentId> outsiders;
    std::vector<uint32_t> mask;  // keyed by mixed-radix outsider digits

    static OutcomeMasks build(const MechanismTable& f, const std::vector<AgentId>& coalition) {
        const auto& space = f.space();
        OutcomeMasks om;
        for (AgentId a = 0; a < f.instance().agent_count(); ++a)
            if (std::find(coalition.begin(), coalition.end(), a) == coalition.end())
                om.outsiders.push_back(a);
        uint64_t keys = 1;
        for (size_t i = 0; i < om.outsiders.size(); ++i) keys *= space.perm_count();
        om.mask.assign(keys, 0);
        for (uint64_t q = 0; q < space.total(); ++q) {
            uint64_t key = 0;
            for (AgentId a : om.outsiders) key = key * space.perm_count() + space.digit(q, a);
            om.mask[key] |= 1u << f.outcome_index(q);
        }
        return om;
    }

    uint32_t at(const ProfileSpace& space, uint64_t idx) const {
        uint64_t key = 0;
        for (AgentId a : outsiders) key = key * space.perm_count() + space.digit(idx, a);
        return mask[key];
    }
};

}  // namespace detail

/// Scans all profiles (or a seeded sample) and all coalitions up to the bound
/// for a jointly profitable misreport: every member weakly better off, at
/// least one strictly. Witnesses carry the lex-first deviation found.
inline AxiomReport check_group_sp(const MechanismTable& f, Coalitions bound,
                                  CheckMode mode = CheckMode::Exhaustive(), int jobs = 1) {
    AxiomReport rep{"group_sp", true, std::nullopt, 0, mode.to_string(), ""};
    rep.details = bound == Coalitions::All
                      ? "coalitions:all"
                      : "coalitions:<=" + std::to_string(static_cast<int>(bound));
    const auto& space = f.space();
    const auto& ms = f.matchings();
    const int A = f.instance().agent_count();
    const int max_size = std::min<int>(static_cast<int>(bound), A);
    if (space.total() <= MechanismTable::kMaterializeLimit) f.materialize();
    if (!f.materialized() && mode.exhaustive)
        throw Error("exhaustive group_sp scan needs a materializable table");

    // coalition lists per size, canonical (size ascending, lex within)
    std::vector<std::vector<std::vector<AgentId>>> coalitions(max_size + 1);
    for (int s = 1; s <= max_size; ++s) coalitions[s] = detail::combinations(A, s);

    // outcome-reachability masks for the big coalitions (outsider key space
    // small); sizes 1 and 2 are scanned directly
    std::vector<std::vector<detail::OutcomeMasks>> masks(max_size + 1);
    if (static_cast<int>(ms.size()) <= 32 && f.materialized()) {
        for (int s = 3; s <= max_size; ++s) {
            uint64_t keyspace = 1;
            for (int i = 0; i < A - s; ++i) keyspace *= space.perm_count();
            if (keyspace > (1u << 22)) continue;
            for (const auto& c : coalitions[s]) masks[s].push_back(detail::OutcomeMasks::build(f, c));
        }
    }

    auto indices = detail::scan_indices(space.total(), mode);
    rep.profiles_checked = indices.size();

    struct Hit {
        uint64_t order;
        uint64_t idx;
        std::vector<AgentId> coalition;
        uint64_t deviated;
    };
    std::atomic<uint64_t> best{UINT64_MAX};
    std::vector<std::optional<Hit>> found(std::max(jobs, 1));

    parallel_ranges(indices.size(), jobs, [&](int w, uint64_t b, uint64_t e) {
        for (uint64_t k = b; k < e; ++k) {
            if (k >= best.load(std::memory_order_relaxed)) break;
            uint64_t idx = indices[k];
            Profile truth = space.decode(idx);
            const Matching& mu0 =
                ms.at(f.materialized() ? f.outcome_index(idx) : ms.index_of(f(truth)));
            for (int s = 1; s <= max_size; ++s) {
                for (size_t ci = 0; ci < coalitions[s].size(); ++ci) {
                    const auto& c = coalitions[s][ci];
                    std::optional<uint64_t> dev;
                    if (!masks[s].empty()) {
                        uint32_t reach = masks[s][ci].at(space, idx);
                        bool possible = false;
                        while (reach && !possible) {
                            int m = __builtin_ctz(reach);
                            reach &= reach - 1;
                            const Matching& mu1 = ms.at(m);
                            bool weak = true, strict = false;
                            for (AgentId a : c) {
                                int r1 = truth.rank_of(a, mu1(a)), r0 = truth.rank_of(a, mu0(a));
                                if (r1 > r0) {
                                    weak = false;
                                    break;
                                }
                                if (r1 < r0) strict = true;
                            }
                            possible = weak && strict;
                        }
                        if (possible) dev = detail::find_misreport(f, idx, truth, c);
                    } else {
                        dev = detail::find_misreport(f, idx, truth, c);
                    }
                    if (dev) {
                        found[w] = Hit{k, idx, c, *dev};
                        uint64_t cur = best.load();
                        while (k < cur && !best.compare_exchange_weak(cur, k)) {
                        }
                        return;
                    }
                }
            }
        }
    });

    std::optional<Hit> first;
    for (auto& h : found)
        if (h && (!first || h->order < first->order)) first = h;
    if (first) {
        rep.holds = false;
        Witness wit;
        wit.profile_index = first->idx;
        wit.coalition = first->coalition;
        for (AgentId a : first->coalition)
            wit.misreport.push_back(space.ranking_for_digit(a, space.digit(first->deviated, a)));
        auto outcome_at = [&](uint64_t q) {
            return f.materialized() ? f.outcome_index(q) : ms.index_of(f(space.decode(q)));
        };
        wit.outcome_before = outcome_at(first->idx);
        wit.outcome_after = outcome_at(first->deviated);
        rep.witness = wit;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Weak gender-neutrality

inline AxiomReport check_weak_gn(const MechanismTable& f, const Symmetry& sigma,
                                 CheckMode mode = CheckMode::Exhaustive(), int jobs = 1) {
    if (!f.instance().two_sided()) throw Error("weak gender-neutrality needs a two-sided instance");
    if (sigma.inst != f.instance()) throw Error("symmetry instance mismatch");
    AxiomReport rep{"weak_gn", true, std::nullopt, 0, mode.to_string(), ""};
    const auto& space = f.space();
    const auto& ms = f.matchings();
    const bool tabled = space.total() <= MechanismTable::kMaterializeLimit;
    if (tabled) f.materialize();

    auto indices = detail::scan_indices(space.total(), mode);
    rep.profiles_checked = indices.size();

    std::atomic<uint64_t> best{UINT64_MAX};
    std::vector<std::optional<Witness>> found(std::max(jobs, 1));
    parallel_ranges(indices.size(), jobs, [&](int w, uint64_t b, uint64_t e) {
        for (uint64_t k = b; k < e; ++k) {
            if (k >= best.load(std::memory_order_relaxed)) break;
            uint64_t idx = indices[k];
            Profile p = space.decode(idx);
            Profile rp = reflect_profile(sigma, p);
            Matching lhs = tabled ? ms.at(f.outcome_index(space.index_of(rp))) : f(rp);
            Matching rhs = reflect_matching(sigma, tabled ? ms.at(f.outcome_index(idx)) : f(p));
            if (!(lhs == rhs)) {
                Witness wit;
                wit.profile_index = idx;
                wit.sigma_map = sigma.map;
                wit.outcome_before = tabled ? f.outcome_index(idx) : ms.index_of(f(p));
                wit.note = "f(sigma(p)) = " + matching_to_string(f.instance(), lhs) +
                           " but sigma*f(p) = " + matching_to_string(f.instance(), rhs);
                found[w] = wit;
                uint64_t cur = best.load();
                while (k < cur && !best.compare_exchange_weak(cur, k)) {
                }
                return;
            }
        }
    });
    for (auto& wopt : found)
        if (wopt && (!rep.witness || *wopt->profile_index < *rep.witness->profile_index)) {
            rep.witness = wopt;
            rep.holds = false;
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Gender-neutrality (every continuation submechanism weakly gender-neutral
// under some order-2 side-swapping symmetry of its own)

namespace detail {

struct SubsetInstance {
    std::vector<AgentId> men, women;  // original ids, ascending
    Instance sub;

    static std::optional<SubsetInstance> balanced(const Instance& inst, uint32_t mask) {
        SubsetInstance si;
        for (AgentId a = 0; a < inst.agent_count(); ++a)
            if (mask & (1u << a)) (inst.is_man(a) ? si.men : si.women).push_back(a);
        if (si.men.empty() || si.men.size() != si.women.size()) return std::nullopt;
        si.sub = Instance::two_sided(static_cast<int>(si.men.size()));
        return si;
    }

    std::vector<AgentId> members() const {
        std::vector<AgentId> out = men;
        out.insert(out.end(), women.begin(), women.end());
        return out;
    }
    // original id -> sub id
    int sub_id(AgentId a) const {
        for (size_t i = 0; i < men.size(); ++i)
            if (men[i] == a) return static_cast<int>(i);
        for (size_t i = 0; i < women.size(); ++i)
            if (women[i] == a) return static_cast<int>(si_n() + i);
        return -1;
    }
    int si_n() const { return sub.n; }
};

/// The continuation table of f on the member set for fixed outsider digits,
/// or nullopt if some member profile matches outside the set or the outcome
/// fails to factor through the members' restricted rankings.
inline std::optional<std::vector<int32_t>> continuation_outcomes(
    const MechanismTable& f, const SubsetInstance& si,
    const std::vector<AgentId>& outsiders, const std::vector<uint64_t>& outsider_digits,
    uint64_t inner_budget = 2'000'000) {
    const auto& space = f.space();
    auto members = si.members();
    const size_t s = members.size();
    const uint64_t P = space.perm_count();
    uint64_t combos = 1;
    for (size_t i = 0; i < s; ++i) {
        combos *= P;
        if (combos > inner_budget) return std::nullopt;  // budget: caller notes skip
    }

    ProfileSpace sub_space(si.sub);
    MatchingSpace sub_ms(si.sub);
    std::vector<int32_t> table(sub_space.total(), -1);

    uint64_t base = 0;
    for (size_t i = 0; i < outsiders.size(); ++i)
        base += outsider_digits[i] * space.weight(outsiders[i]);

    std::vector<uint64_t> digit(s, 0);
    const bool tabled = f.materialized();
    while (true) {
        uint64_t idx = base;
        for (size_t i = 0; i < s; ++i) idx += digit[i] * space.weight(members[i]);
        Profile p = space.decode(idx);
        const Matching mu = tabled ? f.matchings().at(f.outcome_index(idx)) : f(p);

        // all members matched inside the set?
        std::vector<AgentId> sub_partner(2 * si.si_n());
        for (AgentId a : members) {
            int pa = si.sub_id(mu(a));
            if (pa < 0) return std::nullopt;
            sub_partner[si.sub_id(a)] = pa;
        }
        // class = profile of restricted rankings, as a sub-space index
        uint64_t cls = 0;
        for (AgentId a : members) {
            std::vector<AgentId> restricted;
            for (AgentId q : p.ranking(a)) {
                int sq = si.sub_id(q);
                if (sq >= 0) restricted.push_back(sq);
            }
            cls += perm_rank(restricted) * sub_space.weight(si.sub_id(a));
        }
        int32_t om = sub_ms.index_of(Matching{sub_partner});
        if (table[cls] == -1)
            table[cls] = om;
        else if (table[cls] != om)
            return std::nullopt;  // not a function of the restriction

        size_t pos = s;
        while (pos > 0) {
            if (++digit[pos - 1] < P) break;
            digit[pos - 1] = 0;
            --pos;
        }
        if (pos == 0) break;
    }
    for (int32_t v : table)
        if (v == -1) return std::nullopt;
    return table;
}

/// All order-2 side-swapping symmetries of a two-sided instance.
inline std::vector<Symmetry> all_side_symmetries(const Instance& inst) {
    std::vector<Symmetry> out;
    std::vector<int> perm(inst.n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::vector<AgentId> map(inst.agent_count());
        for (int i = 0; i < inst.n; ++i) {
            map[i] = inst.n + perm[i];
            map[inst.n + perm[i]] = i;
        }
        out.push_back(Symmetry::from_map(inst, map));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace detail

/// Public probe used by the gender-neutrality scan: the continuation
/// submechanism of f on the given member set when the outsiders announce the
/// given rankings, or nullopt when no well-defined continuation arises there.
inline std::optional<MechanismTable> continuation_submechanism(
    const MechanismTable& f, const std::vector<AgentId>& member_set,
    const std::vector<std::vector<AgentId>>& outsider_rankings) {
    uint32_t mask = 0;
    for (AgentId a : member_set) mask |= 1u << a;
    auto si = detail::SubsetInstance::balanced(f.instance(), mask);
    if (!si) throw Error("continuation set must have equally many men and women");
    std::vector<AgentId> outsiders;
    for (AgentId a = 0; a < f.instance().agent_count(); ++a)
        if (!(mask & (1u << a))) outsiders.push_back(a);
    if (outsider_rankings.size() != outsiders.size())
        throw Error("need one ranking per outsider");
    std::vector<uint64_t> digits;
    for (size_t i = 0; i < outsiders.size(); ++i) {
        Profile::validate_ranking(f.instance(), outsiders[i], outsider_rankings[i]);
        digits.push_back(detail::perm_rank(outsider_rankings[i]));
    }
    auto outcomes = detail::continuation_outcomes(f, *si, outsiders, digits);
    if (!outcomes) return std::nullopt;
    return MechanismTable::from_outcomes(si->sub, f.name() + "|continuation", *outcomes);
}

inline AxiomReport check_gn(const MechanismTable& f, CheckMode mode = CheckMode::Exhaustive(),
                            int jobs = 1) {
    if (!f.instance().two_sided()) throw Error("gender-neutrality needs a two-sided instance");
    const Instance inst = f.instance();
    const int A = inst.agent_count();
    if (mode.exhaustive && inst.n > 3)
        throw Error("combinatorial budget exceeded: exhaustive gender-neutrality scan "
                    "supports n <= 3; use sampled mode");
    AxiomReport rep{"gn", true, std::nullopt, 0, mode.to_string(), ""};
    const auto& space = f.space();
    if (space.total() <= MechanismTable::kMaterializeLimit) f.materialize();
    const uint64_t P = space.perm_count();
    bool skipped_sets = false;

    // ascending subset size, then ascending bitmask
    for (int s = 2; s < A; s += 2) {
        for (uint32_t mask = 0; mask < (1u << A); ++mask) {
            if (__builtin_popcount(mask) != s) continue;
            auto si = detail::SubsetInstance::balanced(inst, mask);
            if (!si) continue;
            std::vector<AgentId> outsiders;
            for (AgentId a = 0; a < A; ++a)
                if (!(mask & (1u << a))) outsiders.push_back(a);

            uint64_t member_combos = 1;
            bool overflow = false;
            for (int i = 0; i < s && !overflow; ++i) {
                member_combos *= P;
                if (member_combos > 2'000'000) overflow = true;
            }
            if (overflow) {
                skipped_sets = true;
                continue;
            }

            uint64_t outsider_total = 1;
            for (size_t i = 0; i < outsiders.size(); ++i) outsider_total *= P;
            std::vector<uint64_t> keys;
            if (mode.exhaustive) {
                keys.resize(outsider_total);
                for (uint64_t i = 0; i < outsider_total; ++i) keys[i] = i;
            } else {
                uint64_t state = mode.seed ^ (mask * 0x9e3779b97f4a7c15ull);
                for (uint64_t i = 0; i < mode.samples; ++i)
                    keys.push_back(detail::splitmix64(state) % outsider_total);
            }

            ProfileSpace sub_space(si->sub);
            auto sigmas = detail::all_side_symmetries(si->sub);
            for (uint64_t key : keys) {
                ++rep.profiles_checked;
                std::vector<uint64_t> digits(outsiders.size());
                uint64_t k = key;
                for (size_t i = outsiders.size(); i-- > 0;) {
                    digits[i] = k % P;
                    k /= P;
                }
                auto outcomes = detail::continuation_outcomes(f, *si, outsiders, digits);
                if (!outcomes) continue;
                MechanismTable g =
                    MechanismTable::from_outcomes(si->sub, f.name() + "|cont", *outcomes);
                bool any_sigma = false;
                for (const auto& sp : sigmas)
                    if (check_weak_gn(g, sp, CheckMode::Exhaustive()).holds) {
                        any_sigma = true;
                        break;
                    }
                if (!any_sigma) {
                    rep.holds = false;
                    Witness wit;
                    wit.subset = si->members();
                    for (size_t i = 0; i < outsiders.size(); ++i)
                        wit.outsider_rankings.push_back(
                            space.ranking_for_digit(outsiders[i], digits[i]));
                    wit.continuation_outcomes = *outcomes;
                    std::string names;
                    for (AgentId a : wit.subset) names += inst.agent_name(a) + " ";
                    wit.note = "continuation on { " + names +
                               "} admits no order-2 side-swapping symmetry";
                    rep.witness = wit;
                    return rep;
                }
            }
        }
    }

    // the mechanism itself (outsiders empty): weakly GN under some symmetry?
    bool any_sigma = false;
    for (const auto& sp : detail::all_side_symmetries(inst)) {
        CheckMode sub_mode = mode.exhaustive ? CheckMode::Exhaustive()
                                             : CheckMode::Sample(mode.samples, mode.seed ^ 0xa5a5);
        if (check_weak_gn(f, sp, sub_mode, jobs).holds) {
            any_sigma = true;
            break;
        }
    }
    ++rep.profiles_checked;
    if (!any_sigma) {
        rep.holds = false;
        Witness wit;
        wit.note = "the mechanism itself is not weakly gender-neutral under any "
                   "order-2 side-swapping symmetry";
        if (!mode.exhaustive) wit.note += " (each candidate refuted by a concrete witness profile)";
        rep.witness = wit;
        return rep;
    }
    if (skipped_sets)
        rep.details = "continuation sets above the member-combination budget were skipped";
    return rep;
}

// ---------------------------------------------------------------------------
// Individual rationality

inline AxiomReport check_ir(const MechanismTable& f) {
    if (f.instance().two_sided()) throw Error("individual rationality is a one-sided check");
    AxiomReport rep{"ir", true, std::nullopt, 0, "exhaustive", ""};
    const auto& space = f.space();
    f.materialize();
    rep.profiles_checked = space.total();
    for (uint64_t idx = 0; idx < space.total(); ++idx) {
        Profile p = space.decode(idx);
        const Matching& mu = f.outcome(idx);
        for (AgentId a = 0; a < f.instance().agent_count(); ++a) {
            if (p.rank_of(a, mu(a)) > p.rank_of(a, a)) {
                rep.holds = false;
                Witness wit;
                wit.profile_index = idx;
                wit.agent = a;
                wit.outcome_before = f.outcome_index(idx);
                wit.note = "agent " + f.instance().agent_name(a) + " matched below staying single";
                rep.witness = wit;
                return rep;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Stability

inline std::optional<std::pair<AgentId, AgentId>> find_blocking_pair(const Profile& p,
                                                                     const Matching& mu) {
    const Instance& inst = p.instance();
    if (!inst.two_sided()) throw Error("blocking pairs are a two-sided notion");
    for (AgentId m = 0; m < inst.n; ++m)
        for (AgentId w = inst.n; w < 2 * inst.n; ++w) {
            if (mu(m) == w) continue;
            if (p.rank_of(m, w) < p.rank_of(m, mu(m)) && p.rank_of(w, m) < p.rank_of(w, mu(w)))
                return std::make_pair(m, w);
        }
    return std::nullopt;
}

inline AxiomReport check_stability(const MechanismTable& f,
                                   CheckMode mode = CheckMode::Exhaustive(), int jobs = 1) {
    if (!f.instance().two_sided()) throw Error("stability is a two-sided check");
    AxiomReport rep{"stability", true, std::nullopt, 0, mode.to_string(), ""};
    const auto& space = f.space();
    if (space.total() <= MechanismTable::kMaterializeLimit) f.materialize();
    auto indices = detail::scan_indices(space.total(), mode);
    rep.profiles_checked = indices.size();

    std::atomic<uint64_t> best{UINT64_MAX};
    std::vector<std::optional<Witness>> found(std::max(jobs, 1));
    parallel_ranges(indices.size(), jobs, [&](int w, uint64_t b, uint64_t e) {
        for (uint64_t k = b; k < e; ++k) {
            if (k >= best.load(std::memory_order_relaxed)) break;
            uint64_t idx = indices[k];
            Profile p = space.decode(idx);
            Matching mu = f.materialized() ? f.outcome(idx) : f(p);
            if (auto bp = find_blocking_pair(p, mu)) {
                Witness wit;
                wit.profile_index = idx;
                wit.blocking_pair = bp;
                wit.outcome_before = f.materialized() ? f.outcome_index(idx)
                                                      : f.matchings().index_of(mu);
                found[w] = wit;
                uint64_t cur = best.load();
                while (k < cur && !best.compare_exchange_weak(cur, k)) {
                }
                return;
            }
        }
    });
    for (auto& wopt : found)
        if (wopt && (!rep.witness || *wopt->profile_index < *rep.witness->profile_index)) {
            rep.witness = wopt;
            rep.holds = false;
        }
    return rep;
}

// ---------------------------------------------------------------------------
// The R-minimizing mechanism and witness replay

/// Among the matchings efficient at p, the one with the smallest R value.
/// r_values are keyed by canonical matching index and must be injective.
inline Matching r_min_mechanism(const std::vector<int>& r_values, const Profile& p) {
    MatchingSpace ms(p.instance());
    if (static_cast<int>(r_values.size()) != ms.size())
        throw Error("R must assign a value to every matching");
    for (int i = 0; i < ms.size(); ++i)
        for (int j = i + 1; j < ms.size(); ++j)
            if (r_values[i] == r_values[j]) throw Error("R must be injective");
    std::optional<int> best;
    for (int i = 0; i < ms.size(); ++i) {
        if (!is_efficient(p, ms.at(i), &ms)) continue;
        if (!best || r_values[i] < r_values[*best]) best = i;
    }
    if (!best) throw Error("no efficient matching found");  // cannot happen
    return ms.at(*best);
}

/// Re-checks a failing report's witness from scratch.
inline bool revalidate(const AxiomReport& rep, const MechanismTable& f) {
    if (rep.holds || !rep.witness) return false;
    const Witness& wit = *rep.witness;
    const auto& space = f.space();
    const auto& ms = f.matchings();
    if (rep.axiom == "efficiency") {
        Profile p = space.decode(*wit.profile_index);
        return pareto_dominates(p, ms.at(*wit.dominating), f(p));
    }
    if (rep.axiom == "group_sp") {
        Profile truth = space.decode(*wit.profile_index);
        std::vector<std::vector<AgentId>> rankings = truth.rankings();
        for (size_t i = 0; i < wit.coalition.size(); ++i)
            rankings[wit.coalition[i]] = wit.misreport[i];
        Profile deviated(f.instance(), rankings);
        Matching before = f(truth), after = f(deviated);
        bool weak = true, strict = false;
        for (AgentId a : wit.coalition) {
            int r1 = truth.rank_of(a, after(a)), r0 = truth.rank_of(a, before(a));
            if (r1 > r0) weak = false;
            if (r1 < r0) strict = true;
        }
        return weak && strict;
    }
    if (rep.axiom == "weak_gn") {
        Symmetry sigma = Symmetry::from_map(f.instance(), wit.sigma_map);
        Profile p = space.decode(*wit.profile_index);
        return !(f(reflect_profile(sigma, p)) == reflect_matching(sigma, f(p)));
    }
    if (rep.axiom == "gn") {
        if (wit.subset.empty()) return true;  // refuted sigma list for f itself
        auto g = continuation_submechanism(f, wit.subset, wit.outsider_rankings);
        if (!g) return false;
        for (const auto& sp : detail::all_side_symmetries(g->instance()))
            if (check_weak_gn(*g, sp).holds) return false;
        return true;
    }
    if (rep.axiom == "ir") {
        Profile p = space.decode(*wit.profile_index);
        Matching mu = f(p);
        return p.rank_of(*wit.agent, mu(*wit.agent)) > p.rank_of(*wit.agent, *wit.agent);
    }
    if (rep.axiom == "stability") {
        Profile p = space.decode(*wit.profile_index);
        Matching mu = f(p);
        auto [m, w] = *wit.blocking_pair;
        return mu(m) != w && p.rank_of(m, w) < p.rank_of(m, mu(m)) &&
               p.rank_of(w, m) < p.rank_of(w, mu(w));
    }
    throw Error("unknown axiom in report: " + rep.axiom);
}

}  // namespace matchkit
