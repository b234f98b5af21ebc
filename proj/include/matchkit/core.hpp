#pragma once

// Core domain types for one- and two-sided matching markets: instances,
// strict preference profiles, matchings as involutions, side-swapping
// symmetries, and the enumeration/Pareto machinery everything else builds on.
//
// Conventions (fixed throughout the library):
//   - agents are dense integer ids. Two-sided: men are 0..n-1 ("m1".."mn"),
//     women are n..2n-1 ("w1".."wn"). One-sided: agents are 0..n-1 ("1".."n").
//   - a one-sided agent ranks all of N including itself; its own id means
//     "stay single". A two-sided agent ranks the opposite side only.
//   - matchings are involutions mu with mu(mu(i)) = i; one-sided singles are
//     encoded as fixed points mu(i) = i.
//   - the canonical symmetry on a two-sided instance pairs id i with id i+n.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace matchkit {

using AgentId = int;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// A mechanism's succession/picking order was consulted on a submatching
// outside its domain. Carries the offending submatching key.
struct DomainGapError : Error {
    std::string submatching_key;
    DomainGapError(const std::string& msg, std::string key)
        : Error(msg + " at submatching " + key), submatching_key(std::move(key)) {}
};

enum class Kind { OneSided, TwoSided };

struct Instance {
    Kind kind = Kind::OneSided;
    int n = 1;  // couples (two-sided) or agents (one-sided)

    static Instance one_sided(int n) {
        if (n < 1) throw Error("instance size must be >= 1");
        return Instance{Kind::OneSided, n};
    }
    static Instance two_sided(int n) {
        if (n < 1) throw Error("instance size must be >= 1");
        return Instance{Kind::TwoSided, n};
    }

    int agent_count() const { return kind == Kind::TwoSided ? 2 * n : n; }
    bool two_sided() const { return kind == Kind::TwoSided; }

    bool is_man(AgentId a) const { return two_sided() && a >= 0 && a < n; }
    bool is_woman(AgentId a) const { return two_sided() && a >= n && a < 2 * n; }
    bool same_side(AgentId a, AgentId b) const { return is_man(a) == is_man(b); }

    std::string agent_name(AgentId a) const {
        if (a < 0 || a >= agent_count()) return "?" + std::to_string(a);
        if (!two_sided()) return std::to_string(a + 1);
        return is_man(a) ? "m" + std::to_string(a + 1) : "w" + std::to_string(a - n + 1);
    }
    std::optional<AgentId> agent_by_name(const std::string& name) const {
        if (name.empty()) return std::nullopt;
        try {
            if (!two_sided()) {
                int v = std::stoi(name);
                if (v >= 1 && v <= n) return v - 1;
                return std::nullopt;
            }
            if (name[0] == 'm' || name[0] == 'w') {
                int v = std::stoi(name.substr(1));
                if (v < 1 || v > n) return std::nullopt;
                return name[0] == 'm' ? v - 1 : n + v - 1;
            }
        } catch (const std::exception&) {
        }
        return std::nullopt;
    }

    // Partner universe an agent ranks over, ascending by id.
    std::vector<AgentId> universe(AgentId a) const {
        std::vector<AgentId> u;
        if (!two_sided()) {
            u.resize(n);
            std::iota(u.begin(), u.end(), 0);
        } else if (is_man(a)) {
            u.resize(n);
            std::iota(u.begin(), u.end(), n);
        } else {
            u.resize(n);
            std::iota(u.begin(), u.end(), 0);
        }
        return u;
    }

    bool operator==(const Instance& o) const { return kind == o.kind && n == o.n; }
    bool operator!=(const Instance& o) const { return !(*this == o); }
};

// ---------------------------------------------------------------------------
// Profiles

/// Strict ranking of one agent, most preferred first.
struct Preference {
    AgentId owner = 0;
    std::vector<AgentId> ranking;
};

/// Immutable profile of strict preferences, one ranking per agent.
/// Construction validates that every ranking is a permutation of the owner's
/// partner universe and precomputes O(1) rank lookup tables.
class Profile {
public:
    Profile(Instance inst, std::vector<std::vector<AgentId>> rankings)
        : inst_(inst), ranking_(std::move(rankings)) {
        const int a = inst_.agent_count();
        if (static_cast<int>(ranking_.size()) != a)
            throw Error("profile needs exactly one ranking per agent, got " +
                        std::to_string(ranking_.size()) + " for " + std::to_string(a));
        rank_of_.assign(a, std::vector<int>(a, -1));
        for (AgentId i = 0; i < a; ++i) {
            validate_ranking(inst_, i, ranking_[i]);
            for (size_t r = 0; r < ranking_[i].size(); ++r)
                rank_of_[i][ranking_[i][r]] = static_cast<int>(r);
        }
    }

    static void validate_ranking(const Instance& inst, AgentId owner,
                                 const std::vector<AgentId>& ranking) {
        auto u = inst.universe(owner);
        if (ranking.size() != u.size())
            throw Error("agent " + inst.agent_name(owner) + ": ranking has " +
                        std::to_string(ranking.size()) + " entries, expected " +
                        std::to_string(u.size()));
        std::vector<char> seen(inst.agent_count(), 0);
        for (size_t pos = 0; pos < ranking.size(); ++pos) {
            AgentId p = ranking[pos];
            if (p < 0 || p >= inst.agent_count() ||
                !std::binary_search(u.begin(), u.end(), p))
                throw Error("agent " + inst.agent_name(owner) + ": entry at position " +
                            std::to_string(pos) + " is not a valid partner");
            if (seen[p])
                throw Error("agent " + inst.agent_name(owner) + ": partner " +
                            inst.agent_name(p) + " repeated at position " +
                            std::to_string(pos));
            seen[p] = 1;
        }
    }

    const Instance& instance() const { return inst_; }
    const std::vector<AgentId>& ranking(AgentId a) const { return ranking_[a]; }
    const std::vector<std::vector<AgentId>>& rankings() const { return ranking_; }

    int rank_of(AgentId agent, AgentId partner) const { return rank_of_[agent][partner]; }
    bool prefers(AgentId agent, AgentId a, AgentId b) const {
        return rank_of_[agent][a] < rank_of_[agent][b];
    }
    AgentId top(AgentId agent) const { return ranking_[agent].front(); }

    // Most preferred partner among `alive` entries, optionally excluding one.
    AgentId favorite(AgentId agent, const std::vector<char>& alive,
                     AgentId exclude = -1) const {
        for (AgentId p : ranking_[agent])
            if (p != exclude && alive[p]) return p;
        throw Error("agent " + inst_.agent_name(agent) + " has no remaining partner");
    }

    bool operator==(const Profile& o) const {
        return inst_ == o.inst_ && ranking_ == o.ranking_;
    }

private:
    Instance inst_;
    std::vector<std::vector<AgentId>> ranking_;
    std::vector<std::vector<int>> rank_of_;
};

// ---------------------------------------------------------------------------
// Matchings

/// Total matching as an involution: partner[i] is i's match, partner[i] == i
/// encodes "single" (one-sided only).
struct Matching {
    std::vector<AgentId> partner;

    AgentId operator()(AgentId a) const { return partner[a]; }
    bool operator==(const Matching& o) const { return partner == o.partner; }
    bool operator!=(const Matching& o) const { return partner != o.partner; }
    bool operator<(const Matching& o) const { return partner < o.partner; }

    std::vector<std::pair<AgentId, AgentId>> pairs() const {
        std::vector<std::pair<AgentId, AgentId>> out;
        for (AgentId i = 0; i < static_cast<AgentId>(partner.size()); ++i)
            if (partner[i] > i) out.emplace_back(i, partner[i]);
        return out;
    }
    std::vector<AgentId> singles() const {
        std::vector<AgentId> out;
        for (AgentId i = 0; i < static_cast<AgentId>(partner.size()); ++i)
            if (partner[i] == i) out.push_back(i);
        return out;
    }
};

inline void validate_matching(const Instance& inst, const Matching& mu) {
    const int a = inst.agent_count();
    if (static_cast<int>(mu.partner.size()) != a)
        throw Error("matching covers " + std::to_string(mu.partner.size()) +
                    " agents, expected " + std::to_string(a));
    for (AgentId i = 0; i < a; ++i) {
        AgentId j = mu.partner[i];
        if (j < 0 || j >= a) throw Error("matching partner out of range");
        if (mu.partner[j] != i) throw Error("matching is not an involution");
        if (inst.two_sided()) {
            if (i == j) throw Error("two-sided matching cannot leave agents single");
            if (inst.same_side(i, j))
                throw Error("two-sided matching pairs " + inst.agent_name(i) + " with " +
                            inst.agent_name(j) + " on the same side");
        }
    }
}

inline Matching matching_from_pairs(const Instance& inst,
                                    const std::vector<std::pair<AgentId, AgentId>>& pairs) {
    Matching mu;
    mu.partner.resize(inst.agent_count());
    std::iota(mu.partner.begin(), mu.partner.end(), 0);
    for (auto [a, b] : pairs) {
        mu.partner[a] = b;
        mu.partner[b] = a;
    }
    validate_matching(inst, mu);
    return mu;
}

inline std::string matching_to_string(const Instance& inst, const Matching& mu) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (auto [a, b] : mu.pairs()) {
        if (!first) os << ",";
        os << "(" << inst.agent_name(a) << "," << inst.agent_name(b) << ")";
        first = false;
    }
    for (AgentId s : mu.singles()) {
        if (!first) os << ",";
        os << "(" << inst.agent_name(s) << ")";
        first = false;
    }
    os << "}";
    return os.str();
}

// ---------------------------------------------------------------------------
// Submatchings

/// Partial matching: a set of mutually exclusive pairs (and singles, one-sided
/// only). state[i] is the partner, i itself for single, or kUnassigned.
struct Submatching {
    static constexpr AgentId kUnassigned = -1;
    std::vector<AgentId> state;

    static Submatching empty(const Instance& inst) {
        Submatching s;
        s.state.assign(inst.agent_count(), kUnassigned);
        return s;
    }

    bool assigned(AgentId a) const { return state[a] != kUnassigned; }
    int assigned_count() const {
        int c = 0;
        for (AgentId s : state) c += (s != kUnassigned);
        return c;
    }
    int remaining_count() const { return static_cast<int>(state.size()) - assigned_count(); }
    bool total() const { return assigned_count() == static_cast<int>(state.size()); }

    void add_pair(AgentId a, AgentId b) {
        if (a == b) throw Error("use add_single for singles");
        if (assigned(a) || assigned(b)) throw Error("submatching: agent already assigned");
        state[a] = b;
        state[b] = a;
    }
    void add_single(AgentId a) {
        if (assigned(a)) throw Error("submatching: agent already assigned");
        state[a] = a;
    }

    Matching to_matching(const Instance& inst) const {
        if (!total()) throw Error("submatching is not total");
        Matching mu{state};
        validate_matching(inst, mu);
        return mu;
    }

    /// Canonical text key, e.g. "(m1,w2)(m3,w1)" / "(1,2)(3)".
    std::string key(const Instance& inst) const {
        std::ostringstream os;
        for (AgentId i = 0; i < static_cast<AgentId>(state.size()); ++i) {
            if (state[i] == i)
                os << "(" << inst.agent_name(i) << ")";
            else if (state[i] != kUnassigned && state[i] > i)
                os << "(" << inst.agent_name(i) << "," << inst.agent_name(state[i]) << ")";
        }
        if (os.str().empty()) return "()";
        return os.str();
    }

    bool operator==(const Submatching& o) const { return state == o.state; }
    bool operator<(const Submatching& o) const { return state < o.state; }
};

// ---------------------------------------------------------------------------
// Symmetries and reflections

/// Order-2 bijection sigma on a two-sided instance with sigma(M) = W; the
/// mirror against which gender-neutrality is defined.
struct Symmetry {
    Instance inst;
    std::vector<AgentId> map;

    static Symmetry canonical(const Instance& inst) {
        if (!inst.two_sided()) throw Error("symmetry requires a two-sided instance");
        Symmetry s{inst, {}};
        s.map.resize(inst.agent_count());
        for (AgentId i = 0; i < inst.n; ++i) {
            s.map[i] = i + inst.n;
            s.map[i + inst.n] = i;
        }
        return s;
    }

    static Symmetry from_map(const Instance& inst, std::vector<AgentId> m) {
        if (!inst.two_sided()) throw Error("symmetry requires a two-sided instance");
        Symmetry s{inst, std::move(m)};
        if (static_cast<int>(s.map.size()) != inst.agent_count())
            throw Error("symmetry map has wrong size");
        for (AgentId i = 0; i < inst.agent_count(); ++i) {
            if (s.map[s.map[i]] != i) throw Error("symmetry must have order 2");
            if (inst.same_side(i, s.map[i])) throw Error("symmetry must swap sides");
        }
        return s;
    }

    AgentId operator()(AgentId a) const { return map[a]; }
};

/// Reflection sigma * mu: (sigma(m), sigma(w)) is paired iff (m, w) is.
inline Matching reflect_matching(const Symmetry& sigma, const Matching& mu) {
    if (static_cast<int>(mu.partner.size()) != sigma.inst.agent_count())
        throw Error("reflect_matching: instance mismatch");
    Matching out;
    out.partner.resize(mu.partner.size());
    for (AgentId i = 0; i < static_cast<AgentId>(mu.partner.size()); ++i)
        out.partner[sigma(i)] = sigma(mu.partner[i]);
    validate_matching(sigma.inst, out);
    return out;
}

/// Reflected profile sigma(p): agent sigma(i) ranks sigma(j) where i ranked j.
inline Profile reflect_profile(const Symmetry& sigma, const Profile& p) {
    if (p.instance() != sigma.inst) throw Error("reflect_profile: instance mismatch");
    std::vector<std::vector<AgentId>> out(p.instance().agent_count());
    for (AgentId i = 0; i < p.instance().agent_count(); ++i) {
        std::vector<AgentId> r;
        r.reserve(p.ranking(i).size());
        for (AgentId j : p.ranking(i)) r.push_back(sigma(j));
        out[sigma(i)] = std::move(r);
    }
    return Profile(p.instance(), std::move(out));
}

inline bool is_symmetric(const Symmetry& sigma, const Matching& mu) {
    return reflect_matching(sigma, mu) == mu;
}
inline bool is_symmetric(const Symmetry& sigma, const Profile& p) {
    return reflect_profile(sigma, p) == p;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace detail {
inline void enumerate_one_sided_rec(const Instance& inst, Submatching& cur,
                                    std::vector<Matching>& out) {
    AgentId i = 0;
    while (i < inst.agent_count() && cur.assigned(i)) ++i;
    if (i == inst.agent_count()) {
        out.push_back(cur.to_matching(inst));
        return;
    }
    cur.state[i] = i;  // single first, then partners ascending
    enumerate_one_sided_rec(inst, cur, out);
    cur.state[i] = Submatching::kUnassigned;
    for (AgentId j = i + 1; j < inst.agent_count(); ++j) {
        if (cur.assigned(j)) continue;
        cur.add_pair(i, j);
        enumerate_one_sided_rec(inst, cur, out);
        cur.state[i] = Submatching::kUnassigned;
        cur.state[j] = Submatching::kUnassigned;
    }
}
}  // namespace detail

/// Every matching on the instance exactly once, in a fixed canonical order:
/// two-sided by lexicographic permutation (diagonal first), one-sided by the
/// single-first recursion on the smallest unassigned agent.
inline std::vector<Matching> enumerate_matchings(const Instance& inst) {
    std::vector<Matching> out;
    if (inst.two_sided()) {
        std::vector<int> perm(inst.n);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            Matching mu;
            mu.partner.resize(inst.agent_count());
            for (int i = 0; i < inst.n; ++i) {
                mu.partner[i] = inst.n + perm[i];
                mu.partner[inst.n + perm[i]] = i;
            }
            out.push_back(std::move(mu));
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        Submatching cur = Submatching::empty(inst);
        detail::enumerate_one_sided_rec(inst, cur, out);
    }
    return out;
}

/// Canonical matching list plus index lookup.
class MatchingSpace {
public:
    explicit MatchingSpace(const Instance& inst)
        : inst_(inst), all_(enumerate_matchings(inst)) {
        for (size_t i = 0; i < all_.size(); ++i) index_[all_[i].partner] = static_cast<int>(i);
    }
    const Instance& instance() const { return inst_; }
    const std::vector<Matching>& all() const { return all_; }
    int size() const { return static_cast<int>(all_.size()); }
    const Matching& at(int i) const { return all_[i]; }
    int index_of(const Matching& mu) const {
        auto it = index_.find(mu.partner);
        if (it == index_.end()) throw Error("matching not in canonical enumeration");
        return it->second;
    }

private:
    Instance inst_;
    std::vector<Matching> all_;
    std::map<std::vector<AgentId>, int> index_;
};

// ---------------------------------------------------------------------------
// Pareto machinery

/// True iff nu makes every agent weakly better off than eta and at least one
/// strictly (lower rank = better).
inline bool pareto_dominates(const Profile& p, const Matching& nu, const Matching& eta) {
    bool strict = false;
    for (AgentId i = 0; i < p.instance().agent_count(); ++i) {
        int rn = p.rank_of(i, nu(i));
        int re = p.rank_of(i, eta(i));
        if (rn > re) return false;
        if (rn < re) strict = true;
    }
    return strict;
}

inline bool is_efficient(const Profile& p, const Matching& mu,
                         const MatchingSpace* space = nullptr) {
    if (space) {
        for (const Matching& nu : space->all())
            if (pareto_dominates(p, nu, mu)) return false;
        return true;
    }
    for (const Matching& nu : enumerate_matchings(p.instance()))
        if (pareto_dominates(p, nu, mu)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Canonical profile indexing
//
// Every agent's ranking has a lexicographic rank among the permutations of its
// universe; a profile is the mixed-radix number over those digits with agent 0
// most significant. This gives the dense index used by mechanism tables and
// the deterministic enumeration order used in reports.

namespace detail {
inline std::vector<std::vector<AgentId>> sorted_permutations(std::vector<AgentId> base) {
    std::sort(base.begin(), base.end());
    std::vector<std::vector<AgentId>> out;
    do {
        out.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    return out;
}

inline uint64_t factorial(int k) {
    uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<uint64_t>(i);
    return f;
}

// Lexicographic rank of `ranking` among permutations of its (sorted) universe.
inline uint64_t perm_rank(const std::vector<AgentId>& ranking) {
    const int k = static_cast<int>(ranking.size());
    uint64_t rank = 0;
    for (int i = 0; i < k; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < k; ++j) smaller += (ranking[j] < ranking[i]);
        rank += static_cast<uint64_t>(smaller) * factorial(k - 1 - i);
    }
    return rank;
}
}  // namespace detail

class ProfileSpace {
public:
    explicit ProfileSpace(const Instance& inst) : inst_(inst) {
        const int a = inst.agent_count();
        // Two universes at most (one per side); one-sided agents share one.
        if (inst.two_sided()) {
            perms_by_agent_.resize(2);
            perms_by_agent_[0] = detail::sorted_permutations(inst.universe(0));
            perms_by_agent_[1] = detail::sorted_permutations(inst.universe(inst.n));
        } else {
            perms_by_agent_.resize(1);
            perms_by_agent_[0] = detail::sorted_permutations(inst.universe(0));
        }
        perm_count_ = static_cast<uint64_t>(perms_by_agent_[0].size());
        weight_.resize(a);
        uint64_t w = 1;
        for (int i = a - 1; i >= 0; --i) {
            weight_[i] = w;
            w *= perm_count_;
        }
        total_ = w;
    }

    const Instance& instance() const { return inst_; }
    uint64_t total() const { return total_; }
    uint64_t perm_count() const { return perm_count_; }
    uint64_t weight(AgentId a) const { return weight_[a]; }

    const std::vector<AgentId>& ranking_for_digit(AgentId agent, uint64_t digit) const {
        return perms_by_agent_[class_of(agent)][digit];
    }
    const std::vector<std::vector<AgentId>>& rankings_of(AgentId agent) const {
        return perms_by_agent_[class_of(agent)];
    }

    uint64_t digit(uint64_t index, AgentId agent) const {
        return (index / weight_[agent]) % perm_count_;
    }
    uint64_t with_digit(uint64_t index, AgentId agent, uint64_t digit) const {
        uint64_t old = this->digit(index, agent);
        return index + (digit - old) * weight_[agent];  // unsigned wrap is fine
    }

    Profile decode(uint64_t index) const {
        std::vector<std::vector<AgentId>> rks(inst_.agent_count());
        for (AgentId a = 0; a < inst_.agent_count(); ++a)
            rks[a] = ranking_for_digit(a, digit(index, a));
        return Profile(inst_, std::move(rks));
    }

    uint64_t index_of(const Profile& p) const {
        if (p.instance() != inst_) throw Error("profile space: instance mismatch");
        uint64_t idx = 0;
        for (AgentId a = 0; a < inst_.agent_count(); ++a)
            idx += detail::perm_rank(p.ranking(a)) * weight_[a];
        return idx;
    }

private:
    int class_of(AgentId a) const {
        return inst_.two_sided() && inst_.is_woman(a) ? 1 : 0;
    }

    Instance inst_;
    std::vector<std::vector<std::vector<AgentId>>> perms_by_agent_;
    uint64_t perm_count_ = 1;
    uint64_t total_ = 1;
    std::vector<uint64_t> weight_;
};

// ---------------------------------------------------------------------------
// Parallel partitioning helper. fn(worker, begin, end) over [0, total).

inline void parallel_ranges(uint64_t total, int jobs,
                            const std::function<void(int, uint64_t, uint64_t)>& fn) {
    if (jobs <= 1 || total < 2048) {
        fn(0, 0, total);
        return;
    }
    const int J = std::min<uint64_t>(jobs, std::max<uint64_t>(1, total));
    std::vector<std::thread> threads;
    threads.reserve(J);
    for (int w = 0; w < J; ++w) {
        uint64_t b = total * w / J;
        uint64_t e = total * (w + 1) / J;
        threads.emplace_back([&fn, w, b, e] { fn(w, b, e); });
    }
    for (auto& t : threads) t.join();
}

inline int default_jobs() {
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

}  // namespace matchkit
