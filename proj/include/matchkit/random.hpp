#pragma once

// Exact-rational symmetrization of deterministic mechanisms: allocation
// matrices as fractions, first-order stochastic dominance, ex-post
// efficiency, and the uniform-role families (all picking orders, all royal
// pairs). No floating point anywhere.

#include "axioms.hpp"
#include "core.hpp"
#include "twosided.hpp"

#include <numeric>

namespace matchkit {

struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n, long long d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw Error("zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
    }

    Rat operator+(const Rat& o) const { return Rat(num * o.den + o.num * den, den * o.den); }
    Rat operator-(const Rat& o) const { return Rat(num * o.den - o.num * den, den * o.den); }
    Rat operator*(const Rat& o) const { return Rat(num * o.num, den * o.den); }
    bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const { return num * o.den < o.num * den; }
    bool operator<=(const Rat& o) const { return num * o.den <= o.num * den; }
    bool operator>(const Rat& o) const { return o < *this; }
    bool operator>=(const Rat& o) const { return o <= *this; }

    std::string to_string() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
    static Rat parse(const std::string& s) {
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rat(std::stoll(s));
            return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
        } catch (const std::exception&) {
            throw ParseError("bad fraction: " + s);
        }
    }
};

/// Man-by-woman allocation matrix of exact probabilities.
struct RationalMatrix {
    int n = 0;
    std::vector<Rat> cell;  // row-major

    static RationalMatrix zero(int n) {
        RationalMatrix m;
        m.n = n;
        m.cell.assign(static_cast<size_t>(n) * n, Rat(0));
        return m;
    }
    Rat& at(int man, int woman) { return cell[static_cast<size_t>(man) * n + woman]; }
    const Rat& at(int man, int woman) const {
        return cell[static_cast<size_t>(man) * n + woman];
    }
    bool operator==(const RationalMatrix& o) const { return n == o.n && cell == o.cell; }

    bool doubly_stochastic() const {
        for (int i = 0; i < n; ++i) {
            Rat row(0), col(0);
            for (int j = 0; j < n; ++j) {
                if (at(i, j) < Rat(0) || at(i, j) > Rat(1)) return false;
                row = row + at(i, j);
                col = col + at(j, i);
            }
            if (row != Rat(1) || col != Rat(1)) return false;
        }
        return true;
    }

    std::string to_text(const Instance& inst) const {
        std::ostringstream os;
        os << "      ";
        for (int j = 0; j < n; ++j) os << inst.agent_name(n + j) << "      ";
        os << "\n";
        for (int i = 0; i < n; ++i) {
            os << inst.agent_name(i) << "  ";
            for (int j = 0; j < n; ++j) {
                std::string s = at(i, j).to_string();
                os << s << std::string(s.size() < 7 ? 7 - s.size() : 1, ' ');
            }
            os << "\n";
        }
        return os.str();
    }
};

/// A finite set of roles played uniformly at random; each role names a
/// deterministic mechanism.
struct RoleDistribution {
    std::vector<std::function<Matching(const Profile&)>> roles;
    std::vector<std::string> labels;

    size_t size() const { return roles.size(); }
};

/// The exact average of the outcome indicator matrices over all roles.
inline RationalMatrix symmetrize(const RoleDistribution& roles, const Profile& p) {
    const Instance& inst = p.instance();
    if (!inst.two_sided()) throw Error("allocation matrices are two-sided");
    if (roles.size() == 0) throw Error("role distribution must be nonempty");
    RationalMatrix m = RationalMatrix::zero(inst.n);
    const Rat share(1, static_cast<long long>(roles.size()));
    for (const auto& role : roles.roles) {
        Matching mu = role(p);
        validate_matching(inst, mu);
        for (int i = 0; i < inst.n; ++i) m.at(i, mu(i) - inst.n) = m.at(i, mu(i) - inst.n) + share;
    }
    if (!m.doubly_stochastic()) throw Error("symmetrized matrix is not doubly stochastic");
    return m;
}

/// All (2n)! picking orders of the two-sided serial dictatorship.
inline RoleDistribution all_picking_orders(const Instance& inst) {
    if (!inst.two_sided()) throw Error("picking orders over both sides need a two-sided instance");
    RoleDistribution out;
    std::vector<AgentId> order(inst.agent_count());
    std::iota(order.begin(), order.end(), 0);
    do {
        std::string label;
        for (AgentId a : order) label += inst.agent_name(a) + " ";
        out.roles.push_back(
            [order](const Profile& p) { return run_sd_two_sided(order, p); });
        out.labels.push_back(label);
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
}

// ---------------------------------------------------------------------------
// The uniform royal-pair family
//
// One matched-by-default royal round for each of the n*n ordered (man, woman)
// pairs. When the royals marry, the four remaining agents are finished with
// an efficient selection between their two completions; if both completions
// are efficient the one pairing fewer same-index couples wins (this is the
// tie-break that reproduces the published allocation), with the canonically
// smaller matching as the final fallback.

inline const char* kRoyalTieBreakNote =
    "terminal tie-break: among the two completions of the last four agents, "
    "drop any Pareto-dominated one; if both survive, prefer the completion "
    "matching fewer same-index couples, then the canonically smaller one";

inline Matching matched_by_default_realization(const Profile& p, AgentId royal_man,
                                               AgentId royal_woman) {
    const Instance& inst = p.instance();
    if (!inst.two_sided()) throw Error("royal realizations are two-sided");
    if (!inst.is_man(royal_man) || !inst.is_woman(royal_woman))
        throw Error("royal pair must be one man and one woman");
    Submatching nu = Submatching::empty(inst);
    std::vector<char> alive(inst.agent_count(), 1);
    auto claim = [&](AgentId a, AgentId b) {
        nu.add_pair(a, b);
        alive[a] = 0;
        alive[b] = 0;
    };

    while (nu.remaining_count() > 4) {
        AgentId m = royal_man, w = royal_woman;
        bool married = p.favorite(m, alive) == w || p.favorite(w, alive) == m;
        if (married) {
            claim(m, w);
        } else {
            claim(m, p.favorite(m, alive, w));
            claim(w, p.favorite(w, alive, m));
        }
    }

    if (nu.remaining_count() == 4) {
        std::vector<AgentId> men, women;
        for (AgentId a = 0; a < inst.agent_count(); ++a)
            if (alive[a]) (inst.is_man(a) ? men : women).push_back(a);
        Submatching straight = nu, crossed = nu;
        straight.add_pair(men[0], women[0]);
        straight.add_pair(men[1], women[1]);
        crossed.add_pair(men[0], women[1]);
        crossed.add_pair(men[1], women[0]);
        Matching a = straight.to_matching(inst), b = crossed.to_matching(inst);
        bool a_dominated = pareto_dominates(p, b, a);
        bool b_dominated = pareto_dominates(p, a, b);
        if (a_dominated) return b;
        if (b_dominated) return a;
        auto same_index = [&](const Matching& mu) {
            int c = 0;
            for (AgentId m : men) c += (mu(m) == m + inst.n);
            return c;
        };
        int sa = same_index(a), sb = same_index(b);
        if (sa != sb) return sa < sb ? a : b;
        return a < b ? a : b;
    }
    if (nu.remaining_count() == 2) {
        AgentId m = -1, w = -1;
        for (AgentId a = 0; a < inst.agent_count(); ++a)
            if (alive[a]) (inst.is_man(a) ? m : w) = a;
        claim(m, w);
    }
    return nu.to_matching(inst);
}

/// All n*n ordered royal (man, woman) pairs, matched-by-default each round.
inline RoleDistribution all_royal_pairs(const Instance& inst) {
    if (!inst.two_sided()) throw Error("royal pairs need a two-sided instance");
    RoleDistribution out;
    for (AgentId m = 0; m < inst.n; ++m)
        for (AgentId w = inst.n; w < 2 * inst.n; ++w) {
            out.roles.push_back([m, w](const Profile& p) {
                return matched_by_default_realization(p, m, w);
            });
            out.labels.push_back("royals (" + inst.agent_name(m) + "," + inst.agent_name(w) +
                                 ")");
        }
    return out;
}

// ---------------------------------------------------------------------------
// Comparisons

/// P first-order stochastically dominates Q at p: for every agent and every
/// top segment of their ranking, P puts at least as much mass there, strictly
/// more somewhere.
inline bool fosd_dominates(const Profile& p, const RationalMatrix& P, const RationalMatrix& Q) {
    const Instance& inst = p.instance();
    if (!inst.two_sided() || P.n != inst.n || Q.n != inst.n)
        throw Error("fosd comparison needs matching two-sided dimensions");
    bool strict = false;
    for (AgentId a = 0; a < inst.agent_count(); ++a) {
        Rat cp(0), cq(0);
        for (AgentId partner : p.ranking(a)) {
            int i = inst.is_man(a) ? a : partner;
            int j = inst.is_man(a) ? partner - inst.n : a - inst.n;
            cp = cp + P.at(i, j);
            cq = cq + Q.at(i, j);
            if (cp < cq) return false;
            if (cq < cp) strict = true;
        }
    }
    return strict;
}

/// Holds iff every role's realized outcome is efficient at p.
inline AxiomReport expost_efficient(const RoleDistribution& roles, const Profile& p) {
    AxiomReport rep{"expost_efficiency", true, std::nullopt, 0, "exhaustive", ""};
    MatchingSpace ms(p.instance());
    for (size_t r = 0; r < roles.size(); ++r) {
        ++rep.profiles_checked;
        Matching mu = roles.roles[r](p);
        for (const Matching& nuM : ms.all()) {
            if (pareto_dominates(p, nuM, mu)) {
                rep.holds = false;
                Witness wit;
                wit.dominating = ms.index_of(nuM);
                wit.outcome_before = ms.index_of(mu);
                wit.note = "role " + roles.labels[r] + " realizes a dominated matching";
                rep.witness = wit;
                return rep;
            }
        }
    }
    return rep;
}

/// Searches three-couple profiles (a deterministic seeded sequence) for one
/// where the uniform royal-pair allocation strictly dominates the random
/// serial dictatorship allocation; the published example is ranked the other
/// way around.
inline std::optional<Profile> find_ranking_flip(uint64_t seed, uint64_t budget) {
    Instance inst = Instance::two_sided(3);
    ProfileSpace space(inst);
    RoleDistribution sd = all_picking_orders(inst);
    RoleDistribution royals = all_royal_pairs(inst);
    uint64_t state = seed;
    for (uint64_t t = 0; t < budget; ++t) {
        uint64_t idx = detail::splitmix64(state) % space.total();
        Profile p = space.decode(idx);
        RationalMatrix rsd = symmetrize(sd, p);
        RationalMatrix roy = symmetrize(royals, p);
        if (fosd_dominates(p, roy, rsd)) return p;
    }
    return std::nullopt;
}

}  // namespace matchkit
