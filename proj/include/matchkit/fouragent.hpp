#pragma once

// The two-couple special case. With agents {m1, m2, w1, w2} there are exactly
// two matchings: the diagonal nu = {(m1,w1),(m2,w2)} and the crossed
// mu = {(m1,w2),(m2,w1)}. A profile collapses to the set S of agents who
// prefer nu, so a mechanism is a map from the 16 subsets to {nu, mu} and a
// strategy-proof one is an upward-closed family Lambda^nu represented by its
// minimal sets (an antichain of "generators").
//
// Subsets are bitmasks over the canonical agent ids of Instance::two_sided(2):
// bit 0 = m1, bit 1 = m2, bit 2 = w1, bit 3 = w2.

#include "core.hpp"

#include <array>
#include <cstdint>

namespace matchkit {

namespace fourdetail {

constexpr uint8_t kFull = 0xF;

inline uint8_t sigma_mask(uint8_t s) {
    // canonical symmetry swaps m1<->w1 (bits 0,2) and m2<->w2 (bits 1,3)
    return static_cast<uint8_t>(((s & 0b0011) << 2) | ((s & 0b1100) >> 2));
}

inline uint8_t swap_couples_mask(uint8_t s) {
    // relabel couple 1 <-> couple 2 (bits 0<->1 and 2<->3)
    uint8_t lo = static_cast<uint8_t>(((s & 0b0001) << 1) | ((s & 0b0010) >> 1));
    uint8_t hi = static_cast<uint8_t>(((s & 0b0100) << 1) | ((s & 0b1000) >> 1));
    return static_cast<uint8_t>(lo | hi);
}

inline std::string mask_to_string(uint8_t s) {
    static const char* names[4] = {"m1", "m2", "w1", "w2"};
    std::string out = "{";
    bool first = true;
    for (int b = 0; b < 4; ++b)
        if (s & (1u << b)) {
            if (!first) out += ",";
            out += names[b];
            first = false;
        }
    return out + "}";
}

}  // namespace fourdetail

/// A group strategy-proof two-couple mechanism as its generator antichain.
/// Canonical form: generator masks sorted ascending (enables set comparison).
struct FourAgentMechanism {
    std::vector<uint8_t> generators;

    /// Membership of S in Lambda^nu (upward closure of the generators).
    bool selects_diagonal(uint8_t s) const {
        for (uint8_t g : generators)
            if ((g & s) == g) return true;
        return false;
    }

    /// Full 16-bit membership mask; bit S set iff f(S) = nu.
    uint16_t lambda_mask() const {
        uint16_t m = 0;
        for (uint8_t s = 0; s <= fourdetail::kFull; ++s)
            if (selects_diagonal(s)) m |= static_cast<uint16_t>(1u << s);
        return m;
    }

    bool efficient() const {
        return selects_diagonal(fourdetail::kFull) && !selects_diagonal(0);
    }
    bool gender_neutral() const {
        uint16_t m = lambda_mask();
        for (uint8_t s = 0; s <= fourdetail::kFull; ++s)
            if (((m >> s) & 1u) != ((m >> fourdetail::sigma_mask(s)) & 1u)) return false;
        return true;
    }
    /// Invariant under every relabeling of the four agents, i.e. membership
    /// depends on |S| only.
    bool fully_symmetric() const {
        uint16_t m = lambda_mask();
        std::array<int, 5> verdict{-1, -1, -1, -1, -1};
        for (uint8_t s = 0; s <= fourdetail::kFull; ++s) {
            int c = __builtin_popcount(s);
            int v = (m >> s) & 1u;
            if (verdict[c] == -1)
                verdict[c] = v;
            else if (verdict[c] != v)
                return false;
        }
        return true;
    }

    /// Rebuild the canonical antichain from a full membership mask.
    static FourAgentMechanism from_lambda_mask(uint16_t mask) {
        FourAgentMechanism f;
        for (uint8_t s = 0; s <= fourdetail::kFull; ++s) {
            if (!((mask >> s) & 1u)) continue;
            bool minimal = true;
            for (uint8_t t = 0; t <= fourdetail::kFull && minimal; ++t)
                if (t != s && (t & s) == t && ((mask >> t) & 1u)) minimal = false;
            if (minimal) f.generators.push_back(s);
        }
        return f;
    }

    FourAgentMechanism canonical() const {
        FourAgentMechanism f = from_lambda_mask(lambda_mask());
        std::sort(f.generators.begin(), f.generators.end());
        return f;
    }

    /// The mechanism with the roles of nu and mu exchanged.
    FourAgentMechanism exchanged() const {
        uint16_t m = lambda_mask(), out = 0;
        for (uint8_t s = 0; s <= fourdetail::kFull; ++s)
            if (!((m >> (fourdetail::kFull ^ s)) & 1u)) out |= static_cast<uint16_t>(1u << s);
        return from_lambda_mask(out);
    }
    /// The mechanism with the two couples' labels swapped.
    FourAgentMechanism couple_swapped() const {
        FourAgentMechanism f;
        for (uint8_t g : generators) f.generators.push_back(fourdetail::swap_couples_mask(g));
        return f.canonical();
    }

    std::string to_string() const {
        std::string out = "{";
        for (size_t i = 0; i < generators.size(); ++i) {
            if (i) out += ",";
            out += fourdetail::mask_to_string(generators[i]);
        }
        return out + "}";
    }

    bool operator==(const FourAgentMechanism& o) const { return generators == o.generators; }
    bool operator<(const FourAgentMechanism& o) const { return generators < o.generators; }

    // Named members used as royalty terminal rules.
    static FourAgentMechanism matched_by_default() { return {{0b0001, 0b0100}}; }   // {{m1},{w1}}
    static FourAgentMechanism unmatched_by_default() { return {{0b0101}}; }         // {{m1,w1}}
    static FourAgentMechanism quota(int x) {
        FourAgentMechanism f;
        for (uint8_t s = 0; s <= fourdetail::kFull; ++s)
            if (__builtin_popcount(s) == x) f.generators.push_back(s);
        if (f.generators.empty()) throw Error("quota requires 1 <= x <= 4");
        return f.canonical();
    }
};

/// The diagonal and crossed matchings on the canonical 2-couple instance.
inline Matching four_diagonal() { return Matching{{2, 3, 0, 1}}; }
inline Matching four_crossed() { return Matching{{3, 2, 1, 0}}; }

/// Bitmask of agents who prefer the diagonal matching at p.
inline uint8_t four_set_mask(const Profile& p) {
    if (p.instance() != Instance::two_sided(2))
        throw Error("four-agent summary requires the 2-couple instance");
    Matching nu = four_diagonal(), mu = four_crossed();
    uint8_t s = 0;
    for (AgentId i = 0; i < 4; ++i)
        if (p.rank_of(i, nu(i)) < p.rank_of(i, mu(i))) s |= static_cast<uint8_t>(1u << i);
    return s;
}

/// The set S of agents preferring the diagonal, as agent ids.
inline std::vector<AgentId> profile_to_set(const Profile& p) {
    uint8_t m = four_set_mask(p);
    std::vector<AgentId> out;
    for (AgentId i = 0; i < 4; ++i)
        if (m & (1u << i)) out.push_back(i);
    return out;
}

inline Matching evaluate_four(const FourAgentMechanism& f, const Profile& p) {
    return f.selects_diagonal(four_set_mask(p)) ? four_diagonal() : four_crossed();
}

/// Brute force over all 2^16 maps from subsets to {nu, mu}: keep the monotone,
/// efficient, gender-neutral ones, canonicalized and sorted.
inline std::vector<FourAgentMechanism> enumerate_valid_four() {
    std::vector<FourAgentMechanism> out;
    for (uint32_t mask = 0; mask < (1u << 16); ++mask) {
        if (!((mask >> fourdetail::kFull) & 1u)) continue;  // N selects nu
        if (mask & 1u) continue;                            // empty set selects mu
        bool ok = true;
        for (uint8_t s = 0; s <= fourdetail::kFull && ok; ++s) {
            if (!((mask >> s) & 1u)) continue;
            if (!((mask >> fourdetail::sigma_mask(s)) & 1u)) ok = false;
            for (int b = 0; b < 4 && ok; ++b)  // monotone: adding an agent keeps nu
                if (!((mask >> (s | (1u << b))) & 1u)) ok = false;
        }
        if (ok) out.push_back(FourAgentMechanism::from_lambda_mask(static_cast<uint16_t>(mask)).canonical());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// The catalog constructed from the closed-form case list: quotas, the two
/// three-set families, all nonempty unions of the four symmetric two-set
/// items, and the singleton families, closed under couple relabeling and the
/// nu/mu exchange, deduplicated. The empty union of two-set items is excluded:
/// it would make mu constant, violating efficiency.
inline std::vector<FourAgentMechanism> catalog_valid_four() {
    using F = FourAgentMechanism;
    std::vector<F> raw;
    for (int x = 1; x <= 4; ++x) raw.push_back(F::quota(x));
    raw.push_back(F{{0b1101, 0b0111, 0b1010}});  // b) {{m1,w1,w2},{m1,w1,m2},{m2,w2}}
    raw.push_back(F{{0b1101, 0b0111}});          // c) {{m1,w1,w2},{m1,w1,m2}}
    // d) all nonempty unions of the symmetric two-set items
    const std::array<std::vector<uint8_t>, 4> items = {
        std::vector<uint8_t>{0b0101},            // {m1,w1}
        std::vector<uint8_t>{0b1010},            // {m2,w2}
        std::vector<uint8_t>{0b1001, 0b0110},    // {m1,w2},{m2,w1}
        std::vector<uint8_t>{0b0011, 0b1100}};   // {m1,m2},{w1,w2}
    for (int pick = 1; pick < 16; ++pick) {
        F f;
        for (int i = 0; i < 4; ++i)
            if (pick & (1 << i))
                f.generators.insert(f.generators.end(), items[i].begin(), items[i].end());
        raw.push_back(f);
    }
    raw.push_back(F{{0b0001, 0b0100, 0b1010}});  // e) {{m1},{w1},{m2,w2}}
    raw.push_back(F{{0b0001, 0b0100}});          // f) {{m1},{w1}}

    std::vector<F> out;
    for (const F& f : raw) {
        out.push_back(f.canonical());
        out.push_back(f.couple_swapped());
        out.push_back(f.exchanged().canonical());
        out.push_back(f.exchanged().couple_swapped());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace matchkit
