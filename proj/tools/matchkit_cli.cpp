// matchkit command line: run mechanisms on profiles, audit axioms, enumerate
// the two-couple catalog, extract induced one-sided mechanisms, print
// allocation matrices and replay the bundled reference results.
//
// Exit codes: 0 success, 1 an audited axiom or reference check failed,
// 2 usage or input errors.

#include <matchkit/json_io.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace matchkit;

namespace {

struct MechChoice {
    MechanismTable table;
    std::optional<Symmetry> sigma;  // symmetry for the gender axioms
};

std::vector<AgentId> parse_id_list(const std::string& text, const std::string& what) {
    // "[1,2,3]" -> {0,1,2}
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
        throw ParseError(what + ": expected a list like [1,2,3]");
    std::vector<AgentId> out;
    std::string body = text.substr(1, text.size() - 2);
    std::istringstream is(body);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            out.push_back(std::stoi(tok) - 1);
        } catch (const std::exception&) {
            throw ParseError(what + ": bad entry \"" + tok + "\"");
        }
    }
    if (out.empty()) throw ParseError(what + ": empty list");
    return out;
}

std::vector<AgentId> parse_agent_list(const std::string& text, const Instance& inst,
                                      const std::string& what) {
    // "[m1,w2,...]"
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
        throw ParseError(what + ": expected a list like [m1,w1,m2,w2]");
    std::vector<AgentId> out;
    std::string body = text.substr(1, text.size() - 2);
    std::istringstream is(body);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        auto a = inst.agent_by_name(tok);
        if (!a) throw ParseError(what + ": unknown agent \"" + tok + "\"");
        out.push_back(*a);
    }
    return out;
}

FourAgentMechanism terminal_by_name(const std::string& name) {
    if (name == "matched_default") return FourAgentMechanism::matched_by_default();
    if (name == "unmatched_default") return FourAgentMechanism::unmatched_by_default();
    if (name == "unanimity") return FourAgentMechanism::quota(4);
    if (name.rfind("quota", 0) == 0 && name.size() == 6 && name[5] >= '1' && name[5] <= '4')
        return FourAgentMechanism::quota(name[5] - '0');
    throw ParseError("unknown terminal rule \"" + name +
                     "\" (try matched_default, unmatched_default, unanimity, quota1..quota4)");
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError(path + ": invalid JSON");
    return j;
}

// R values of the counterexample write-up, keyed by the canonical matching
// order of one_sided(3): all-singles, {(1),(2,3)}, {(1,2),(3)}, {(1,3),(2)}.
const std::vector<int> kRMinValues{4, 2, 1, 3};

MechanismTable r_min_table3() {
    return MechanismTable::from_function(Instance::one_sided(3), "rmin", [](const Profile& p) {
        return r_min_mechanism(kRMinValues, p);
    });
}

/// Efficient, weakly gender-neutral, but manipulable: the lowest-R efficient
/// symmetric matching when one exists, a fixed neutral royalty mechanism
/// otherwise.
MechanismTable symmetric_r_min_table(const Instance& inst) {
    Symmetry sigma = Symmetry::canonical(inst);
    MechanismTable fallback = uniform_royalty_table(
        inst, Regime::MatchedByDefault, 1, FourAgentMechanism::matched_by_default(),
        "matched_default");
    auto ms = std::make_shared<MatchingSpace>(inst);
    return MechanismTable::from_function(
        inst, "rmin-symmetric", [sigma, fallback, ms](const Profile& p) {
            std::optional<int> best;
            for (int i = 0; i < ms->size(); ++i) {
                const Matching& mu = ms->at(i);
                if (!is_symmetric(sigma, mu)) continue;
                if (!is_efficient(p, mu, ms.get())) continue;
                if (!best) best = i;  // canonical order doubles as the R order
            }
            if (best) return ms->at(*best);
            return fallback(p);
        });
}

MechChoice build_mechanism(const std::string& spec, std::optional<int> n_flag,
                           const std::optional<Profile>& profile) {
    auto need_two_sided = [&](int fallback_n) {
        if (profile) {
            if (!profile->instance().two_sided())
                throw ParseError("mechanism needs a two-sided profile");
            return profile->instance();
        }
        return Instance::two_sided(n_flag.value_or(fallback_n));
    };

    if (spec.rfind("all_D", 0) == 0 || spec.rfind("all_U", 0) == 0) {
        Regime regime = spec[4] == 'D' ? Regime::MatchedByDefault : Regime::UnmatchedByDefault;
        int first = 1;
        std::string terminal_name = "matched_default";
        std::istringstream is(spec.substr(5));
        std::string part;
        while (std::getline(is, part, ':')) {
            if (part.empty()) continue;
            if (part.rfind("first=", 0) == 0)
                first = std::stoi(part.substr(6));
            else if (part.rfind("terminal=", 0) == 0)
                terminal_name = part.substr(9);
            else
                throw ParseError("bad royalty option \"" + part + "\"");
        }
        Instance inst = need_two_sided(3);
        if (first < 1 || first > inst.n) throw ParseError("royal couple index out of range");
        return {uniform_royalty_table(inst, regime, first, terminal_by_name(terminal_name),
                                      terminal_name),
                Symmetry::canonical(inst)};
    }
    if (spec.rfind("royalty:tree=", 0) == 0) {
        RoyaltyMechanism r = parse_royalty_json(load_json_file(spec.substr(13)));
        validate_royalty_domain(r);
        return {royalty_table(r), Symmetry::canonical(r.inst)};
    }
    if (spec.rfind("sd2:fixed=", 0) == 0) {
        Instance inst = need_two_sided(3);
        std::vector<AgentId> order = parse_agent_list(spec.substr(10), inst, "sd2 order");
        return {MechanismTable::from_function(
                    inst, spec,
                    [order](const Profile& p) { return run_sd_two_sided(order, p); }),
                Symmetry::canonical(inst)};
    }
    if (spec.rfind("sd:fixed=", 0) == 0 || spec.rfind("fixed:", 0) == 0) {
        std::string list = spec.rfind("sd:fixed=", 0) == 0 ? spec.substr(9) : spec.substr(6);
        std::vector<AgentId> order = parse_id_list(list, "sd order");
        Instance inst = profile ? profile->instance()
                                : Instance::one_sided(n_flag.value_or(order.size()));
        if (inst.two_sided()) throw ParseError("sd mechanisms are one-sided");
        return {sd_table(inst, order), std::nullopt};
    }
    if (spec.rfind("sd:tree=", 0) == 0) {
        Instance inst =
            profile ? profile->instance() : Instance::one_sided(n_flag.value_or(3));
        if (inst.two_sided()) throw ParseError("sd mechanisms are one-sided");
        PickingOrder po = parse_picking_order_json(load_json_file(spec.substr(8)), inst);
        SequentialDictatorship sd{po};
        return {MechanismTable::from_function(
                    inst, spec, [sd](const Profile& p) { return run_sd(sd, p); }),
                std::nullopt};
    }
    if (spec.rfind("four:", 0) == 0) {
        FourAgentMechanism f = terminal_by_name(spec.substr(5));
        Instance inst = Instance::two_sided(2);
        return {MechanismTable::from_function(
                    inst, spec, [f](const Profile& p) { return evaluate_four(f, p); }),
                Symmetry::canonical(inst)};
    }
    if (spec == "rmin") return {r_min_table3(), std::nullopt};
    if (spec == "rmin-symmetric") {
        Instance inst = need_two_sided(3);
        return {symmetric_r_min_table(inst), Symmetry::canonical(inst)};
    }
    if (spec == "index-comparison") {
        Instance inst = need_two_sided(3);
        return {index_comparison_table(inst), Symmetry::canonical(inst)};
    }
    if (spec == "constant:diagonal") {
        Instance inst = need_two_sided(3);
        std::vector<std::pair<AgentId, AgentId>> pairs;
        for (int i = 0; i < inst.n; ++i) pairs.emplace_back(i, i + inst.n);
        Matching diag = matching_from_pairs(inst, pairs);
        return {MechanismTable::from_function(inst, spec,
                                              [diag](const Profile&) { return diag; }),
                Symmetry::canonical(inst)};
    }
    throw ParseError("unknown mechanism spec \"" + spec + "\"");
}

CheckMode parse_mode(const std::string& text) {
    if (text == "exhaustive") return CheckMode::Exhaustive();
    if (text.rfind("sample:", 0) == 0) {
        auto rest = text.substr(7);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw ParseError("mode: expected sample:K:SEED");
        try {
            return CheckMode::Sample(std::stoull(rest.substr(0, colon)),
                                     std::stoull(rest.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ParseError("mode: expected sample:K:SEED");
        }
    }
    throw ParseError("mode: expected exhaustive or sample:K:SEED");
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& mech_spec, const std::optional<std::string>& profile_path,
               std::optional<int> n_flag, const std::string& axioms_csv,
               const std::string& mode_text, int jobs, const std::string& format) {
    std::optional<Profile> profile;
    if (profile_path) profile = parse_profile_text(load_json_file(*profile_path).dump());
    MechChoice mech = build_mechanism(mech_spec, n_flag, profile);
    CheckMode mode = parse_mode(mode_text);

    std::vector<std::string> wanted;
    std::istringstream is(axioms_csv);
    std::string tok;
    while (std::getline(is, tok, ',')) wanted.push_back(tok);
    if (wanted.empty()) throw ParseError("no axioms requested");

    std::vector<AxiomReport> reports;
    for (const std::string& ax : wanted) {
        if (ax == "eff")
            reports.push_back(check_efficiency(mech.table, mode, jobs));
        else if (ax == "gsp")
            reports.push_back(check_group_sp(mech.table, Coalitions::UpToTwo, mode, jobs));
        else if (ax == "gsp-all")
            reports.push_back(check_group_sp(mech.table, Coalitions::All, mode, jobs));
        else if (ax == "wgn") {
            if (!mech.sigma) throw ParseError("wgn needs a two-sided mechanism");
            reports.push_back(check_weak_gn(mech.table, *mech.sigma, mode, jobs));
        } else if (ax == "gn")
            reports.push_back(check_gn(mech.table, mode, jobs));
        else if (ax == "ir")
            reports.push_back(check_ir(mech.table));
        else if (ax == "stab")
            reports.push_back(check_stability(mech.table, mode, jobs));
        else
            throw ParseError("unknown axiom \"" + ax +
                             "\" (try eff,gsp,gsp-all,wgn,gn,ir,stab)");
    }

    bool any_failure = false;
    if (format == "json") {
        Json arr = Json::array();
        for (const auto& rep : reports) arr.push_back(report_to_json(rep, mech.table));
        std::cout << arr.dump(2) << "\n";
        for (const auto& rep : reports) any_failure |= !rep.holds;
    } else {
        std::cout << "mechanism: " << mech.table.name() << "  (profiles: "
                  << mech.table.profile_count() << ")\n";
        for (const auto& rep : reports) {
            std::cout << "  " << rep.axiom << ": " << (rep.holds ? "holds" : "FAILS") << "  ["
                      << rep.mode << ", checked " << rep.profiles_checked << "]";
            if (!rep.details.empty()) std::cout << "  " << rep.details;
            std::cout << "\n";
            if (rep.witness) {
                std::cout << "    witness: "
                          << witness_to_json(*rep.witness, mech.table).dump() << "\n";
                std::cout << "    revalidated: "
                          << (revalidate(rep, mech.table) ? "yes" : "NO") << "\n";
            }
            any_failure |= !rep.holds;
        }
    }
    return any_failure ? 1 : 0;
}

// ---------------------------------------------------------------------------
// run

int cmd_run(const std::string& mech_spec, const std::string& profile_path,
            const std::string& format) {
    Profile p = parse_profile_text(load_json_file(profile_path).dump());
    MechChoice mech = build_mechanism(mech_spec, std::nullopt, p);
    Matching mu = mech.table(p);
    const Instance& inst = p.instance();
    if (format == "json") {
        std::cout << matching_to_json(inst, mu).dump(2) << "\n";
    } else {
        std::cout << matching_to_string(inst, mu) << "\n";
        for (AgentId a = 0; a < inst.agent_count(); ++a)
            std::cout << inst.agent_name(a) << " -> " << inst.agent_name(mu(a)) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// enumerate-four

int cmd_enumerate_four(bool show_lattice, int lattice_index, const std::string& format) {
    auto scanned = enumerate_valid_four();
    auto catalog = catalog_valid_four();
    bool equal = std::set<FourAgentMechanism>(scanned.begin(), scanned.end()) ==
                 std::set<FourAgentMechanism>(catalog.begin(), catalog.end());
    if (format == "json") {
        Json arr = Json::array();
        for (const auto& f : scanned) {
            Json e = four_agent_to_json(f);
            e["fully_symmetric"] = f.fully_symmetric();
            arr.push_back(e);
        }
        Json out;
        out["survivors"] = arr;
        out["count"] = scanned.size();
        out["catalog_matches_scan"] = equal;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "group strategy-proof, efficient, symmetric two-couple mechanisms: "
                  << scanned.size() << "\n";
        for (size_t i = 0; i < scanned.size(); ++i)
            std::cout << "  [" << i << "] " << scanned[i].to_string()
                      << (scanned[i].fully_symmetric() ? "  (fully symmetric)" : "") << "\n";
        std::cout << "closed-form catalog matches the scan: " << (equal ? "yes" : "NO") << "\n";
        if (show_lattice) {
            if (lattice_index < 0 || lattice_index >= static_cast<int>(scanned.size()))
                throw ParseError("lattice index out of range");
            const FourAgentMechanism& f = scanned[lattice_index];
            std::cout << "\nupward-closed family of " << f.to_string()
                      << "  ([*] marks sets choosing the diagonal matching):\n";
            auto mark = [&](uint8_t s) {
                return std::string(f.selects_diagonal(s) ? "[*]" : "[ ]") +
                       fourdetail::mask_to_string(s);
            };
            // cardinality rows, men-heavy sets left of the dotted symmetry axis
            std::cout << "                             " << mark(0b1111) << "\n";
            std::cout << "   " << mark(0b0111) << " " << mark(0b1011) << "      :      "
                      << mark(0b1101) << " " << mark(0b1110) << "\n";
            std::cout << " " << mark(0b0011) << " " << mark(0b1001) << " " << mark(0b0101)
                      << " " << mark(0b1010) << " : " << mark(0b0110) << " " << mark(0b1100)
                      << "\n";
            std::cout << "         " << mark(0b0001) << " " << mark(0b0010)
                      << "      :      " << mark(0b0100) << " " << mark(0b1000) << "\n";
            std::cout << "                             " << mark(0b0000) << "\n";
        }
    }
    return equal ? 0 : 1;
}

// ---------------------------------------------------------------------------
// induce

int cmd_induce(const std::string& mech_spec, std::optional<int> n_flag,
               const std::string& format, int jobs) {
    MechChoice mech = build_mechanism(mech_spec, n_flag, std::nullopt);
    if (!mech.sigma) throw ParseError("induce needs a two-sided mechanism");
    MechanismTable g = induced_one_sided(mech.table, *mech.sigma);
    AxiomReport eff = check_efficiency(g, CheckMode::Exhaustive(), jobs);
    AxiomReport gsp = check_group_sp(g, Coalitions::All, CheckMode::Exhaustive(), jobs);
    if (format == "json") {
        Json out;
        out["source"] = mech.table.name();
        out["agents"] = g.instance().n;
        Json table = Json::array();
        for (uint64_t i = 0; i < g.profile_count(); ++i) {
            Json row;
            row["profile"] = profile_to_json(g.space().decode(i));
            row["matching"] = matching_to_json(g.instance(), g.outcome(i));
            table.push_back(row);
        }
        out["table"] = table;
        out["efficiency"] = report_to_json(eff, g);
        out["group_sp"] = report_to_json(gsp, g);
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "induced one-sided mechanism of " << mech.table.name() << " on "
                  << g.instance().n << " agents (" << g.profile_count() << " profiles)\n";
        std::cout << "  readout: every symmetric profile resolved consistently\n";
        std::cout << "  efficiency: " << (eff.holds ? "holds" : "FAILS") << "\n";
        std::cout << "  group strategy-proofness (all coalitions): "
                  << (gsp.holds ? "holds" : "FAILS") << "\n";
        if (g.profile_count() <= 16)
            for (uint64_t i = 0; i < g.profile_count(); ++i)
                std::cout << "    profile " << i << " -> "
                          << matching_to_string(g.instance(), g.outcome(i)) << "\n";
    }
    return eff.holds && gsp.holds ? 0 : 1;
}

// ---------------------------------------------------------------------------
// randomize

int cmd_randomize(const std::string& family, const std::string& profile_path,
                  const std::string& format) {
    Profile p = parse_profile_text(load_json_file(profile_path).dump());
    if (!p.instance().two_sided()) throw ParseError("randomize needs a two-sided profile");
    RoleDistribution roles;
    std::string note;
    if (family == "rsd") {
        roles = all_picking_orders(p.instance());
    } else if (family == "royalty") {
        roles = all_royal_pairs(p.instance());
        note = kRoyalTieBreakNote;
    } else {
        throw ParseError("unknown family \"" + family + "\" (try rsd or royalty)");
    }
    RationalMatrix m = symmetrize(roles, p);
    AxiomReport expost = expost_efficient(roles, p);
    if (format == "json") {
        Json out;
        out["family"] = family;
        out["roles"] = roles.size();
        out["matrix"] = matrix_to_json(p.instance(), m);
        out["ex_post_efficient"] = expost.holds;
        if (!note.empty()) out["note"] = note;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << family << " allocation over " << roles.size() << " roles\n";
        std::cout << m.to_text(p.instance());
        std::cout << "ex-post efficient here: " << (expost.holds ? "yes" : "NO") << "\n";
        if (!note.empty()) std::cout << note << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// reproduce

struct Reproducer {
    Json fixtures;
    int failures = 0;

    const Json& entry(const std::string& name) {
        if (!fixtures.contains(name))
            throw ParseError("fixtures file has no entry \"" + name + "\"");
        return fixtures[name];
    }

    void line(const std::string& what, bool pass, const std::string& origin,
              const std::string& detail = "") {
        std::cout << (pass ? "PASS" : "FAIL") << "  " << what << "  [" << origin << "]";
        if (!detail.empty()) std::cout << "  " << detail;
        std::cout << "\n";
        failures += !pass;
    }

    Profile cyclic() { return parse_profile_json(entry("cyclic3_profile")["value"]); }

    void rsd_table() {
        Profile p = cyclic();
        RationalMatrix got = symmetrize(all_picking_orders(p.instance()), p);
        RationalMatrix want = parse_matrix_json(entry("rsd_matrix")["value"]);
        line("random serial dictatorship matrix at the cyclic profile", got == want,
             entry("rsd_matrix")["origin"].get<std::string>());
        std::cout << got.to_text(p.instance());
    }

    void royalty_table() {
        Profile p = cyclic();
        RationalMatrix got = symmetrize(all_royal_pairs(p.instance()), p);
        RationalMatrix want = parse_matrix_json(entry("royalty_matrix")["value"]);
        line("uniform royal-pair matrix at the cyclic profile", got == want,
             entry("royalty_matrix")["origin"].get<std::string>());
        std::cout << got.to_text(p.instance());
        std::cout << kRoyalTieBreakNote << "\n";
    }

    void fosd() {
        Profile p = cyclic();
        RationalMatrix rsd = symmetrize(all_picking_orders(p.instance()), p);
        RationalMatrix roy = symmetrize(all_royal_pairs(p.instance()), p);
        RationalMatrix half = parse_matrix_json(entry("improving_matrix")["value"]);
        std::string origin = entry("improving_matrix")["origin"].get<std::string>();
        line("half-half matrix stochastically improves on RSD", fosd_dominates(p, half, rsd),
             origin);
        line("RSD stochastically improves on the royal-pair allocation",
             fosd_dominates(p, rsd, roy), origin);
        line("royal-pair allocation never improves on RSD here",
             !fosd_dominates(p, roy, rsd), origin);
    }

    void stability() {
        Profile p = cyclic();
        const Json& e = entry("stable_matchings");
        std::string origin = e["origin"].get<std::string>();
        auto to_matching = [&](const Json& pairs) {
            std::vector<std::pair<AgentId, AgentId>> ps;
            for (const Json& pr : pairs)
                ps.emplace_back(*p.instance().agent_by_name(pr[0].get<std::string>()),
                                *p.instance().agent_by_name(pr[1].get<std::string>()));
            return matching_from_pairs(p.instance(), ps);
        };
        Matching m_opt = to_matching(e["value"]["m_optimal"]);
        Matching w_opt = to_matching(e["value"]["w_optimal"]);
        auto stable = stable_matchings(p);
        bool exact = stable.size() == 2 &&
                     ((stable[0] == m_opt && stable[1] == w_opt) ||
                      (stable[0] == w_opt && stable[1] == m_opt));
        line("exactly the two optimal stable matchings at the printed profile", exact, origin);
        std::cout << "  profile: " << profile_to_json(p).dump() << "\n";
        for (const Matching& s : stable)
            std::cout << "  stable: " << matching_to_string(p.instance(), s) << "\n";
        Symmetry sigma = Symmetry::canonical(p.instance());
        line("men-optimal matching differs from its reflection",
             reflect_matching(sigma, m_opt) != m_opt, origin,
             matching_to_string(p.instance(), reflect_matching(sigma, m_opt)));
        line("women-optimal matching differs from its reflection",
             reflect_matching(sigma, w_opt) != w_opt, origin,
             matching_to_string(p.instance(), reflect_matching(sigma, w_opt)));
    }

    void catalog() {
        auto scanned = enumerate_valid_four();
        auto catalog = catalog_valid_four();
        bool equal = std::set<FourAgentMechanism>(scanned.begin(), scanned.end()) ==
                     std::set<FourAgentMechanism>(catalog.begin(), catalog.end());
        int want = entry("two_couple_survivors")["value"].get<int>();
        std::string origin = entry("two_couple_survivors")["origin"].get<std::string>();
        line("2^16 scan equals the closed-form catalog (difference empty)", equal, origin);
        line("survivor count = " + std::to_string(want),
             static_cast<int>(scanned.size()) == want, origin,
             "scanned " + std::to_string(scanned.size()));
    }

    void counterexamples() {
        // the R-minimizing rule is efficient but manipulable by agent 2
        MechanismTable rmin = r_min_table3();
        line("R-minimizing rule is efficient", check_efficiency(rmin).holds, "recomputed");
        AxiomReport gsp = check_group_sp(rmin, Coalitions::UpToTwo);
        bool witness_ok = false;
        if (!gsp.holds && gsp.witness) {
            Profile star = parse_profile_json(entry("rmin_profile")["value"]);
            std::vector<AgentId> dev;
            for (const Json& v : entry("rmin_deviation")["value"])
                dev.push_back(v.get<int>() - 1);
            AxiomReport manual;
            manual.axiom = "group_sp";
            manual.holds = false;
            Witness wit;
            wit.profile_index = rmin.space().index_of(star);
            wit.coalition = {1};
            wit.misreport = {dev};
            manual.witness = wit;
            witness_ok = revalidate(manual, rmin) && revalidate(gsp, rmin);
        }
        line("R-minimizing rule is manipulable, the printed deviation re-validates",
             witness_ok, entry("rmin_profile")["origin"].get<std::string>());

        Instance one = Instance::one_sided(3);
        MechanismTable constant = MechanismTable::from_function(
            one, "constant", [one](const Profile&) { return matching_from_pairs(one, {}); });
        line("a constant mechanism is group strategy-proof",
             check_group_sp(constant, Coalitions::All).holds, "recomputed");
        line("but not efficient", !check_efficiency(constant).holds, "recomputed");

        Instance two = Instance::two_sided(3);
        MechanismTable sym = symmetric_r_min_table(two);
        line("symmetric R-minimizing rule is efficient", check_efficiency(sym).holds,
             "recomputed");
        line("and weakly gender-neutral",
             check_weak_gn(sym, Symmetry::canonical(two)).holds, "recomputed");
        line("but not group strategy-proof",
             !check_group_sp(sym, Coalitions::UpToTwo).holds, "recomputed");

        MechanismTable ic = index_comparison_table(two);
        line("index-comparison mechanism is weakly gender-neutral",
             check_weak_gn(ic, Symmetry::canonical(two)).holds, "recomputed");
        AxiomReport gn = check_gn(ic);
        line("but a one-sided-dictatorship continuation breaks gender-neutrality",
             !gn.holds && revalidate(gn, ic), "recomputed",
             gn.witness ? gn.witness->note : "");
    }
};

int cmd_reproduce(const std::string& target, const std::string& fixtures_path) {
    Reproducer rep;
    rep.fixtures = load_json_file(fixtures_path);
    bool all = target == "all";
    if (all || target == "rsd-table") rep.rsd_table();
    if (all || target == "royalty-table") rep.royalty_table();
    if (all || target == "fosd") rep.fosd();
    if (all || target == "stability") rep.stability();
    if (all || target == "two-couple-catalog" || target == "lemma4") rep.catalog();
    if (all || target == "axiom-counterexamples") rep.counterexamples();
    static const std::set<std::string> known{
        "all",    "rsd-table", "royalty-table",       "fosd",
        "stability", "two-couple-catalog", "lemma4", "axiom-counterexamples"};
    if (!known.count(target)) throw ParseError("unknown reproduce target \"" + target + "\"");
    return rep.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matchkit: matching mechanisms and axiom audits"};
    app.require_subcommand(1);

    std::string mech, profile_path, axioms = "eff,gsp", mode = "exhaustive";
    std::string format = "text", family = "rsd", target = "all";
    std::string fixtures = "data/fixtures.json";
    std::optional<int> n_flag;
    int jobs = default_jobs();
    bool lattice = false;
    int lattice_index = 0;

    auto* run = app.add_subcommand("run", "run a mechanism on a profile");
    run->add_option("--mech", mech, "mechanism spec")->required();
    run->add_option("--profile", profile_path, "profile JSON file")->required();
    run->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    auto* verify = app.add_subcommand("verify", "audit axioms of a mechanism");
    verify->add_option("--mech", mech, "mechanism spec")->required();
    verify->add_option("--profile", profile_path, "profile JSON file fixing the instance");
    verify->add_option("--n", n_flag, "instance size when no profile is given");
    verify->add_option("--axioms", axioms, "comma list: eff,gsp,gsp-all,wgn,gn,ir,stab");
    verify->add_option("--mode", mode, "exhaustive or sample:K:SEED");
    verify->add_option("--jobs", jobs, "worker threads");
    verify->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    auto* enumerate = app.add_subcommand("enumerate-four",
                                         "enumerate the two-couple mechanisms");
    enumerate->add_flag("--lattice", lattice, "render one survivor as the subset lattice");
    enumerate->add_option("--index", lattice_index, "survivor to render");
    enumerate->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    auto* induce = app.add_subcommand("induce", "extract the induced one-sided mechanism");
    induce->add_option("--mech", mech, "two-sided mechanism spec")->required();
    induce->add_option("--n", n_flag, "number of couples");
    induce->add_option("--jobs", jobs, "worker threads");
    induce->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    auto* randomize = app.add_subcommand("randomize", "print a symmetrized allocation matrix");
    randomize->add_option("--family", family, "rsd or royalty")->required();
    randomize->add_option("--profile", profile_path, "profile JSON file")->required();
    randomize->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    auto* reproduce = app.add_subcommand("reproduce", "replay the bundled reference results");
    reproduce->add_option("target", target,
                          "rsd-table|royalty-table|fosd|stability|"
                          "two-couple-catalog (alias: lemma4)|"
                          "axiom-counterexamples|all");
    reproduce->add_option("--fixtures", fixtures, "fixtures JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(mech, profile_path, format);
        if (verify->parsed())
            return cmd_verify(mech,
                              profile_path.empty() ? std::nullopt
                                                   : std::make_optional(profile_path),
                              n_flag, axioms, mode, jobs, format);
        if (enumerate->parsed()) return cmd_enumerate_four(lattice, lattice_index, format);
        if (induce->parsed()) return cmd_induce(mech, n_flag, format, jobs);
        if (randomize->parsed()) return cmd_randomize(family, profile_path, format);
        if (reproduce->parsed()) return cmd_reproduce(target, fixtures);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
