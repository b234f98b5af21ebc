// Acceptance suite: replays the headline results end to end, one line per
// criterion, with wall-clock limits enforced. Exits nonzero on any failure.

#include <matchkit/json_io.hpp>

#include <chrono>
#include <iomanip>
#include <iostream>
#include <set>

using namespace matchkit;

namespace {

int g_failures = 0;
int g_index = 0;
const int g_jobs = default_jobs();

void criterion(const std::string& name, double limit_seconds,
               const std::function<bool(std::string&)>& body) {
    ++g_index;
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = dt <= limit_seconds;
    std::cout << "[" << std::setw(2) << g_index << "] " << (pass && in_time ? "PASS" : "FAIL")
              << "  " << name << "  (" << std::fixed << std::setprecision(2) << dt
              << "s, limit " << std::setprecision(0) << limit_seconds << "s)";
    if (!detail.empty()) std::cout << "\n     " << detail;
    if (!in_time) std::cout << "\n     exceeded the time limit";
    std::cout << "\n";
    std::cout.flush();
    if (!(pass && in_time)) ++g_failures;
}

Profile cyclic3() {
    Instance inst = Instance::two_sided(3);
    return Profile(inst, {{5, 4, 3}, {3, 5, 4}, {4, 3, 5}, {2, 1, 0}, {0, 2, 1}, {1, 0, 2}});
}

RationalMatrix matrix3(std::vector<std::vector<std::string>> rows) {
    RationalMatrix m = RationalMatrix::zero(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m.at(i, j) = Rat::parse(rows[i][j]);
    return m;
}

// The audited family: every (royal couple, regime) combination crossed with
// four terminal rules, plus three further terminals on the lead pair.
std::vector<MechanismTable> royalty_family() {
    Instance inst = Instance::two_sided(3);
    auto catalog = catalog_valid_four();
    std::vector<std::pair<FourAgentMechanism, std::string>> terminals = {
        {FourAgentMechanism::matched_by_default(), "matched_default"},
        {FourAgentMechanism::unmatched_by_default(), "unmatched_default"},
        {FourAgentMechanism::quota(1), "quota1"},
        {FourAgentMechanism::quota(4), "quota4"}};
    std::vector<MechanismTable> out;
    for (int r = 1; r <= 3; ++r)
        for (Regime reg : {Regime::MatchedByDefault, Regime::UnmatchedByDefault})
            for (const auto& [t, name] : terminals)
                out.push_back(uniform_royalty_table(inst, reg, r, t, name));
    for (size_t idx : {size_t(4), size_t(9), size_t(14)})
        out.push_back(uniform_royalty_table(inst, Regime::MatchedByDefault, 1, catalog[idx],
                                            "catalog" + std::to_string(idx)));
    return out;
}

std::vector<MechanismTable> sd3_family() {
    std::vector<MechanismTable> out;
    Instance inst = Instance::one_sided(3);
    for (AgentId first = 0; first < 3; ++first)
        for (int pick : {0, 1}) {
            std::vector<AgentId> others;
            for (AgentId a = 0; a < 3; ++a)
                if (a != first) others.push_back(a);
            out.push_back(sd_table(inst, {first, others[pick], others[1 - pick]}));
        }
    return out;
}

std::vector<MechanismTable> two_agent_tables16() {
    Instance inst = Instance::one_sided(2);
    std::vector<MechanismTable> out;
    for (uint32_t code = 0; code < 16; ++code) {
        std::vector<int32_t> outcomes(4);
        for (int i = 0; i < 4; ++i) outcomes[i] = (code >> i) & 1;
        out.push_back(
            MechanismTable::from_outcomes(inst, "t" + std::to_string(code), outcomes));
    }
    return out;
}

}  // namespace

int main() {
    std::cout << "matchkit acceptance suite (" << g_jobs << " worker threads)\n";
    Profile cyclic = cyclic3();
    Instance two3 = cyclic.instance();
    Symmetry sigma3 = Symmetry::canonical(two3);

    criterion("random serial dictatorship allocation at the cyclic profile", 1.0,
              [&](std::string& detail) {
                  RationalMatrix got = symmetrize(all_picking_orders(two3), cyclic);
                  RationalMatrix want = matrix3({{"1/12", "11/24", "11/24"},
                                                 {"11/24", "1/12", "11/24"},
                                                 {"11/24", "11/24", "1/12"}});
                  detail = "diagonal 1/12, off-diagonal 11/24, exact over 720 orders";
                  return got == want && got.doubly_stochastic();
              });

    criterion("uniform royal-pair allocation at the cyclic profile", 1.0,
              [&](std::string& detail) {
                  RationalMatrix got = symmetrize(all_royal_pairs(two3), cyclic);
                  RationalMatrix want = matrix3(
                      {{"1/9", "4/9", "4/9"}, {"4/9", "1/9", "4/9"}, {"4/9", "4/9", "1/9"}});
                  detail = kRoyalTieBreakNote;
                  return got == want && got.doubly_stochastic();
              });

    criterion("stochastic-dominance chain: half-half over RSD over royal pairs", 1.0,
              [&](std::string& detail) {
                  RationalMatrix rsd = symmetrize(all_picking_orders(two3), cyclic);
                  RationalMatrix roy = symmetrize(all_royal_pairs(two3), cyclic);
                  RationalMatrix half = matrix3(
                      {{"0", "1/2", "1/2"}, {"1/2", "0", "1/2"}, {"1/2", "1/2", "0"}});
                  detail = "exact comparisons, no tolerance";
                  return fosd_dominates(cyclic, half, rsd) && fosd_dominates(cyclic, rsd, roy) &&
                         fosd_dominates(cyclic, half, roy) && !fosd_dominates(cyclic, roy, rsd);
              });

    criterion("two-couple catalog equals the 2^16 brute-force scan", 10.0,
              [&](std::string& detail) {
                  auto scanned = enumerate_valid_four();
                  auto catalog = catalog_valid_four();
                  detail = "survivors: " + std::to_string(scanned.size()) +
                           ", catalog: " + std::to_string(catalog.size());
                  return std::set<FourAgentMechanism>(scanned.begin(), scanned.end()) ==
                             std::set<FourAgentMechanism>(catalog.begin(), catalog.end()) &&
                         scanned.size() == 26;
              });

    criterion("the cyclic profile has exactly the two asymmetric stable matchings", 1.0,
              [&](std::string& detail) {
                  Matching m_opt = matching_from_pairs(two3, {{0, 5}, {1, 3}, {2, 4}});
                  Matching w_opt = matching_from_pairs(two3, {{0, 4}, {1, 5}, {2, 3}});
                  auto stable = stable_matchings(cyclic);
                  bool exact = stable.size() == 2 &&
                               ((stable[0] == m_opt && stable[1] == w_opt) ||
                                (stable[0] == w_opt && stable[1] == m_opt));
                  bool asym = reflect_matching(sigma3, m_opt) != m_opt &&
                              reflect_matching(sigma3, w_opt) != w_opt;
                  detail = "profile " + profile_to_json(cyclic).dump() + "\n     stable: " +
                           matching_to_string(two3, m_opt) + " and " +
                           matching_to_string(two3, w_opt) +
                           ", both differ from their reflection";
                  return exact && asym;
              });

    std::vector<MechanismTable> family = royalty_family();

    criterion("every neutral royalty mechanism is efficient, group strategy-proof "
              "and weakly gender-neutral over all 46656 profiles",
              300.0, [&](std::string& detail) {
                  int distinct = 0;
                  for (size_t i = 0; i < family.size(); ++i) {
                      bool dup = false;
                      for (size_t j = 0; j < i && !dup; ++j)
                          dup = family[i].same_table(family[j]);
                      distinct += !dup;
                  }
                  if (distinct < 20) {
                      detail = "only " + std::to_string(distinct) + " distinct mechanisms";
                      return false;
                  }
                  for (const auto& f : family) {
                      AxiomReport eff = check_efficiency(f, CheckMode::Exhaustive(), g_jobs);
                      AxiomReport gsp =
                          check_group_sp(f, Coalitions::UpToTwo, CheckMode::Exhaustive(), g_jobs);
                      AxiomReport wgn =
                          check_weak_gn(f, sigma3, CheckMode::Exhaustive(), g_jobs);
                      if (!eff.holds || !gsp.holds || !wgn.holds) {
                          detail = f.name() + " failed " +
                                   (!eff.holds   ? "efficiency"
                                    : !gsp.holds ? "group strategy-proofness"
                                                 : "weak gender-neutrality");
                          return false;
                      }
                  }
                  detail = std::to_string(family.size()) + " mechanisms (" +
                           std::to_string(distinct) + " distinct), 46656 profiles each";
                  return true;
              });

    std::vector<MechanismTable> sds = sd3_family();

    criterion("sequential dictatorships pass exhaustive audits at three and four agents",
              120.0, [&](std::string& detail) {
                  for (const auto& f : sds)
                      if (!check_efficiency(f).holds ||
                          !check_group_sp(f, Coalitions::UpToTwo).holds)
                          return false;
                  MechanismTable f4 = sd_table(Instance::one_sided(4), {0, 1, 2, 3});
                  AxiomReport eff = check_efficiency(f4, CheckMode::Exhaustive(), g_jobs);
                  AxiomReport gsp =
                      check_group_sp(f4, Coalitions::UpToTwo, CheckMode::Exhaustive(), g_jobs);
                  detail = "six picking orders at n=3 over 216 profiles; the fixed order at "
                           "n=4 over 331776 profiles";
                  return eff.holds && gsp.holds;
              });

    std::vector<MechanismTable> tables16 = two_agent_tables16();

    criterion("the two-agent mechanism space leaves the two dictatorships and the "
              "two unanimity rules",
              1.0, [&](std::string& detail) {
                  std::vector<const MechanismTable*> survivors;
                  for (const auto& f : tables16)
                      if (check_efficiency(f).holds && check_group_sp(f, Coalitions::All).holds)
                          survivors.push_back(&f);
                  if (survivors.size() != 4) {
                      detail = std::to_string(survivors.size()) + " survivors";
                      return false;
                  }
                  std::set<size_t> covered;
                  for (auto rule :
                       {TwoAgentRule::dictatorship(0), TwoAgentRule::dictatorship(1),
                        TwoAgentRule::unanimity(true), TwoAgentRule::unanimity(false)}) {
                      MechanismTable named = two_agent_table(rule);
                      for (size_t s = 0; s < survivors.size(); ++s)
                          if (survivors[s]->same_table(named)) covered.insert(s);
                  }
                  detail = "16 candidate tables scanned with unrestricted coalitions";
                  return covered.size() == 4;
              });

    criterion("no first dictator escapes the individual-rationality failure", 1.0,
              [&](std::string& detail) {
                  Instance inst = Instance::one_sided(3);
                  for (AgentId first = 0; first < 3; ++first) {
                      std::vector<AgentId> order{first};
                      for (AgentId a = 0; a < 3; ++a)
                          if (a != first) order.push_back(a);
                      MechanismTable f = sd_table(inst, order);
                      AxiomReport rep = check_ir(f);
                      if (rep.holds || !rep.witness || !revalidate(rep, f)) return false;
                  }
                  detail = "witness found and re-validated for each of the three first "
                           "dictators";
                  return true;
              });

    criterion("counterexamples: the R-minimizing rule is manipulable exactly as "
              "printed; the index-comparison mechanism is weakly but not fully "
              "gender-neutral",
              10.0, [&](std::string& detail) {
                  Instance one = Instance::one_sided(3);
                  const std::vector<int> r_values{4, 2, 1, 3};
                  MechanismTable rmin = MechanismTable::from_function(
                      one, "rmin",
                      [r_values](const Profile& p) { return r_min_mechanism(r_values, p); });
                  AxiomReport gsp = check_group_sp(rmin, Coalitions::UpToTwo);
                  // the printed deviation: agent 2 claims 3,2,1 at the star profile
                  Profile star(one, {{2, 0, 1}, {2, 0, 1}, {2, 0, 1}});
                  AxiomReport manual{"group_sp", false, Witness{}, 1, "replay", ""};
                  manual.witness->profile_index = rmin.space().index_of(star);
                  manual.witness->coalition = {1};
                  manual.witness->misreport = {{2, 1, 0}};
                  if (gsp.holds || !revalidate(gsp, rmin) || !revalidate(manual, rmin))
                      return false;

                  MechanismTable ic = index_comparison_table(two3);
                  if (!check_weak_gn(ic, sigma3, CheckMode::Exhaustive(), g_jobs).holds)
                      return false;
                  AxiomReport gn = check_gn(ic);
                  if (gn.holds || !gn.witness || !revalidate(gn, ic)) return false;
                  // the witness continuation is a dictatorship of the women's side
                  auto g = continuation_submechanism(ic, gn.witness->subset,
                                                     gn.witness->outsider_rankings);
                  if (!g) return false;
                  MechanismTable women_sd = MechanismTable::from_function(
                      g->instance(), "women-sd", [](const Profile& p) {
                          const Instance& si = p.instance();
                          Submatching nu = Submatching::empty(si);
                          std::vector<char> alive(si.agent_count(), 1);
                          for (AgentId w = si.n; w < 2 * si.n; ++w) {
                              if (nu.assigned(w)) continue;
                              AgentId m = p.favorite(w, alive);
                              nu.add_pair(w, m);
                              alive[w] = 0;
                              alive[m] = 0;
                          }
                          return nu.to_matching(si);
                      });
                  if (!g->same_table(women_sd)) return false;

                  // the published four-couple form of the same continuation
                  Instance two4 = Instance::two_sided(4);
                  MechanismTable ic4 = index_comparison_table(two4);
                  auto g4 = continuation_submechanism(
                      ic4, {2, 3, 5, 7},
                      {{6, 4, 5, 7}, {4, 5, 6, 7}, {1, 0, 2, 3}, {0, 1, 2, 3}});
                  if (!g4) return false;
                  bool any_sigma = false;
                  for (const auto& sp : detail::all_side_symmetries(g4->instance()))
                      any_sigma = any_sigma || check_weak_gn(*g4, sp).holds;
                  detail = "deviation (3,2,1) by agent 2 re-validated; continuation witness: " +
                           gn.witness->note;
                  return !any_sigma;
              });

    criterion("verdicts with coalitions of size at most two match unrestricted "
              "coalitions on the whole test set",
              300.0, [&](std::string& detail) {
                  int checked = 0;
                  auto agree = [&](const MechanismTable& f) {
                      AxiomReport two = check_group_sp(f, Coalitions::UpToTwo,
                                                       CheckMode::Exhaustive(), g_jobs);
                      AxiomReport all =
                          check_group_sp(f, Coalitions::All, CheckMode::Exhaustive(), g_jobs);
                      ++checked;
                      return two.holds == all.holds;
                  };
                  for (const auto& f : family)
                      if (!agree(f)) return false;
                  for (const auto& f : sds)
                      if (!agree(f)) return false;
                  for (const auto& f : tables16)
                      if (!agree(f)) return false;
                  detail = std::to_string(checked) + " mechanisms cross-validated";
                  return true;
              });

    criterion("every induced one-sided mechanism is efficient and group "
              "strategy-proof over all 216 profiles",
              60.0, [&](std::string& detail) {
                  for (const auto& f : family) {
                      MechanismTable g = induced_one_sided(f, sigma3);
                      if (!check_efficiency(g).holds) return false;
                      if (!check_group_sp(g, Coalitions::All).holds) return false;
                  }
                  detail = std::to_string(family.size()) + " induced mechanisms";
                  return true;
              });

    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : std::to_string(g_failures) + " criteria failed")
              << "\n";
    return g_failures == 0 ? 0 : 1;
}
