#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "shimura/screen.hpp"

using namespace shimura;
using nlohmann::json;

namespace {

const Certificate& cert_13_11() {
  static Certificate c = certify(13, 11);
  return c;
}

const json& cert_13_11_json() {
  static json j = json::parse(certificate_to_json(cert_13_11()));
  return j;
}

const json* find_check(const json& cert, const std::string& name) {
  for (const auto& ch : cert.at("checks"))
    if (ch.at("name") == name) return &ch;
  return nullptr;
}

}  // namespace

TEST_CASE("local conditions split by congruence case") {
  LocalConditions lc = local_conditions(137, 251);
  CHECK(lc.obstruction);
  CHECK(lc.p_mod4 == 1);
  CHECK(lc.q_mod4 == 3);
  CHECK(lc.case_id == 2);
  CHECK(lc.supported);

  LocalConditions plus = local_conditions(5, 11);
  CHECK_FALSE(plus.obstruction);
  CHECK_FALSE(plus.supported);
  CHECK(plus.note.find("local obstruction condition fails") != std::string::npos);

  LocalConditions ram = local_conditions(3, 11);
  CHECK(ram.case_id == 1);
  CHECK_FALSE(ram.supported);

  LocalConditions off = local_conditions(7, 13);
  CHECK(off.case_id == 0);
  CHECK_FALSE(off.supported);

  CHECK_THROWS_AS(local_conditions(9, 11), std::invalid_argument);
  CHECK_THROWS_AS(local_conditions(11, 11), std::invalid_argument);
  CHECK_THROWS_AS(local_conditions(2, 11), std::invalid_argument);
}

TEST_CASE("congruence scan returns the screened family") {
  std::vector<Int> fam = congruence_scan(2, 500);
  CHECK(std::count(fam.begin(), fam.end(), Int(137)) == 1);
  for (const Int& p : fam) {
    CHECK(p % 12 == 5);
    CHECK(kronecker(Int(-7), p) == 1);
    CHECK(kronecker(Int(-267), p) == 1);
    CHECK(kronecker(p, Int(251)) == -1);
  }
  CHECK_FALSE(congruence_scan(2, 100000).empty());
  CHECK_THROWS_AS(congruence_scan(10, 2), std::invalid_argument);
}

TEST_CASE("genus values and torsion threshold") {
  CHECK(genus_bounds(3, 11).genus == 1);
  CHECK(genus_bounds(13, 11).genus == 11);
  GenusBounds big = genus_bounds(137, 251);
  CHECK(big.genus == 2833);
  CHECK(big.gonality_floor == Rat(21 * 2832, 200));
  CHECK(big.torsion_threshold == Rat(34387, 245));
  CHECK(big.threshold_applies);
  CHECK(big.torsion_below);
  CHECK(big.margin == Rat(577, 245));

  GenusBounds small = genus_bounds(13, 11);
  CHECK_FALSE(small.threshold_applies);
  CHECK_FALSE(small.torsion_below);

  // integrality of the formula across a grid of pairs
  std::vector<int> ps = {3, 5, 7, 11, 13, 17, 19, 23, 29, 31};
  for (int a : ps)
    for (int b : ps) {
      if (a == b) continue;
      GenusBounds gb = genus_bounds(a, b);
      CHECK(gb.genus >= 0);
    }
}

TEST_CASE("special point class number branches") {
  SpecialPointReport r = special_point_check(137, 251);
  CHECK(r.h_q == 7);
  CHECK(r.h_p == 8);
  CHECK(r.h_pq == 22);
  CHECK_FALSE(r.p_branch);
  CHECK_FALSE(r.q_branch);
  CHECK_FALSE(r.pq_branch);
  CHECK(r.verdict == "no special rational points");

  // a class-number-one field keeps the branch open
  SpecialPointReport open = special_point_check(5, 163);
  CHECK(open.h_q == 1);
  CHECK(open.q_branch);
  CHECK(open.verdict == "special point possible");

  SpecialPointReport capped = special_point_check(137, 251, 1000);
  CHECK(capped.h_pq == -1);
  CHECK(capped.verdict == "unknown");
}

TEST_CASE("certificate on a small supported pair") {
  const Certificate& c = cert_13_11();
  CHECK(c.verdict == "hypotheses-not-met");
  CHECK(c.failure == "smooth-model");
  CHECK(c.graph_built);
  CHECK(c.vertices == 4);
  CHECK(c.edge_classes == 14);
  CHECK(c.h1 == 11);
  CHECK(c.genus_match);
  CHECK(c.degrees_ok);
  CHECK(c.exceptional_found);
  CHECK(c.smooth_ran);
  CHECK(c.smooth.two_nondisconnecting);
  CHECK_FALSE(c.smooth.degree_below_gonality);
  CHECK(c.smooth.torsion_clear);
  CHECK(c.torsion_invariants == std::vector<Int>{63});
  CHECK(c.cycle_ran);
  CHECK(c.cycle.found);
  CHECK(c.cycle.boundary_zero);
  CHECK(c.cycle.unit_mod_p);
  CHECK(c.cycle.exceptional_coeff == 24);
}

TEST_CASE("certificate schema and verdict consistency") {
  const json& j = cert_13_11_json();
  CHECK(j.at("version") == 1);
  CHECK(j.at("p") == 13);
  CHECK(j.at("q") == 11);
  CHECK(j.at("verdict") == "hypotheses-not-met");
  const std::set<std::string> expected = {
      "local-conditions",  "genus-formula",      "degree-laws",
      "exceptional-component", "smooth-model",   "component-group",
      "gross-cycle",       "gonality-threshold", "special-points",
      "local-points-good-primes", "asymptotic-regime"};
  std::set<std::string> seen;
  for (const auto& ch : j.at("checks")) {
    CHECK(ch.contains("name"));
    CHECK(ch.contains("paper_anchor"));
    CHECK(ch.contains("status"));
    CHECK(ch.contains("data"));
    seen.insert(ch.at("name").get<std::string>());
  }
  CHECK(seen == expected);
  CHECK(find_check(j, "local-points-good-primes")->at("status") == "not computed");
  CHECK(find_check(j, "asymptotic-regime")->at("status") == "conditional");
  CHECK(find_check(j, "smooth-model")->at("status") == "failed");
  CHECK(find_check(j, "gross-cycle")->at("status") == "verified");

  // a certified verdict never coexists with a failed required check
  bool any_failed = false;
  for (const auto& ch : j.at("checks"))
    any_failed = any_failed || ch.at("status") == "failed";
  if (j.at("verdict").get<std::string>().rfind("certified", 0) == 0) CHECK_FALSE(any_failed);

  // numeric fields re-verify against independent recomputation
  const json* gf = find_check(j, "genus-formula");
  GenusBounds gb = genus_bounds(j.at("p").get<i64>(), j.at("q").get<i64>());
  CHECK(gf->at("data").at("genus").get<std::string>() == gb.genus.str());
  CHECK(gf->at("data").at("rank_h1").get<size_t>() == 11);
  const json* sp = find_check(j, "special-points");
  SpecialPointReport r = special_point_check(13, 11);
  CHECK(sp->at("data").at("h_at_q").get<std::string>() == r.h_q.str());
  CHECK(sp->at("data").at("verdict") == r.verdict);

  // determinism
  CHECK(certificate_to_json(certify(13, 11)) == certificate_to_json(cert_13_11()));
}

TEST_CASE("certificate failure verdicts") {
  Certificate ram = certify(3, 11);
  CHECK(ram.verdict == "unsupported-case");
  CHECK_FALSE(ram.graph_built);

  Certificate split = certify(5, 11);
  CHECK(split.verdict == "hypotheses-not-met");
  CHECK(split.failure == "local-conditions");
  CHECK_FALSE(split.graph_built);
  json js = json::parse(certificate_to_json(split));
  CHECK(find_check(js, "genus-formula")->at("status") == "not computed");
}

TEST_CASE("screen config validation") {
  ScreenConfig ok;
  ok.q = 11;
  ok.p_list = {13};
  validate(ok);
  CHECK(ok.validated);

  ScreenConfig bad_q;
  bad_q.q = 13;  // 1 mod 4
  CHECK_THROWS_AS(validate(bad_q), std::invalid_argument);

  ScreenConfig bad_range;
  bad_range.q = 11;
  bad_range.p_min = 0;
  CHECK_THROWS_AS(validate(bad_range), std::invalid_argument);

  ScreenConfig bad_jobs;
  bad_jobs.q = 11;
  bad_jobs.jobs = 0;
  CHECK_THROWS_AS(validate(bad_jobs), std::invalid_argument);

  ScreenConfig bad_p;
  bad_p.q = 11;
  bad_p.p_list = {11};
  CHECK_THROWS_AS(validate(bad_p), std::invalid_argument);

  ScreenConfig bad_disc;
  bad_disc.q = 11;
  bad_disc.cert.discs = {Int(5)};  // -5 is not a discriminant
  CHECK_THROWS_AS(validate(bad_disc), std::invalid_argument);
}
