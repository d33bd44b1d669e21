#pragma once

#include <string>
#include <vector>

#include "shimura/component_group.hpp"
#include "shimura/winding.hpp"

namespace shimura {

/// Congruence screen at a prime pair. Only the pattern p ≡ 1 mod 4,
/// q ≡ 3 mod 4, (q|p) = -1 feeds the rest of the pipeline; the twin
/// pattern with p ≡ 3 mod 4 is the ramified configuration we do not model.
struct LocalConditions {
  bool obstruction = false;  // (q|p) == -1
  int p_mod4 = 0;
  int q_mod4 = 0;
  int case_id = 0;  // 1: p ≡ 3 (4), ramified; 2: p ≡ 1 (4); 0: q ≢ 3 (4)
  bool supported = false;  // obstruction and case 2
  std::string note;
};

/// Throws std::invalid_argument unless p, q are distinct odd primes.
LocalConditions local_conditions(const Int& p, const Int& q);

/// The level-251 prime family: p ≡ 5 mod 12, (-7|p) = (-267|p) = +1,
/// (p|251) = -1. Every certified pair (p, 251) has p drawn from here.
std::vector<Int> congruence_scan(const Int& lo, const Int& hi);

/// Exact genus of the level-pq curve together with the gonality floor
/// 21(g-1)/200 and the torsion threshold pq/245, compared against
/// n = p + 1 as exact rationals.
struct GenusBounds {
  Int genus;
  Rat gonality_floor;     // 21(g-1)/200
  Rat torsion_threshold;  // pq/245
  bool threshold_applies = false;  // p >= 19 and q >= 245
  bool torsion_below = false;      // p + 1 < pq/245
  Rat margin;                      // pq/245 - (p+1)
};

/// A fractional genus value is an internal hard error, never returned.
GenusBounds genus_bounds(const Int& p, const Int& q);

/// Class numbers of the imaginary quadratic fields at p, q and pq. A point
/// fixed by the involution survives only if h at q or at p is 1, or h at pq
/// is 2; the verdict reports whether every escape hatch is closed.
struct SpecialPointReport {
  Int h_p = -1;  // -1: beyond the brute-force bound, not computed
  Int h_q = -1;
  Int h_pq = -1;
  bool p_branch = false;   // h_p == 1
  bool q_branch = false;   // h_q == 1
  bool pq_branch = false;  // h_pq == 2
  std::string verdict;     // "no special rational points" /
                           // "special point possible" / "unknown"
};

SpecialPointReport special_point_check(const Int& p, const Int& q,
                                       const Int& bound = Int(100000));

/// One named entry of a certificate. status is one of "verified", "failed",
/// "conditional", "not computed", "unsupported"; data is a JSON object
/// serialized as text.
struct CertCheck {
  std::string name;
  std::string anchor;
  std::string status;
  std::string data;
};

/// Everything the pipeline established at (p, q), structured and as the
/// check list that serializes. verdict is one of
/// certified-empty / certified-no-nontrivial-points / hypotheses-not-met /
/// unsupported-case; the certified verdicts require every required check
/// to carry status "verified".
struct Certificate {
  int version = 1;
  Int p;
  Int q;
  u64 seed = 1;
  LocalConditions local;
  GenusBounds bounds;
  SpecialPointReport special;
  std::vector<Int> discs;  // discriminant list actually searched
  bool graph_built = false;
  size_t vertices = 0;
  size_t edge_classes = 0;
  size_t h1 = 0;
  bool genus_match = false;
  bool degrees_ok = false;
  bool exceptional_found = false;
  size_t exceptional_vertex = 0;
  bool smooth_ran = false;
  SmoothModelReport smooth;
  std::vector<Int> torsion_invariants;
  bool cycle_ran = false;
  CyclePath cycle;
  CycleShape shape;
  std::string verdict;
  std::string failure;  // first failing required check, when any
  std::vector<CertCheck> checks;
};

/// Knobs for one certification run. An empty disc list falls back to the
/// class-number-bounded scan.
struct CertifyConfig {
  std::vector<Int> discs;
  Int disc_h_bound = 2;
  Int disc_max = 300;
  Int class_number_bound = 100000;
  u64 seed = 1;
  GrossNorm norm = GrossNorm::kAutomorphism;
};

/// Full pipeline: congruence screen, graph build, degree laws, exceptional
/// component, contraction hypotheses with the (p+1)-torsion test, cycle
/// search, genus and gonality, special points. Hypothesis failures land in
/// the verdict; inconsistencies inside the computation throw.
Certificate certify(const Int& p, const Int& q, const CertifyConfig& cfg = {});

/// Schema: {version, p, q, seed, verdict, checks: [{name, paper_anchor,
/// status, data}]}. Deterministic given (p, q, config, seed).
std::string certificate_to_json(const Certificate& c);

/// Batch driver configuration: one q, primes from a range or an explicit
/// list, shared certify knobs, output location.
struct ScreenConfig {
  Int q = 251;
  Int p_min = 2;
  Int p_max = 0;
  std::vector<Int> p_list;  // when nonempty, overrides the range
  CertifyConfig cert;
  std::string out_path;   // empty: stdout
  std::string cache_dir;  // empty: no cache
  int jobs = 1;
  bool validated = false;
};

/// Throws std::invalid_argument on a malformed config (q not a prime
/// ≡ 3 mod 4, negative range bounds, jobs < 1).
void validate(ScreenConfig& cfg);

}  // namespace shimura
