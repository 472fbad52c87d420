#ifndef SROIQC_TESTS_ORACLE_ENDPOINTS_HPP
#define SROIQC_TESTS_ORACLE_ENDPOINTS_HPP

// Independent Allen-algebra oracle: interval networks are decided by
// enumerating weak orders of the interval endpoints, never by composition
// tables. Also derives converse/composition tables from scratch so the
// embedded ones can be cross-checked.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sroiqc/constraint.hpp"

namespace sroiqc::testing {

// Names in the oracle's own canonical order.
extern const std::array<const char*, 13> kAllenNames;

// Atom index (into kAllenNames) of the relation between intervals
// (s1, e1) and (s2, e2) given by endpoint ranks; requires s < e.
int allen_atom(int s1, int e1, int s2, int e2);

// All weak orders of n points, as rank vectors (cached per n).
const std::vector<std::vector<std::uint8_t>>& weak_orders(int n);

// One singleton constraint: intervals `a` and `b` related by atom index.
struct AllenAtomConstraint {
  int a;
  int b;
  int atom;
};

// Satisfiability of a singleton-labeled Allen network over `num_vars`
// intervals (<= 4) by brute force over endpoint weak orders.
bool allen_satisfiable(int num_vars, const std::vector<AllenAtomConstraint>& constraints);

// Tables derived from endpoint enumeration, indexed in kAllenNames order.
std::array<std::uint8_t, 13> derive_allen_converse();
std::array<std::array<std::uint16_t, 13>, 13> derive_allen_composition();

// Point-algebra tables over {lt, eq, gt} derived from 3-point enumeration.
std::array<std::array<std::uint8_t, 3>, 3> derive_point_composition();

}  // namespace sroiqc::testing

#endif
