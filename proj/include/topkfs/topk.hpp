#pragma once

#include "topkfs/types.hpp"

namespace topkfs {

// Index set of the top-k magnitude entries of a weight vector.
// indices are strictly ascending; ties between equal magnitudes are broken
// toward the lower index so the set is a deterministic function of (w, k).
struct ActiveSet {
  std::vector<int> indices;
  int k_requested = 0;

  int size() const { return static_cast<int>(indices.size()); }
  bool contains(int i) const;
};

// Indices of the min(k, m) largest-magnitude entries of w.
// k > m is clamped to m with a warning; k < 1 or empty w throws.
// Partial selection, not a full sort: O(m) expected + O(k log k) to order
// the selected indices.
ActiveSet active_set(const WeightVector& w, int k);

// w on the active set, zero elsewhere. active_set + apply_mask together
// realize the keep-top-k-magnitudes operator.
WeightVector apply_mask(const WeightVector& w, const ActiveSet& s);

// factor * g on the active set, zero elsewhere. This is how the masked
// fitting term contributes gradient through the one-to-one layer: entries
// outside the set receive exactly zero.
Vector route_gradient(const Vector& g_lead, const ActiveSet& s, double factor);

}  // namespace topkfs
