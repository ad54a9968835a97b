#pragma once

#include "jcrdt/core.hpp"
#include "jcrdt/state.hpp"

namespace jcrdt {

/// Applies one operation to the replica root. Descends the cursor path,
/// creating missing branch nodes and recording the operation id in the
/// presence sets along the way, then performs the mutation at the target.
/// The caller guarantees op.deps have already been applied.
void apply_op(Node& root, const Operation& op);

/// Clears the entry under one tagged key: register writes by operations in
/// deps are removed, maps and lists are cleared element-wise. Returns the
/// ids still asserting the entry afterwards (the concurrent survivors).
IdSet clear(BranchNode& node, const IdSet& deps, const TaggedKey& tk);

/// Clears a key under all three tags and recomputes its presence set as
/// (survivors U stored presence) \ deps. Returns the new presence set.
IdSet clear_elem(BranchNode& node, const IdSet& deps, const Key& k);

}  // namespace jcrdt
