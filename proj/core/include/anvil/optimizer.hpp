#pragma once

#include "anvil/graph.hpp"

#include <vector>

namespace anvil {

struct PassConfig {
    bool merge_outbound = true;      // (a)
    bool remove_unbalanced = true;   // (b)
    bool shift_branch_joins = true;  // (c)
    bool remove_branch_joins = true; // (d)
    int max_fixpoint_iterations = 64;

    static PassConfig all() { return {}; }
    static PassConfig none() { return {false, false, false, false, 64}; }
};

/// Result of optimizing: the graph is rewritten in place; `forward` maps
/// every pre-optimization event id to its surviving representative.
struct OptResult {
    std::vector<EventId> forward;
    EventId map(EventId e) const { return forward[e]; }
};

OptResult pass_merge_outbound(EventGraph& g);
OptResult pass_remove_unbalanced_joins(EventGraph& g);
OptResult pass_shift_branch_joins(EventGraph& g);
OptResult pass_remove_branch_joins(EventGraph& g);

/// Runs the enabled passes in order (a), (b), (c), (d) to a fixpoint.
/// Throws std::runtime_error when the fixpoint iteration limit is hit.
OptResult optimize(EventGraph& g, const PassConfig& config = {});

} // namespace anvil
