#pragma once

#include "anvil/diag.hpp"
#include "anvil/infer.hpp"
#include "anvil/resolve.hpp"

#include <string>
#include <vector>

namespace anvil {

/// Ports one message contributes to a module interface. `valid` exists iff
/// the sender's sync mode is dynamic; `ack` iff the receiver's is.
struct MsgPorts {
    MsgId msg = 0;
    std::string name; // message identifier
    uint32_t width = 1;
    bool sender = false; // this endpoint sends the message
    bool has_valid = false;
    bool has_ack = false;
};

/// Port set of one endpoint of a channel type, as seen from `side`.
std::vector<MsgPorts> lower_messages(const ResolvedUnit& unit, ChanTypeId chan,
                                     ast::Side side);

/// State allocated for one event of a thread FSM.
struct EventFsm {
    enum class Kind { Entry, Delay, LatestJoin, MinJoin, Branch, SyncDynamic, SyncImmediate, SyncPinned };
    Kind kind = Kind::Entry;
    uint32_t counter_width = 0; // cycle delays / pinned offsets
    uint32_t reached_bits = 0;  // latest-of joins and multi-pred delays
    bool pending_bit = false;   // dynamic sends/receives
};

struct FsmPlan {
    std::vector<EventFsm> events;
    EventId entry = 0;
    std::vector<EventId> wrap_events; // firing any of these re-arms the entry
};

/// Derives the FSM plan of one optimized thread graph. `wrap_events` is the
/// loop completion (or the restart markers of a recursive thread).
FsmPlan gen_fsm(const EventGraph& g, const std::vector<EventId>& wrap_events);

struct EmitOptions {
    int opt_level = 1; // 0 = passes off, 1 = all passes
};

/// Emits one SystemVerilog module per process reachable from `top`,
/// children first. Deterministic, byte-identical for identical input.
/// Codegen-stage problems (for example a loop that can restart in the same
/// cycle it starts) are reported and yield an empty result.
std::string emit_sv(const ResolvedUnit& unit, ProcId top, DiagnosticEngine& diags,
                    const EmitOptions& opts = {});

} // namespace anvil
