#pragma once

#include "anvil/diag.hpp"
#include "anvil/graph.hpp"
#include "anvil/resolve.hpp"
#include "anvil/timing.hpp"

#include <map>
#include <string>
#include <vector>

namespace anvil {

/// One inferred value with its lifetime.
struct ValueInfo {
    enum class Kind {
        Literal, Unit, Recv, RegRead, BinOp, UnOp, IfResult, Ref, Ready, Send,
        CycleUnit, AssignUnit, Marker, Print
    };
    Kind kind = Kind::Unit;
    EventId start = 0;  // lifetime start (also the term's completion event)
    PatSet ends;        // intrinsic end set used in checks; empty = eternal
    RegId reg = 0;      // RegRead
    EventId read_event = 0;
    std::vector<uint32_t> operands; // values this value is built from
    ExprId expr = NO_EXPR;
    SourceSpan span;
    Assumptions assumptions;
    std::vector<PatSet> demands; // filled by the demand pass
};

struct Obligation {
    enum class Kind { ValueUse, SendCoverage, RegMutation, DependentArrival };
    Kind kind = Kind::ValueUse;
    uint32_t value = 0;   // ValueUse / SendCoverage
    EventId win_start = 0;
    PatSet win_end;       // use window end / required lifetime end
    RegId reg = 0;        // RegMutation
    EventId mut_event = 0;
    EventId arrive = 0, sync = 0; // DependentArrival
    MsgRef msg;                   // DependentArrival / SendCoverage context
    SourceSpan span;
    Assumptions assumptions;
};

struct LoanInterval {
    EventId start = 0;
    PatSet end;
    SourceSpan origin;
    Assumptions assumptions;
};

/// One message synchronization occurrence, in program order.
struct SyncOccurrence {
    MsgRef msg;
    EventId ev = 0;
    bool is_send = false;
    EventId arrival = 0; // the event the thread reaches the operation at
    Assumptions assumptions;
    SourceSpan span;
    PatSet required_end; // sends only: required lifetime end of the window
};

/// Everything inferred about one thread: its event graph over the requested
/// number of unrolled iterations, the value lifetimes, the safety obligations
/// awaiting discharge, and the register loans.
struct ThreadCheck {
    EventGraph graph;
    std::vector<ValueInfo> values;
    std::vector<Obligation> obligations;
    std::map<RegId, std::vector<LoanInterval>> loans;
    std::vector<SyncOccurrence> syncs;
    std::map<std::string, uint32_t> bindings; // let name -> value (iteration 1)
    EventId entry = 0;
    EventId completion = 0;       // completion of the whole unrolled term
    EventId iter1_completion = 0;
    std::vector<EventId> markers; // recursive restart markers of iteration 1
    bool recursive = false;

    /// End set as reported to users: demand-derived for register-sourced
    /// values, intrinsic otherwise.
    PatSet report_ends(uint32_t value) const;
    bool contains_reg_read(uint32_t value) const;
};

/// Builds the event graph and typing information for one thread, unrolled
/// `iterations` times (loops chain at the completion event; recursives anchor
/// the next iteration at each restart marker).
ThreadCheck build_thread(const ResolvedUnit& unit, const ResolvedProc& proc,
                         const ResolvedProc::ThreadR& thread, int iterations);

/// The duration a message contract promises, as a pattern anchored at `sync`.
/// Returns an empty set for eternal durations.
PatSet contract_end(const ResolvedUnit& unit, const ResolvedProc& proc, MsgRef m,
                    EventId sync);

} // namespace anvil
