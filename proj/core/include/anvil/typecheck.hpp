#pragma once

#include "anvil/diag.hpp"
#include "anvil/infer.hpp"
#include "anvil/resolve.hpp"

namespace anvil {

struct CheckOptions {
    int iterations = 2; // loop unrollings of the check term
};

/// Renders a pattern / pattern set / interval the way notes print them.
std::string render_pat(const EventGraph& g, const Pat& p);
std::string render_patset(const EventGraph& g, const PatSet& s);
std::string render_interval(const EventGraph& g, EventId start, const PatSet& end);

/// Builds the thread's check graph and discharges every obligation,
/// reporting one diagnostic per failed obligation.
ThreadCheck check_thread(const ResolvedUnit& unit, const ResolvedProc& proc,
                         const ResolvedProc::ThreadR& thread, DiagnosticEngine& diags,
                         const CheckOptions& opts = {});

/// Checks all threads of one process against its channel contracts.
void check_process(const ResolvedUnit& unit, const ResolvedProc& proc,
                   DiagnosticEngine& diags, const CheckOptions& opts = {});

/// Whole-program check: every process, plus program-level wiring
/// (endpoint ownership / dangling endpoints).
void check_program(const ResolvedUnit& unit, DiagnosticEngine& diags,
                   const CheckOptions& opts = {});

} // namespace anvil
