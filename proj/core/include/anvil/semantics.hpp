#pragma once

#include "anvil/ast.hpp"
#include "anvil/diag.hpp"
#include "anvil/resolve.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anvil::sem {

/// Negative ids are placeholders for received values; composition unifies
/// them with the sender's id.
using ValId = int64_t;
using MsgKey = uint64_t;
using RegKey = uint64_t;

struct Dur {
    enum class Kind { Cycles, Msg, Eternal };
    Kind kind = Kind::Eternal;
    uint32_t cycles = 0;
    MsgKey msg = 0;
    bool operator==(const Dur&) const = default;
    bool operator<(const Dur&) const;
};

struct Action {
    enum class Kind { Create, Use, Mut, Send, Recv };
    Kind kind = Kind::Create;
    ValId v = 0;
    std::vector<RegKey> regs; // Create: register dependencies
    std::vector<ValId> vals;  // Create: value dependencies
    MsgKey msg = 0;           // Send / Recv; Mut reuses `regs[0]`
    Dur dur;
    bool operator==(const Action&) const = default;
    bool operator<(const Action&) const;
};

using CycleActions = std::vector<Action>; // kept sorted

struct Log {
    std::vector<CycleActions> cycles;
    bool operator==(const Log&) const = default;
    bool operator<(const Log& o) const { return cycles < o.cycles; }
};

// --- the operators of the execution-log calculus ---------------------------

Log empties(size_t k);
/// <a0..ak> o <b0..bl> = <a0, ..., ak u b0, b1, ..., bl>
Log overlap_concat(Log a, const Log& b);
/// pointwise union, length max(|a|, |b|)
Log merge(Log a, const Log& b);

struct Bounds {
    uint32_t slack = 3;    // max send/recv delay
    int iterations = 2;    // max loop unrollings
    uint64_t budget = 1000000;
};

/// Message environment of one thread: duration, global identity, and
/// declared timing per (endpoint, message) pair.
struct MsgSem {
    MsgKey key = 0;
    Dur dur;
    bool pinned = false; // dependent sync: occurs exactly offset after anchor
    MsgKey anchor = 0;
    uint32_t offset = 0;
};

struct MsgEnv {
    std::map<uint64_t, MsgSem> map; // (ep<<32|msg) -> semantics
    std::function<RegKey(RegId)> reg_key = [](RegId r) { return RegKey(r); };
};

/// True iff every dependent-synchronized action in the log lands exactly at
/// its declared offset from the latest anchor synchronization.
bool satisfies_sync_modes(const Log& log, const MsgEnv& env);

/// Enumerates every execution log of `term` derivable by the evaluation
/// rules with send/receive slack in [0, bounds.slack], both branches
/// explored. Identical logs are yielded once.
void enumerate_logs(const ResolvedUnit& unit, const ast::Term& term, const MsgEnv& env,
                    const Bounds& bounds, const std::function<void(const Log&)>& sink,
                    ValId id_base = 0);

/// Composes two equal-length logs (the shorter is padded with empty cycles):
/// sends and receives of messages in `sigma` must match position-for-position
/// with equal durations; matched pairs are erased and receiver-side value
/// placeholders are unified with the sender's ids.
std::optional<Log> compose_logs(const Log& a, const Log& b,
                                const std::vector<MsgKey>& sigma);

// --- safety of one log ------------------------------------------------------

std::map<ValId, std::vector<RegKey>> reg_dep(const Log& log);

struct SafetyVerdict {
    bool safe = true;
    ValId witness = 0;
    enum class Reason { None, UseOutsideRecvWindow, MutationInWindow } reason = Reason::None;
};

SafetyVerdict check_log_safety(const Log& log);

// --- whole-program verification ----------------------------------------------

struct ProgramThreads {
    struct Thread {
        const ast::Term* body = nullptr;
        const ResolvedProc* proc = nullptr;
        MsgEnv env;
        std::string name;
    };
    const ResolvedUnit* unit = nullptr;
    std::vector<Thread> threads;
    std::vector<MsgKey> internal; // messages with both endpoints inside the program
    std::map<MsgKey, std::string> msg_names;
    std::map<RegKey, std::string> reg_names;
};

/// Flattens the spawn tree under `top` into loop threads with global message
/// and register identities. Recursive threads are rejected via `error`.
std::optional<ProgramThreads> assemble_program(const ResolvedUnit& unit, ProcId top,
                                               std::string& error);

/// Unroll-count tuples enumerated for the program (1..iterations per thread).
std::vector<std::vector<int>> concretizations(const ProgramThreads& prog, int iterations);

struct VerifyReport {
    bool safe = true;
    bool complete = true;
    uint64_t thread_logs = 0;
    uint64_t compositions = 0;
    uint64_t logs_checked = 0;
    std::optional<Log> witness;
    ValId witness_value = 0;
    SafetyVerdict::Reason reason = SafetyVerdict::Reason::None;
};

VerifyReport verify_program(const ProgramThreads& prog, const Bounds& bounds);

std::string render_log(const Log& log, const ProgramThreads& prog);

} // namespace anvil::sem
