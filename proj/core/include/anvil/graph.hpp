#pragma once

#include "anvil/ast.hpp"
#include "anvil/resolve.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace anvil {

using EventId = uint32_t;
using ExprId = uint32_t;
constexpr EventId NO_EVENT = ~0u;
constexpr ExprId NO_EXPR = ~0u;

/// How a message synchronization event is pinned in time.
enum class SyncTiming {
    Dynamic,   // completes any number of cycles at or after its predecessor
    Immediate, // completes exactly when reached (static remote readiness)
    Pinned,    // completes exactly `offset` cycles after a reference sync
};

struct EventLabel {
    enum class Kind { Root, Delay, MsgSync, Branch, Join };
    Kind kind = Kind::Root;

    std::vector<EventId> preds;

    uint32_t delay = 0; // Delay

    // MsgSync
    MsgRef msg;
    bool is_send = false;
    SyncTiming sync = SyncTiming::Dynamic;
    EventId sync_ref = NO_EVENT; // Pinned reference sync event
    uint32_t sync_offset = 0;    // Pinned offset

    // Branch: preds = {predecessor}; exactly one event per (cond, side)
    uint32_t cond = 0;
    bool branch_side = false; // true = then
};

/// Combinational value expression, lowered verbatim into SystemVerilog.
struct Expr {
    enum class Kind { Literal, RegRead, PortData, BinOp, UnOp, Mux, Ready, Unit };
    Kind kind = Kind::Unit;
    std::string lexeme; // Literal, as written
    uint64_t value = 0;
    uint32_t width = 1;
    bool sized = false;
    RegId reg = 0;  // RegRead
    MsgRef msg;     // PortData / Ready
    ast::BinOpKind bin = ast::BinOpKind::Add;
    ast::UnOpKind un = ast::UnOpKind::BitNot;
    ExprId a = NO_EXPR, b = NO_EXPR, c = NO_EXPR; // operands; Mux: cond, then, else
};

struct GraphAction {
    enum class Kind { RegWrite, Send, Recv, Print };
    Kind kind = Kind::RegWrite;
    uint32_t id = 0; // stable identity across optimization passes
    RegId reg = 0;
    ExprId expr = NO_EXPR;
    MsgRef msg;
    std::string fmt;
    std::vector<ExprId> args;
    SourceSpan span;
};

/// Event pattern `e:p` — the first time duration `p` is satisfied at or
/// after event `e`.
struct Pat {
    EventId base = 0;
    enum class Dur { Cycles, Msg } dur = Dur::Cycles;
    uint32_t cycles = 0;
    MsgRef msg;

    static Pat at(EventId e, uint32_t k = 0) { return {e, Dur::Cycles, k, {}}; }
    static Pat after_msg(EventId e, MsgRef m) { return {e, Dur::Msg, 0, m}; }
    bool operator==(const Pat&) const = default;
};

/// Set of event patterns; its time is the earliest member. Empty = eternal.
struct PatSet {
    std::vector<Pat> pats;
    bool eternal() const { return pats.empty(); }
    static PatSet of(Pat p) { return {{p}}; }
    static PatSet eternal_set() { return {}; }
    bool operator==(const PatSet&) const = default;
};

/// Labelled DAG of abstract time points. Also carries the attached actions,
/// branch-condition expressions, and the expression pool referenced by both —
/// everything downstream passes need about one thread.
struct EventGraph {
    struct Event {
        EventLabel label;
        std::vector<GraphAction> actions;
        bool alive = true;
    };

    std::vector<Event> events;
    std::vector<Expr> exprs;
    std::vector<ExprId> cond_exprs; // branch condition id -> expression
    EventId entry = 0;
    std::map<uint64_t, std::string> msg_labels; // rendering only

    const EventLabel& label(EventId e) const { return events[e].label; }
    size_t alive_count() const;

    EventId add(EventLabel l);
    EventId add_root();
    /// Zero-delay over one predecessor collapses to the predecessor itself.
    EventId add_delay(uint32_t k, std::vector<EventId> preds);
    EventId add_msg_sync(MsgRef m, bool is_send, EventId pred,
                         SyncTiming timing = SyncTiming::Dynamic,
                         EventId ref = NO_EVENT, uint32_t offset = 0);
    EventId add_branch(uint32_t cond, bool side, EventId pred);
    EventId add_join(std::vector<EventId> preds);

    ExprId add_expr(Expr e);

    void set_msg_label(MsgRef m, std::string name);
    std::string msg_label(MsgRef m) const;

    /// All alive MsgSync events carrying message `m`, in id order.
    std::vector<EventId> syncs_of(MsgRef m) const;

    /// Redirects every predecessor/reference of `from` to `to`, moves
    /// `from`'s actions to `to`, and marks `from` dead.
    void merge_into(EventId from, EventId to);

    /// Drops dead events and renumbers; returns old->new id map.
    std::vector<EventId> compact();

    bool check_acyclic() const; // ids are construction-ordered; preds must precede
};

std::string dump_dot(const EventGraph& g);
std::string graph_to_json(const EventGraph& g);

} // namespace anvil
