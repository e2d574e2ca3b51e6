#pragma once

#include "anvil/source.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace anvil::ast {

enum class Side { Left, Right };
enum class MsgDir { Left, Right }; // travel direction of the message

struct DataType {
    enum class Kind { Logic, Named };
    Kind kind = Kind::Logic;
    uint32_t width = 1;   // Logic
    std::string name;     // Named aggregate
    SourceSpan span;
};

struct SyncMode {
    enum class Kind { Dynamic, Static, Dependent };
    Kind kind = Kind::Dynamic;
    uint32_t cycles = 0;  // Static N (>= 1), Dependent offset (>= 0)
    std::string message;  // Dependent base message
    SourceSpan span;
};

struct Duration {
    enum class Kind { Cycles, Message, Eternal };
    Kind kind = Kind::Eternal;
    uint32_t cycles = 0;  // Cycles N (>= 1)
    std::string message;  // Message ident within the same channel
    SourceSpan span;
};

struct MessageDef {
    std::string ident;
    MsgDir direction = MsgDir::Left;
    DataType data_type;
    Duration duration;
    SyncMode sync_left;   // sync mode at the left endpoint
    SyncMode sync_right;  // sync mode at the right endpoint
    SourceSpan span;
};

struct ChannelTypeDef {
    std::string name;
    std::vector<MessageDef> messages;
    SourceSpan span;
};

/// Named tuple of logic vectors; flattened to one bit vector in codegen.
struct TypeDef {
    std::string name;
    std::vector<DataType> fields;
    SourceSpan span;
};

// --------------------------------------------------------------------------
// Terms

enum class TermKind {
    Literal,   // 25, 1'b1, true, false
    Unit,      // ()
    Cycle,     // cycle N
    Ident,     // let-bound reference
    RegRead,   // *r
    Wait,      // t1 >> t2
    Join,      // t1 ; t2
    Let,       // let x = t1; t2   /   let x = t1 >> t2
    If,        // if c { t } else { t }
    Send,      // send pi.m (t)
    Recv,      // recv pi.m
    RegAssign, // set r := t   /   r := t
    Ready,     // ready(pi.m)
    BinOp,
    UnOp,
    Recurse,
    DPrint,    // dprint "fmt" (args...)
};

enum class BinOpKind { Mul, Div, Mod, Add, Sub, Lt, Le, Gt, Ge, Eq, Ne, And, Xor, Or };
enum class UnOpKind { BitNot, LogNot, Neg };

struct Term;
using TermPtr = std::unique_ptr<Term>;

struct Term {
    TermKind kind;
    SourceSpan span;

    // Literal: lexeme as written plus decoded value/width. Ident/RegRead:
    // `text` is the name. DPrint: `text` is the format string.
    std::string text;
    uint64_t value = 0;
    uint32_t width = 0;
    bool sized = false;

    uint32_t cycles = 0; // Cycle

    std::string endpoint, message; // Send / Recv / Ready

    // Let: kids = [bound, body]; `seq` marks the `let x = t >>` form whose
    // body starts at the bound term's completion rather than in parallel.
    bool seq = false;

    BinOpKind bin = BinOpKind::Add;
    UnOpKind un = UnOpKind::BitNot;

    std::vector<TermPtr> kids;

    static TermPtr make(TermKind k, SourceSpan span) {
        auto t = std::make_unique<Term>();
        t->kind = k;
        t->span = span;
        return t;
    }
};

struct RegDecl {
    std::string name;
    DataType type;
    SourceSpan span;
};

struct ChanInst {
    std::string left, right;
    std::string chan_type;
    SourceSpan span;
};

struct Spawn {
    std::string proc;
    std::vector<std::string> args;
    std::vector<SourceSpan> arg_spans;
    SourceSpan span;
};

struct Thread {
    bool recursive = false;
    TermPtr body;
    SourceSpan span;
};

struct Param {
    std::string name;
    Side side = Side::Left;
    std::string chan_type;
    SourceSpan span;
};

struct ProcDef {
    std::string name;
    std::vector<Param> params;
    std::vector<RegDecl> regs;
    std::vector<ChanInst> chans;
    std::vector<Spawn> spawns;
    std::vector<Thread> threads;
    SourceSpan span;
};

struct Program {
    std::vector<ChannelTypeDef> channels;
    std::vector<TypeDef> types;
    std::vector<ProcDef> procs;
};

std::string print(const Program& p);
std::string print(const Term& t);

bool equal(const Term& a, const Term& b);
bool equal(const Program& a, const Program& b);

/// Every child node's span must be contained in its parent's.
bool spans_monotone(const Term& t);

} // namespace anvil::ast
