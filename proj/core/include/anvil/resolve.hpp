#pragma once

#include "anvil/ast.hpp"
#include "anvil/diag.hpp"

#include <optional>
#include <unordered_map>
#include <vector>

namespace anvil {

using ChanTypeId = uint32_t;
using MsgId = uint32_t;
using ProcId = uint32_t;
using EndpointId = uint32_t;
using RegId = uint32_t;

enum class Polarity { Send, Receive };

/// Identifies one message of one endpoint within a process, e.g. `ch1.enc_req`.
struct MsgRef {
    EndpointId endpoint = 0;
    MsgId msg = 0;
    bool operator==(const MsgRef&) const = default;
};

struct MsgRefHash {
    size_t operator()(const MsgRef& m) const {
        return std::hash<uint64_t>()((uint64_t(m.endpoint) << 32) | m.msg);
    }
};

struct ResolvedMessage {
    std::string name;
    ast::MsgDir direction = ast::MsgDir::Left;
    uint32_t width = 1; // flattened payload width
    ast::Duration duration;
    std::optional<MsgId> duration_msg; // resolved Duration::Message target
    ast::SyncMode sync[2];             // indexed by ast::Side
    std::optional<MsgId> sync_msg[2];  // resolved Dependent targets
    SourceSpan span;
};

struct ResolvedChanType {
    std::string name;
    std::vector<ResolvedMessage> messages;
    std::optional<MsgId> find(const std::string& name) const;
};

struct Endpoint {
    std::string name;
    ChanTypeId chan_type = 0;
    ast::Side side = ast::Side::Left;
    bool is_param = false;
    uint32_t chan_inst = 0; // index into the proc's channel instantiations
    SourceSpan span;
};

struct ResolvedProc {
    std::string name;
    ProcId id = 0;
    std::vector<Endpoint> endpoints; // params first, then (left, right) per chan inst
    uint32_t param_count = 0;
    std::vector<std::string> reg_names;
    std::vector<uint32_t> reg_widths;
    std::vector<SourceSpan> reg_spans;

    struct SpawnR {
        ProcId proc = 0;
        std::vector<EndpointId> args;
        SourceSpan span;
    };
    std::vector<SpawnR> spawns;

    struct ThreadR {
        bool recursive = false;
        const ast::Term* body = nullptr;
        SourceSpan span;
    };
    std::vector<ThreadR> threads;

    const ast::ProcDef* src = nullptr;

    std::optional<EndpointId> find_endpoint(const std::string& name) const;
    std::optional<RegId> find_reg(const std::string& name) const;
};

/// Per-AST-node resolution results, keyed by node identity.
struct TermInfo {
    RegId reg = 0;                         // RegRead / RegAssign
    MsgRef msg;                            // Send / Recv / Ready
    Polarity polarity = Polarity::Send;    // Send / Recv / Ready
    const ast::Term* binding = nullptr;    // Ident -> defining Let node
};

struct ResolvedUnit {
    std::vector<ResolvedChanType> chan_types;
    std::vector<ResolvedProc> procs;
    std::unordered_map<const ast::Term*, TermInfo> info;

    std::optional<ProcId> find_proc(const std::string& name) const;
    const ResolvedChanType& chan_of(const ResolvedProc& p, EndpointId ep) const {
        return chan_types[p.endpoints[ep].chan_type];
    }
    const ResolvedMessage& message(const ResolvedProc& p, const MsgRef& r) const {
        return chan_of(p, r.endpoint).messages[r.msg];
    }
    /// Send iff (endpoint side == Left) == (message travels Right).
    static Polarity polarity_of(ast::Side side, ast::MsgDir dir) {
        bool send = (side == ast::Side::Left) == (dir == ast::MsgDir::Right);
        return send ? Polarity::Send : Polarity::Receive;
    }
};

/// Binds every identifier in the program; returns nullopt if errors were
/// reported. The returned structure borrows the AST, which must outlive it.
std::optional<ResolvedUnit> resolve(const ast::Program& program, DiagnosticEngine& diags);

} // namespace anvil
