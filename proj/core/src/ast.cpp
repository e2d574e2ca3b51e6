#include "anvil/ast.hpp"

#include <fmt/format.h>

namespace anvil::ast {

namespace {

const char* bin_op_str(BinOpKind k) {
    switch (k) {
        case BinOpKind::Mul: return "*";
        case BinOpKind::Div: return "/";
        case BinOpKind::Mod: return "%";
        case BinOpKind::Add: return "+";
        case BinOpKind::Sub: return "-";
        case BinOpKind::Lt: return "<";
        case BinOpKind::Le: return "<=";
        case BinOpKind::Gt: return ">";
        case BinOpKind::Ge: return ">=";
        case BinOpKind::Eq: return "==";
        case BinOpKind::Ne: return "!=";
        case BinOpKind::And: return "&";
        case BinOpKind::Xor: return "^";
        case BinOpKind::Or: return "|";
    }
    return "?";
}

int bin_prec(BinOpKind k) {
    switch (k) {
        case BinOpKind::Mul:
        case BinOpKind::Div:
        case BinOpKind::Mod: return 7;
        case BinOpKind::Add:
        case BinOpKind::Sub: return 6;
        case BinOpKind::Lt:
        case BinOpKind::Le:
        case BinOpKind::Gt:
        case BinOpKind::Ge: return 5;
        case BinOpKind::Eq:
        case BinOpKind::Ne: return 4;
        case BinOpKind::And: return 3;
        case BinOpKind::Xor: return 2;
        case BinOpKind::Or: return 1;
    }
    return 0;
}

// Statement-level precedence: let/join/wait below all binary operators.
constexpr int PREC_STMT = -3;
constexpr int PREC_WAIT = -2;
constexpr int PREC_JOIN = -1;
constexpr int PREC_EXPR = 0;

void print_term(const Term& t, int min_prec, std::string& out);

void print_escaped(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c; break;
        }
    }
    out += '"';
}

void print_term(const Term& t, int min_prec, std::string& out) {
    auto paren_if = [&](int prec, auto&& body) {
        bool need = prec < min_prec;
        if (need) out += '(';
        body();
        if (need) out += ')';
    };
    switch (t.kind) {
        case TermKind::Literal:
            out += t.text;
            return;
        case TermKind::Unit:
            out += "()";
            return;
        case TermKind::Cycle:
            out += fmt::format("cycle {}", t.cycles);
            return;
        case TermKind::Ident:
            out += t.text;
            return;
        case TermKind::RegRead:
            out += '*';
            out += t.text;
            return;
        case TermKind::Recurse:
            out += "recurse";
            return;
        case TermKind::Recv:
            out += fmt::format("recv {}.{}", t.endpoint, t.message);
            return;
        case TermKind::Ready:
            out += fmt::format("ready({}.{})", t.endpoint, t.message);
            return;
        case TermKind::Send:
            out += fmt::format("send {}.{} (", t.endpoint, t.message);
            print_term(*t.kids[0], PREC_WAIT, out);
            out += ')';
            return;
        case TermKind::RegAssign:
            paren_if(PREC_EXPR, [&] {
                out += fmt::format("set {} := ", t.text);
                print_term(*t.kids[0], PREC_EXPR, out);
            });
            return;
        case TermKind::DPrint:
            out += "dprint ";
            print_escaped(t.text, out);
            if (!t.kids.empty()) {
                out += " (";
                for (size_t i = 0; i < t.kids.size(); ++i) {
                    if (i) out += ", ";
                    print_term(*t.kids[i], PREC_EXPR, out);
                }
                out += ')';
            }
            return;
        case TermKind::If:
            out += "if ";
            print_term(*t.kids[0], PREC_EXPR, out);
            out += " { ";
            print_term(*t.kids[1], PREC_STMT, out);
            out += " }";
            if (t.kids.size() > 2) {
                out += " else { ";
                print_term(*t.kids[2], PREC_STMT, out);
                out += " }";
            }
            return;
        case TermKind::Wait:
            paren_if(PREC_WAIT, [&] {
                print_term(*t.kids[0], PREC_JOIN, out);
                out += " >> ";
                print_term(*t.kids[1], PREC_WAIT, out);
            });
            return;
        case TermKind::Join:
            paren_if(PREC_JOIN, [&] {
                print_term(*t.kids[0], PREC_EXPR, out);
                out += "; ";
                print_term(*t.kids[1], PREC_JOIN, out);
            });
            return;
        case TermKind::Let:
            paren_if(PREC_STMT, [&] {
                out += fmt::format("let {} = ", t.text);
                print_term(*t.kids[0], PREC_EXPR, out);
                out += t.seq ? " >> " : "; ";
                print_term(*t.kids[1], PREC_STMT, out);
            });
            return;
        case TermKind::BinOp: {
            int p = bin_prec(t.bin);
            paren_if(p, [&] {
                print_term(*t.kids[0], p, out);
                out += fmt::format(" {} ", bin_op_str(t.bin));
                print_term(*t.kids[1], p + 1, out);
            });
            return;
        }
        case TermKind::UnOp:
            paren_if(8, [&] {
                switch (t.un) {
                    case UnOpKind::BitNot: out += '~'; break;
                    case UnOpKind::LogNot: out += '!'; break;
                    case UnOpKind::Neg: out += '-'; break;
                }
                print_term(*t.kids[0], 8, out);
            });
            return;
    }
}

void print_data_type(const DataType& dt, std::string& out) {
    if (dt.kind == DataType::Kind::Named) {
        out += dt.name;
    } else if (dt.width == 1) {
        out += "logic";
    } else {
        out += fmt::format("logic[{}]", dt.width);
    }
}

void print_duration(const Duration& d, std::string& out) {
    switch (d.kind) {
        case Duration::Kind::Eternal: return;
        case Duration::Kind::Cycles: out += fmt::format("@#{}", d.cycles); return;
        case Duration::Kind::Message: out += fmt::format("@{}", d.message); return;
    }
}

void print_sync(const SyncMode& s, std::string& out) {
    switch (s.kind) {
        case SyncMode::Kind::Dynamic: out += "@dyn"; return;
        case SyncMode::Kind::Static: out += fmt::format("@#{}", s.cycles); return;
        case SyncMode::Kind::Dependent:
            out += fmt::format("@#{}+{}", s.message, s.cycles);
            return;
    }
}

} // namespace

std::string print(const Term& t) {
    std::string out;
    print_term(t, PREC_STMT, out);
    return out;
}

std::string print(const Program& p) {
    std::string out;
    for (const TypeDef& td : p.types) {
        out += fmt::format("type {} = (", td.name);
        for (size_t i = 0; i < td.fields.size(); ++i) {
            if (i) out += ", ";
            print_data_type(td.fields[i], out);
        }
        out += ");\n\n";
    }
    for (const ChannelTypeDef& ch : p.channels) {
        out += fmt::format("chan {} {{\n", ch.name);
        for (size_t i = 0; i < ch.messages.size(); ++i) {
            const MessageDef& m = ch.messages[i];
            out += fmt::format("  {} {} : (",
                               m.direction == MsgDir::Left ? "left" : "right", m.ident);
            print_data_type(m.data_type, out);
            print_duration(m.duration, out);
            out += ')';
            bool default_sync = m.sync_left.kind == SyncMode::Kind::Dynamic &&
                                m.sync_right.kind == SyncMode::Kind::Dynamic;
            if (!default_sync) {
                out += ' ';
                print_sync(m.sync_left, out);
                out += '-';
                print_sync(m.sync_right, out);
            }
            out += i + 1 < ch.messages.size() ? ",\n" : "\n";
        }
        out += "}\n\n";
    }
    for (const ProcDef& pd : p.procs) {
        out += fmt::format("proc {}(", pd.name);
        for (size_t i = 0; i < pd.params.size(); ++i) {
            const Param& pa = pd.params[i];
            if (i) out += ", ";
            out += fmt::format("{} : {} {}", pa.name,
                               pa.side == Side::Left ? "left" : "right", pa.chan_type);
        }
        out += ") {\n";
        for (const RegDecl& r : pd.regs) {
            out += fmt::format("  reg {} : ", r.name);
            print_data_type(r.type, out);
            out += ";\n";
        }
        for (const ChanInst& c : pd.chans)
            out += fmt::format("  chan {} -- {} : {};\n", c.left, c.right, c.chan_type);
        for (const Spawn& s : pd.spawns) {
            out += fmt::format("  spawn {}(", s.proc);
            for (size_t i = 0; i < s.args.size(); ++i) {
                if (i) out += ", ";
                out += s.args[i];
            }
            out += ");\n";
        }
        for (const Thread& th : pd.threads) {
            out += fmt::format("  {} {{\n    ", th.recursive ? "recursive" : "loop");
            print_term(*th.body, PREC_STMT, out);
            out += "\n  }\n";
        }
        out += "}\n\n";
    }
    return out;
}

bool equal(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    if (a.kids.size() != b.kids.size()) return false;
    switch (a.kind) {
        case TermKind::Literal:
            if (a.value != b.value || a.sized != b.sized || a.width != b.width)
                return false;
            break;
        case TermKind::Cycle:
            if (a.cycles != b.cycles) return false;
            break;
        case TermKind::Ident:
        case TermKind::RegRead:
            if (a.text != b.text) return false;
            break;
        case TermKind::Send:
        case TermKind::Recv:
        case TermKind::Ready:
            if (a.endpoint != b.endpoint || a.message != b.message) return false;
            break;
        case TermKind::Let:
            if (a.text != b.text || a.seq != b.seq) return false;
            break;
        case TermKind::RegAssign:
            if (a.text != b.text) return false;
            break;
        case TermKind::DPrint:
            if (a.text != b.text) return false;
            break;
        case TermKind::BinOp:
            if (a.bin != b.bin) return false;
            break;
        case TermKind::UnOp:
            if (a.un != b.un) return false;
            break;
        default: break;
    }
    for (size_t i = 0; i < a.kids.size(); ++i)
        if (!equal(*a.kids[i], *b.kids[i])) return false;
    return true;
}

static bool equal_dt(const DataType& a, const DataType& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == DataType::Kind::Logic) return a.width == b.width;
    return a.name == b.name;
}

bool equal(const Program& a, const Program& b) {
    if (a.channels.size() != b.channels.size() || a.procs.size() != b.procs.size() ||
        a.types.size() != b.types.size())
        return false;
    for (size_t i = 0; i < a.types.size(); ++i) {
        if (a.types[i].name != b.types[i].name) return false;
        if (a.types[i].fields.size() != b.types[i].fields.size()) return false;
        for (size_t j = 0; j < a.types[i].fields.size(); ++j)
            if (!equal_dt(a.types[i].fields[j], b.types[i].fields[j])) return false;
    }
    for (size_t i = 0; i < a.channels.size(); ++i) {
        const ChannelTypeDef& x = a.channels[i];
        const ChannelTypeDef& y = b.channels[i];
        if (x.name != y.name || x.messages.size() != y.messages.size()) return false;
        for (size_t j = 0; j < x.messages.size(); ++j) {
            const MessageDef& m = x.messages[j];
            const MessageDef& n = y.messages[j];
            if (m.ident != n.ident || m.direction != n.direction) return false;
            if (!equal_dt(m.data_type, n.data_type)) return false;
            if (m.duration.kind != n.duration.kind || m.duration.cycles != n.duration.cycles ||
                m.duration.message != n.duration.message)
                return false;
            auto sync_eq = [](const SyncMode& s, const SyncMode& t) {
                return s.kind == t.kind && s.cycles == t.cycles && s.message == t.message;
            };
            if (!sync_eq(m.sync_left, n.sync_left) || !sync_eq(m.sync_right, n.sync_right))
                return false;
        }
    }
    for (size_t i = 0; i < a.procs.size(); ++i) {
        const ProcDef& x = a.procs[i];
        const ProcDef& y = b.procs[i];
        if (x.name != y.name || x.params.size() != y.params.size() ||
            x.regs.size() != y.regs.size() || x.chans.size() != y.chans.size() ||
            x.spawns.size() != y.spawns.size() || x.threads.size() != y.threads.size())
            return false;
        for (size_t j = 0; j < x.params.size(); ++j)
            if (x.params[j].name != y.params[j].name || x.params[j].side != y.params[j].side ||
                x.params[j].chan_type != y.params[j].chan_type)
                return false;
        for (size_t j = 0; j < x.regs.size(); ++j)
            if (x.regs[j].name != y.regs[j].name || !equal_dt(x.regs[j].type, y.regs[j].type))
                return false;
        for (size_t j = 0; j < x.chans.size(); ++j)
            if (x.chans[j].left != y.chans[j].left || x.chans[j].right != y.chans[j].right ||
                x.chans[j].chan_type != y.chans[j].chan_type)
                return false;
        for (size_t j = 0; j < x.spawns.size(); ++j)
            if (x.spawns[j].proc != y.spawns[j].proc || x.spawns[j].args != y.spawns[j].args)
                return false;
        for (size_t j = 0; j < x.threads.size(); ++j) {
            if (x.threads[j].recursive != y.threads[j].recursive) return false;
            if (!equal(*x.threads[j].body, *y.threads[j].body)) return false;
        }
    }
    return true;
}

bool spans_monotone(const Term& t) {
    for (const TermPtr& k : t.kids) {
        if (!t.span.contains(k->span)) return false;
        if (!spans_monotone(*k)) return false;
    }
    return true;
}

} // namespace anvil::ast
