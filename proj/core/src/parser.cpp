#include "anvil/parser.hpp"

#include <fmt/format.h>

namespace anvil {

using namespace ast;

namespace {

struct ParseError {};

class Parser {
  public:
    Parser(const std::vector<Token>& toks, Program& out, DiagnosticEngine& diags)
        : toks_(toks), out_(out), diags_(diags) {}

    bool run() {
        bool ok = true;
        while (!at(Tok::Eof)) {
            try {
                if (at(Tok::KwChan)) {
                    out_.channels.push_back(parse_chan());
                } else if (at(Tok::KwType)) {
                    out_.types.push_back(parse_type_def());
                } else if (at(Tok::KwProc)) {
                    out_.procs.push_back(parse_proc());
                } else {
                    fail("'chan', 'type', or 'proc'");
                }
            } catch (ParseError&) {
                ok = false;
                recover_top_level();
            }
        }
        return ok;
    }

  private:
    const std::vector<Token>& toks_;
    Program& out_;
    DiagnosticEngine& diags_;
    size_t pos_ = 0;

    const Token& peek(size_t off = 0) const {
        size_t i = pos_ + off;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Tok k, size_t off = 0) const { return peek(off).kind == k; }
    const Token& bump() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& expected) {
        diags_.report({Severity::Error, DiagClass::Syntax,
                       fmt::format("Expected {}, found {}", expected, tok_name(peek().kind)),
                       peek().span,
                       {}});
        throw ParseError{};
    }

    const Token& expect(Tok k) {
        if (!at(k)) fail(tok_name(k));
        return bump();
    }

    void recover_top_level() {
        int depth = 0;
        while (!at(Tok::Eof)) {
            if (at(Tok::LBrace)) ++depth;
            if (at(Tok::RBrace)) {
                if (depth <= 1) {
                    bump();
                    return;
                }
                --depth;
            }
            if (depth == 0 && (at(Tok::KwChan) || at(Tok::KwProc) || at(Tok::KwType)))
                return;
            bump();
        }
    }

    SourceSpan span_from(const SourceSpan& start) const {
        size_t i = pos_ > 0 ? pos_ - 1 : 0;
        return SourceSpan::join(start, toks_[i].span);
    }

    // ---- type expressions -------------------------------------------------

    DataType parse_data_type() {
        DataType dt;
        dt.span = peek().span;
        if (at(Tok::KwLogic)) {
            bump();
            dt.kind = DataType::Kind::Logic;
            dt.width = 1;
            if (at(Tok::LBracket)) {
                bump();
                dt.width = static_cast<uint32_t>(expect(Tok::Int).value);
                expect(Tok::RBracket);
            }
        } else if (at(Tok::Ident)) {
            dt.kind = DataType::Kind::Named;
            dt.name = bump().text;
        } else {
            fail("a data type");
        }
        dt.span = span_from(dt.span);
        return dt;
    }

    TypeDef parse_type_def() {
        TypeDef td;
        td.span = peek().span;
        expect(Tok::KwType);
        td.name = expect(Tok::Ident).text;
        expect(Tok::Eq);
        expect(Tok::LParen);
        td.fields.push_back(parse_data_type());
        while (at(Tok::Comma)) {
            bump();
            td.fields.push_back(parse_data_type());
        }
        expect(Tok::RParen);
        expect(Tok::Semi);
        td.span = span_from(td.span);
        return td;
    }

    // ---- channel definitions ----------------------------------------------

    SyncMode parse_sync_mode() {
        SyncMode s;
        s.span = peek().span;
        if (at(Tok::AtDyn)) {
            bump();
            s.kind = SyncMode::Kind::Dynamic;
        } else {
            expect(Tok::At);
            expect(Tok::Hash);
            if (at(Tok::Int)) {
                s.kind = SyncMode::Kind::Static;
                s.cycles = static_cast<uint32_t>(bump().value);
                if (s.cycles < 1) fail("a static sync bound of at least 1");
            } else {
                s.kind = SyncMode::Kind::Dependent;
                s.message = expect(Tok::Ident).text;
                expect(Tok::Plus);
                s.cycles = static_cast<uint32_t>(expect(Tok::Int).value);
            }
        }
        s.span = span_from(s.span);
        return s;
    }

    MessageDef parse_message() {
        MessageDef m;
        m.span = peek().span;
        if (at(Tok::KwLeft)) {
            bump();
            m.direction = MsgDir::Left;
        } else if (at(Tok::KwRight)) {
            bump();
            m.direction = MsgDir::Right;
        } else {
            fail("'left' or 'right'");
        }
        m.ident = expect(Tok::Ident).text;
        expect(Tok::Colon);
        expect(Tok::LParen);
        m.data_type = parse_data_type();
        if (at(Tok::At)) {
            m.duration.span = peek().span;
            bump();
            if (at(Tok::Hash)) {
                bump();
                m.duration.kind = Duration::Kind::Cycles;
                m.duration.cycles = static_cast<uint32_t>(expect(Tok::Int).value);
                if (m.duration.cycles < 1) fail("a duration of at least 1 cycle");
            } else {
                m.duration.kind = Duration::Kind::Message;
                m.duration.message = expect(Tok::Ident).text;
            }
            m.duration.span = span_from(m.duration.span);
        } else {
            m.duration.kind = Duration::Kind::Eternal;
        }
        expect(Tok::RParen);
        if (at(Tok::At) || at(Tok::AtDyn)) {
            m.sync_left = parse_sync_mode();
            expect(Tok::Minus);
            m.sync_right = parse_sync_mode();
        } // omitted sync annotations default to dynamic on both sides
        m.span = span_from(m.span);
        return m;
    }

    ChannelTypeDef parse_chan() {
        ChannelTypeDef ch;
        ch.span = peek().span;
        expect(Tok::KwChan);
        ch.name = expect(Tok::Ident).text;
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            ch.messages.push_back(parse_message());
            if (at(Tok::Comma)) bump();
            else break;
        }
        expect(Tok::RBrace);
        ch.span = span_from(ch.span);
        return ch;
    }

    // ---- processes ----------------------------------------------------------

    ProcDef parse_proc() {
        ProcDef p;
        p.span = peek().span;
        expect(Tok::KwProc);
        p.name = expect(Tok::Ident).text;
        expect(Tok::LParen);
        while (!at(Tok::RParen)) {
            Param pa;
            pa.span = peek().span;
            pa.name = expect(Tok::Ident).text;
            expect(Tok::Colon);
            if (at(Tok::KwLeft)) {
                bump();
                pa.side = Side::Left;
            } else if (at(Tok::KwRight)) {
                bump();
                pa.side = Side::Right;
            } else {
                fail("'left' or 'right'");
            }
            pa.chan_type = expect(Tok::Ident).text;
            pa.span = span_from(pa.span);
            p.params.push_back(std::move(pa));
            if (at(Tok::Comma)) bump();
            else break;
        }
        expect(Tok::RParen);
        expect(Tok::LBrace);
        while (!at(Tok::RBrace)) {
            if (at(Tok::KwReg)) {
                RegDecl r;
                r.span = peek().span;
                bump();
                r.name = expect(Tok::Ident).text;
                expect(Tok::Colon);
                r.type = parse_data_type();
                expect(Tok::Semi);
                r.span = span_from(r.span);
                p.regs.push_back(std::move(r));
            } else if (at(Tok::KwChan)) {
                ChanInst c;
                c.span = peek().span;
                bump();
                c.left = expect(Tok::Ident).text;
                expect(Tok::DoubleDash);
                c.right = expect(Tok::Ident).text;
                expect(Tok::Colon);
                c.chan_type = expect(Tok::Ident).text;
                expect(Tok::Semi);
                c.span = span_from(c.span);
                p.chans.push_back(std::move(c));
            } else if (at(Tok::KwSpawn)) {
                Spawn s;
                s.span = peek().span;
                bump();
                s.proc = expect(Tok::Ident).text;
                expect(Tok::LParen);
                while (!at(Tok::RParen)) {
                    const Token& t = expect(Tok::Ident);
                    s.args.push_back(t.text);
                    s.arg_spans.push_back(t.span);
                    if (at(Tok::Comma)) bump();
                    else break;
                }
                expect(Tok::RParen);
                expect(Tok::Semi);
                s.span = span_from(s.span);
                p.spawns.push_back(std::move(s));
            } else if (at(Tok::KwLoop) || at(Tok::KwRecursive)) {
                Thread th;
                th.span = peek().span;
                th.recursive = at(Tok::KwRecursive);
                bump();
                expect(Tok::LBrace);
                th.body = parse_stmt();
                expect(Tok::RBrace);
                th.span = span_from(th.span);
                p.threads.push_back(std::move(th));
            } else {
                fail("'reg', 'chan', 'spawn', 'loop', or 'recursive'");
            }
        }
        expect(Tok::RBrace);
        p.span = span_from(p.span);
        return p;
    }

    // ---- terms --------------------------------------------------------------

    bool at_term_start() const {
        switch (peek().kind) {
            case Tok::Int:
            case Tok::SizedLit:
            case Tok::KwTrue:
            case Tok::KwFalse:
            case Tok::Ident:
            case Tok::LParen:
            case Tok::LBrace:
            case Tok::Star:
            case Tok::KwCycle:
            case Tok::KwRecv:
            case Tok::KwSend:
            case Tok::KwReady:
            case Tok::KwSet:
            case Tok::KwIf:
            case Tok::KwLet:
            case Tok::KwRecurse:
            case Tok::KwDprint:
            case Tok::Tilde:
            case Tok::Bang:
            case Tok::Minus:
                return true;
            default:
                return false;
        }
    }

    // stmt := 'let' x '=' expr (';' stmt? | '>>' stmt | 'in' stmt)?
    //       | join ('>>' stmt)?
    TermPtr parse_stmt() {
        SourceSpan start = peek().span;
        if (at(Tok::KwLet)) {
            bump();
            std::string name = expect(Tok::Ident).text;
            expect(Tok::Eq);
            TermPtr bound = parse_expr();
            TermPtr body;
            bool seq = false;
            if (at(Tok::Shr)) {
                bump();
                seq = true;
                body = parse_stmt();
            } else if (at(Tok::Semi)) {
                bump();
                if (at_term_start()) body = parse_stmt();
            } else if (at(Tok::KwIn)) {
                bump();
                body = parse_stmt();
            }
            if (!body) {
                // trailing let: the thread just waits for the bound term
                body = Term::make(TermKind::Unit, peek().span);
            }
            TermPtr t = Term::make(TermKind::Let, start);
            t->text = std::move(name);
            t->seq = seq;
            t->kids.push_back(std::move(bound));
            t->kids.push_back(std::move(body));
            t->span = SourceSpan::join(start, t->kids[1]->span);
            return t;
        }
        TermPtr left = parse_join();
        if (at(Tok::Shr)) {
            bump();
            TermPtr right = parse_stmt();
            TermPtr t = Term::make(TermKind::Wait, SourceSpan::join(left->span, right->span));
            t->kids.push_back(std::move(left));
            t->kids.push_back(std::move(right));
            return t;
        }
        return left;
    }

    // join := expr (';' (let-stmt | join))?  -- binds tighter than '>>'
    TermPtr parse_join() {
        TermPtr left = parse_expr();
        if (at(Tok::Semi) && at_term_start_after_semi()) {
            bump();
            TermPtr right = at(Tok::KwLet) ? parse_stmt() : parse_join();
            TermPtr t = Term::make(TermKind::Join, SourceSpan::join(left->span, right->span));
            t->kids.push_back(std::move(left));
            t->kids.push_back(std::move(right));
            return t;
        }
        if (at(Tok::Semi)) bump(); // trailing semicolon before '}' is permitted
        return left;
    }

    bool at_term_start_after_semi() const {
        size_t save = pos_;
        const Token& next = toks_[save + 1 < toks_.size() ? save + 1 : save];
        switch (next.kind) {
            case Tok::Int: case Tok::SizedLit: case Tok::KwTrue: case Tok::KwFalse:
            case Tok::Ident: case Tok::LParen: case Tok::LBrace: case Tok::Star:
            case Tok::KwCycle: case Tok::KwRecv: case Tok::KwSend: case Tok::KwReady:
            case Tok::KwSet: case Tok::KwIf: case Tok::KwLet: case Tok::KwRecurse:
            case Tok::KwDprint: case Tok::Tilde: case Tok::Bang: case Tok::Minus:
                return true;
            default:
                return false;
        }
    }

    int bin_prec_of(Tok k) const {
        switch (k) {
            case Tok::Star: case Tok::Slash: case Tok::Percent: return 7;
            case Tok::Plus: case Tok::Minus: return 6;
            case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge: return 5;
            case Tok::EqEq: case Tok::NotEq: return 4;
            case Tok::Amp: return 3;
            case Tok::Caret: return 2;
            case Tok::Pipe: return 1;
            default: return -1;
        }
    }

    BinOpKind bin_kind_of(Tok k) const {
        switch (k) {
            case Tok::Star: return BinOpKind::Mul;
            case Tok::Slash: return BinOpKind::Div;
            case Tok::Percent: return BinOpKind::Mod;
            case Tok::Plus: return BinOpKind::Add;
            case Tok::Minus: return BinOpKind::Sub;
            case Tok::Lt: return BinOpKind::Lt;
            case Tok::Le: return BinOpKind::Le;
            case Tok::Gt: return BinOpKind::Gt;
            case Tok::Ge: return BinOpKind::Ge;
            case Tok::EqEq: return BinOpKind::Eq;
            case Tok::NotEq: return BinOpKind::Ne;
            case Tok::Amp: return BinOpKind::And;
            case Tok::Caret: return BinOpKind::Xor;
            case Tok::Pipe: return BinOpKind::Or;
            default: return BinOpKind::Add;
        }
    }

    TermPtr parse_expr(int min_prec = 1) {
        TermPtr left = parse_unary();
        for (;;) {
            int prec = bin_prec_of(peek().kind);
            if (prec < min_prec) break;
            Tok op = bump().kind;
            TermPtr right = parse_expr(prec + 1);
            TermPtr t = Term::make(TermKind::BinOp, SourceSpan::join(left->span, right->span));
            t->bin = bin_kind_of(op);
            t->kids.push_back(std::move(left));
            t->kids.push_back(std::move(right));
            left = std::move(t);
        }
        return left;
    }

    TermPtr parse_unary() {
        SourceSpan start = peek().span;
        UnOpKind un;
        if (at(Tok::Tilde)) un = UnOpKind::BitNot;
        else if (at(Tok::Bang)) un = UnOpKind::LogNot;
        else if (at(Tok::Minus)) un = UnOpKind::Neg;
        else return parse_primary();
        bump();
        TermPtr inner = parse_unary();
        TermPtr t = Term::make(TermKind::UnOp, SourceSpan::join(start, inner->span));
        t->un = un;
        t->kids.push_back(std::move(inner));
        return t;
    }

    void parse_msg_ref(Term& t) {
        t.endpoint = expect(Tok::Ident).text;
        expect(Tok::Dot);
        t.message = expect(Tok::Ident).text;
    }

    TermPtr parse_primary() {
        SourceSpan start = peek().span;
        switch (peek().kind) {
            case Tok::Int: {
                const Token& tok = bump();
                TermPtr t = Term::make(TermKind::Literal, tok.span);
                t->text = tok.text;
                t->value = tok.value;
                return t;
            }
            case Tok::SizedLit: {
                const Token& tok = bump();
                TermPtr t = Term::make(TermKind::Literal, tok.span);
                t->text = tok.text;
                t->value = tok.value;
                t->width = tok.width;
                t->sized = true;
                return t;
            }
            case Tok::KwTrue:
            case Tok::KwFalse: {
                bool v = at(Tok::KwTrue);
                const Token& tok = bump();
                TermPtr t = Term::make(TermKind::Literal, tok.span);
                t->text = tok.text;
                t->value = v ? 1 : 0;
                t->width = 1;
                t->sized = true;
                return t;
            }
            case Tok::LParen: {
                bump();
                if (at(Tok::RParen)) {
                    bump();
                    return Term::make(TermKind::Unit, span_from(start));
                }
                TermPtr inner = parse_stmt();
                expect(Tok::RParen);
                inner->span = span_from(start);
                return inner;
            }
            case Tok::LBrace: {
                bump();
                TermPtr inner = parse_stmt();
                expect(Tok::RBrace);
                inner->span = span_from(start);
                return inner;
            }
            case Tok::Star: {
                bump();
                TermPtr t = Term::make(TermKind::RegRead, start);
                t->text = expect(Tok::Ident).text;
                t->span = span_from(start);
                return t;
            }
            case Tok::KwCycle: {
                bump();
                TermPtr t = Term::make(TermKind::Cycle, start);
                t->cycles = static_cast<uint32_t>(expect(Tok::Int).value);
                t->span = span_from(start);
                return t;
            }
            case Tok::KwRecv: {
                bump();
                TermPtr t = Term::make(TermKind::Recv, start);
                parse_msg_ref(*t);
                t->span = span_from(start);
                return t;
            }
            case Tok::KwReady: {
                bump();
                expect(Tok::LParen);
                TermPtr t = Term::make(TermKind::Ready, start);
                parse_msg_ref(*t);
                expect(Tok::RParen);
                t->span = span_from(start);
                return t;
            }
            case Tok::KwSend: {
                bump();
                TermPtr t = Term::make(TermKind::Send, start);
                parse_msg_ref(*t);
                expect(Tok::LParen);
                t->kids.push_back(parse_stmt());
                expect(Tok::RParen);
                t->span = span_from(start);
                return t;
            }
            case Tok::KwSet: {
                bump();
                TermPtr t = Term::make(TermKind::RegAssign, start);
                t->text = expect(Tok::Ident).text;
                expect(Tok::Assign);
                t->kids.push_back(parse_expr());
                t->span = span_from(start);
                return t;
            }
            case Tok::Ident: {
                if (at(Tok::Assign, 1)) {
                    TermPtr t = Term::make(TermKind::RegAssign, start);
                    t->text = bump().text;
                    bump(); // :=
                    t->kids.push_back(parse_expr());
                    t->span = span_from(start);
                    return t;
                }
                TermPtr t = Term::make(TermKind::Ident, start);
                t->text = bump().text;
                return t;
            }
            case Tok::KwIf: {
                bump();
                TermPtr t = Term::make(TermKind::If, start);
                t->kids.push_back(parse_expr());
                expect(Tok::LBrace);
                t->kids.push_back(parse_stmt());
                expect(Tok::RBrace);
                if (at(Tok::KwElse)) {
                    bump();
                    expect(Tok::LBrace);
                    t->kids.push_back(parse_stmt());
                    expect(Tok::RBrace);
                }
                t->span = span_from(start);
                return t;
            }
            case Tok::KwRecurse: {
                bump();
                return Term::make(TermKind::Recurse, start);
            }
            case Tok::KwDprint: {
                bump();
                TermPtr t = Term::make(TermKind::DPrint, start);
                t->text = expect(Tok::String).text;
                if (at(Tok::LParen)) {
                    bump();
                    while (!at(Tok::RParen)) {
                        t->kids.push_back(parse_expr());
                        if (at(Tok::Comma)) bump();
                        else break;
                    }
                    expect(Tok::RParen);
                }
                t->span = span_from(start);
                return t;
            }
            default:
                fail("a term");
        }
    }
};

} // namespace

bool parse_program(const std::vector<Token>& tokens, ast::Program& out,
                   DiagnosticEngine& diags) {
    Parser p(tokens, out, diags);
    return p.run();
}

} // namespace anvil
