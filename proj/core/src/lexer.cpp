#include "anvil/lexer.hpp"

#include <fmt/format.h>

#include <cctype>
#include <unordered_map>

namespace anvil {

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Eof: return "end of file";
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer";
        case Tok::SizedLit: return "sized literal";
        case Tok::String: return "string";
        case Tok::KwChan: return "'chan'";
        case Tok::KwProc: return "'proc'";
        case Tok::KwLoop: return "'loop'";
        case Tok::KwRecursive: return "'recursive'";
        case Tok::KwRecurse: return "'recurse'";
        case Tok::KwLet: return "'let'";
        case Tok::KwSet: return "'set'";
        case Tok::KwSend: return "'send'";
        case Tok::KwRecv: return "'recv'";
        case Tok::KwReady: return "'ready'";
        case Tok::KwCycle: return "'cycle'";
        case Tok::KwIf: return "'if'";
        case Tok::KwElse: return "'else'";
        case Tok::KwSpawn: return "'spawn'";
        case Tok::KwReg: return "'reg'";
        case Tok::KwLeft: return "'left'";
        case Tok::KwRight: return "'right'";
        case Tok::KwDprint: return "'dprint'";
        case Tok::KwLogic: return "'logic'";
        case Tok::KwIn: return "'in'";
        case Tok::KwType: return "'type'";
        case Tok::KwTrue: return "'true'";
        case Tok::KwFalse: return "'false'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Comma: return "','";
        case Tok::Colon: return "':'";
        case Tok::Semi: return "';'";
        case Tok::Dot: return "'.'";
        case Tok::Eq: return "'='";
        case Tok::Shr: return "'>>'";
        case Tok::Assign: return "':='";
        case Tok::DoubleDash: return "'--'";
        case Tok::AtDyn: return "'@dyn'";
        case Tok::At: return "'@'";
        case Tok::Hash: return "'#'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Percent: return "'%'";
        case Tok::Amp: return "'&'";
        case Tok::Pipe: return "'|'";
        case Tok::Caret: return "'^'";
        case Tok::Tilde: return "'~'";
        case Tok::Bang: return "'!'";
        case Tok::EqEq: return "'=='";
        case Tok::NotEq: return "'!='";
        case Tok::Lt: return "'<'";
        case Tok::Gt: return "'>'";
        case Tok::Le: return "'<='";
        case Tok::Ge: return "'>='";
    }
    return "?";
}

namespace {

const std::unordered_map<std::string_view, Tok>& keyword_table() {
    static const std::unordered_map<std::string_view, Tok> table = {
        {"chan", Tok::KwChan},   {"proc", Tok::KwProc},     {"loop", Tok::KwLoop},
        {"recursive", Tok::KwRecursive}, {"recurse", Tok::KwRecurse},
        {"let", Tok::KwLet},     {"set", Tok::KwSet},       {"send", Tok::KwSend},
        {"recv", Tok::KwRecv},   {"ready", Tok::KwReady},   {"cycle", Tok::KwCycle},
        {"if", Tok::KwIf},       {"else", Tok::KwElse},     {"spawn", Tok::KwSpawn},
        {"reg", Tok::KwReg},     {"left", Tok::KwLeft},     {"right", Tok::KwRight},
        {"dprint", Tok::KwDprint}, {"logic", Tok::KwLogic}, {"in", Tok::KwIn},
        {"type", Tok::KwType},   {"true", Tok::KwTrue},     {"false", Tok::KwFalse},
    };
    return table;
}

struct Cursor {
    std::string_view text;
    size_t pos = 0;
    uint32_t line = 1, col = 1;

    bool eof() const { return pos >= text.size(); }
    char peek(size_t off = 0) const {
        return pos + off < text.size() ? text[pos + off] : '\0';
    }
    char bump() {
        char c = text[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_cont(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

uint64_t parse_digits(std::string_view s, int base) {
    uint64_t v = 0;
    for (char c : s) {
        if (c == '_') continue;
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else d = c - 'A' + 10;
        v = v * static_cast<uint64_t>(base) + static_cast<uint64_t>(d);
    }
    return v;
}

} // namespace

std::vector<Token> tokenize(const SourceManager& sm, FileId file, DiagnosticEngine& diags) {
    Cursor cur{sm.text(file)};
    std::vector<Token> out;

    auto start_span = [&]() {
        SourceSpan s;
        s.file = file;
        s.line_lo = s.line_hi = cur.line;
        s.col_lo = s.col_hi = cur.col;
        return s;
    };
    auto close_span = [&](SourceSpan& s) {
        s.line_hi = cur.line;
        s.col_hi = cur.col > 1 ? cur.col - 1 : 1;
    };
    auto push = [&](Tok kind, SourceSpan s, std::string text = {}) {
        close_span(s);
        Token t;
        t.kind = kind;
        t.text = std::move(text);
        t.span = s;
        out.push_back(std::move(t));
        return &out.back();
    };

    while (!cur.eof()) {
        char c = cur.peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            cur.bump();
            continue;
        }
        if (c == '/' && cur.peek(1) == '/') {
            while (!cur.eof() && cur.peek() != '\n') cur.bump();
            continue;
        }
        if (c == '/' && cur.peek(1) == '*') {
            SourceSpan s = start_span();
            cur.bump();
            cur.bump();
            bool closed = false;
            while (!cur.eof()) {
                if (cur.peek() == '*' && cur.peek(1) == '/') {
                    cur.bump();
                    cur.bump();
                    closed = true;
                    break;
                }
                cur.bump();
            }
            if (!closed) {
                close_span(s);
                diags.report({Severity::Error, DiagClass::Lex,
                              "Unterminated block comment", s, {}});
            }
            continue;
        }

        SourceSpan span = start_span();

        if (ident_start(c)) {
            std::string word;
            while (!cur.eof() && ident_cont(cur.peek())) word += cur.bump();
            auto it = keyword_table().find(word);
            if (it != keyword_table().end()) {
                push(it->second, span, word);
            } else {
                push(Tok::Ident, span, word);
            }
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (!cur.eof() && (std::isdigit(static_cast<unsigned char>(cur.peek())) ||
                                  cur.peek() == '_'))
                digits += cur.bump();
            if (cur.peek() == '\'' &&
                (cur.peek(1) == 'b' || cur.peek(1) == 'd' || cur.peek(1) == 'h')) {
                cur.bump();
                char base_c = cur.bump();
                int base = base_c == 'b' ? 2 : base_c == 'd' ? 10 : 16;
                std::string body;
                auto is_digit_of = [&](char d) {
                    if (d == '_') return true;
                    if (base == 2) return d == '0' || d == '1';
                    if (base == 10) return std::isdigit(static_cast<unsigned char>(d)) != 0;
                    return std::isxdigit(static_cast<unsigned char>(d)) != 0;
                };
                while (!cur.eof() && is_digit_of(cur.peek())) body += cur.bump();
                if (body.empty()) {
                    close_span(span);
                    diags.report({Severity::Error, DiagClass::Lex,
                                  "Missing digits in sized literal", span, {}});
                    continue;
                }
                Token* t = push(Tok::SizedLit, span,
                                fmt::format("{}'{}{}", digits, base_c, body));
                t->width = static_cast<uint32_t>(parse_digits(digits, 10));
                t->value = parse_digits(body, base);
            } else {
                Token* t = push(Tok::Int, span, digits);
                t->value = parse_digits(digits, 10);
            }
            continue;
        }

        if (c == '"') {
            cur.bump();
            std::string body;
            bool closed = false;
            while (!cur.eof()) {
                char d = cur.bump();
                if (d == '"') {
                    closed = true;
                    break;
                }
                if (d == '\\' && !cur.eof()) {
                    char e = cur.bump();
                    switch (e) {
                        case 'n': body += '\n'; break;
                        case 't': body += '\t'; break;
                        case '"': body += '"'; break;
                        case '\\': body += '\\'; break;
                        default: body += e; break;
                    }
                    continue;
                }
                body += d;
            }
            if (!closed) {
                close_span(span);
                diags.report({Severity::Error, DiagClass::Lex,
                              "Unterminated string literal", span, {}});
                continue;
            }
            push(Tok::String, span, body);
            continue;
        }

        if (c == '@') {
            if (cur.peek(1) == 'd' && cur.peek(2) == 'y' && cur.peek(3) == 'n' &&
                !ident_cont(cur.peek(4))) {
                cur.bump(); cur.bump(); cur.bump(); cur.bump();
                push(Tok::AtDyn, span, "@dyn");
            } else {
                cur.bump();
                push(Tok::At, span, "@");
            }
            continue;
        }

        auto two = [&](char second, Tok kind) {
            if (cur.peek(1) == second) {
                cur.bump();
                cur.bump();
                push(kind, span);
                return true;
            }
            return false;
        };

        switch (c) {
            case '{': cur.bump(); push(Tok::LBrace, span); continue;
            case '}': cur.bump(); push(Tok::RBrace, span); continue;
            case '(': cur.bump(); push(Tok::LParen, span); continue;
            case ')': cur.bump(); push(Tok::RParen, span); continue;
            case '[': cur.bump(); push(Tok::LBracket, span); continue;
            case ']': cur.bump(); push(Tok::RBracket, span); continue;
            case ',': cur.bump(); push(Tok::Comma, span); continue;
            case ';': cur.bump(); push(Tok::Semi, span); continue;
            case '.': cur.bump(); push(Tok::Dot, span); continue;
            case '#': cur.bump(); push(Tok::Hash, span); continue;
            case '+': cur.bump(); push(Tok::Plus, span); continue;
            case '*': cur.bump(); push(Tok::Star, span); continue;
            case '/': cur.bump(); push(Tok::Slash, span); continue;
            case '%': cur.bump(); push(Tok::Percent, span); continue;
            case '&': cur.bump(); push(Tok::Amp, span); continue;
            case '|': cur.bump(); push(Tok::Pipe, span); continue;
            case '^': cur.bump(); push(Tok::Caret, span); continue;
            case '~': cur.bump(); push(Tok::Tilde, span); continue;
            case ':':
                if (two('=', Tok::Assign)) continue;
                cur.bump();
                push(Tok::Colon, span);
                continue;
            case '-':
                if (two('-', Tok::DoubleDash)) continue;
                cur.bump();
                push(Tok::Minus, span);
                continue;
            case '=':
                if (two('=', Tok::EqEq)) continue;
                cur.bump();
                push(Tok::Eq, span);
                continue;
            case '!':
                if (two('=', Tok::NotEq)) continue;
                cur.bump();
                push(Tok::Bang, span);
                continue;
            case '<':
                if (two('=', Tok::Le)) continue;
                cur.bump();
                push(Tok::Lt, span);
                continue;
            case '>':
                if (two('>', Tok::Shr)) continue;
                if (two('=', Tok::Ge)) continue;
                cur.bump();
                push(Tok::Gt, span);
                continue;
            default: break;
        }

        cur.bump();
        close_span(span);
        diags.report({Severity::Error, DiagClass::Lex,
                      fmt::format("Unrecognized character '{}'", c), span, {}});
    }

    SourceSpan eof_span = start_span();
    Token t;
    t.kind = Tok::Eof;
    t.span = eof_span;
    out.push_back(t);
    return out;
}

} // namespace anvil
