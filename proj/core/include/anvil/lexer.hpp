#pragma once

#include "anvil/diag.hpp"
#include "anvil/source.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace anvil {

enum class Tok {
    Eof,
    Ident,
    Int,      // bare decimal literal
    SizedLit, // SystemVerilog-style sized literal, e.g. 32'h100000
    String,
    // keywords
    KwChan, KwProc, KwLoop, KwRecursive, KwRecurse, KwLet, KwSet, KwSend,
    KwRecv, KwReady, KwCycle, KwIf, KwElse, KwSpawn, KwReg, KwLeft, KwRight,
    KwDprint, KwLogic, KwIn, KwType, KwTrue, KwFalse,
    // punctuation / operators
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Comma, Colon, Semi, Dot, Eq,
    Shr,        // >>
    Assign,     // :=
    DoubleDash, // --
    AtDyn,      // @dyn
    At, Hash,
    Plus, Minus, Star, Slash, Percent,
    Amp, Pipe, Caret, Tilde, Bang,
    EqEq, NotEq, Lt, Gt, Le, Ge,
};

const char* tok_name(Tok t);

struct Token {
    Tok kind = Tok::Eof;
    std::string text;   // identifier / literal lexeme / string contents
    uint64_t value = 0; // integer value for Int, data value for SizedLit
    uint32_t width = 0; // bit width for SizedLit
    SourceSpan span;
};

/// Splits one compilation unit into tokens. `//` and `/* */` comments are
/// skipped. Lexical failures are reported with spans; lexing continues so
/// several errors can surface in one run.
std::vector<Token> tokenize(const SourceManager& sm, FileId file, DiagnosticEngine& diags);

} // namespace anvil
