#pragma once

#include "anvil/ast.hpp"
#include "anvil/diag.hpp"
#include "anvil/lexer.hpp"

namespace anvil {

/// Parses one token stream into `out`, appending channel/type/proc
/// definitions. Returns false if syntax errors were reported.
bool parse_program(const std::vector<Token>& tokens, ast::Program& out,
                   DiagnosticEngine& diags);

} // namespace anvil
