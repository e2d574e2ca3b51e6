#pragma once

#include "anvil/ast.hpp"
#include "anvil/diag.hpp"
#include "anvil/resolve.hpp"
#include "anvil/source.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace anvil {

struct CompileConfig {
    std::vector<std::string> inputs;
    std::string top;
    std::string output;         // '-' or empty = stdout
    int opt_level = 1;
    std::string graph_stage = "pre"; // pre | post
    std::string graph_format = "dot"; // dot | json
    std::string diag_format = "human"; // human | json
    std::string proc;           // graph: which process (default: top or first)
    int thread = 0;             // graph: which thread of the process
    uint32_t slack = 3;
    int iters = 2;
    uint64_t budget = 1000000;
};

/// One loaded-and-resolved compilation (multiple files share one global
/// namespace, concatenated in argument order).
struct Compilation {
    SourceManager sources;
    ast::Program program;
    std::optional<ResolvedUnit> unit;
    std::unique_ptr<DiagnosticEngine> diags;
};

/// Lex + parse + resolve. Returns false when any error was reported.
bool frontend(const std::vector<std::string>& files, Compilation& out, std::string& io_error);

/// Like `frontend` but from in-memory sources (name, text); used by tests.
bool frontend_from_sources(const std::vector<std::pair<std::string, std::string>>& sources,
                           Compilation& out);

std::optional<ProcId> select_top(const Compilation& c, const std::string& requested,
                                 std::string& error);

// Subcommand drivers; exit codes: 0 ok, 1 diagnostics, 2 usage, 3 internal.
int run_check(const CompileConfig& cfg, std::ostream& out, std::ostream& err);
int run_build(const CompileConfig& cfg, std::ostream& out, std::ostream& err);
int run_graph(const CompileConfig& cfg, std::ostream& out, std::ostream& err);
int run_verify(const CompileConfig& cfg, std::ostream& out, std::ostream& err);

/// Full argv-level entry point (excluding argv[0]).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace anvil
