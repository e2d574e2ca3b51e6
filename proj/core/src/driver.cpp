#include "anvil/driver.hpp"

#include "anvil/codegen.hpp"
#include "anvil/infer.hpp"
#include "anvil/lexer.hpp"
#include "anvil/optimizer.hpp"
#include "anvil/parser.hpp"
#include "anvil/semantics.hpp"
#include "anvil/typecheck.hpp"

#include <fmt/format.h>

#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

namespace anvil {

namespace {

bool run_frontend(Compilation& c) {
    c.diags = std::make_unique<DiagnosticEngine>(c.sources);
    bool ok = true;
    for (FileId f = 0; f < c.sources.file_count(); ++f) {
        std::vector<Token> toks = tokenize(c.sources, f, *c.diags);
        if (!parse_program(toks, c.program, *c.diags)) ok = false;
    }
    if (c.diags->has_errors()) return false;
    c.unit = resolve(c.program, *c.diags);
    return ok && c.unit.has_value() && !c.diags->has_errors();
}

int flush_diags(const Compilation& c, const CompileConfig& cfg, std::ostream& out,
                std::ostream& err) {
    c.diags->finalize();
    const_cast<DiagnosticEngine&>(*c.diags).finalize();
    if (cfg.diag_format == "json") {
        out << c.diags->render_json();
    } else {
        err << c.diags->render_human();
    }
    return c.diags->has_errors() ? 1 : 0;
}

bool write_output(const std::string& path, const std::string& text, std::ostream& out,
                  std::ostream& err) {
    if (path.empty() || path == "-") {
        out << text;
        return true;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        err << fmt::format("error: cannot write '{}'\n", path);
        return false;
    }
    f << text;
    return true;
}

} // namespace

bool frontend(const std::vector<std::string>& files, Compilation& out,
              std::string& io_error) {
    for (const std::string& path : files) {
        std::ifstream f(path, std::ios::binary);
        if (!f) {
            io_error = fmt::format("cannot open '{}'", path);
            return false;
        }
        std::stringstream ss;
        ss << f.rdbuf();
        out.sources.add(path, ss.str());
    }
    return run_frontend(out);
}

bool frontend_from_sources(const std::vector<std::pair<std::string, std::string>>& sources,
                           Compilation& out) {
    for (const auto& [name, text] : sources) out.sources.add(name, text);
    return run_frontend(out);
}

std::optional<ProcId> select_top(const Compilation& c, const std::string& requested,
                                 std::string& error) {
    if (!c.unit) {
        error = "no resolved program";
        return std::nullopt;
    }
    if (!requested.empty()) {
        auto id = c.unit->find_proc(requested);
        if (!id) error = fmt::format("no process named '{}'", requested);
        return id;
    }
    if (auto id = c.unit->find_proc("Top")) return id;
    if (c.unit->procs.size() == 1) return ProcId{0};
    error = "multiple processes; select one with --top";
    return std::nullopt;
}

int run_check(const CompileConfig& cfg, std::ostream& out, std::ostream& err) {
    Compilation c;
    std::string io_error;
    if (!frontend(cfg.inputs, c, io_error) && !c.diags) {
        err << "error: " << io_error << "\n";
        return 2;
    }
    if (!c.diags->has_errors() && c.unit) {
        CheckOptions opts;
        opts.iterations = cfg.iters >= 2 ? cfg.iters : 2;
        check_program(*c.unit, *c.diags, opts);
    }
    return flush_diags(c, cfg, out, err);
}

int run_build(const CompileConfig& cfg, std::ostream& out, std::ostream& err) {
    Compilation c;
    std::string io_error;
    if (!frontend(cfg.inputs, c, io_error) && !c.diags) {
        err << "error: " << io_error << "\n";
        return 2;
    }
    std::string sv;
    if (!c.diags->has_errors() && c.unit) {
        check_program(*c.unit, *c.diags);
        if (!c.diags->has_errors()) {
            std::string sel_err;
            auto top = select_top(c, cfg.top, sel_err);
            if (!top) {
                err << "error: " << sel_err << "\n";
                return 2;
            }
            EmitOptions eo;
            eo.opt_level = cfg.opt_level;
            sv = emit_sv(*c.unit, *top, *c.diags, eo);
        }
    }
    int rc = flush_diags(c, cfg, out, err);
    if (rc != 0) return rc;
    std::string path = cfg.output.empty() ? "out.sv" : cfg.output;
    if (!write_output(path, sv, out, err)) return 2;
    return 0;
}

int run_graph(const CompileConfig& cfg, std::ostream& out, std::ostream& err) {
    Compilation c;
    std::string io_error;
    if (!frontend(cfg.inputs, c, io_error) && !c.diags) {
        err << "error: " << io_error << "\n";
        return 2;
    }
    if (c.diags->has_errors() || !c.unit) return flush_diags(c, cfg, out, err);

    std::string sel_err;
    auto top = select_top(c, cfg.proc.empty() ? cfg.top : cfg.proc, sel_err);
    if (!top) {
        err << "error: " << sel_err << "\n";
        return 2;
    }
    const ResolvedProc& proc = c.unit->procs[*top];
    if (proc.threads.empty()) {
        err << fmt::format("error: process '{}' has no threads\n", proc.name);
        return 2;
    }
    if (cfg.thread < 0 || static_cast<size_t>(cfg.thread) >= proc.threads.size()) {
        err << fmt::format("error: process '{}' has no thread {}\n", proc.name, cfg.thread);
        return 2;
    }
    ThreadCheck tc = build_thread(*c.unit, proc, proc.threads[cfg.thread], 1);
    if (cfg.graph_stage == "post") optimize(tc.graph);
    std::string text =
        cfg.graph_format == "json" ? graph_to_json(tc.graph) : dump_dot(tc.graph);
    if (!write_output(cfg.output, text, out, err)) return 2;
    return 0;
}

int run_verify(const CompileConfig& cfg, std::ostream& out, std::ostream& err) {
    Compilation c;
    std::string io_error;
    if (!frontend(cfg.inputs, c, io_error) && !c.diags) {
        err << "error: " << io_error << "\n";
        return 2;
    }
    if (c.diags->has_errors() || !c.unit) return flush_diags(c, cfg, out, err);

    std::string sel_err;
    auto top = select_top(c, cfg.top, sel_err);
    if (!top) {
        err << "error: " << sel_err << "\n";
        return 2;
    }
    std::string asm_err;
    auto prog = sem::assemble_program(*c.unit, *top, asm_err);
    if (!prog) {
        err << "error: " << asm_err << "\n";
        return 2;
    }
    sem::Bounds bounds;
    bounds.slack = cfg.slack;
    bounds.iterations = cfg.iters;
    bounds.budget = cfg.budget;
    sem::VerifyReport rep = sem::verify_program(*prog, bounds);

    if (cfg.diag_format == "json") {
        out << fmt::format(
            "{{\"safe\": {}, \"complete\": {}, \"thread_logs\": {}, \"compositions\": {}, "
            "\"logs_checked\": {}}}\n",
            rep.safe, rep.complete, rep.thread_logs, rep.compositions, rep.logs_checked);
    } else {
        out << fmt::format("thread logs: {}\ncompositions: {}\nlogs checked: {}\n",
                           rep.thread_logs, rep.compositions, rep.logs_checked);
        if (!rep.complete) out << "warning: budget exhausted; verification incomplete\n";
        if (rep.safe) {
            out << "all checked logs are safe\n";
        } else {
            out << fmt::format(
                "UNSAFE: value {} {}\n",
                rep.witness_value < 0 ? fmt::format("env{}", -rep.witness_value)
                                      : fmt::format("v{}", rep.witness_value),
                rep.reason == sem::SafetyVerdict::Reason::MutationInWindow
                    ? "sees a register mutation inside its live window"
                    : "is used outside the window promised by its receives");
            out << sem::render_log(*rep.witness, *prog);
        }
    }
    return rep.safe ? 0 : 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"anvil - timing-safe HDL compiler"};
    app.set_version_flag("--version", "anvil 0.1.0");
    app.require_subcommand(0, 1);

    CompileConfig cfg;
    std::string cmd;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("inputs", cfg.inputs, "input .anvil files")->required();
        sub->add_option("--top", cfg.top, "top process name");
        sub->add_option("--diag", cfg.diag_format, "diagnostic format (human|json)")
            ->check(CLI::IsMember({"human", "json"}));
    };

    CLI::App* check = app.add_subcommand("check", "type-check the program");
    add_common(check);
    check->add_option("--iters", cfg.iters, "check-term iterations (default 2)");

    CLI::App* build = app.add_subcommand("build", "check and emit SystemVerilog");
    add_common(build);
    build->add_option("-o,--output", cfg.output, "output .sv path (default out.sv)");
    build->add_option("--opt-level", cfg.opt_level, "0 = passes off, 1 = all passes")
        ->check(CLI::Range(0, 1));

    CLI::App* graph = app.add_subcommand("graph", "dump a thread's event graph");
    add_common(graph);
    graph->add_option("--proc", cfg.proc, "process to dump (default: top)");
    graph->add_option("--thread", cfg.thread, "thread index (default 0)");
    graph->add_option("--dump-graph", cfg.graph_stage, "pre or post optimization")
        ->check(CLI::IsMember({"pre", "post"}));
    graph->add_option("--format", cfg.graph_format, "dot or json")
        ->check(CLI::IsMember({"dot", "json"}));
    graph->add_option("-o,--output", cfg.output, "output path (default stdout)");

    CLI::App* verify = app.add_subcommand("verify", "run the execution-log oracle");
    add_common(verify);
    verify->add_option("--slack", cfg.slack, "max send/recv delay (default 3)");
    verify->add_option("--iters", cfg.iters, "max loop unrollings (default 2)");
    verify->add_option("--budget", cfg.budget, "composition budget (default 1e6)");

    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << "anvil 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (check->parsed()) return run_check(cfg, out, err);
        if (build->parsed()) return run_build(cfg, out, err);
        if (graph->parsed()) return run_graph(cfg, out, err);
        if (verify->parsed()) return run_verify(cfg, out, err);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
    err << app.help();
    return 2;
}

} // namespace anvil
